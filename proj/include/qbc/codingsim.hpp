#pragma once

#include <cstdint>
#include <vector>

#include "qbc/budget.hpp"
#include "qbc/oneshot.hpp"
#include "qbc/states.hpp"

namespace qbc {

// Message counts of one tiny instance: M0 common, Ms confidential, M1 private,
// Md dummy; rates are the base-2 logs.
struct CodebookConfig {
  int m0 = 1;
  int ms = 1;
  int m1 = 1;
  int md = 1;
  BroadcastChannelModel model;
  EpsilonBudget budget;
  std::uint64_t seed = 0;
  int dim_cap = 16384;

  CodebookConfig(int m0_, int ms_, int m1_, int md_, BroadcastChannelModel model_,
                 EpsilonBudget budget_, std::uint64_t seed_ = 0, int dim_cap_ = 16384);
};

// Position-based square-root measurement for the common layer: i.i.d. slots
// over the shared classical alphabet, one binary test block per symbol.
struct CommonLayer {
  int copies = 1;
  RVec p_sym;
  std::vector<Mat> signal;  // receiver state tied to symbol u
  std::vector<Mat> tests;   // derandomized test blocks T̄_u
  double ih_bits = 0.0;
  double completeness_residual = 0.0;

  // Exact error probability when the given slot carries the message.
  double error_exact(int message) const;
};

CommonLayer build_srm_layer1(const CodebookConfig& cfg, char receiver);  // 'B' or 'C'

// Second layer: slots conditioned on the common symbol, tests Q̄_{u,v}.
struct PairLayer {
  int slots = 1;
  RVec p_u;
  RMat p_v_given_u;
  std::vector<Mat> signal;               // receiver state tied to v
  std::vector<std::vector<Mat>> tests;   // [u][v]
  double ih_bits = 0.0;
  double completeness_residual = 0.0;

  double error_exact(int slot) const;
};

PairLayer build_srm_layer2(const CodebookConfig& cfg);

struct SimReport {
  double p_error_common_B = 0.0;
  double p_error_common_C = 0.0;
  double p_error_pair = 0.0;
  double hn_bound_common_B = 0.0;
  double hn_bound_common_C = 0.0;
  double hn_bound_pair = 0.0;
  double c_star_common = 0.0;
  double c_star_pair = 0.0;
  double ih_ub = 0.0, ih_uc = 0.0, ih_vb_cond = 0.0;
  double completeness_residual = 0.0;
  std::vector<double> secrecy_tv_per_m0;
  double secrecy_bound = 0.0;
  double itilde_vc_upper = 0.0;
  double itilde_xc_upper = 0.0;
  bool rate_eq8_ok = false;  // R1+Rd against both covering quantities
  bool rate_eq9_ok = false;  // Rd against the third-layer quantity
};

SimReport simulate_common(const CodebookConfig& cfg);
SimReport simulate_pair(const CodebookConfig& cfg);
SimReport simulate_secrecy(const CodebookConfig& cfg);
SimReport simulate_all(const CodebookConfig& cfg);

struct ExpurgationReport {
  double p_error_avg_bound = 0.0;
  double p_secrecy_avg_bound = 0.0;
  double markov_error_prob = 0.0;
  double markov_secrecy_prob = 0.0;
  double good_code_prob = 0.0;
  double final_eps = 0.0;
};

// Pure arithmetic of the code-selection step.
ExpurgationReport expurgation_budget(double eps_prime, double eps_dprime, double eta);

}  // namespace qbc
