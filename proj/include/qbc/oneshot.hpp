#pragma once

#include <string>
#include <vector>

#include "qbc/conic.hpp"
#include "qbc/states.hpp"

namespace qbc {

// Optimal binary test {Λ, 1-Λ}: threshold test on rho - t*sigma with a
// fractional coefficient on the boundary eigenvector so Tr(Λ rho) = 1-eps
// holds exactly.
struct HypothesisTest {
  Mat lambda;
  double threshold = 0.0;
  double boundary_mix = 0.0;
  double type1 = 0.0;  // 1 - Tr(Λ rho)
  double type2 = 0.0;  // Tr(Λ sigma)
};

struct DHypoResult {
  double bits = 0.0;
  HypothesisTest test;
  bool conic_fallback = false;
  double certificate_residual = 0.0;
};

DHypoResult d_hypo(const Mat& rho, const Mat& sigma, double eps);

// Block-diagonal variant: both hypotheses share the classical weights w.
// Returns the per-block test operators (the derandomized form of the test).
struct BlockHypoResult {
  double bits = 0.0;
  std::vector<Mat> block_tests;
  double threshold = 0.0;
  double type1 = 0.0;
  double type2 = 0.0;
};
BlockHypoResult d_hypo_blocks(const std::vector<double>& w, const std::vector<Mat>& rho_blocks,
                              const std::vector<Mat>& sigma_blocks, double eps);

double i_hypo(const DensityOperator& s, const std::vector<std::string>& a,
              const std::vector<std::string>& b, double eps);
double i_hypo(const CQState& s, const std::vector<std::string>& a,
              const std::vector<std::string>& b, double eps);
double i_hypo_cond(const CQState& s, const std::vector<std::string>& a,
                   const std::vector<std::string>& b, const std::string& given, double eps);

// log2 of the largest eigenvalue of sigma^{-1/2} rho sigma^{-1/2} on supp(sigma);
// +inf with the flag set when rho leaks outside supp(sigma).
double d_max(const Mat& rho, const Mat& sigma, bool* support_violation = nullptr);

struct SmoothingCertificate {
  double lambda_bits = 0.0;
  Mat smoothed;  // witness rho' (block-diagonal expansion for block programs)
  double distance = 0.0;
  double feasibility_residual = 0.0;
  bool support_violation = false;
};

struct SmoothOptions {
  double bisect_width = 1e-4;  // bits
  double solver_tol = 1e-9;
  int max_iters = 200000;
};

SmoothingCertificate d_max_smooth(const Mat& rho, const Mat& sigma, double eps,
                                  const SmoothOptions& opts = {});

// Block-diagonal smoothing: rho = ⊕ p_i rho_i against sigma = ⊕ sigma_i (the
// sigma_i carry their weights), optimizing over states of the same block
// structure. Realizes the conditional quantities after a pinching argument.
struct SmoothBlockPair {
  double p;
  Mat rho;    // unit trace
  Mat sigma;  // weighted, sum of traces = 1
};
SmoothingCertificate d_max_smooth_blocks(const std::vector<SmoothBlockPair>& pairs, double eps,
                                         const SmoothOptions& opts = {},
                                         std::vector<Mat>* witness_blocks = nullptr);

double d_max_mi(const DensityOperator& s, const std::vector<std::string>& a,
                const std::vector<std::string>& b, double eps, const SmoothOptions& opts = {});
double d_max_mi(const CQState& s, const std::vector<std::string>& a,
                const std::vector<std::string>& b, double eps, const SmoothOptions& opts = {});
double d_max_cmi(const CQState& s, const std::vector<std::string>& a,
                 const std::vector<std::string>& b, const std::string& given, double eps,
                 const SmoothOptions& opts = {});

// Certified bracket plus alternating-optimization heuristic for the
// nonconvex smoothed quantities where the smoothed marginal replaces the
// fixed one.
struct BracketEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double heuristic = 0.0;
  std::string method;
};

struct TildeOptions {
  SmoothOptions smooth;
  int max_rounds = 50;
  double round_tol = 1e-5;
};

BracketEstimate i_max_tilde(const DensityOperator& s, const std::vector<std::string>& a,
                            const std::vector<std::string>& b, double eps,
                            const TildeOptions& opts = {});
BracketEstimate i_max_tilde(const CQState& s, const std::vector<std::string>& a,
                            const std::vector<std::string>& b, double eps,
                            const TildeOptions& opts = {});
BracketEstimate i_max_tilde_cond(const CQState& s, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b, const std::string& given,
                                 double eps, const TildeOptions& opts = {});

// Conditional variant against externally supplied per-symbol B references
// (the smoothing quantity of the convex-split machinery).
BracketEstimate i_max_tilde_cond_ref(const std::vector<double>& p, const std::vector<Mat>& rho_ab,
                                     const std::vector<Mat>& ref_b, int dim_a, int dim_b,
                                     double eps, const TildeOptions& opts = {});

struct SecondOrderRow {
  int n = 0;
  double dh_per_n = 0.0;
  double dmax_per_n = 0.0;
};
struct SecondOrderTable {
  double rel_entropy = 0.0;
  double variance = 0.0;
  double eps = 0.0;
  std::vector<SecondOrderRow> rows;
};
// Diagonal fast path: n-fold product behaviour of the one-shot quantities for
// commuting pairs, via classical optimization on the product pmf.
SecondOrderTable second_order_diag(const Mat& rho, const Mat& sigma, double eps, int n_max);

// Classical oracles (shared with tests and CLI verifiers).
double classical_dh(const RVec& p, const RVec& q, double eps);
double classical_dmax(const RVec& p, const RVec& q);
double classical_dmax_smooth(const RVec& p, const RVec& q, double eps, double width = 1e-6);
double probit(double x);  // inverse standard normal CDF

// Conic formulation of the optimal-test program; the independent oracle for
// d_hypo and its fallback path.
double np_conic_value(const Mat& rho, const Mat& sigma, double eps, double tol = 1e-8);

}  // namespace qbc
