#pragma once

#include <string>
#include <vector>

#include "qbc/oneshot.hpp"
#include "qbc/sampling.hpp"
#include "qbc/states.hpp"

namespace qbc {

// Per-symbol data for the conditional convex-split construction: joint blocks
// rho_x^{AB}, reference blocks sigma_x^B with supp(rho_x^B) ⊆ supp(sigma_x^B),
// copy count n, and k = D_max against the per-symbol product reference.
struct ConvexSplitInstance {
  RVec p_x;
  std::vector<Mat> rho_ab;
  std::vector<Mat> sigma_b;
  int dim_a = 0;
  int dim_b = 0;
  int n = 0;
  double k_bits = 0.0;
};

ConvexSplitInstance make_convex_split_instance(RVec p_x, std::vector<Mat> rho_ab,
                                               std::vector<Mat> sigma_b, int dim_a, int dim_b,
                                               int n, int dim_cap = 16384);

struct VerdictReport {
  double lhs = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool passed = false;
  std::string digest;
};

VerdictReport make_verdict(double lhs, double bound, std::string digest, double tol = 1e-7);

// Mixture over the position of the correlated copy among reference copies,
// classical on X, quantum on (A, B_1..B_n).
CQState build_tau(const ConvexSplitInstance& inst);

// Relative-entropy form: D(tau || per-symbol product) <= log2(1 + 2^k/n).
VerdictReport verify_convex_split(const ConvexSplitInstance& inst);

// Purified-distance clause at n = ceil(2^k/delta^2): P(tau, product) <= delta.
VerdictReport verify_convex_split_distance(const ConvexSplitInstance& inst, double delta);

// Smoothed variant: k from the smoothed per-symbol quantity (heuristic upper
// value, conservative), n = ceil(2^k/delta^2), P(tau, product) <= 2 eps + delta.
VerdictReport verify_convex_split_smooth(const ConvexSplitInstance& inst, double eps,
                                         double delta);

// D(rho_avg || theta) = sum_i p_i (D(rho_i || theta) - D(rho_i || rho_avg)).
VerdictReport verify_decomposition_identity(const std::vector<Mat>& components, const RVec& pmf,
                                            const Mat& theta);

// min-eig of (1+c)(1-S) + (2+c+1/c) T - [1 - (S+T)^{-1/2} S (S+T)^{-1/2}] >= -1e-8,
// pseudo-inverse on supp(S+T), bracket acting as identity off-support.
VerdictReport verify_hayashi_nagaoka(const Mat& s_op, const Mat& t_op, double c);

// Instance generators shared by tests, the CLI verifiers and the acceptance
// suite; deterministic in the rng state.
ConvexSplitInstance random_convex_split_instance(Rng& rng, int dim_x, int dim_a, int dim_b, int n);
// Mixture weight <= 0.3 toward the product reference keeps k small enough that
// n = ceil(2^k/delta^2) stays under the dimension cap.
ConvexSplitInstance engineered_low_k_instance(Rng& rng, int dim_x, int dim_a, int dim_b,
                                              double k_max = 1.0, int n = 1);

}  // namespace qbc
