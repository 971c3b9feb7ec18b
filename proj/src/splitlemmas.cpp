#include "qbc/splitlemmas.hpp"

#include <cmath>
#include <sstream>

#include "qbc/divergences.hpp"

namespace qbc {

namespace {

Mat a_marginal(const Mat& rho_ab, int dim_a, int dim_b) {
  return partial_trace(rho_ab, {dim_a, dim_b}, {0});
}

Mat b_marginal(const Mat& rho_ab, int dim_a, int dim_b) {
  return partial_trace(rho_ab, {dim_a, dim_b}, {1});
}

double pow_int(double base, int exp) {
  double v = 1.0;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

// tau block for one symbol: (1/n) sum_j rho^{AB_j} ⊗ sigma^{⊗ -j}.
Mat tau_block(const Mat& rho_ab, const Mat& sigma_b, int dim_a, int dim_b, int n) {
  std::vector<int> kron_dims{dim_a, dim_b};
  std::vector<int> target_dims{dim_a};
  for (int j = 0; j < n; ++j) target_dims.push_back(dim_b);

  const int total = dim_a * static_cast<int>(std::pow(dim_b, n));
  Mat block = Mat::Zero(total, total);
  for (int j = 1; j <= n; ++j) {
    std::vector<Mat> factors{rho_ab};
    for (int l = 0; l < n - 1; ++l) factors.push_back(sigma_b);
    Mat term = kron_all(factors);  // order (A, B_j, B_1..without j..B_n)
    // order[target position] = source subsystem index
    std::vector<int> order(n + 1);
    order[0] = 0;
    for (int i = 1; i <= n; ++i) {
      if (i == j)
        order[i] = 1;
      else if (i < j)
        order[i] = 1 + i;
      else
        order[i] = i;
    }
    std::vector<int> source_dims{dim_a};
    for (int l = 0; l < n; ++l) source_dims.push_back(dim_b);
    block += permute_subsystems(term, source_dims, order);
  }
  return block / n;
}

Mat product_block(const Mat& rho_a, const Mat& sigma_b, int n) {
  std::vector<Mat> factors{rho_a};
  for (int j = 0; j < n; ++j) factors.push_back(sigma_b);
  return kron_all(factors);
}

}  // namespace

VerdictReport make_verdict(double lhs, double bound, std::string digest, double tol) {
  VerdictReport v;
  v.lhs = lhs;
  v.bound = bound;
  v.slack = bound - lhs;
  v.passed = v.slack >= -tol;
  v.digest = std::move(digest);
  return v;
}

ConvexSplitInstance make_convex_split_instance(RVec p_x, std::vector<Mat> rho_ab,
                                               std::vector<Mat> sigma_b, int dim_a, int dim_b,
                                               int n, int dim_cap) {
  ConvexSplitInstance inst;
  inst.p_x = std::move(p_x);
  inst.rho_ab = std::move(rho_ab);
  inst.sigma_b = std::move(sigma_b);
  inst.dim_a = dim_a;
  inst.dim_b = dim_b;
  inst.n = n;

  const int nx = static_cast<int>(inst.p_x.size());
  if (static_cast<int>(inst.rho_ab.size()) != nx || static_cast<int>(inst.sigma_b.size()) != nx)
    throw_validation("DimMismatch", "per-symbol table sizes differ");
  if (n < 1) throw_validation("DimMismatch", "copy count must be at least 1");
  double expanded = static_cast<double>(nx) * dim_a * pow_int(dim_b, n);
  if (expanded > dim_cap)
    throw_dim_cap("expanded dimension " + std::to_string(expanded) + " exceeds the cap");

  double k = 0.0;
  for (int x = 0; x < nx; ++x) {
    if (inst.p_x(x) <= 0.0) continue;
    const Mat rho_b = b_marginal(inst.rho_ab[x], dim_a, dim_b);
    const Mat proj = support_projector(hermitian_part(inst.sigma_b[x]));
    const double leak =
        ((Mat::Identity(dim_b, dim_b) - proj) * rho_b).trace().real();
    if (leak > 1e-9)
      throw_validation("SupportViolation", "supp(rho_x^B) not inside supp(sigma_x^B)");
    const Mat ref = kron(a_marginal(inst.rho_ab[x], dim_a, dim_b), inst.sigma_b[x]);
    bool viol = false;
    const double block_k = d_max(inst.rho_ab[x], ref, &viol);
    if (viol || !std::isfinite(block_k))
      throw_validation("SupportViolation", "k is not finite on symbol " + std::to_string(x));
    k = std::max(k, block_k);
  }
  inst.k_bits = k;
  return inst;
}

CQState build_tau(const ConvexSplitInstance& inst) {
  const int nx = static_cast<int>(inst.p_x.size());
  std::vector<double> probs(nx);
  std::vector<Mat> blocks(nx);
  const int block_dim = inst.dim_a * static_cast<int>(pow_int(inst.dim_b, inst.n));
  for (int x = 0; x < nx; ++x) {
    probs[x] = inst.p_x(x);
    blocks[x] = inst.p_x(x) > 0.0
                    ? tau_block(inst.rho_ab[x], inst.sigma_b[x], inst.dim_a, inst.dim_b, inst.n)
                    : Mat::Zero(block_dim, block_dim);
  }
  std::vector<Subsystem> quantum{{"A", inst.dim_a}};
  for (int j = 1; j <= inst.n; ++j) quantum.push_back({"B" + std::to_string(j), inst.dim_b});
  return CQState({{"X", nx}}, quantum, probs, blocks);
}

VerdictReport verify_convex_split(const ConvexSplitInstance& inst) {
  double lhs = 0.0;
  for (int x = 0; x < inst.p_x.size(); ++x) {
    const double p = inst.p_x(x);
    if (p <= 0.0) continue;
    const Mat tau = tau_block(inst.rho_ab[x], inst.sigma_b[x], inst.dim_a, inst.dim_b, inst.n);
    const Mat rho_a = a_marginal(inst.rho_ab[x], inst.dim_a, inst.dim_b);
    // D(tau || rho^A ⊗ sigma^{⊗n}) = -S(tau) - Tr tau log(product); the product
    // term splits into marginals, only S(tau) needs the big eigensystem.
    const Mat log_a = mat_fn_on_support(rho_a, [](double v) { return std::log2(v); });
    const Mat log_b =
        mat_fn_on_support(hermitian_part(inst.sigma_b[x]), [](double v) { return std::log2(v); });
    const Mat rho_b = b_marginal(inst.rho_ab[x], inst.dim_a, inst.dim_b);
    const Mat mix = (1.0 / inst.n) * rho_b + (1.0 - 1.0 / inst.n) * inst.sigma_b[x];
    const double cross = (rho_a * log_a).trace().real() + inst.n * (mix * log_b).trace().real();
    lhs += p * (-von_neumann_entropy(tau) - cross);
  }
  const double bound = std::log2(1.0 + std::pow(2.0, inst.k_bits) / inst.n);
  std::ostringstream digest;
  digest << "n=" << inst.n << ";k=" << inst.k_bits;
  return make_verdict(lhs, bound, digest.str());
}

namespace {

double tau_product_distance(const ConvexSplitInstance& inst) {
  double f = 0.0;
  for (int x = 0; x < inst.p_x.size(); ++x) {
    const double p = inst.p_x(x);
    if (p <= 0.0) continue;
    const Mat tau = tau_block(inst.rho_ab[x], inst.sigma_b[x], inst.dim_a, inst.dim_b, inst.n);
    const Mat prod = product_block(a_marginal(inst.rho_ab[x], inst.dim_a, inst.dim_b),
                                   inst.sigma_b[x], inst.n);
    f += p * fidelity(tau, prod);
  }
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

}  // namespace

VerdictReport verify_convex_split_distance(const ConvexSplitInstance& inst, double delta) {
  if (delta <= 0.0 || delta >= 1.0) throw_validation("InvalidEpsilon", "delta must lie in (0,1)");
  const int n = static_cast<int>(std::ceil(std::pow(2.0, inst.k_bits) / (delta * delta)));
  ConvexSplitInstance sized = make_convex_split_instance(
      inst.p_x, inst.rho_ab, inst.sigma_b, inst.dim_a, inst.dim_b, n);
  const double dist = tau_product_distance(sized);
  std::ostringstream digest;
  digest << "n=" << n << ";k=" << inst.k_bits << ";delta=" << delta;
  return make_verdict(dist, delta, digest.str());
}

VerdictReport verify_convex_split_smooth(const ConvexSplitInstance& inst, double eps,
                                         double delta) {
  if (delta <= 0.0 || delta >= 1.0) throw_validation("InvalidEpsilon", "delta must lie in (0,1)");
  std::vector<double> p(inst.p_x.data(), inst.p_x.data() + inst.p_x.size());
  // Heuristic (upper) value of the smoothed k: a larger k only enlarges n,
  // which keeps the check conservative.
  TildeOptions opts;
  opts.smooth.bisect_width = 5e-3;
  opts.smooth.solver_tol = 1e-8;
  opts.max_rounds = 8;
  opts.round_tol = 1e-3;
  BracketEstimate k_est =
      i_max_tilde_cond_ref(p, inst.rho_ab, inst.sigma_b, inst.dim_a, inst.dim_b, eps, opts);
  const double k_smooth = std::max(0.0, k_est.heuristic);
  const int n = static_cast<int>(std::ceil(std::pow(2.0, k_smooth) / (delta * delta)));
  ConvexSplitInstance sized = make_convex_split_instance(
      inst.p_x, inst.rho_ab, inst.sigma_b, inst.dim_a, inst.dim_b, n);
  const double dist = tau_product_distance(sized);
  std::ostringstream digest;
  digest << "n=" << n << ";k_smooth=" << k_smooth << ";eps=" << eps << ";delta=" << delta;
  return make_verdict(dist, 2.0 * eps + delta, digest.str());
}

VerdictReport verify_decomposition_identity(const std::vector<Mat>& components, const RVec& pmf,
                                            const Mat& theta) {
  if (static_cast<int>(components.size()) != pmf.size())
    throw_validation("DimMismatch", "component count does not match pmf");
  Mat avg = Mat::Zero(theta.rows(), theta.cols());
  for (int i = 0; i < pmf.size(); ++i) avg += pmf(i) * components[i];

  bool viol = false;
  const double lhs = relative_entropy(avg, theta, &viol);
  double rhs = 0.0;
  for (int i = 0; i < pmf.size(); ++i) {
    if (pmf(i) <= 0.0) continue;
    bool v1 = false, v2 = false;
    rhs += pmf(i) * (relative_entropy(components[i], theta, &v1) -
                     relative_entropy(components[i], avg, &v2));
    viol = viol || v1 || v2;
  }
  if (viol) throw_validation("SupportViolation", "components leave the common support");
  std::ostringstream digest;
  digest << "m=" << pmf.size() << ";d=" << theta.rows();
  return make_verdict(std::abs(lhs - rhs), 1e-8, digest.str());
}

VerdictReport verify_hayashi_nagaoka(const Mat& s_op, const Mat& t_op, double c) {
  if (c <= 0.0) throw_validation("BadOperands", "constant must be positive");
  if (s_op.rows() != t_op.rows()) throw_validation("BadOperands", "operand dimensions differ");
  const int d = static_cast<int>(s_op.rows());
  const Mat s = hermitian_part(s_op), t = hermitian_part(t_op);
  if (min_eigenvalue(s) < -1e-9 || min_eigenvalue(t) < -1e-9)
    throw_validation("BadOperands", "S and T must be PSD");
  if (min_eigenvalue(Mat::Identity(d, d) - s) < -1e-9)
    throw_validation("BadOperands", "1 - S must be PSD");

  const Mat inv_root =
      mat_fn_on_support(s + t, [](double x) { return 1.0 / std::sqrt(x); });
  const Mat bracket = Mat::Identity(d, d) - inv_root * s * inv_root;
  const Mat rhs = (1.0 + c) * (Mat::Identity(d, d) - s) + (2.0 + c + 1.0 / c) * t;
  const double lambda_min = min_eigenvalue(hermitian_part(rhs - bracket));
  std::ostringstream digest;
  digest << "d=" << d << ";c=" << c;
  return make_verdict(-lambda_min, 0.0, digest.str(), 1e-8);
}

ConvexSplitInstance random_convex_split_instance(Rng& rng, int dim_x, int dim_a, int dim_b,
                                                 int n) {
  RVec p = random_pmf(rng, dim_x, 0.1);
  std::vector<Mat> rho_ab, sigma_b;
  for (int x = 0; x < dim_x; ++x) {
    rho_ab.push_back(random_density(rng, dim_a * dim_b));
    sigma_b.push_back(random_full_rank_density(rng, dim_b, 0.1));
  }
  return make_convex_split_instance(p, rho_ab, sigma_b, dim_a, dim_b, n);
}

ConvexSplitInstance engineered_low_k_instance(Rng& rng, int dim_x, int dim_a, int dim_b,
                                              double k_max, int n) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    RVec p = random_pmf(rng, dim_x, 0.1);
    std::vector<Mat> rho_ab, sigma_b;
    std::uniform_real_distribution<double> mix(0.05, 0.3);
    for (int x = 0; x < dim_x; ++x) {
      Mat sigma = random_full_rank_density(rng, dim_b, 0.25);
      Mat rho_a = random_density(rng, dim_a);
      Mat noise = random_density(rng, dim_a * dim_b);
      const double w = mix(rng);
      rho_ab.push_back((1.0 - w) * kron(rho_a, sigma) + w * noise);
      sigma_b.push_back(sigma);
    }
    ConvexSplitInstance inst = make_convex_split_instance(p, rho_ab, sigma_b, dim_a, dim_b, n);
    if (inst.k_bits <= k_max) return inst;
  }
  throw_solver("SolverNoConverge", "could not engineer a low-k instance");
}

}  // namespace qbc
