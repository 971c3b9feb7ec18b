#include "qbc/oneshot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qbc/divergences.hpp"

namespace qbc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log2_safe(double x) { return x > 0 ? std::log2(x) : -kInf; }

// One eigenvector of the pooled operator ⊕ w_x (rho_x - t sigma_x) together
// with its weights under both hypotheses.
struct NpEntry {
  double mu;       // eigenvalue including the block weight
  double rho_w;    // w <v|rho|v>
  double sigma_w;  // w <v|sigma|v>
  int block;
  int col;
};

struct NpEigenData {
  std::vector<NpEntry> entries;
  std::vector<Mat> bases;  // per-block eigenvector columns
};

NpEigenData np_eigen(const std::vector<double>& w, const std::vector<Mat>& rho,
                     const std::vector<Mat>& sigma, double t) {
  NpEigenData data;
  data.bases.resize(rho.size());
  for (size_t x = 0; x < rho.size(); ++x) {
    if (w[x] <= 0.0) continue;
    Spectrum s = eig_hermitian(rho[x] - t * sigma[x]);
    data.bases[x] = s.eigenvectors;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      const Vec v = s.eigenvectors.col(i);
      NpEntry e;
      e.mu = w[x] * s.eigenvalues(i);
      e.rho_w = w[x] * std::max(0.0, (v.adjoint() * rho[x] * v)(0, 0).real());
      e.sigma_w = w[x] * std::max(0.0, (v.adjoint() * sigma[x] * v)(0, 0).real());
      e.block = static_cast<int>(x);
      e.col = static_cast<int>(i);
      data.entries.push_back(e);
    }
  }
  return data;
}

// Type-I error of the strict threshold test at t.
double np_alpha(const std::vector<double>& w, const std::vector<Mat>& rho,
                const std::vector<Mat>& sigma, double t) {
  NpEigenData data = np_eigen(w, rho, sigma, t);
  double captured = 0.0;
  for (const auto& e : data.entries)
    if (e.mu > 0.0) captured += e.rho_w;
  return 1.0 - captured;
}

struct NpGreedy {
  std::vector<std::pair<int, int>> full;  // (block, col) fully included
  int frac_block = -1, frac_col = -1;
  double frac = 0.0;
  double beta = 0.0;
  double captured = 0.0;
  double included_mu = 0.0;
};

// Fills Tr(Λ rho) to exactly 1-eps along the likelihood-ratio order of the
// eigenbasis at threshold t.
NpGreedy np_greedy(const NpEigenData& data, double eps) {
  std::vector<size_t> order(data.entries.size());
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](const NpEntry& e) {
    if (e.sigma_w <= 1e-300) return e.rho_w > 1e-300 ? kInf : 0.0;
    return e.rho_w / e.sigma_w;
  };
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return ratio(data.entries[i]) > ratio(data.entries[j]);
  });

  NpGreedy g;
  const double target = 1.0 - eps;
  for (size_t idx : order) {
    const NpEntry& e = data.entries[idx];
    if (g.captured >= target - 1e-15) break;
    if (g.captured + e.rho_w <= target + 1e-15) {
      g.full.push_back({e.block, e.col});
      g.captured += e.rho_w;
      g.beta += e.sigma_w;
      g.included_mu += e.mu;
    } else {
      g.frac = (target - g.captured) / e.rho_w;
      g.frac_block = e.block;
      g.frac_col = e.col;
      g.captured = target;
      g.beta += g.frac * e.sigma_w;
      g.included_mu += g.frac * e.mu;
      break;
    }
  }
  return g;
}

std::vector<Mat> np_materialize(const NpEigenData& data, const NpGreedy& g,
                                const std::vector<Mat>& rho) {
  std::vector<Mat> tests(rho.size());
  for (size_t x = 0; x < rho.size(); ++x) tests[x] = Mat::Zero(rho[x].rows(), rho[x].cols());
  for (const auto& [blk, col] : g.full) {
    const Vec v = data.bases[blk].col(col);
    tests[blk] += v * v.adjoint();
  }
  if (g.frac_block >= 0) {
    const Vec v = data.bases[g.frac_block].col(g.frac_col);
    tests[g.frac_block] += g.frac * v * v.adjoint();
  }
  return tests;
}

}  // namespace

BlockHypoResult d_hypo_blocks(const std::vector<double>& w, const std::vector<Mat>& rho_blocks,
                              const std::vector<Mat>& sigma_blocks, double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw_validation("InvalidEpsilon", "eps must lie in (0,1)");
  if (w.size() != rho_blocks.size() || w.size() != sigma_blocks.size())
    throw_validation("DimMismatch", "block table sizes differ");
  for (size_t x = 0; x < w.size(); ++x)
    if (rho_blocks[x].rows() != sigma_blocks[x].rows())
      throw_validation("DimMismatch", "block dimensions differ");

  // alpha(t) is nondecreasing; locate the threshold by bisection.
  double t_lo = 0.0, t_hi = 1.0;
  while (np_alpha(w, rho_blocks, sigma_blocks, t_hi) < eps && t_hi < 1e18) t_hi *= 2.0;
  if (np_alpha(w, rho_blocks, sigma_blocks, t_hi) >= eps) {
    for (int it = 0; it < 120; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (np_alpha(w, rho_blocks, sigma_blocks, mid) <= eps)
        t_lo = mid;
      else
        t_hi = mid;
      if (t_hi - t_lo <= 1e-14 * std::max(1.0, t_hi)) break;
    }
  } else {
    // The strict test never reaches type-I error eps: all of rho is capturable
    // at negligible sigma cost (support leak); the greedy fill handles it.
    t_lo = t_hi;
  }

  const double t_star = 0.5 * (t_lo + t_hi);
  NpEigenData data = np_eigen(w, rho_blocks, sigma_blocks, t_star);
  NpGreedy g = np_greedy(data, eps);

  BlockHypoResult out;
  out.block_tests = np_materialize(data, g, rho_blocks);
  out.threshold = t_star;
  out.type1 = eps;
  out.type2 = g.beta;
  out.bits = -log2_safe(g.beta);
  return out;
}

DHypoResult d_hypo(const Mat& rho, const Mat& sigma, double eps) {
  BlockHypoResult block = d_hypo_blocks({1.0}, {hermitian_part(rho)}, {hermitian_part(sigma)}, eps);

  DHypoResult out;
  out.test.lambda = block.block_tests[0];
  out.test.threshold = block.threshold;
  out.test.type1 = 1.0 - (out.test.lambda * hermitian_part(rho)).trace().real();
  out.test.type2 = block.type2;
  out.bits = block.bits;

  // Lagrangian optimality: Λ must capture the positive part of rho - t*sigma.
  const Mat diff = hermitian_part(rho) - block.threshold * hermitian_part(sigma);
  Spectrum s = eig_hermitian(diff);
  double pos_sum = 0.0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    pos_sum += std::max(0.0, s.eigenvalues(i));
  const double included = (out.test.lambda * diff).trace().real();
  out.certificate_residual = pos_sum - included;

  if (out.certificate_residual > 1e-8) {
    // NumericalDegeneracy: the spectral root isolation failed; fall back to
    // the conic solver and flag it.
    out.conic_fallback = true;
    out.bits = np_conic_value(rho, sigma, eps, 1e-9);
    out.test.type2 = std::pow(2.0, -out.bits);
  }
  return out;
}

namespace {

// (A,B)-ordered joint together with its marginals.
struct BipartiteView {
  Mat joint, a, b;
  int da = 0, db = 0;
};

BipartiteView bipartite_view(const DensityOperator& s, const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::vector<std::string> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  DensityOperator joint = s.marginal(ab);
  BipartiteView v;
  v.joint = joint.matrix();
  v.a = joint.marginal(a).matrix();
  v.b = joint.marginal(b).matrix();
  v.da = static_cast<int>(v.a.rows());
  v.db = static_cast<int>(v.b.rows());
  return v;
}

BipartiteView bipartite_view(const CQState& s, const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::vector<std::string> keep_c, keep_q, ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const auto& l : ab) (s.has_classical(l) ? keep_c : keep_q).push_back(l);
  DensityOperator full = s.marginal(keep_c, keep_q).expand_density().reordered(ab);
  return bipartite_view(full, a, b);
}

// Per-symbol slices of a cq state for the conditional quantities.
struct CondSlices {
  std::vector<double> p;
  std::vector<Mat> joint;  // (A,B)-ordered per symbol
  std::vector<Mat> a, b;
  int da = 0, db = 0;
};

CondSlices cond_slices(const CQState& s, const std::vector<std::string>& a,
                       const std::vector<std::string>& b, const std::string& given) {
  if (!s.has_classical(given))
    throw_validation("BadPartition", "conditioning register " + given + " must be classical");
  std::vector<std::string> keep_c{given}, keep_q, ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const auto& l : ab) (s.has_classical(l) ? keep_c : keep_q).push_back(l);
  CQState reduced = s.marginal(keep_c, keep_q);
  CQState gm = reduced.marginal({given}, {});

  CondSlices out;
  for (int sym = 0; sym < gm.classical_size(); ++sym) {
    out.p.push_back(gm.prob(sym));
    if (gm.prob(sym) <= 0.0) {
      out.joint.push_back(Mat());
      out.a.push_back(Mat());
      out.b.push_back(Mat());
      continue;
    }
    CQState slice = reduced.condition_on(given, sym);
    BipartiteView v = bipartite_view(slice, a, b);
    out.joint.push_back(v.joint);
    out.a.push_back(v.a);
    out.b.push_back(v.b);
    out.da = v.da;
    out.db = v.db;
  }
  // Zero-probability symbols get zero blocks of the right shape.
  for (size_t x = 0; x < out.p.size(); ++x)
    if (out.p[x] <= 0.0) {
      out.joint[x] = Mat::Zero(out.da * out.db, out.da * out.db);
      out.a[x] = Mat::Zero(out.da, out.da);
      out.b[x] = Mat::Zero(out.db, out.db);
    }
  return out;
}

}  // namespace

double i_hypo(const DensityOperator& s, const std::vector<std::string>& a,
              const std::vector<std::string>& b, double eps) {
  BipartiteView v = bipartite_view(s, a, b);
  return d_hypo(v.joint, kron(v.a, v.b), eps).bits;
}

double i_hypo(const CQState& s, const std::vector<std::string>& a,
              const std::vector<std::string>& b, double eps) {
  BipartiteView v = bipartite_view(s, a, b);
  return d_hypo(v.joint, kron(v.a, v.b), eps).bits;
}

double i_hypo_cond(const CQState& s, const std::vector<std::string>& a,
                   const std::vector<std::string>& b, const std::string& given, double eps) {
  CondSlices slices = cond_slices(s, a, b, given);
  std::vector<Mat> sigma(slices.p.size());
  for (size_t x = 0; x < slices.p.size(); ++x) sigma[x] = kron(slices.a[x], slices.b[x]);
  return d_hypo_blocks(slices.p, slices.joint, sigma, eps).bits;
}

double d_max(const Mat& rho, const Mat& sigma, bool* support_violation) {
  if (rho.rows() != sigma.rows()) throw_validation("DimMismatch", "state dimensions differ");
  if (support_violation) *support_violation = false;
  const Mat sh = hermitian_part(sigma);
  const Mat proj = support_projector(sh);
  const int d = static_cast<int>(rho.rows());
  const double leak = ((Mat::Identity(d, d) - proj) * hermitian_part(rho)).trace().real();
  if (leak > 1e-9) {
    if (support_violation) *support_violation = true;
    return kInf;
  }
  Mat inv_root = mat_fn_on_support(sh, [](double x) { return 1.0 / std::sqrt(x); });
  Spectrum s = eig_hermitian(hermitian_part(inv_root * hermitian_part(rho) * inv_root));
  return log2_safe(std::max(s.eigenvalues(0), 0.0));
}

namespace {

// Max-fidelity program at a fixed level: maximize F(⊕ p_x rho_x, ⊕ omega_x)
// subject to omega_x >= 0, sum_x Tr(omega_x) = 1, omega_x <= 2^lambda sigma_x.
// Built on the supports of the weighted rho and sigma blocks so every pinned
// block is full rank; the overlap isometries transport the objective.
struct SmoothSolve {
  double fmax = 0.0;
  std::vector<Mat> witness;
  ConicSolution sol;
};

SmoothSolve solve_smooth_level(const std::vector<SmoothBlockPair>& pairs, double lambda,
                               const SmoothOptions& opts, WarmStart* warm) {
  ConicProgram prog;
  const double scale = std::pow(2.0, lambda);

  struct PairLayout {
    int big = -1;     // conic block index, dim r+s (or s when r == 0)
    int r = 0, s = 0;
    Mat sigma_basis;  // d x s isometry
  };
  std::vector<PairLayout> layout(pairs.size());
  std::vector<std::pair<int, Mat>> trace_terms;

  for (size_t x = 0; x < pairs.size(); ++x) {
    SupportBasis bs = support_basis(hermitian_part(pairs[x].sigma));
    if (bs.rank == 0) continue;  // no admissible mass on this symbol
    SupportBasis br = support_basis(pairs[x].p * hermitian_part(pairs[x].rho));
    PairLayout& pl = layout[x];
    pl.r = br.rank;
    pl.s = bs.rank;
    pl.sigma_basis = bs.isometry;
    const int dim = pl.r + pl.s;
    pl.big = prog.add_block(dim, Cone::Psd);
    const int slack = prog.add_block(pl.s, Cone::Psd);
    if (pl.r > 0) {
      prog.add_subblock_equality({{pl.big, 0, 0, 1.0}}, br.restricted);
      Mat overlap = br.isometry.adjoint() * bs.isometry;  // r x s
      Mat c = Mat::Zero(dim, dim);
      c.block(0, pl.r, pl.r, pl.s) = -0.5 * overlap;
      c.block(pl.r, 0, pl.s, pl.r) = -0.5 * overlap.adjoint();
      prog.set_objective(pl.big, c);
    }
    prog.add_subblock_equality({{slack, 0, 0, 1.0}, {pl.big, pl.r, pl.r, 1.0}},
                               scale * bs.restricted);
    Mat tr = Mat::Zero(dim, dim);
    for (int i = 0; i < pl.s; ++i) tr(pl.r + i, pl.r + i) = 1.0;
    trace_terms.push_back({pl.big, tr});
  }
  prog.add_row(trace_terms, 1.0);

  SmoothSolve out;
  out.sol = solve(prog, opts.solver_tol, opts.max_iters, warm);
  if (out.sol.status == SolveStatus::MaxIters)
    throw_solver("SolverNoConverge",
                 "smoothing program stalled, primal residual " +
                     std::to_string(out.sol.primal_residual));
  out.fmax = -out.sol.objective;
  for (size_t x = 0; x < pairs.size(); ++x) {
    const int d = static_cast<int>(pairs[x].rho.rows());
    const PairLayout& pl = layout[x];
    if (pl.big < 0) {
      out.witness.push_back(Mat::Zero(d, d));
      continue;
    }
    Mat omega = out.sol.blocks[pl.big].block(pl.r, pl.r, pl.s, pl.s);
    out.witness.push_back(hermitian_part(pl.sigma_basis * omega * pl.sigma_basis.adjoint()));
  }
  return out;
}

double block_fidelity(const std::vector<SmoothBlockPair>& pairs, const std::vector<Mat>& omega) {
  double f = 0.0;
  for (size_t x = 0; x < pairs.size(); ++x)
    f += fidelity(pairs[x].p * pairs[x].rho, omega[x]);
  return f;
}

}  // namespace

SmoothingCertificate d_max_smooth_blocks(const std::vector<SmoothBlockPair>& pairs, double eps,
                                         const SmoothOptions& opts,
                                         std::vector<Mat>* witness_blocks) {
  if (eps <= 0.0 || eps >= 1.0) throw_validation("InvalidEpsilon", "eps must lie in (0,1)");
  const double thr = std::sqrt(std::max(0.0, 1.0 - eps * eps));

  // Upper end of the bisection window: the unsmoothed value, or a projected
  // candidate when the support condition fails outright.
  double hi = -kInf;
  bool leak = false;
  for (const auto& pr : pairs) {
    if (pr.p <= 0.0 && max_abs(pr.sigma) == 0.0) continue;
    bool viol = false;
    const double dm = d_max(pr.p * pr.rho, pr.sigma, &viol);
    if (viol) leak = true;
    hi = std::max(hi, dm);
  }
  SmoothingCertificate cert;
  if (leak) {
    std::vector<SmoothBlockPair> projected = pairs;
    double mass = 0.0;
    for (auto& pr : projected) {
      const Mat proj = support_projector(hermitian_part(pr.sigma));
      pr.rho = hermitian_part(proj * pr.rho * proj);
      mass += pr.p * trace_real(pr.rho);
    }
    if (mass <= 0.0) {
      cert.support_violation = true;
      cert.lambda_bits = kInf;
      return cert;
    }
    std::vector<Mat> candidate;
    hi = -kInf;
    for (auto& pr : projected) {
      pr.rho /= mass;  // keeps the weighted blocks summing to trace one
      candidate.push_back(pr.p * pr.rho);
      if (pr.p > 0.0) hi = std::max(hi, d_max(pr.p * pr.rho, pr.sigma));
    }
    if (block_fidelity(pairs, candidate) < thr - 1e-9) {
      cert.support_violation = true;
      cert.lambda_bits = kInf;
      return cert;
    }
  }
  hi = std::max(hi, 0.0);

  // Level 0 forces omega = sigma through the trace constraint, so that
  // feasibility check is spectral.
  double f0 = 0.0;
  for (const auto& pr : pairs) f0 += fidelity(pr.p * pr.rho, pr.sigma);
  if (f0 >= thr - 1e-9) {
    cert.lambda_bits = 0.0;
    std::vector<Mat> sigma_witness;
    for (const auto& pr : pairs) sigma_witness.push_back(hermitian_part(pr.sigma));
    const int qd = static_cast<int>(pairs[0].rho.rows());
    Mat expanded = Mat::Zero(qd * pairs.size(), qd * pairs.size());
    for (size_t x = 0; x < pairs.size(); ++x)
      expanded.block(x * qd, x * qd, qd, qd) = sigma_witness[x];
    cert.smoothed = pairs.size() == 1 ? sigma_witness[0] : expanded;
    if (witness_blocks) *witness_blocks = sigma_witness;
    cert.distance = std::sqrt(std::max(0.0, 1.0 - f0 * f0));
    cert.feasibility_residual = std::max(0.0, thr - f0);
    return cert;
  }

  WarmStart warm;
  SmoothSolve best;
  double lo = 0.0;
  {
    best = solve_smooth_level(pairs, hi, opts, &warm);
    while (hi - lo > opts.bisect_width) {
      const double mid = 0.5 * (lo + hi);
      SmoothSolve trial = solve_smooth_level(pairs, mid, opts, &warm);
      if (trial.fmax >= thr - 1e-8) {
        hi = mid;
        best = trial;
      } else {
        lo = mid;
      }
    }
  }

  cert.lambda_bits = hi;
  const int qd = static_cast<int>(pairs[0].rho.rows());
  Mat expanded = Mat::Zero(qd * pairs.size(), qd * pairs.size());
  for (size_t x = 0; x < pairs.size(); ++x)
    expanded.block(x * qd, x * qd, qd, qd) = best.witness[x];
  cert.smoothed = pairs.size() == 1 ? best.witness[0] : expanded;
  if (witness_blocks) *witness_blocks = best.witness;

  const double f = block_fidelity(pairs, best.witness);
  cert.distance = std::sqrt(std::max(0.0, 1.0 - f * f));
  double resid = std::max(0.0, thr - f);
  double tr_sum = 0.0;
  const double scale = std::pow(2.0, hi);
  for (size_t x = 0; x < pairs.size(); ++x) {
    tr_sum += trace_real(best.witness[x]);
    resid = std::max(resid, -min_eigenvalue(best.witness[x]));
    resid = std::max(resid, -min_eigenvalue(scale * hermitian_part(pairs[x].sigma) -
                                            best.witness[x]));
  }
  resid = std::max(resid, std::abs(tr_sum - 1.0));
  cert.feasibility_residual = resid;
  return cert;
}

SmoothingCertificate d_max_smooth(const Mat& rho, const Mat& sigma, double eps,
                                  const SmoothOptions& opts) {
  return d_max_smooth_blocks({{1.0, hermitian_part(rho), hermitian_part(sigma)}}, eps, opts);
}

double d_max_mi(const DensityOperator& s, const std::vector<std::string>& a,
                const std::vector<std::string>& b, double eps, const SmoothOptions& opts) {
  BipartiteView v = bipartite_view(s, a, b);
  return d_max_smooth(v.joint, kron(v.a, v.b), eps, opts).lambda_bits;
}

double d_max_mi(const CQState& s, const std::vector<std::string>& a,
                const std::vector<std::string>& b, double eps, const SmoothOptions& opts) {
  BipartiteView v = bipartite_view(s, a, b);
  return d_max_smooth(v.joint, kron(v.a, v.b), eps, opts).lambda_bits;
}

double d_max_cmi(const CQState& s, const std::vector<std::string>& a,
                 const std::vector<std::string>& b, const std::string& given, double eps,
                 const SmoothOptions& opts) {
  // Both states are classical on the conditioning register, so the optimal
  // smoothing state can be taken block-diagonal (pinching) and the program
  // decomposes per symbol.
  CondSlices slices = cond_slices(s, a, b, given);
  std::vector<SmoothBlockPair> pairs;
  for (size_t x = 0; x < slices.p.size(); ++x)
    pairs.push_back({slices.p[x], slices.joint[x],
                     slices.p[x] * kron(slices.a[x], slices.b[x])});
  return d_max_smooth_blocks(pairs, eps, opts).lambda_bits;
}

namespace {

constexpr double kBracketSlack = 1e-3;  // bisection-width noise allowance

void reconcile_bracket(BracketEstimate& br) {
  if (br.heuristic < br.lower) {
    if (br.lower - br.heuristic > kBracketSlack)
      throw_solver("BracketInverted", "heuristic fell below the certified lower bound");
    br.heuristic = br.lower;
  }
  if (br.heuristic > br.upper) {
    if (br.heuristic - br.upper > kBracketSlack)
      throw_solver("BracketInverted", "heuristic exceeded the certified upper bound");
    br.heuristic = br.upper;
  }
}

double pair_smoothing_overhead(double eps) { return std::log2(3.0 / (eps * eps)); }

double cond_smoothing_overhead(double eps) {
  return std::log2(1.0 / (1.0 - std::sqrt(1.0 - eps * eps)) + 1.0);
}

}  // namespace

BracketEstimate i_max_tilde(const DensityOperator& s, const std::vector<std::string>& a,
                            const std::vector<std::string>& b, double eps,
                            const TildeOptions& opts) {
  BipartiteView v = bipartite_view(s, a, b);

  BracketEstimate br;
  br.method = "alternating marginal, bracket from the fixed-marginal relaxations";
  br.lower = d_max_smooth(v.joint, kron(v.a, v.b), eps, opts.smooth).lambda_bits;
  br.upper = d_max_smooth(v.joint, kron(v.a, v.b), eps / 2.0, opts.smooth).lambda_bits +
             pair_smoothing_overhead(eps / 2.0);

  // Alternate: fix the smoothed A-marginal, re-solve the convex smoothing
  // step, evaluate the true objective at the witness.
  Mat marginal = v.a;
  double best = kInf, prev = kInf;
  const std::vector<int> dims{v.da, v.db};
  for (int round = 0; round < opts.max_rounds; ++round) {
    SmoothingCertificate cert =
        d_max_smooth(v.joint, kron(marginal, v.b), eps, opts.smooth);
    if (cert.support_violation || !std::isfinite(cert.lambda_bits)) break;
    Mat wit_a = partial_trace(cert.smoothed, dims, {0});
    bool viol = false;
    const double true_obj = d_max(cert.smoothed, kron(wit_a, v.b), &viol);
    if (!viol) best = std::min(best, true_obj);
    if (std::abs(cert.lambda_bits - prev) < opts.round_tol) break;
    prev = cert.lambda_bits;
    marginal = hermitian_part(wit_a);
  }
  br.heuristic = std::isfinite(best) ? best : br.upper;
  reconcile_bracket(br);
  return br;
}

BracketEstimate i_max_tilde(const CQState& s, const std::vector<std::string>& a,
                            const std::vector<std::string>& b, double eps,
                            const TildeOptions& opts) {
  std::vector<std::string> keep_c, keep_q, ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const auto& l : ab) (s.has_classical(l) ? keep_c : keep_q).push_back(l);
  return i_max_tilde(s.marginal(keep_c, keep_q).expand_density().reordered(ab), a, b, eps, opts);
}

BracketEstimate i_max_tilde_cond_ref(const std::vector<double>& p, const std::vector<Mat>& rho_ab,
                                     const std::vector<Mat>& ref_b, int dim_a, int dim_b,
                                     double eps, const TildeOptions& opts) {
  const size_t nx = p.size();
  if (rho_ab.size() != nx || ref_b.size() != nx)
    throw_validation("DimMismatch", "per-symbol table sizes differ");

  std::vector<SmoothBlockPair> fixed_pairs;
  for (size_t x = 0; x < nx; ++x) {
    Mat a_marg = p[x] > 0 ? Mat(partial_trace(rho_ab[x], {dim_a, dim_b}, {0}))
                          : Mat(Mat::Zero(dim_a, dim_a));
    fixed_pairs.push_back({p[x], rho_ab[x], p[x] * kron(a_marg, ref_b[x])});
  }

  BracketEstimate br;
  br.method = "alternating per-symbol marginals, bracket from the fixed-marginal relaxations";
  br.lower = d_max_smooth_blocks(fixed_pairs, eps, opts.smooth).lambda_bits;
  br.upper = d_max_smooth_blocks(fixed_pairs, eps / 2.0, opts.smooth).lambda_bits +
             cond_smoothing_overhead(eps / 2.0);

  // Alternating pass over the weighted per-symbol A-marginals.
  std::vector<Mat> weighted_marg(nx);
  for (size_t x = 0; x < nx; ++x)
    weighted_marg[x] = p[x] > 0 ? Mat(p[x] * partial_trace(rho_ab[x], {dim_a, dim_b}, {0}))
                                : Mat(Mat::Zero(dim_a, dim_a));
  double best = kInf, prev = kInf;
  for (int round = 0; round < opts.max_rounds; ++round) {
    std::vector<SmoothBlockPair> pairs;
    for (size_t x = 0; x < nx; ++x)
      pairs.push_back({p[x], rho_ab[x], kron(weighted_marg[x], ref_b[x])});
    std::vector<Mat> witness;
    SmoothingCertificate cert;
    try {
      cert = d_max_smooth_blocks(pairs, eps, opts.smooth, &witness);
    } catch (const Error&) {
      break;
    }
    if (cert.support_violation || !std::isfinite(cert.lambda_bits)) break;
    double true_obj = -kInf;
    bool ok = true;
    std::vector<Mat> next(nx);
    for (size_t x = 0; x < nx; ++x) {
      next[x] = hermitian_part(partial_trace(witness[x], {dim_a, dim_b}, {0}));
      bool viol = false;
      const double dm = d_max(witness[x], kron(next[x], ref_b[x]), &viol);
      if (viol) ok = false;
      true_obj = std::max(true_obj, dm);
    }
    if (ok) best = std::min(best, true_obj);
    if (std::abs(cert.lambda_bits - prev) < opts.round_tol) break;
    prev = cert.lambda_bits;
    weighted_marg = next;
  }
  br.heuristic = std::isfinite(best) ? best : br.upper;
  reconcile_bracket(br);
  return br;
}

BracketEstimate i_max_tilde_cond(const CQState& s, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b, const std::string& given,
                                 double eps, const TildeOptions& opts) {
  CondSlices slices = cond_slices(s, a, b, given);
  return i_max_tilde_cond_ref(slices.p, slices.joint, slices.b, slices.da, slices.db, eps, opts);
}

double classical_dh(const RVec& p, const RVec& q, double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw_validation("InvalidEpsilon", "eps must lie in (0,1)");
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](int i) {
    if (q(i) <= 0.0) return p(i) > 0.0 ? kInf : 0.0;
    return p(i) / q(i);
  };
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return ratio(i) > ratio(j); });
  double captured = 0.0, beta = 0.0;
  const double target = 1.0 - eps;
  for (int i : order) {
    if (captured >= target - 1e-15) break;
    if (captured + p(i) <= target + 1e-15) {
      captured += p(i);
      beta += q(i);
    } else {
      beta += (target - captured) / p(i) * q(i);
      captured = target;
    }
  }
  return -log2_safe(beta);
}

double classical_dmax(const RVec& p, const RVec& q) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) return kInf;
    worst = std::max(worst, p(i) / q(i));
  }
  return log2_safe(worst);
}

namespace {

// Maximal Bhattacharyya overlap sum_i sqrt(p_i r_i) over sub-box pmfs r <= cap.
double waterfill_fidelity(const RVec& p, const RVec& cap) {
  double cap_sum = cap.sum();
  if (cap_sum < 1.0 - 1e-12) return -1.0;  // infeasible level
  double s_lo = 0.0, s_hi = 1.0;
  auto mass = [&](double s) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) m += std::min(s * p(i), cap(i));
    return m;
  };
  while (mass(s_hi) < 1.0 && s_hi < 1e18) s_hi *= 2.0;
  double filled = mass(s_hi);
  RVec r(p.size());
  if (filled < 1.0) {
    // Everything with p>0 saturates; dump the leftover on zero-p slots.
    double leftover = 1.0 - filled;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      r(i) = p(i) > 0.0 ? cap(i) : 0.0;
      if (p(i) <= 0.0 && leftover > 0.0) {
        const double add = std::min(cap(i), leftover);
        r(i) = add;
        leftover -= add;
      }
    }
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (s_lo + s_hi);
      if (mass(mid) < 1.0)
        s_lo = mid;
      else
        s_hi = mid;
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) r(i) = std::min(s_hi * p(i), cap(i));
    const double total = r.sum();
    if (total > 0) r /= total;
  }
  double f = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) f += std::sqrt(std::max(0.0, p(i) * r(i)));
  return f;
}

}  // namespace

double classical_dmax_smooth(const RVec& p, const RVec& q, double eps, double width) {
  if (eps <= 0.0 || eps >= 1.0) throw_validation("InvalidEpsilon", "eps must lie in (0,1)");
  const double thr = std::sqrt(std::max(0.0, 1.0 - eps * eps));
  double hi = classical_dmax(p, q);
  if (!std::isfinite(hi)) {
    // project onto supp(q) and renormalize; feasible iff still within the ball
    RVec proj = p;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (q(i) <= 0.0) proj(i) = 0.0;
    const double mass = proj.sum();
    if (mass <= 0.0) return kInf;
    double f = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) f += std::sqrt(p(i) * proj(i) / mass);
    if (f < thr - 1e-12) return kInf;
    proj /= mass;
    hi = classical_dmax(proj, q);
  }
  hi = std::max(hi, 0.0);
  auto feasible = [&](double lam) {
    RVec cap = std::pow(2.0, lam) * q;
    return waterfill_fidelity(p, cap) >= thr - 1e-12;
  };
  if (feasible(0.0)) return 0.0;
  double lo = 0.0;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double probit(double x) {
  if (x <= 0.0 || x >= 1.0) throw_validation("InvalidEpsilon", "probit needs (0,1)");
  // Acklam's rational approximation with one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425, p_high = 1.0 - p_low;
  double z;
  if (x < p_low) {
    const double q = std::sqrt(-2.0 * std::log(x));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (x <= p_high) {
    const double q = x - 0.5, r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - x));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-z / std::sqrt(2.0)) - x;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(z * z / 2.0);
  return z - u / (1.0 + z * u / 2.0);
}

SecondOrderTable second_order_diag(const Mat& rho, const Mat& sigma, double eps, int n_max) {
  const Mat comm = rho * sigma - sigma * rho;
  if (max_abs(comm) > 1e-9)
    throw_validation("NotCommuting", "diagonal fast path needs commuting states");
  const int d = static_cast<int>(rho.rows());
  double cap = 1.0;
  for (int n = 0; n < n_max; ++n) {
    cap *= d;
    if (cap > 16384.0) throw_validation("TooLarge", "product pmf exceeds the 2^14 cap");
  }

  // Common eigenbasis of a generic combination diagonalizes both.
  Spectrum s = eig_hermitian(hermitian_part(rho) + M_SQRT2 * hermitian_part(sigma));
  Mat rho_d = s.eigenvectors.adjoint() * rho * s.eigenvectors;
  Mat sigma_d = s.eigenvectors.adjoint() * sigma * s.eigenvectors;
  RVec p(d), q(d);
  for (int i = 0; i < d; ++i) {
    p(i) = std::max(0.0, rho_d(i, i).real());
    q(i) = std::max(0.0, sigma_d(i, i).real());
  }

  SecondOrderTable out;
  out.eps = eps;
  double rel = 0.0, second = 0.0;
  for (int i = 0; i < d; ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) {
      rel = kInf;
      break;
    }
    rel += p(i) * std::log2(p(i) / q(i));
    second += p(i) * std::log2(p(i) / q(i)) * std::log2(p(i) / q(i));
  }
  out.rel_entropy = rel;
  out.variance = std::isfinite(rel) ? std::max(0.0, second - rel * rel) : kInf;

  RVec pn = p, qn = q;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) {
      RVec np(pn.size() * d), nq(qn.size() * d);
      for (Eigen::Index i = 0; i < pn.size(); ++i)
        for (int j = 0; j < d; ++j) {
          np(i * d + j) = pn(i) * p(j);
          nq(i * d + j) = qn(i) * q(j);
        }
      pn = np;
      qn = nq;
    }
    SecondOrderRow row;
    row.n = n;
    row.dh_per_n = classical_dh(pn, qn, eps) / n;
    row.dmax_per_n = classical_dmax_smooth(pn, qn, eps) / n;
    out.rows.push_back(row);
  }
  return out;
}

double np_conic_value(const Mat& rho, const Mat& sigma, double eps, double tol) {
  if (eps <= 0.0 || eps >= 1.0) throw_validation("InvalidEpsilon", "eps must lie in (0,1)");
  const int d = static_cast<int>(rho.rows());
  ConicProgram p;
  const int lam = p.add_block(d, Cone::Box01);
  const int slack = p.add_block(1, Cone::Psd);
  Mat minus_one = -Mat::Identity(1, 1);
  p.add_row({{lam, hermitian_part(rho)}, {slack, minus_one}}, 1.0 - eps);
  p.set_objective(lam, hermitian_part(sigma));
  ConicSolution sol = solve(p, tol);
  if (sol.status != SolveStatus::Optimal)
    throw_solver("SolverNoConverge", "optimal-test program did not reach optimality");
  return -log2_safe(std::max(sol.objective, 0.0));
}

}  // namespace qbc
