#include "qbc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qbc {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Real coordinates of a Hermitian d x d block: d diagonal entries followed by
// (sqrt2*Re, sqrt2*Im) per off-diagonal pair; preserves Tr(AB) as a dot product.
int svec_dim(int d) { return d * d; }

void svec_into(const Mat& h, double* out) {
  const int d = static_cast<int>(h.rows());
  int k = 0;
  for (int r = 0; r < d; ++r) out[k++] = h(r, r).real();
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      out[k++] = kSqrt2 * h(r, c).real();
      out[k++] = kSqrt2 * h(r, c).imag();
    }
}

Mat desvec(const double* in, int d) {
  Mat h(d, d);
  int k = 0;
  for (int r = 0; r < d; ++r) h(r, r) = in[k++];
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      const double re = in[k++] / kSqrt2;
      const double im = in[k++] / kSqrt2;
      h(r, c) = Complex(re, im);
      h(c, r) = Complex(re, -im);
    }
  return h;
}

// Coefficient matrix extracting Re X(r,c) (or Im X(r,c)) via Tr(A X).
Mat entry_extractor(int d, int r, int c, bool imag_part) {
  Mat a = Mat::Zero(d, d);
  if (r == c) {
    a(r, r) = 1.0;
    return a;
  }
  if (!imag_part) {
    a(r, c) = 0.5;
    a(c, r) = 0.5;
  } else {
    a(r, c) = Complex(0.0, 0.5);
    a(c, r) = Complex(0.0, -0.5);
  }
  return a;
}

struct Packed {
  RMat A;
  RVec b;
  RVec c;
  std::vector<int> offsets;  // per-block offset into the real vector
  int n = 0;
};

Packed pack(const ConicProgram& p) {
  Packed out;
  out.offsets.resize(p.blocks.size());
  int n = 0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    out.offsets[b] = n;
    n += svec_dim(p.blocks[b].dim);
  }
  out.n = n;
  const int m = static_cast<int>(p.rows.size());
  out.A = RMat::Zero(m, n);
  out.b = RVec::Zero(m);
  out.c = RVec::Zero(n);
  for (int i = 0; i < m; ++i) {
    out.b(i) = p.rows[i].rhs;
    for (const auto& [blk, coeff] : p.rows[i].terms) {
      std::vector<double> tmp(svec_dim(p.blocks[blk].dim));
      svec_into(hermitian_part(coeff), tmp.data());
      for (size_t k = 0; k < tmp.size(); ++k) out.A(i, out.offsets[blk] + k) += tmp[k];
    }
  }
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    if (p.objective[b].size() == 0) continue;
    std::vector<double> tmp(svec_dim(p.blocks[b].dim));
    svec_into(hermitian_part(p.objective[b]), tmp.data());
    for (size_t k = 0; k < tmp.size(); ++k) out.c(out.offsets[b] + k) = tmp[k];
  }
  return out;
}

}  // namespace

int ConicProgram::add_block(int dim, Cone cone) {
  if (dim <= 0) throw_validation("DimMismatch", "block dimension must be positive");
  blocks.push_back({dim, cone});
  objective.push_back(Mat());
  return static_cast<int>(blocks.size()) - 1;
}

void ConicProgram::set_objective(int block, const Mat& coeff) {
  if (coeff.rows() != blocks[block].dim || coeff.cols() != blocks[block].dim)
    throw_validation("DimMismatch", "objective coefficient dimension mismatch");
  objective[block] = coeff;
}

void ConicProgram::add_row(std::vector<std::pair<int, Mat>> terms, double rhs) {
  for (const auto& [blk, coeff] : terms) {
    if (blk < 0 || blk >= static_cast<int>(blocks.size()))
      throw_validation("DimMismatch", "row references unknown block");
    if (coeff.rows() != blocks[blk].dim || coeff.cols() != blocks[blk].dim)
      throw_validation("DimMismatch", "row coefficient dimension mismatch");
  }
  rows.push_back({std::move(terms), rhs});
}

void ConicProgram::add_subblock_equality(const std::vector<SubblockRef>& refs, const Mat& target) {
  const int td = static_cast<int>(target.rows());
  for (int r = 0; r < td; ++r) {
    for (int c = r; c < td; ++c) {
      std::vector<std::pair<int, Mat>> terms_re, terms_im;
      for (const auto& ref : refs) {
        const int bd = blocks[ref.block].dim;
        if (ref.row_off + td > bd || ref.col_off + td > bd)
          throw_validation("DimMismatch", "subblock reference out of range");
        terms_re.push_back(
            {ref.block, ref.scale * entry_extractor(bd, ref.row_off + r, ref.col_off + c, false)});
        if (r != c)
          terms_im.push_back(
              {ref.block, ref.scale * entry_extractor(bd, ref.row_off + r, ref.col_off + c, true)});
      }
      add_row(std::move(terms_re), target(r, c).real());
      if (r != c) add_row(std::move(terms_im), target(r, c).imag());
    }
  }
}

int ConicProgram::total_real_dim() const {
  int n = 0;
  for (const auto& b : blocks) n += svec_dim(b.dim);
  return n;
}

double ConicProgram::adjoint_probe_residual(unsigned seed, int probes) const {
  Packed pk = pack(*this);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < probes; ++t) {
    // Random Hermitian blocks x and random dual vector y.
    RVec x(pk.n);
    for (size_t b = 0; b < blocks.size(); ++b) {
      const int d = blocks[b].dim;
      Mat h(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) h(i, j) = Complex(g(rng), g(rng));
      h = hermitian_part(h);
      svec_into(h, x.data() + pk.offsets[b]);
    }
    RVec y(pk.A.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = g(rng);
    // <A(x), y> via the packed matrix vs. <x, A*(y)> via the Hermitian forms.
    const double lhs = (pk.A * x).dot(y);
    double rhs = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      for (const auto& [blk, coeff] : rows[i].terms) {
        Mat xb = desvec(x.data() + pk.offsets[blk], blocks[blk].dim);
        rhs += y(i) * (hermitian_part(coeff) * xb).trace().real();
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

ConicSolution solve(const ConicProgram& p, double tol, int max_iters, WarmStart* warm) {
  Packed pk = pack(p);
  const int n = pk.n;
  const int m = static_cast<int>(pk.A.rows());

  // Ruiz-style equilibration: per-row scaling, per-block scalar column scaling.
  RVec row_scale = RVec::Ones(m);
  std::vector<double> block_scale(p.blocks.size(), 1.0);
  RMat A = pk.A;
  for (int pass = 0; pass < 10 && m > 0; ++pass) {
    for (int i = 0; i < m; ++i) {
      const double norm = A.row(i).cwiseAbs().maxCoeff();
      if (norm > 0) {
        const double s = 1.0 / std::sqrt(norm);
        A.row(i) *= s;
        row_scale(i) *= s;
      }
    }
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      const int off = pk.offsets[b];
      const int len = svec_dim(p.blocks[b].dim);
      const double norm = A.middleCols(off, len).cwiseAbs().maxCoeff();
      if (norm > 0) {
        const double s = 1.0 / std::sqrt(norm);
        A.middleCols(off, len) *= s;
        block_scale[b] *= s;
      }
    }
  }
  RVec b_scaled = row_scale.asDiagonal() * pk.b;
  // x = E x_scaled with E = diag(block_scale); objective over x_scaled is E c.
  RVec c_scaled(n);
  for (size_t bk = 0; bk < p.blocks.size(); ++bk)
    c_scaled.segment(pk.offsets[bk], svec_dim(p.blocks[bk].dim)) =
        pk.c.segment(pk.offsets[bk], svec_dim(p.blocks[bk].dim)) * block_scale[bk];

  Eigen::LDLT<RMat> normal;
  if (m > 0) {
    RMat gram = A * A.transpose();
    gram.diagonal().array() += 1e-12;
    normal.compute(gram);
  }
  auto project_affine = [&](const RVec& y) -> RVec {
    if (m == 0) return y;
    return y - A.transpose() * normal.solve(A * y - b_scaled);
  };

  const double alpha = 1.6;  // over-relaxation
  double tau = 1.0;          // penalty, rebalanced on residual imbalance
  const bool pure_feasibility = c_scaled.isZero(0.0);
  RVec z = RVec::Zero(n), u = RVec::Zero(n);
  if (warm && warm->valid && warm->z.size() == n) {
    z = warm->z;
    u = warm->u;
  }

  RVec x(n), w(n), z_prev(n);
  double primal_res = 0.0, dual_res = 0.0;
  double stall_ref = -1.0;
  int stall_ref_iter = 0;
  SolveStatus status = SolveStatus::MaxIters;
  int iter = 0;

  for (iter = 1; iter <= max_iters; ++iter) {
    x = project_affine(z - u - c_scaled / tau);
    w = alpha * x + (1.0 - alpha) * z;
    z_prev = z;
    RVec v = w + u;
    for (size_t bk = 0; bk < p.blocks.size(); ++bk) {
      const int d = p.blocks[bk].dim;
      const int off = pk.offsets[bk];
      Mat h = desvec(v.data() + off, d);
      Eigen::SelfAdjointEigenSolver<Mat> es(h);
      RVec ev = es.eigenvalues();
      const double ub = p.blocks[bk].cone == Cone::Box01
                            ? 1.0 / block_scale[bk]
                            : std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::clamp(ev(i), 0.0, ub);
      Mat proj = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
      svec_into(proj, z.data() + off);
    }
    u += w - z;

    primal_res = (x - z).norm() / (1.0 + std::max(x.norm(), z.norm()));
    dual_res = tau * (z - z_prev).norm() / (1.0 + u.norm());
    if (primal_res <= tol && dual_res <= tol) {
      status = SolveStatus::Optimal;
      break;
    }
    // Rebalance the penalty when the residuals drift apart; the scaled dual
    // keeps y = tau * u continuous across the change.
    if (!pure_feasibility && iter % 100 == 0) {
      if (primal_res > 10.0 * dual_res && dual_res > 0.0 && tau < 1e6) {
        tau *= 2.0;
        u *= 0.5;
      } else if (dual_res > 10.0 * primal_res && primal_res > 0.0 && tau > 1e-6) {
        tau *= 0.5;
        u *= 2.0;
      }
    }
    // A stalled primal residual on a feasibility problem means the affine
    // subspace and the cone do not intersect (the displacement converges to
    // the gap vector between the sets).
    if (pure_feasibility && iter % 2000 == 0) {
      if (stall_ref >= 0.0 && primal_res > 100.0 * tol &&
          std::abs(primal_res - stall_ref) < 1e-3 * primal_res && iter - stall_ref_iter >= 2000) {
        status = SolveStatus::InfeasibleCertificate;
        break;
      }
      stall_ref = primal_res;
      stall_ref_iter = iter;
    }
  }

  ConicSolution sol;
  sol.iterations = std::min(iter, max_iters);
  sol.status = status;
  sol.primal_residual = primal_res;
  sol.dual_residual = dual_res;
  sol.gap = std::abs(c_scaled.dot(x - z)) / (1.0 + std::abs(c_scaled.dot(z)));
  sol.objective = c_scaled.dot(z);
  for (size_t bk = 0; bk < p.blocks.size(); ++bk) {
    Mat zb = desvec(z.data() + pk.offsets[bk], p.blocks[bk].dim);
    sol.blocks.push_back(block_scale[bk] * zb);
  }
  if (warm) {
    warm->z = z;
    warm->u = u;
    warm->valid = true;
  }
  return sol;
}

double fidelity_sdp(const Mat& rho, const Mat& sigma, double tol) {
  const int d = static_cast<int>(rho.rows());
  if (sigma.rows() != d) throw_validation("DimMismatch", "state dimensions differ");
  // Restricting to the supports keeps the pinned blocks full rank, which the
  // splitting iteration needs for fast convergence. The overlap matrix M
  // carries the relative orientation of the two supports.
  SupportBasis br = support_basis(hermitian_part(rho));
  SupportBasis bs = support_basis(hermitian_part(sigma));
  if (br.rank == 0 || bs.rank == 0) return 0.0;
  Mat overlap = br.isometry.adjoint() * bs.isometry;  // r x s
  if (max_abs(overlap) == 0.0) return 0.0;

  const int r = br.rank, s = bs.rank;
  ConicProgram p;
  const int big = p.add_block(r + s, Cone::Psd);
  p.add_subblock_equality({{big, 0, 0, 1.0}}, br.restricted);
  p.add_subblock_equality({{big, r, r, 1.0}}, bs.restricted);
  // maximize Re Tr(M† X) over the off-diagonal block
  Mat c = Mat::Zero(r + s, r + s);
  c.block(0, r, r, s) = -0.5 * overlap;
  c.block(r, 0, s, r) = -0.5 * overlap.adjoint();
  p.set_objective(big, c);
  ConicSolution sol = solve(p, tol);
  if (sol.status == SolveStatus::MaxIters)
    throw_solver("MaxIters", "fidelity program did not converge");
  return -sol.objective;
}

}  // namespace qbc
