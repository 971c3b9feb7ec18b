#include "qbc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbc {

namespace {

int product(const std::vector<int>& dims) {
  int p = 1;
  for (int d : dims) p *= d;
  return p;
}

// Row-major strides: subsystem 0 is the most significant index.
std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

}  // namespace

Mat Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
}

Mat identity(int d) { return Mat::Identity(d, d); }

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

double asymmetry(const Mat& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

bool all_finite(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double trace_real(const Mat& m) { return m.trace().real(); }

Spectrum eig_hermitian(const Mat& m) {
  if (m.rows() != m.cols()) throw_validation("DimMismatch", "matrix is not square");
  if (!all_finite(m)) throw_validation("NonFinite", "matrix contains NaN or Inf");
  if (asymmetry(m) > 1e-8 * std::max(1.0, max_abs(m)))
    throw_validation("NonHermitian", "asymmetry exceeds 1e-8");

  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success)
    throw_solver("SolverNoConverge", "Hermitian eigendecomposition failed");

  // Eigen returns ascending order; flip to descending.
  const int d = static_cast<int>(m.rows());
  Spectrum spec;
  spec.eigenvalues = RVec(d);
  spec.eigenvectors = Mat(d, d);
  for (int i = 0; i < d; ++i) {
    spec.eigenvalues(i) = solver.eigenvalues()(d - 1 - i);
    spec.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return spec;
}

double min_eigenvalue(const Mat& hermitian) {
  Spectrum s = eig_hermitian(hermitian);
  return s.eigenvalues(s.eigenvalues.size() - 1);
}

Mat mat_fn_on_support(const Mat& m, const std::function<double(double)>& f, double support_tol) {
  Spectrum s = eig_hermitian(m);
  const double top = s.eigenvalues.size() ? s.eigenvalues(0) : 0.0;
  if (s.eigenvalues.size() && s.eigenvalues(s.eigenvalues.size() - 1) < -1e-8)
    throw_validation("NegativeEigenvalue", "matrix is not PSD within tolerance");
  const double cut = support_tol * std::max(top, 0.0);
  RVec mapped(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    mapped(i) = s.eigenvalues(i) > cut ? f(s.eigenvalues(i)) : 0.0;
  return s.eigenvectors * mapped.asDiagonal() * s.eigenvectors.adjoint();
}

Mat support_projector(const Mat& psd, double support_tol) {
  return mat_fn_on_support(psd, [](double) { return 1.0; }, support_tol);
}

SupportBasis support_basis(const Mat& psd, double support_tol) {
  Spectrum s = eig_hermitian(psd);
  const double top = s.eigenvalues.size() ? std::max(s.eigenvalues(0), 0.0) : 0.0;
  const double cut = support_tol * top;
  int rank = 0;
  while (rank < s.eigenvalues.size() && s.eigenvalues(rank) > cut) ++rank;
  SupportBasis out;
  out.rank = rank;
  out.isometry = s.eigenvectors.leftCols(rank);
  out.restricted = out.isometry.adjoint() * psd * out.isometry;
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat kron_all(const std::vector<Mat>& factors) {
  Mat out = Mat::Identity(1, 1);
  for (const Mat& f : factors) out = kron(out, f);
  return out;
}

Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  const int total = product(dims);
  if (m.rows() != total || m.cols() != total)
    throw_validation("DimMismatch", "product of dims does not match matrix dimension");
  for (int k : keep)
    if (k < 0 || k >= static_cast<int>(dims.size()))
      throw_validation("DimMismatch", "keep index out of range");

  std::vector<int> traced;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k)
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) traced.push_back(k);

  const std::vector<int> strides = strides_of(dims);
  std::vector<int> keep_dims, traced_dims;
  for (int k : keep) keep_dims.push_back(dims[k]);
  for (int k : traced) traced_dims.push_back(dims[k]);
  const int dk = product(keep_dims);
  const int dt = product(traced_dims);

  // Offset of a flat multi-index over a subsystem subset.
  auto offset = [&](const std::vector<int>& subset, const std::vector<int>& subset_dims, int flat) {
    int off = 0;
    for (int k = static_cast<int>(subset.size()) - 1; k >= 0; --k) {
      off += (flat % subset_dims[k]) * strides[subset[k]];
      flat /= subset_dims[k];
    }
    return off;
  };

  Mat out = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a) {
    const int ra = offset(keep, keep_dims, a);
    for (int b = 0; b < dk; ++b) {
      const int rb = offset(keep, keep_dims, b);
      Complex acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        const int rt = offset(traced, traced_dims, t);
        acc += m(ra + rt, rb + rt);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

Mat permute_subsystems(const Mat& m, const std::vector<int>& dims, const std::vector<int>& order) {
  const int total = product(dims);
  if (m.rows() != total || m.cols() != total)
    throw_validation("DimMismatch", "product of dims does not match matrix dimension");
  if (order.size() != dims.size()) throw_validation("DimMismatch", "order length mismatch");

  std::vector<int> new_dims(order.size());
  for (size_t j = 0; j < order.size(); ++j) new_dims[j] = dims[order[j]];
  const std::vector<int> old_strides = strides_of(dims);
  const std::vector<int> new_strides = strides_of(new_dims);

  // map[f] = position in the permuted ordering of old flat index f
  std::vector<int> map(total);
  for (int f = 0; f < total; ++f) {
    int rem = f, g = 0;
    std::vector<int> coord(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) {
      coord[k] = rem / old_strides[k];
      rem %= old_strides[k];
    }
    for (size_t j = 0; j < order.size(); ++j) g += coord[order[j]] * new_strides[j];
    map[f] = g;
  }

  Mat out(total, total);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j) out(map[i], map[j]) = m(i, j);
  return out;
}

Mat embed_op(const Mat& op, const std::vector<int>& acting, const std::vector<int>& dims) {
  const int total = product(dims);
  std::vector<int> act_dims;
  for (int k : acting) act_dims.push_back(dims[k]);
  const int da = product(act_dims);
  if (op.rows() != da || op.cols() != da)
    throw_validation("DimMismatch", "operator does not match acting subsystems");

  std::vector<int> rest;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k)
    if (std::find(acting.begin(), acting.end(), k) == acting.end()) rest.push_back(k);
  std::vector<int> rest_dims;
  for (int k : rest) rest_dims.push_back(dims[k]);
  const int dr = product(rest_dims);

  const std::vector<int> strides = strides_of(dims);
  auto offset = [&](const std::vector<int>& subset, const std::vector<int>& subset_dims, int flat) {
    int off = 0;
    for (int k = static_cast<int>(subset.size()) - 1; k >= 0; --k) {
      off += (flat % subset_dims[k]) * strides[subset[k]];
      flat /= subset_dims[k];
    }
    return off;
  };

  Mat out = Mat::Zero(total, total);
  for (int a = 0; a < da; ++a) {
    const int ra = offset(acting, act_dims, a);
    for (int b = 0; b < da; ++b) {
      if (op(a, b) == Complex(0.0, 0.0)) continue;
      const int rb = offset(acting, act_dims, b);
      for (int r = 0; r < dr; ++r) {
        const int rr = offset(rest, rest_dims, r);
        out(ra + rr, rb + rr) = op(a, b);
      }
    }
  }
  return out;
}

}  // namespace qbc
