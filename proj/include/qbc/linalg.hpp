#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "qbc/errors.hpp"

namespace qbc {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Support cutoff for pseudo-inverses / logs, relative to the largest eigenvalue.
inline constexpr double kSupportTol = 1e-10;

struct Spectrum {
  RVec eigenvalues;  // sorted descending
  Mat eigenvectors;  // columns, orthonormal, aligned with eigenvalues

  Mat reconstruct() const;
};

Mat identity(int d);
Mat hermitian_part(const Mat& m);  // (m + m†)/2
double asymmetry(const Mat& m);    // max-norm of m - m†
bool all_finite(const Mat& m);
double max_abs(const Mat& m);
double trace_real(const Mat& m);

// Eigendecomposition of a Hermitian matrix. Symmetrizes internally; rejects
// matrices whose asymmetry exceeds 1e-8 (NonHermitian) or contain NaN/Inf
// (NonFinite).
Spectrum eig_hermitian(const Mat& m);

double min_eigenvalue(const Mat& hermitian);

// Applies f to eigenvalues above the (relative) support cutoff, maps the rest
// to zero. Rejects inputs with eigenvalues below -1e-8 (NegativeEigenvalue).
Mat mat_fn_on_support(const Mat& m, const std::function<double(double)>& f,
                      double support_tol = kSupportTol);

// Projector onto the support (eigenvalues above the relative cutoff) of a PSD matrix.
Mat support_projector(const Mat& psd, double support_tol = kSupportTol);

// Orthonormal basis of the support: isometry (d x rank) and the restriction
// V† m V of the matrix to it.
struct SupportBasis {
  Mat isometry;
  Mat restricted;
  int rank = 0;
};
SupportBasis support_basis(const Mat& psd, double support_tol = kSupportTol);

Mat kron(const Mat& a, const Mat& b);
Mat kron_all(const std::vector<Mat>& factors);

// Traces out every subsystem not listed in `keep`. `keep` holds ascending
// subsystem indices into `dims`; output ordering follows `keep`.
Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep);

// Reorders subsystems: output subsystem j is input subsystem order[j].
Mat permute_subsystems(const Mat& m, const std::vector<int>& dims, const std::vector<int>& order);

// Embeds an operator acting on the listed subsystems (in that order) into the
// full space, identity elsewhere.
Mat embed_op(const Mat& op, const std::vector<int>& acting, const std::vector<int>& dims);

}  // namespace qbc
