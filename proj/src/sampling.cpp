#include "qbc/sampling.hpp"

namespace qbc {

Mat random_gaussian(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

Mat random_unitary(Rng& rng, int d) { return random_isometry(rng, d, d); }

Mat random_isometry(Rng& rng, int rows, int cols) {
  Mat g = random_gaussian(rng, rows, cols);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  // Fix the phase convention so the result is a deterministic function of g.
  Mat r = q.adjoint() * g;
  for (int j = 0; j < cols; ++j) {
    Complex diag = r(j, j);
    if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
  }
  return q;
}

Mat random_density(Rng& rng, int d, int rank) {
  if (rank <= 0) rank = d;
  Mat g = random_gaussian(rng, d, rank);
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

Mat random_full_rank_density(Rng& rng, int d, double floor) {
  return (1.0 - floor) * random_density(rng, d) + floor / d * Mat::Identity(d, d);
}

Mat random_projector(Rng& rng, int d, int rank) {
  Mat v = random_isometry(rng, d, rank);
  return v * v.adjoint();
}

std::vector<Mat> random_kraus(Rng& rng, int d_in, int d_out, int env) {
  Mat v = random_isometry(rng, d_out * env, d_in);
  std::vector<Mat> ks(env);
  for (int e = 0; e < env; ++e) {
    // K_e = (1_out ⊗ <e|) V with ordering (out, env).
    Mat k(d_out, d_in);
    for (int o = 0; o < d_out; ++o) k.row(o) = v.row(o * env + e);
    ks[e] = k;
  }
  return ks;
}

RVec random_pmf(Rng& rng, int n, double floor) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  RVec p(n);
  for (int i = 0; i < n; ++i) p(i) = u(rng);
  return p / p.sum();
}

}  // namespace qbc
