#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qbc/conic.hpp"
#include "qbc/divergences.hpp"
#include "qbc/oneshot.hpp"
#include "qbc/sampling.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

ConicProgram dmax_feasibility_program(const Mat& rho, const Mat& sigma, double lambda) {
  ConicProgram p;
  const int d = static_cast<int>(rho.rows());
  const int y = p.add_block(d, Cone::Psd);
  p.add_subblock_equality({{y, 0, 0, 1.0}}, std::pow(2.0, lambda) * sigma - rho);
  return p;
}

}  // namespace

TEST_CASE("adjoint probes validate the packing maps") {
  Rng rng(8);
  Mat rho = random_density(rng, 3), sigma = random_full_rank_density(rng, 3);
  ConicProgram p = dmax_feasibility_program(rho, sigma, 1.0);
  CHECK(p.adjoint_probe_residual(1234) <= 1e-10);

  ConicProgram q;
  const int lam = q.add_block(4, Cone::Box01);
  const int slack = q.add_block(1, Cone::Psd);
  q.add_row({{lam, random_density(rng, 4)}, {slack, -Mat::Identity(1, 1)}}, 0.5);
  CHECK(q.adjoint_probe_residual(99) <= 1e-10);
}

TEST_CASE("optimal-test program reproduces the classical value") {
  const double v = np_conic_value(diag2(0.5, 0.5), diag2(0.9, 0.1), 0.5, 1e-9);
  CHECK(std::pow(2.0, -v) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("dmax feasibility flips across the spectral value") {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d);
    const double dm = d_max(rho, sigma);

    ConicSolution above = solve(dmax_feasibility_program(rho, sigma, dm + 0.01), 1e-8);
    CHECK(above.status == SolveStatus::Optimal);

    ConicSolution below = solve(dmax_feasibility_program(rho, sigma, dm - 0.01), 1e-8, 100000);
    CHECK(below.status == SolveStatus::InfeasibleCertificate);
  }
}

TEST_CASE("fidelity sdp matches the spectral formula") {
  CHECK(fidelity_sdp(diag2(0.5, 0.5), diag2(0.5, 0.5)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fidelity_sdp(ketbra(0, 2), ketbra(1, 2)) == doctest::Approx(0.0).epsilon(1e-6));

  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a = random_density(rng, 2), b = random_density(rng, 2);
    CHECK(fidelity_sdp(a, b) == doctest::Approx(fidelity(a, b)).epsilon(1e-6));
  }
}

TEST_CASE("primal value agrees with the threshold dual") {
  Rng rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 2);
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d);
    const double eps = 0.1 + 0.2 * (trial % 3);
    const double primal = std::pow(2.0, -np_conic_value(rho, sigma, eps, 1e-9));

    // dual: max over t >= 0 of t(1-eps) - Tr[(t rho - sigma)_+], concave in t
    auto dual_at = [&](double t) {
      Spectrum s = eig_hermitian(t * rho - sigma);
      double pos = 0.0;
      for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        pos += std::max(0.0, s.eigenvalues(i));
      return t * (1.0 - eps) - pos;
    };
    double lo = 0.0, hi = 64.0;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (dual_at(m1) < dual_at(m2))
        lo = m1;
      else
        hi = m2;
    }
    CHECK(primal == doctest::Approx(dual_at(0.5 * (lo + hi))).epsilon(1e-5));
  }
}

TEST_CASE("identical programs solve identically") {
  Rng rng(19);
  Mat rho = random_density(rng, 3), sigma = random_full_rank_density(rng, 3);
  ConicProgram p1 = dmax_feasibility_program(rho, sigma, d_max(rho, sigma) + 0.05);
  ConicProgram p2 = dmax_feasibility_program(rho, sigma, d_max(rho, sigma) + 0.05);
  ConicSolution s1 = solve(p1, 1e-9), s2 = solve(p2, 1e-9);
  CHECK(s1.iterations == s2.iterations);
  CHECK(s1.objective == s2.objective);
  REQUIRE(s1.blocks.size() == s2.blocks.size());
  for (size_t b = 0; b < s1.blocks.size(); ++b)
    CHECK(max_abs(s1.blocks[b] - s2.blocks[b]) == 0.0);
}

TEST_CASE("optimal status implies small residuals and gap") {
  Rng rng(20);
  Mat rho = random_density(rng, 4), sigma = random_full_rank_density(rng, 4);
  ConicSolution sol = solve(dmax_feasibility_program(rho, sigma, d_max(rho, sigma) + 0.1), 1e-8);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.primal_residual <= 1e-7);
  CHECK(sol.dual_residual <= 1e-7);
  CHECK(sol.gap <= 1e-6);
}
