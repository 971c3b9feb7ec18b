#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qbc/codingsim.hpp"
#include "qbc/divergences.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

EpsilonBudget test_budget() {
  EpsilonBudget b;
  b.eps_prime = 0.08;
  b.eps_dprime = 0.3;
  b.delta1 = b.delta2 = b.delta3 = 0.04;
  b.eta = 0.05;
  return b;
}

// U identified with V, deterministic modulation, noiseless classical channel:
// the per-symbol receiver states are orthogonal.
BroadcastChannelModel orthogonal_signal_model() {
  RMat p_uv = RMat::Zero(2, 2);
  p_uv(0, 0) = p_uv(1, 1) = 0.5;
  RMat p_xv = RMat::Identity(2, 2);
  std::vector<RMat> pyz(2, RMat::Zero(2, 2));
  pyz[0](0, 0) = 1.0;
  pyz[1](1, 1) = 1.0;
  return classical_broadcast_model(p_uv, p_xv, pyz, 2, 2);
}

BroadcastChannelModel constant_model() {
  RMat p_uv(2, 2);
  p_uv << 0.3, 0.2, 0.2, 0.3;
  RMat p_xv(2, 2);
  p_xv << 0.7, 0.3, 0.4, 0.6;
  return constant_channel_model(p_uv, p_xv, 2, diag2(0.6, 0.4), diag2(0.7, 0.3));
}

}  // namespace

TEST_CASE("budget window is enforced") {
  EpsilonBudget bad = test_budget();
  bad.eps_prime = 0.2;  // 3e' + 2 sqrt(e') = 1.494
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("OutOfWindow"), Error);
  bad = test_budget();
  bad.eta = 0.2;  // needs eta < e''^2
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("OutOfWindow"), Error);
}

TEST_CASE("dimension cap") {
  CHECK_THROWS_WITH_AS(
      CodebookConfig(4, 4, 4, 2, tiny_quantum_model(1), test_budget()),
      doctest::Contains("DimensionCapExceeded"), Error);
}

TEST_CASE("srm completeness on both layers") {
  CodebookConfig cfg(4, 2, 2, 2, tiny_quantum_model(5), test_budget());
  CommonLayer bob = build_srm_layer1(cfg, 'B');
  CommonLayer charlie = build_srm_layer1(cfg, 'C');
  PairLayer pair = build_srm_layer2(cfg);
  CHECK(bob.completeness_residual <= 1e-9);
  CHECK(charlie.completeness_residual <= 1e-9);
  CHECK(pair.completeness_residual <= 1e-9);
}

TEST_CASE("single message decodes up to the off-support weight") {
  CodebookConfig cfg(1, 1, 1, 1, tiny_quantum_model(6), test_budget());
  CommonLayer layer = build_srm_layer1(cfg, 'B');
  const double err = layer.error_exact(0);
  CHECK(err <= cfg.budget.eps_prime - cfg.budget.delta1 + 1e-9);
  // with one slot the measurement is the support projector of the test
  double direct = 0.0;
  for (int u = 0; u < layer.p_sym.size(); ++u) {
    Mat p = support_projector(hermitian_part(layer.tests[u]));
    direct += layer.p_sym(u) * ((Mat::Identity(2, 2) - p) * layer.signal[u]).trace().real();
  }
  CHECK(err == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("orthogonal signals fail only on codebook collisions") {
  CodebookConfig cfg(2, 1, 1, 1, orthogonal_signal_model(), test_budget());
  CommonLayer layer = build_srm_layer1(cfg, 'B');
  double collision = 0.0;
  for (int u = 0; u < layer.p_sym.size(); ++u) collision += layer.p_sym(u) * layer.p_sym(u);
  CHECK(layer.error_exact(0) == doctest::Approx(0.5 * collision).epsilon(1e-9));

  // and the pair layer distinguishes orthogonal V-signals the same way
  PairLayer pair = build_srm_layer2(cfg);
  CHECK(pair.error_exact(0) <= 0.5 + 1e-9);
}

TEST_CASE("single second-layer hypothesis decodes within the test budget") {
  CodebookConfig cfg(2, 1, 1, 1, tiny_quantum_model(17), test_budget());
  PairLayer layer = build_srm_layer2(cfg);
  CHECK(layer.slots == 1);
  CHECK(layer.error_exact(0) <= cfg.budget.eps_prime - cfg.budget.delta3 + 1e-9);
}

TEST_CASE("identical codeword states leave a uniform guess") {
  for (int m0 : {2, 4}) {
    CodebookConfig cfg(m0, 1, 1, 1, constant_model(), test_budget());
    CommonLayer layer = build_srm_layer1(cfg, 'B');
    CHECK(layer.error_exact(0) == doctest::Approx(1.0 - 1.0 / m0).epsilon(1e-9));
  }
}

TEST_CASE("permuting message labels leaves the exact error invariant") {
  CodebookConfig cfg(3, 1, 2, 1, tiny_quantum_model(8), test_budget());
  CommonLayer layer = build_srm_layer1(cfg, 'B');
  const double e0 = layer.error_exact(0);
  for (int m = 1; m < cfg.m0; ++m) CHECK(layer.error_exact(m) == doctest::Approx(e0).epsilon(1e-11));

  PairLayer pair = build_srm_layer2(cfg);
  const double p0 = pair.error_exact(0);
  for (int s = 1; s < pair.slots; ++s) CHECK(pair.error_exact(s) == doctest::Approx(p0).epsilon(1e-11));
}

TEST_CASE("exact errors sit below the operator-inequality bounds") {
  for (unsigned seed : {11u, 12u, 13u}) {
    CodebookConfig cfg(2, 2, 2, 1, tiny_quantum_model(seed), test_budget());
    SimReport common = simulate_common(cfg);
    CHECK(common.p_error_common_B <= common.hn_bound_common_B + 1e-9);
    CHECK(common.p_error_common_C <= common.hn_bound_common_C + 1e-9);
    SimReport pair = simulate_pair(cfg);
    CHECK(pair.p_error_pair <= pair.hn_bound_pair + 1e-9);
    CHECK(common.c_star_common ==
          doctest::Approx(cfg.budget.delta1 / (2 * cfg.budget.eps_prime - cfg.budget.delta1)));
  }
}

TEST_CASE("secrecy of a channel that ignores its input") {
  CodebookConfig cfg(2, 2, 2, 2, constant_model(), test_budget());
  SimReport rep = simulate_secrecy(cfg);
  REQUIRE(rep.secrecy_tv_per_m0.size() == 2);
  for (double v : rep.secrecy_tv_per_m0) CHECK(v <= 1e-10);
}

TEST_CASE("secrecy with single private and dummy slots matches the direct distance") {
  BroadcastChannelModel model = tiny_quantum_model(21);
  CodebookConfig cfg(1, 1, 1, 1, model, test_budget());
  SimReport rep = simulate_secrecy(cfg);

  // independent route: expand both block-diagonal states and take the norm
  CQState induced = model.induced_state();
  CQState charlie = induced.marginalize_quantum({"B"});
  std::vector<double> probs(charlie.classical_size());
  std::vector<Mat> actual(charlie.classical_size()), target(charlie.classical_size());
  for (int t = 0; t < charlie.classical_size(); ++t) {
    probs[t] = charlie.prob(t);
    actual[t] = charlie.block(t);
  }
  CQState per_u = charlie.marginalize_classical({"V", "X"});
  for (int t = 0; t < charlie.classical_size(); ++t)
    target[t] = per_u.block(charlie.tuple_of(t)[0]);
  CQState a({{"U", 2}, {"V", 2}, {"X", 2}}, {{"C", 2}}, probs, actual);
  CQState b({{"U", 2}, {"V", 2}, {"X", 2}}, {{"C", 2}}, probs, target);
  const double direct = trace_distance(a.expand(), b.expand());
  CHECK(rep.secrecy_tv_per_m0[0] == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("simulate_all composes the pieces") {
  CodebookConfig cfg(2, 1, 2, 2, tiny_quantum_model(30), test_budget());
  SimReport rep = simulate_all(cfg);
  CHECK(rep.p_error_common_B <= 1.0);
  CHECK(rep.p_error_pair <= 1.0);
  CHECK(rep.secrecy_bound == doctest::Approx(2.0 * (2.0 * 0.3 + 0.05)));
  CHECK(rep.completeness_residual <= 1e-9);
  CHECK(rep.itilde_xc_upper >= 0.0);
  // the covering-rate gates cannot hold at desk scale: 2 log2(1/eta) alone
  // exceeds any representable Rd here
  CHECK_FALSE(rep.rate_eq9_ok);
}

TEST_CASE("expurgation arithmetic") {
  ExpurgationReport rep = expurgation_budget(0.01, 0.01, 0.00005);
  CHECK(rep.final_eps == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-9));
  CHECK(rep.p_error_avg_bound == doctest::Approx(0.23));

  ExpurgationReport tiny = expurgation_budget(0.0001, 0.01, 0.00005);
  CHECK(tiny.p_error_avg_bound == doctest::Approx(0.0203));

  CHECK_THROWS_WITH_AS(expurgation_budget(0.2, 0.01, 0.00005),
                       doctest::Contains("OutOfWindow"), Error);
}
