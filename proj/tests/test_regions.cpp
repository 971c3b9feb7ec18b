#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "qbc/divergences.hpp"
#include "qbc/regions.hpp"

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

BroadcastChannelModel constant_model() {
  RMat p_uv(2, 2);
  p_uv << 0.3, 0.2, 0.2, 0.3;
  RMat p_xv(2, 2);
  p_xv << 0.7, 0.3, 0.4, 0.6;
  return constant_channel_model(p_uv, p_xv, 2, diag2(0.6, 0.4), diag2(0.7, 0.3));
}

}  // namespace

TEST_CASE("constant channel carries nothing") {
  BroadcastChannelModel model = constant_model();

  RegionReport asym = asymptotic_region(model);
  for (const auto& [name, value] : asym.quantities) CHECK(std::abs(value) <= 1e-9);

  RegionReport conv = converse_region(model, 0.2);
  CHECK(conv.quantities.at("dmax_vc_given_u") <= 1e-3);
  CHECK(conv.constraints[0].rhs == doctest::Approx(-std::log2(0.8)).epsilon(1e-6));

  // the achievable common rate collapses below zero once the penalties bite
  RegionReport ach = achievability_region(model, test_budget());
  CHECK(ach.constraints[0].rhs < 0.0);
}

TEST_CASE("classical fast path equals the general path") {
  for (unsigned seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    RMat p_uv(2, 2);
    RVec flat = random_pmf(rng, 4, 0.05);
    p_uv << flat(0), flat(1), flat(2), flat(3);
    RMat p_xv(2, 2);
    p_xv.row(0) = random_pmf(rng, 2, 0.1).transpose();
    p_xv.row(1) = random_pmf(rng, 2, 0.1).transpose();
    std::vector<RMat> pyz;
    for (int x = 0; x < 2; ++x) {
      RVec cell = random_pmf(rng, 4, 0.02);
      RMat m(2, 2);
      m << cell(0), cell(1), cell(2), cell(3);
      pyz.push_back(m);
    }
    BroadcastChannelModel model = classical_broadcast_model(p_uv, p_xv, pyz, 2, 2);

    RegionReport fast = classical_fastpath_region(model);
    RegionReport general = asymptotic_region(model);
    for (const auto& [name, value] : general.quantities)
      CHECK(std::abs(fast.quantities.at(name) - value) <= 1e-9);
  }

  CHECK_THROWS_WITH_AS(classical_fastpath_region(tiny_quantum_model(9)),
                       doctest::Contains("NotClassical"), Error);
}

TEST_CASE("degenerate classical channels") {
  // Z independent of X: the randomness constraint vanishes
  RMat p_uv(2, 2);
  p_uv << 0.25, 0.25, 0.25, 0.25;
  RMat p_xv = RMat::Identity(2, 2);
  std::vector<RMat> pyz(2, RMat(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) pyz[x](y, z) = (y == x ? 0.9 : 0.1) * 0.5;
  RegionReport indep = classical_fastpath_region(classical_broadcast_model(p_uv, p_xv, pyz, 2, 2));
  CHECK(indep.quantities.at("i_xc_given_v") <= 1e-10);

  // deterministic Y = X and Z = X: no confidential rate survives
  std::vector<RMat> det(2, RMat::Zero(2, 2));
  det[0](0, 0) = 1.0;
  det[1](1, 1) = 1.0;
  RegionReport copy = classical_fastpath_region(classical_broadcast_model(p_uv, p_xv, det, 2, 2));
  CHECK(copy.constraints[2].rhs <= 1e-10);  // confidential-rate constraint
}

TEST_CASE("symmetric receivers leave no confidential rate") {
  // both outputs equal (y = z always): I(V;B|U) = I(V;C|U)
  RMat p_uv(2, 2);
  p_uv << 0.2, 0.3, 0.3, 0.2;
  RMat p_xv(2, 2);
  p_xv << 0.8, 0.2, 0.35, 0.65;
  std::vector<RMat> pyz(2, RMat::Zero(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) pyz[x](y, y) = y == x ? 0.85 : 0.15;
  RegionReport rep = classical_fastpath_region(classical_broadcast_model(p_uv, p_xv, pyz, 2, 2));
  CHECK(rep.constraints[2].rhs == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("identity channel to the primary receiver carries one qubit") {
  // trivial third-party slot, orthogonal pure modulation, V = X uniform
  RMat p_uv(1, 2);
  p_uv << 0.5, 0.5;
  RMat p_xv = RMat::Identity(2, 2);
  std::vector<Mat> modulator{ketbra(0, 2), ketbra(1, 2)};
  KrausChannel identity_to_b(2, {2, 1}, {Mat::Identity(2, 2)});
  BroadcastChannelModel model(p_uv, p_xv, modulator, identity_to_b);
  EpsilonBudget b;
  b.eps_prime = 0.08;
  b.eps_dprime = 0.3;
  b.delta1 = b.delta2 = b.delta3 = 0.04;
  b.eta = 0.05;
  CqReport rep = cq_specialization(model, b, 0.1);
  CHECK(rep.asym_rq == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("chain rule holds on every evaluated model") {
  for (unsigned seed : {5u, 6u, 7u, 8u}) {
    CQState s = tiny_quantum_model(seed).induced_state();
    const double lhs = mutual_information(s, {"U", "V"}, {"B"});
    const double rhs = mutual_information(s, {"U"}, {"B"}) +
                       conditional_mutual_information(s, {"V"}, {"B"}, {"U"});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("membership verdicts") {
  BroadcastChannelModel model = tiny_quantum_model(10);
  EpsilonBudget budget = test_budget();

  // place the rates strictly inside every computed constraint; the log
  // penalties push the message-rate ceilings negative at this scale
  RegionReport rep = achievability_region(model, budget);
  const double rd_need = rep.constraints[4].rhs;
  RateQuadruple inside{rep.constraints[0].rhs - 0.1,
                       rep.constraints[3].rhs - rd_need,  // r1 covers eq8 minus rd
                       std::min(0.0, rep.constraints[2].rhs) - 0.1, rd_need + 0.1};
  inside.rs = rep.constraints[2].rhs - 0.1;
  // keep the sum constraint satisfied as well
  inside.r0 = std::min(inside.r0, rep.constraints[1].rhs - inside.r1 - inside.rs - 0.1);
  RegionReport verdict = achievability_region(model, budget, &inside);
  REQUIRE(verdict.has_verdict);
  CHECK(verdict.member);

  // pushing the randomness below the covering threshold breaks membership
  RateQuadruple below = inside;
  below.rd = rd_need - 0.01;
  below.r1 = rep.constraints[3].rhs - below.rd + 1.0;  // keep eq8 satisfied
  CHECK_FALSE(achievability_region(model, budget, &below).member);

  RateQuadruple bad{0.0, 0.0, 0.0, -1.0};
  CHECK_THROWS_WITH_AS(achievability_region(model, budget, &bad),
                       doctest::Contains("NegativeRate"), Error);
}

TEST_CASE("converse window") {
  CHECK_THROWS_WITH_AS(converse_region(tiny_quantum_model(4), 0.3),
                       doctest::Contains("InvalidEpsilon"), Error);
}

TEST_CASE("achievability rhs never exceeds converse rhs for the matched terms") {
  // diagnostic comparison with the log-penalties removed
  BroadcastChannelModel model = binary_classical_model(0.05, 0.25);
  EpsilonBudget budget = test_budget();
  RegionReport ach = achievability_region(model, budget);
  RegionReport conv = converse_region(model, 0.1);
  const double l1 = std::log2(4.0 * budget.eps_prime / (budget.delta1 * budget.delta1));
  CHECK(ach.constraints[0].rhs <= conv.constraints[0].rhs + l1 + 1e-6);
}

TEST_CASE("cq specialization") {
  BroadcastChannelModel model = tiny_quantum_model(12);
  CqReport rep = cq_specialization(model, test_budget(), 0.1);
  CHECK(rep.asym_rq ==
        doctest::Approx(conditional_mutual_information(model.induced_state(), {"V"}, {"B"}, {"U"}) -
                        conditional_mutual_information(model.induced_state(), {"V"}, {"C"}, {"U"}))
            .epsilon(1e-9));
  CHECK(rep.conv_rc >= rep.asym_rc - 2.0);  // sanity scale only
  CHECK(rep.tilde_ve.lower <= rep.tilde_ve.upper + 1e-9);
}

TEST_CASE("coherent information identity on random pure ensembles") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim_r = 2, dim_a = 2, dim_b = 2, dim_e = 2;
    const int nu = 2;
    RVec p = random_pmf(rng, nu, 0.1);
    std::vector<Vec> phis;
    for (int u = 0; u < nu; ++u) {
      Vec v = random_gaussian(rng, dim_r * dim_a, 1).col(0);
      phis.push_back(v / v.norm());
    }
    Mat isometry = random_isometry(rng, dim_b * dim_e, dim_a);
    CHECK(coherent_info_identity_residual(p, phis, dim_r, dim_a, isometry, dim_b, dim_e) <= 1e-8);
  }

  // identity channel on pure inputs: one full qubit of coherent rate
  RVec p1(1);
  p1 << 1.0;
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  Mat iso = Mat::Zero(2, 2);  // B = A, E trivial
  iso(0, 0) = iso(1, 1) = 1.0;
  CHECK(coherent_info_identity_residual(p1, {bell}, 2, 2, iso, 2, 1) <= 1e-9);

  Mat not_iso = 0.5 * Mat::Identity(2, 2);
  CHECK_THROWS_WITH_AS(coherent_info_identity_residual(p1, {bell}, 2, 2, not_iso, 2, 1),
                       doctest::Contains("NotPureEnsemble"), Error);
}

TEST_CASE("scan rows") {
  BroadcastChannelModel model = binary_classical_model(0.02, 0.3);

  ScanSpec single;
  single.region = "asymptotic";
  std::string csv = scan_csv(model, single);
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header.find("commonaa") != std::string::npos);
  REQUIRE(std::getline(lines, row));
  // the single row equals a direct evaluation
  RegionReport direct = asymptotic_region(model);
  std::ostringstream expect;
  expect.precision(12);
  expect << direct.quantities.at("i_ub");
  CHECK(row.find(expect.str()) != std::string::npos);

  // sweep: noise makes the common-rate column monotone nonincreasing
  ScanSpec sweep;
  sweep.region = "asymptotic";
  sweep.sweep = "depolarize-outputs";
  for (int i = 0; i <= 10; ++i) sweep.values.push_back(i / 10.0);
  std::istringstream sl(scan_csv(model, sweep));
  std::getline(sl, header);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(sl, row)) {
    std::istringstream cells(row);
    std::string cell;
    std::getline(cells, cell, ',');  // param
    std::getline(cells, cell, ',');  // i_ub
    const double val = std::stod(cell);
    CHECK(val <= prev + 1e-9);
    prev = val;
    ++rows;
  }
  CHECK(rows == 11);

  // empty grid: header only
  ScanSpec empty;
  empty.region = "converse";
  empty.sweep = "depolarize-outputs";
  std::string empty_csv = scan_csv(model, empty);
  CHECK(empty_csv.find("eq10") != std::string::npos);
  CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 1);
}

TEST_CASE("dropping the covering constraints leaves the two-rate region") {
  // structural check: the first two constraints depend only on (U,V,B,C)
  // mutual informations and form the common/private region by themselves
  RegionReport rep = asymptotic_region(tiny_quantum_model(14));
  REQUIRE(rep.constraints.size() == 5);
  CHECK(rep.constraints[0].label == "commonaa");
  CHECK(rep.constraints[1].label == "allaa");
  CHECK(rep.constraints[0].lhs == RateLhs::R0);
  CHECK(rep.constraints[1].lhs == RateLhs::R0R1Rs);
  // a quadruple ignoring the dropped constraints is judged by the first two
  RateQuadruple quad{std::min(rep.quantities.at("i_ub"), rep.quantities.at("i_uc")) - 0.01,
                     rep.quantities.at("i_vb_given_u"), 0.0, 100.0};
  RegionReport verdict = asymptotic_region(tiny_quantum_model(14), &quad);
  bool two_rate_ok = true;
  for (int i = 0; i < 2; ++i) {
    const double lhs = rate_lhs_value(verdict.constraints[i].lhs, quad);
    two_rate_ok = two_rate_ok && lhs <= verdict.constraints[i].rhs;
  }
  CHECK(two_rate_ok);
}
