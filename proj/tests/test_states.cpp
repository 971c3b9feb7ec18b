#include <doctest.h>

#include "helpers.hpp"
#include "qbc/json_io.hpp"
#include "qbc/states.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

CQState two_bit_state() {
  // correlated classical bit pair (X, Y) with a qubit block per tuple
  Rng rng(3);
  std::vector<double> probs{0.4, 0.1, 0.1, 0.4};
  std::vector<Mat> blocks;
  for (int i = 0; i < 4; ++i) blocks.push_back(random_density(rng, 2));
  return CQState({{"X", 2}, {"Y", 2}}, {{"Q", 2}}, probs, blocks);
}

}  // namespace

TEST_CASE("density operator validation") {
  CHECK_THROWS_WITH_AS(DensityOperator({{"A", 2}}, diag2(0.9, 0.2)),
                       doctest::Contains("NotUnitTrace"), Error);
  CHECK_THROWS_WITH_AS(DensityOperator({{"A", 2}}, diag2(1.2, -0.2)),
                       doctest::Contains("NegativeEigenvalue"), Error);
  CHECK_THROWS_WITH_AS(DensityOperator({{"A", 3}}, diag2(0.5, 0.5)),
                       doctest::Contains("DimMismatch"), Error);
}

TEST_CASE("cq state expansion and re-extraction") {
  CQState s = two_bit_state();
  Mat full = s.expand();
  CHECK(trace_real(full) == doctest::Approx(1.0).epsilon(1e-12));
  for (int t = 0; t < s.classical_size(); ++t) {
    Mat block = full.block(t * 2, t * 2, 2, 2);
    CHECK(max_abs(block - s.prob(t) * s.block(t)) <= 1e-14);
  }
  // off-diagonal blocks are exactly zero
  CHECK(max_abs(full.block(0, 2, 2, 2)) == 0.0);
}

TEST_CASE("condition then marginalize recovers weights") {
  CQState s = two_bit_state();
  CQState given0 = s.condition_on("X", 0);
  CHECK(given0.prob(0) == doctest::Approx(0.8));
  CHECK(given0.prob(1) == doctest::Approx(0.2));
  CHECK_THROWS_WITH_AS(
      CQState({{"X", 2}}, {{"Q", 2}}, {1.0, 0.0}, {diag2(1, 0), diag2(1, 0)}).condition_on("X", 1),
      doctest::Contains("ZeroProbabilitySymbol"), Error);

  // conditioning a uniform register leaves a single certain tuple
  CQState uniform({{"Z", 2}}, {{"Q", 2}}, {0.5, 0.5}, {diag2(1, 0), diag2(0, 1)});
  CQState cond = uniform.condition_on("Z", 1);
  CHECK(cond.classical().empty());
  CHECK(cond.prob(0) == doctest::Approx(1.0));
}

TEST_CASE("classical marginalization matches direct summation") {
  CQState s = two_bit_state();
  CQState marg = s.marginalize_classical({"Y"});
  for (int x = 0; x < 2; ++x) {
    double p = 0.0;
    Mat sum = Mat::Zero(2, 2);
    for (int y = 0; y < 2; ++y) {
      const int f = x * 2 + y;
      p += s.prob(f);
      sum += s.prob(f) * s.block(f);
    }
    CHECK(marg.prob(x) == doctest::Approx(p));
    CHECK(max_abs(marg.block(x) - sum / p) <= 1e-13);
  }
}

TEST_CASE("apply_channel examples") {
  Rng rng(7);
  Mat rho = random_density(rng, 2);

  KrausChannel id(2, {2}, {Mat::Identity(2, 2)});
  CHECK(max_abs(id.apply(rho) - rho) <= 1e-14);

  // fully depolarizing qubit channel
  std::vector<Mat> dep;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat k = Mat::Zero(2, 2);
      k(i, j) = 1.0 / std::sqrt(2.0);
      dep.push_back(k);
    }
  KrausChannel depolarize(2, {2}, dep);
  CHECK(max_abs(depolarize.apply(ketbra(0, 2)) - 0.5 * Mat::Identity(2, 2)) <= 1e-12);

  // amplitude damping with gamma = 1 sends everything to |0>
  Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
  k0(0, 0) = 1.0;
  k1(0, 1) = 1.0;
  KrausChannel damp(2, {2}, {k0, k1});
  CHECK(max_abs(damp.apply(0.5 * Mat::Identity(2, 2)) - ketbra(0, 2)) <= 1e-12);

  CHECK_THROWS_WITH_AS(KrausChannel(2, {2}, {0.5 * Mat::Identity(2, 2)}),
                       doctest::Contains("NotTracePreserving"), Error);
}

TEST_CASE("random channels preserve trace and positivity") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    KrausChannel ch(2, {2, 2}, random_kraus(rng, 2, 4, 2));
    Mat out = ch.apply(random_density(rng, 2));
    CHECK(std::abs(trace_real(out) - 1.0) <= 1e-9);
    CHECK(min_eigenvalue(hermitian_part(out)) >= -1e-9);
  }
}

TEST_CASE("induced state structure") {
  BroadcastChannelModel model = binary_classical_model(0.1, 0.2);
  CQState s = model.induced_state();
  CHECK(s.classical_size() == 8);
  double total = 0.0;
  for (int t = 0; t < 8; ++t) total += s.prob(t);
  CHECK(total == doctest::Approx(1.0));
  // classical channel embedded diagonally keeps every block diagonal
  for (int t = 0; t < 8; ++t) {
    Mat off = s.block(t);
    off.diagonal().setZero();
    CHECK(max_abs(off) <= 1e-14);
  }
  // blocks depend only on x and match the direct mixture
  CQState dropped = s.marginalize_classical({"X"});
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) {
      Mat direct = Mat::Zero(4, 4);
      for (int x = 0; x < 2; ++x)
        direct += model.p_x_given_v()(v, x) *
                  model.channel().apply(model.modulator()[x]);
      CHECK(max_abs(dropped.block(u * 2 + v) - direct) <= 1e-12);
    }
}

TEST_CASE("full expansion of a 2x2x2 qubit-output model has unit trace") {
  BroadcastChannelModel model = tiny_quantum_model(99);
  Mat full = model.induced_state().expand();
  CHECK(full.rows() == 32);
  CHECK(trace_real(full) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("json round trips") {
  Rng rng(13);
  DensityOperator rho({{"A", 2}, {"B", 3}}, random_density(rng, 6));
  DensityOperator rho2 = state_from_json(state_to_json(rho));
  CHECK(max_abs(rho.matrix() - rho2.matrix()) <= 1e-15);
  CHECK(rho2.systems()[1].label == "B");

  CQState cq = two_bit_state();
  CQState cq2 = cqstate_from_json(cqstate_to_json(cq));
  CHECK(cq2.classical_size() == cq.classical_size());
  for (int t = 0; t < cq.classical_size(); ++t) {
    CHECK(cq2.prob(t) == doctest::Approx(cq.prob(t)));
    CHECK(max_abs(cq2.block(t) - cq.block(t)) <= 1e-15);
  }

  BroadcastChannelModel model = binary_classical_model(0.05, 0.3);
  BroadcastChannelModel model2 = model_from_json(model_to_json(model));
  CHECK(max_abs(model2.induced_state().expand() - model.induced_state().expand()) <= 1e-12);
}

TEST_CASE("loaders name the violated invariant") {
  Json bad = state_to_json(DensityOperator({{"A", 2}}, diag2(0.5, 0.5)));
  bad["matrix"][0][0][0] = 0.9;  // trace now 1.4
  CHECK_THROWS_WITH_AS(state_from_json(bad), doctest::Contains("NotUnitTrace"), Error);

  Json missing;
  missing["dims"] = {2};
  CHECK_THROWS_WITH_AS(state_from_json(missing), doctest::Contains("SchemaViolation"), Error);
}
