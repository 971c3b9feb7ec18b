// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qbc/codingsim.hpp"
#include "qbc/conic.hpp"
#include "qbc/divergences.hpp"
#include "qbc/modelzoo.hpp"
#include "qbc/oneshot.hpp"
#include "qbc/regions.hpp"
#include "qbc/sampling.hpp"
#include "qbc/splitlemmas.hpp"

using namespace qbc;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, bool passed, const std::string& detail, double seconds) {
  std::printf("[%s] criterion %2d: %s (%.1fs)\n", passed ? "PASS" : "FAIL", criterion,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!passed) ++failures;
}

Mat diagonal(const RVec& v) {
  Mat m = Mat::Zero(v.size(), v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) m(i, i) = v(i);
  return m;
}

// 1. optimal-test values against the conic and classical oracles
void criterion1() {
  Timer timer;
  Rng rng(1001);
  double worst_conic = 0.0, worst_classical = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 3;
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d, 0.05);
    for (double eps : {0.1, 0.3, 0.5}) {
      const double spectral = d_hypo(rho, sigma, eps).bits;
      const double conic = np_conic_value(rho, sigma, eps, 1e-9);
      worst_conic = std::max(worst_conic, std::abs(spectral - conic));
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 3;
    RVec p = random_pmf(rng, d), q = random_pmf(rng, d, 0.02);
    const double eps = std::vector<double>{0.1, 0.3, 0.5}[trial % 3];
    const double quantum = d_hypo(diagonal(p), diagonal(q), eps).bits;
    worst_classical = std::max(worst_classical, std::abs(quantum - classical_dh(p, q, eps)));
  }
  const double secs = timer.seconds();
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "optimal test: |spectral-conic| max %.2e (tol 1e-5), |quantum-classical| max "
                "%.2e (tol 1e-9)",
                worst_conic, worst_classical);
  report(1, worst_conic <= 1e-5 && worst_classical <= 1e-9 && secs < 60.0, buf, secs);
}

// 2. spectral d_max against conic feasibility at +-0.01 bits
void criterion2() {
  Timer timer;
  Rng rng(1002);
  int correct = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 3;
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d, 0.05);
    const double dm = d_max(rho, sigma);
    auto feasibility = [&](double lambda) {
      ConicProgram p;
      const int y = p.add_block(d, Cone::Psd);
      p.add_subblock_equality({{y, 0, 0, 1.0}},
                              std::pow(2.0, lambda) * hermitian_part(sigma) - hermitian_part(rho));
      return solve(p, 1e-8, 100000).status;
    };
    if (feasibility(dm + 0.01) == SolveStatus::Optimal &&
        feasibility(dm - 0.01) == SolveStatus::InfeasibleCertificate)
      ++correct;
  }
  const double secs = timer.seconds();
  char buf[128];
  std::snprintf(buf, sizeof(buf), "d_max feasibility split: %d/100 instances classified", correct);
  report(2, correct == 100 && secs < 60.0, buf, secs);
}

// 3. smooth max-relative entropy: continuity at eps -> 0, monotonicity, classical oracle
void criterion3() {
  Timer timer;
  Rng rng(1003);
  bool ok = true;
  double worst_gap = 0.0, worst_mono = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 3;
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d, 0.1);
    const double dm = d_max(rho, sigma);
    SmoothingCertificate tight = d_max_smooth(rho, sigma, 1e-3);
    worst_gap = std::max(worst_gap, dm - tight.lambda_bits);
    ok = ok && tight.lambda_bits <= dm + 1e-6 && dm - tight.lambda_bits <= 0.01;

    double prev = 1e300;
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.3}) {
      const double cur = d_max_smooth(rho, sigma, eps).lambda_bits;
      worst_mono = std::max(worst_mono, cur - prev);
      ok = ok && cur <= prev + 2.1e-4;  // two bisection widths
      prev = cur;
    }
  }
  double worst_classical = 0.0;
  SmoothOptions fine;
  fine.bisect_width = 2e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + trial % 3;
    RVec p = random_pmf(rng, d, 0.05), q = random_pmf(rng, d, 0.05);
    const double quantum = d_max_smooth(diagonal(p), diagonal(q), 0.3, fine).lambda_bits;
    const double classical = classical_dmax_smooth(p, q, 0.3, 1e-9);
    worst_classical = std::max(worst_classical, std::abs(quantum - classical));
    ok = ok && std::abs(quantum - classical) <= 1e-4;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "smoothing: eps->0 gap max %.2e (tol 0.01), monotonicity slack max %.2e, "
                "classical match max %.2e (tol 1e-4)",
                worst_gap, worst_mono, worst_classical);
  report(3, ok, buf, timer.seconds());
}

// 4. one-shot quantities against the (D + h_b(eps))/(1 - eps) bounds
void criterion4() {
  Timer timer;
  Rng rng(1004);
  const std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.3};
  double worst7 = 1e300, worst9 = 1e300;
  int viol7 = 0, viol9 = 0, second_viol = 0, corrected_viol = 0;
  SmoothOptions opts;
  opts.bisect_width = 5e-4;
  opts.solver_tol = 1e-8;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 3;
    Mat rho = random_density(rng, d);
    Mat sigma = random_full_rank_density(rng, d, 0.05);
    const double eps = eps_grid[trial % eps_grid.size()];
    const double rel = relative_entropy(rho, sigma);
    const double bound = (rel + binary_entropy(eps)) / (1.0 - eps);

    const double dh = d_hypo(rho, sigma, eps).bits;
    worst7 = std::min(worst7, bound - dh);
    if (bound - dh < -1e-6) ++viol7;

    const double dmax_s = d_max_smooth(rho, sigma, std::sqrt(2.0 * eps), opts).lambda_bits;
    worst9 = std::min(worst9, bound - dmax_s);
    if (bound - dmax_s < -1e-6) ++viol9;
    if (dmax_s > (rel + binary_entropy(eps)) / eps + 1e-6) ++corrected_viol;

    // reverse-direction bound: reported, not gated
    if (eps <= 1.0 / std::sqrt(2.0)) {
      const double dmax_plain = d_max_smooth(rho, sigma, eps, opts).lambda_bits;
      if (dmax_plain < rel - 1e-6) ++second_viol;
    }
  }
  char buf[360];
  std::snprintf(buf, sizeof(buf),
                "relative-entropy bounds, /(1-eps) form: optimal-test clause %d/500 violations "
                "(worst slack %.3f), smooth-max clause %d/500 violations (worst slack %.3f)",
                viol7, worst7, viol9, worst9);
  report(4, viol7 == 0 && viol9 == 0, buf, timer.seconds());
  std::printf(
      "       diagnostics: smooth-max bound divided by eps instead of (1-eps): %d/500 "
      "violations; second inequality (ungated): %d/500 violations\n",
      corrected_viol, second_viol);
  if (viol9 > 0)
    std::printf(
        "       note: the /(1-eps) smooth-max clause is falsified by exact classical "
        "counterexamples (`qbc verify smooth-max-bound` reproduces one; see README, "
        "known red); the /eps form holds on every instance.\n");
}

// 5. conditional convex-split: relative-entropy form, distance clause, smoothed variant
void criterion5() {
  Timer timer;
  Rng rng(1005);
  int passed_re = 0;
  double worst_slack = 1e300;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 7;
    ConvexSplitInstance inst = random_convex_split_instance(rng, 2, 2, 2, n);
    VerdictReport v = verify_convex_split(inst);
    worst_slack = std::min(worst_slack, v.slack);
    if (v.slack >= -1e-7) ++passed_re;
  }
  int passed_dist = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ConvexSplitInstance inst = engineered_low_k_instance(rng, 2, 2, 2, 1.0);
    if (verify_convex_split_distance(inst, 0.5).passed) ++passed_dist;
  }
  int passed_smooth = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ConvexSplitInstance inst = engineered_low_k_instance(rng, 2, 2, 2, 1.0);
    if (verify_convex_split_smooth(inst, 0.1, 0.5).passed) ++passed_smooth;
  }
  const double secs = timer.seconds();
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "convex split: %d/500 entropy bound (worst slack %.2e), %d/50 distance clause, "
                "%d/50 smoothed",
                passed_re, worst_slack, passed_dist, passed_smooth);
  report(5, passed_re == 500 && passed_dist == 50 && passed_smooth == 50 && secs < 600.0, buf,
         secs);
}

// 6. operator inequality
void criterion6() {
  Timer timer;
  Rng rng(1006);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int passed = 0;
  double worst = 1e300;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 << (trial % 3);  // 2, 4, 8
    Mat u = random_unitary(rng, d);
    RVec eigs(d);
    for (int i = 0; i < d; ++i) eigs(i) = unit(rng);
    Mat s = u * eigs.asDiagonal() * u.adjoint();
    Mat t = 3.0 * unit(rng) * random_density(rng, d);
    VerdictReport v = verify_hayashi_nagaoka(s, t, 0.05 + 3.0 * unit(rng));
    worst = std::min(worst, -v.lhs);  // min eigenvalue of the difference
    if (-v.lhs >= -1e-8) ++passed;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "operator inequality: %d/500, worst min-eigenvalue %.2e",
                passed, worst);
  report(6, passed == 500, buf, timer.seconds());
}

// 7. decomposition identity
void criterion7() {
  Timer timer;
  Rng rng(1007);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 3;
    const int d = 2 + trial % 2;
    std::vector<Mat> comps;
    for (int i = 0; i < m; ++i) comps.push_back(random_density(rng, d));
    VerdictReport v = verify_decomposition_identity(comps, random_pmf(rng, m, 0.05),
                                                    random_full_rank_density(rng, d, 0.05));
    worst = std::max(worst, v.lhs);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "decomposition identity: worst |lhs-rhs| %.2e (tol 1e-8)",
                worst);
  report(7, worst <= 1e-8, buf, timer.seconds());
}

// 8. tiny-scale coding simulation against the operator-inequality bounds
void criterion8() {
  Timer timer;
  Rng rng(1008);
  EpsilonBudget budget;
  budget.eps_prime = 0.08;
  budget.eps_dprime = 0.3;
  budget.delta1 = budget.delta2 = budget.delta3 = 0.04;
  budget.eta = 0.05;

  const std::vector<std::array<int, 4>> shapes{
      {1, 1, 1, 1}, {2, 1, 1, 1}, {2, 1, 2, 1}, {2, 2, 1, 2}, {3, 1, 2, 2},
      {4, 1, 1, 1}, {2, 2, 2, 2}, {4, 2, 2, 1}, {1, 1, 4, 2}, {3, 2, 2, 2}};
  int ok_error = 0, ok_secrecy = 0, gated = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto& sh = shapes[trial % shapes.size()];
    BroadcastChannelModel model = random_broadcast_model(rng, 2, 2, 2, 2, 2, 2, 2);
    CodebookConfig cfg(sh[0], sh[1], sh[2], sh[3], model, budget, trial);
    SimReport rep = simulate_all(cfg);
    const bool errors_ok =
        (rep.hn_bound_common_B > 1.0 || rep.p_error_common_B <= rep.hn_bound_common_B + 1e-7) &&
        (rep.hn_bound_common_C > 1.0 || rep.p_error_common_C <= rep.hn_bound_common_C + 1e-7) &&
        (rep.hn_bound_pair > 1.0 || rep.p_error_pair <= rep.hn_bound_pair + 1e-7);
    if (errors_ok) ++ok_error;
    bool secrecy_ok = true;
    if (rep.rate_eq8_ok && rep.rate_eq9_ok) {
      ++gated;
      for (double tv : rep.secrecy_tv_per_m0)
        secrecy_ok = secrecy_ok && tv <= rep.secrecy_bound + 1e-7;
    }
    if (secrecy_ok) ++ok_secrecy;
  }
  const double secs = timer.seconds();
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "coding simulation: %d/50 error bounds, %d/50 secrecy (covering gate active on "
                "%d configs at desk scale)",
                ok_error, ok_secrecy, gated);
  report(8, ok_error == 50 && ok_secrecy == 50 && secs < 300.0, buf, secs);
}

// 9. region oracles: classical fast path, chain rule, coherent-information identity
void criterion9() {
  Timer timer;
  Rng rng(1009);
  double worst_fast = 0.0, worst_chain = 0.0, worst_coherent = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    RMat p_uv(2, 2);
    RVec flat = random_pmf(rng, 4, 0.05);
    p_uv << flat(0), flat(1), flat(2), flat(3);
    RMat p_xv(2, 2);
    p_xv.row(0) = random_pmf(rng, 2, 0.05).transpose();
    p_xv.row(1) = random_pmf(rng, 2, 0.05).transpose();
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
      worst_fast = std::max(worst_fast, std::abs(fast.quantities.at(name) - value));

    CQState s = model.induced_state();
    worst_chain =
        std::max(worst_chain, std::abs(mutual_information(s, {"U", "V"}, {"B"}) -
                                       mutual_information(s, {"U"}, {"B"}) -
                                       conditional_mutual_information(s, {"V"}, {"B"}, {"U"})));
  }
  for (int trial = 0; trial < 5; ++trial) {
    CQState s = random_broadcast_model(rng, 2, 2, 2, 2, 2, 2, 2).induced_state();
    worst_chain =
        std::max(worst_chain, std::abs(mutual_information(s, {"U", "V"}, {"B"}) -
                                       mutual_information(s, {"U"}, {"B"}) -
                                       conditional_mutual_information(s, {"V"}, {"B"}, {"U"})));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const int nu = 1 + trial % 3;
    RVec p = random_pmf(rng, nu, 0.05);
    std::vector<Vec> phis;
    for (int u = 0; u < nu; ++u) {
      Vec v = random_gaussian(rng, 4, 1).col(0);
      phis.push_back(v / v.norm());
    }
    Mat isometry = random_isometry(rng, 4, 2);
    worst_coherent =
        std::max(worst_coherent, coherent_info_identity_residual(p, phis, 2, 2, isometry, 2, 2));
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "region oracles: fast-path gap %.2e (tol 1e-9), chain rule %.2e (tol 1e-8), "
                "coherent-information identity %.2e (tol 1e-8)",
                worst_fast, worst_chain, worst_coherent);
  report(9, worst_fast <= 1e-9 && worst_chain <= 1e-8 && worst_coherent <= 1e-8, buf,
         timer.seconds());
}

// 10. product-copy convergence of the optimal-test rate toward the relative entropy
void criterion10() {
  Timer timer;
  Mat rho = diagonal((RVec(2) << 0.5, 0.5).finished());
  Mat sigma = diagonal((RVec(2) << 0.9, 0.1).finished());
  SecondOrderTable tab = second_order_diag(rho, sigma, 0.1, 12);
  const double z = std::abs(probit(0.1));
  bool inside = true;
  for (const auto& row : tab.rows) {
    const double dev = std::abs(row.dh_per_n - tab.rel_entropy);
    const double envelope = std::sqrt(tab.variance / row.n) * z + 0.2;
    inside = inside && dev <= envelope;
  }
  const double dev2 = std::abs(tab.rows[1].dh_per_n - tab.rel_entropy);
  const double dev12 = std::abs(tab.rows[11].dh_per_n - tab.rel_entropy);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "convergence diagnostic: D=%.6f, all n within the second-order envelope %s, "
                "deviation n=12 (%.4f) < n=2 (%.4f)",
                tab.rel_entropy, inside ? "yes" : "no", dev12, dev2);
  report(10, inside && dev12 < dev2 && std::abs(tab.rel_entropy - 0.736966) < 1e-5, buf,
         timer.seconds());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
