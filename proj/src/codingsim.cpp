#include "qbc/codingsim.hpp"

#include <cmath>

#include "qbc/divergences.hpp"

namespace qbc {

namespace {

double pow_int(double base, int exp) {
  double v = 1.0;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

double log2i(int m) { return std::log2(static_cast<double>(m)); }

// Marginal channel outputs per classical symbol.
struct ModelViews {
  RVec p_u, p_v;
  RMat p_v_given_u;               // [u][v]
  std::vector<Mat> b_of_v, c_of_v;  // sum_x p(x|v) N(rho_x) marginals
  std::vector<Mat> b_of_u, c_of_u;
  std::vector<Mat> c_of_x;
  Mat b_avg, c_avg;
};

ModelViews make_views(const BroadcastChannelModel& model) {
  const int nu = model.card_u(), nv = model.card_v(), nx = model.card_x();
  const int db = model.channel().out_dims()[0], dc = model.channel().out_dims()[1];
  ModelViews mv;
  mv.p_u = RVec::Zero(nu);
  mv.p_v = RVec::Zero(nv);
  mv.p_v_given_u = RMat::Zero(nu, nv);
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) {
      mv.p_u(u) += model.p_uv()(u, v);
      mv.p_v(v) += model.p_uv()(u, v);
    }
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v)
      mv.p_v_given_u(u, v) = mv.p_u(u) > 0 ? model.p_uv()(u, v) / mv.p_u(u) : 0.0;

  std::vector<Mat> bc_of_x(nx);
  for (int x = 0; x < nx; ++x) bc_of_x[x] = model.channel().apply(model.modulator()[x]);
  mv.c_of_x.resize(nx);
  for (int x = 0; x < nx; ++x) mv.c_of_x[x] = partial_trace(bc_of_x[x], {db, dc}, {1});

  mv.b_of_v.assign(nv, Mat::Zero(db, db));
  mv.c_of_v.assign(nv, Mat::Zero(dc, dc));
  for (int v = 0; v < nv; ++v)
    for (int x = 0; x < nx; ++x) {
      mv.b_of_v[v] += model.p_x_given_v()(v, x) * partial_trace(bc_of_x[x], {db, dc}, {0});
      mv.c_of_v[v] += model.p_x_given_v()(v, x) * mv.c_of_x[x];
    }
  mv.b_of_u.assign(nu, Mat::Zero(db, db));
  mv.c_of_u.assign(nu, Mat::Zero(dc, dc));
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) {
      mv.b_of_u[u] += mv.p_v_given_u(u, v) * mv.b_of_v[v];
      mv.c_of_u[u] += mv.p_v_given_u(u, v) * mv.c_of_v[v];
    }
  mv.b_avg = Mat::Zero(db, db);
  mv.c_avg = Mat::Zero(dc, dc);
  for (int u = 0; u < nu; ++u) {
    mv.b_avg += mv.p_u(u) * mv.b_of_u[u];
    mv.c_avg += mv.p_u(u) * mv.c_of_u[u];
  }
  return mv;
}

double hn_bound(double test_err, double rate_bits, double ih_bits, double c) {
  return (1.0 + c) * test_err + (2.0 + c + 1.0 / c) * std::pow(2.0, rate_bits - ih_bits);
}

}  // namespace

CodebookConfig::CodebookConfig(int m0_, int ms_, int m1_, int md_, BroadcastChannelModel model_,
                               EpsilonBudget budget_, std::uint64_t seed_, int dim_cap_)
    : m0(m0_), ms(ms_), m1(m1_), md(md_), model(std::move(model_)), budget(budget_),
      seed(seed_), dim_cap(dim_cap_) {
  if (m0 < 1 || ms < 1 || m1 < 1 || md < 1)
    throw_validation("DimMismatch", "message counts must be at least 1");
  budget.validate();
  const double nu = model.card_u(), nv = model.card_v(), nx = model.card_x();
  const double db = model.channel().out_dims()[0], dc = model.channel().out_dims()[1];
  const double layer1 = pow_int(nu, m0) * std::max(db, dc);
  const double layer2 = nu * pow_int(nv, ms * m1) * db;
  const double secrecy = nu * pow_int(nv * pow_int(nx, md), m1) * dc;
  if (layer1 > dim_cap || layer2 > dim_cap || secrecy > dim_cap)
    throw_dim_cap("expanded simulation dimension exceeds the cap");
}

double CommonLayer::error_exact(int message) const {
  const int card = static_cast<int>(p_sym.size());
  const int n_configs = static_cast<int>(pow_int(card, copies));
  double success = 0.0;
  for (int cfg = 0; cfg < n_configs; ++cfg) {
    int rem = cfg;
    std::vector<int> sym(copies);
    for (int l = copies - 1; l >= 0; --l) {
      sym[l] = rem % card;
      rem /= card;
    }
    double w = 1.0;
    for (int l = 0; l < copies; ++l) w *= p_sym(sym[l]);
    if (w <= 0.0) continue;
    Mat s = Mat::Zero(tests[0].rows(), tests[0].cols());
    for (int l = 0; l < copies; ++l) s += tests[sym[l]];
    Mat inv = mat_fn_on_support(s, [](double x) { return 1.0 / std::sqrt(x); });
    Mat omega = inv * tests[sym[message]] * inv;
    success += w * (omega * signal[sym[message]]).trace().real();
  }
  return 1.0 - success;
}

CommonLayer build_srm_layer1(const CodebookConfig& cfg, char receiver) {
  if (receiver != 'B' && receiver != 'C')
    throw_validation("BadPartition", "receiver must be 'B' or 'C'");
  ModelViews mv = make_views(cfg.model);
  const double eps = receiver == 'B' ? cfg.budget.eps_prime - cfg.budget.delta1
                                     : cfg.budget.eps_prime - cfg.budget.delta2;

  CommonLayer layer;
  layer.copies = cfg.m0;
  layer.p_sym = mv.p_u;
  layer.signal = receiver == 'B' ? mv.b_of_u : mv.c_of_u;

  std::vector<double> w(mv.p_u.data(), mv.p_u.data() + mv.p_u.size());
  std::vector<Mat> sigma(w.size(), receiver == 'B' ? mv.b_avg : mv.c_avg);
  BlockHypoResult test = d_hypo_blocks(w, layer.signal, sigma, eps);
  layer.tests = test.block_tests;
  layer.ih_bits = test.bits;

  // POVM completeness on supp(sum of position operators), per configuration.
  const int card = static_cast<int>(mv.p_u.size());
  const int n_configs = static_cast<int>(pow_int(card, cfg.m0));
  double resid = 0.0;
  for (int c = 0; c < n_configs; ++c) {
    int rem = c;
    std::vector<int> sym(cfg.m0);
    for (int l = cfg.m0 - 1; l >= 0; --l) {
      sym[l] = rem % card;
      rem /= card;
    }
    Mat s = Mat::Zero(layer.tests[0].rows(), layer.tests[0].cols());
    for (int l = 0; l < cfg.m0; ++l) s += layer.tests[sym[l]];
    Mat inv = mat_fn_on_support(s, [](double x) { return 1.0 / std::sqrt(x); });
    Mat total = Mat::Zero(s.rows(), s.cols());
    for (int l = 0; l < cfg.m0; ++l) total += inv * layer.tests[sym[l]] * inv;
    resid = std::max(resid, max_abs(total - support_projector(s)));
  }
  layer.completeness_residual = resid;
  return layer;
}

double PairLayer::error_exact(int slot) const {
  const int nu = static_cast<int>(p_u.size());
  const int nv = static_cast<int>(p_v_given_u.cols());
  const int n_configs = static_cast<int>(pow_int(nv, slots));
  double success = 0.0;
  for (int u = 0; u < nu; ++u) {
    if (p_u(u) <= 0.0) continue;
    for (int cfg = 0; cfg < n_configs; ++cfg) {
      int rem = cfg;
      std::vector<int> sym(slots);
      for (int l = slots - 1; l >= 0; --l) {
        sym[l] = rem % nv;
        rem /= nv;
      }
      double w = p_u(u);
      for (int l = 0; l < slots; ++l) w *= p_v_given_u(u, sym[l]);
      if (w <= 0.0) continue;
      Mat s = Mat::Zero(tests[u][0].rows(), tests[u][0].cols());
      for (int l = 0; l < slots; ++l) s += tests[u][sym[l]];
      Mat inv = mat_fn_on_support(s, [](double x) { return 1.0 / std::sqrt(x); });
      Mat omega = inv * tests[u][sym[slot]] * inv;
      success += w * (omega * signal[sym[slot]]).trace().real();
    }
  }
  return 1.0 - success;
}

PairLayer build_srm_layer2(const CodebookConfig& cfg) {
  ModelViews mv = make_views(cfg.model);
  const double eps = cfg.budget.eps_prime - cfg.budget.delta3;
  const int nu = cfg.model.card_u(), nv = cfg.model.card_v();

  PairLayer layer;
  layer.slots = cfg.ms * cfg.m1;
  layer.p_u = mv.p_u;
  layer.p_v_given_u = mv.p_v_given_u;
  layer.signal = mv.b_of_v;

  // Conditional test: blocks over (u,v) pairs with weights p(u)p(v|u).
  std::vector<double> w;
  std::vector<Mat> rho_blocks, sigma_blocks;
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) {
      w.push_back(mv.p_u(u) * mv.p_v_given_u(u, v));
      rho_blocks.push_back(mv.b_of_v[v]);
      sigma_blocks.push_back(mv.b_of_u[u]);
    }
  BlockHypoResult test = d_hypo_blocks(w, rho_blocks, sigma_blocks, eps);
  layer.ih_bits = test.bits;
  layer.tests.assign(nu, std::vector<Mat>(nv));
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) layer.tests[u][v] = test.block_tests[u * nv + v];

  const int n_configs = static_cast<int>(pow_int(nv, layer.slots));
  double resid = 0.0;
  for (int u = 0; u < nu; ++u) {
    if (mv.p_u(u) <= 0.0) continue;
    for (int c = 0; c < n_configs; ++c) {
      int rem = c;
      std::vector<int> sym(layer.slots);
      for (int l = layer.slots - 1; l >= 0; --l) {
        sym[l] = rem % nv;
        rem /= nv;
      }
      Mat s = Mat::Zero(layer.tests[u][0].rows(), layer.tests[u][0].cols());
      for (int l = 0; l < layer.slots; ++l) s += layer.tests[u][sym[l]];
      Mat inv = mat_fn_on_support(s, [](double x) { return 1.0 / std::sqrt(x); });
      Mat total = Mat::Zero(s.rows(), s.cols());
      for (int l = 0; l < layer.slots; ++l) total += inv * layer.tests[u][sym[l]] * inv;
      resid = std::max(resid, max_abs(total - support_projector(s)));
    }
  }
  layer.completeness_residual = resid;
  return layer;
}

SimReport simulate_common(const CodebookConfig& cfg) {
  SimReport rep;
  const EpsilonBudget& bg = cfg.budget;
  rep.c_star_common = bg.delta1 / (2.0 * bg.eps_prime - bg.delta1);

  CommonLayer bob = build_srm_layer1(cfg, 'B');
  CommonLayer charlie = build_srm_layer1(cfg, 'C');
  rep.ih_ub = bob.ih_bits;
  rep.ih_uc = charlie.ih_bits;
  rep.p_error_common_B = bob.error_exact(0);
  rep.p_error_common_C = charlie.error_exact(0);
  rep.hn_bound_common_B =
      hn_bound(bg.eps_prime - bg.delta1, log2i(cfg.m0), bob.ih_bits, rep.c_star_common);
  const double c_star_c = bg.delta2 / (2.0 * bg.eps_prime - bg.delta2);
  rep.hn_bound_common_C = hn_bound(bg.eps_prime - bg.delta2, log2i(cfg.m0), charlie.ih_bits,
                                   c_star_c);
  rep.completeness_residual =
      std::max(bob.completeness_residual, charlie.completeness_residual);
  return rep;
}

SimReport simulate_pair(const CodebookConfig& cfg) {
  SimReport rep;
  const EpsilonBudget& bg = cfg.budget;
  rep.c_star_pair = bg.delta3 / (2.0 * bg.eps_prime - bg.delta3);

  PairLayer layer = build_srm_layer2(cfg);
  rep.ih_vb_cond = layer.ih_bits;
  rep.p_error_pair = layer.error_exact(0);
  // Exponent uses the second-layer message count 2^{Rs+R1}.
  rep.hn_bound_pair = hn_bound(bg.eps_prime - bg.delta3, log2i(cfg.ms * cfg.m1), layer.ih_bits,
                               rep.c_star_pair);
  rep.completeness_residual = layer.completeness_residual;
  return rep;
}

SimReport simulate_secrecy(const CodebookConfig& cfg) {
  SimReport rep;
  const EpsilonBudget& bg = cfg.budget;
  ModelViews mv = make_views(cfg.model);
  const int nu = cfg.model.card_u(), nv = cfg.model.card_v(), nx = cfg.model.card_x();
  const int dc = cfg.model.channel().out_dims()[1];

  // rho^C_u, the constant target per common symbol.
  std::vector<Mat> target(nu, Mat::Zero(dc, dc));
  for (int u = 0; u < nu; ++u) target[u] = mv.c_of_u[u];

  // Exact trace distance, block-diagonal over all classical registers:
  // configuration = (v_j, x_{j,1..Md}) per private slot j.
  const int slot_configs = nv * static_cast<int>(pow_int(nx, cfg.md));
  const int n_configs = static_cast<int>(pow_int(slot_configs, cfg.m1));
  double dist = 0.0;
  std::vector<int> vsym(cfg.m1);
  std::vector<std::vector<int>> xsym(cfg.m1, std::vector<int>(cfg.md));
  for (int u = 0; u < nu; ++u) {
    if (mv.p_u(u) <= 0.0) continue;
    for (int c = 0; c < n_configs; ++c) {
      int rem = c;
      double w = mv.p_u(u);
      for (int j = 0; j < cfg.m1; ++j) {
        int sc = rem % slot_configs;
        rem /= slot_configs;
        vsym[j] = sc % nv;
        sc /= nv;
        w *= mv.p_v_given_u(u, vsym[j]);
        for (int i = 0; i < cfg.md; ++i) {
          xsym[j][i] = sc % nx;
          sc /= nx;
          w *= cfg.model.p_x_given_v()(vsym[j], xsym[j][i]);
        }
      }
      if (w <= 0.0) continue;
      Mat avg = Mat::Zero(dc, dc);
      for (int j = 0; j < cfg.m1; ++j)
        for (int i = 0; i < cfg.md; ++i) avg += mv.c_of_x[xsym[j][i]];
      avg /= static_cast<double>(cfg.m1 * cfg.md);
      dist += w * 0.5 * trace_norm(avg - target[u]);
    }
  }
  rep.secrecy_tv_per_m0.assign(cfg.m0, dist);
  rep.secrecy_bound = 2.0 * (2.0 * bg.eps_dprime + bg.eta);

  // Covering quantities that gate the budget: conservative upper ends only.
  CQState induced = cfg.model.induced_state();
  TildeOptions fast;
  fast.smooth.bisect_width = 1e-3;
  fast.smooth.solver_tol = 1e-8;
  fast.max_rounds = 5;
  fast.round_tol = 1e-3;
  BracketEstimate vc = i_max_tilde_cond(induced, {"V"}, {"C"}, "U", bg.eps_dprime, fast);
  BracketEstimate xc = i_max_tilde_cond(induced, {"X"}, {"C"}, "V", bg.eps_dprime, fast);
  rep.itilde_vc_upper = vc.upper;
  rep.itilde_xc_upper = xc.upper;

  const double r1 = log2i(cfg.m1), rd = log2i(cfg.md);
  const double log_eta = std::log2(1.0 / bg.eta);
  rep.rate_eq8_ok = r1 + rd >= vc.upper + xc.upper + 4.0 * log_eta;
  rep.rate_eq9_ok = rd >= xc.upper + 2.0 * log_eta;
  return rep;
}

SimReport simulate_all(const CodebookConfig& cfg) {
  SimReport rep = simulate_common(cfg);
  SimReport pair = simulate_pair(cfg);
  SimReport sec = simulate_secrecy(cfg);
  rep.p_error_pair = pair.p_error_pair;
  rep.hn_bound_pair = pair.hn_bound_pair;
  rep.c_star_pair = pair.c_star_pair;
  rep.ih_vb_cond = pair.ih_vb_cond;
  rep.completeness_residual = std::max(rep.completeness_residual, pair.completeness_residual);
  rep.secrecy_tv_per_m0 = sec.secrecy_tv_per_m0;
  rep.secrecy_bound = sec.secrecy_bound;
  rep.itilde_vc_upper = sec.itilde_vc_upper;
  rep.itilde_xc_upper = sec.itilde_xc_upper;
  rep.rate_eq8_ok = sec.rate_eq8_ok;
  rep.rate_eq9_ok = sec.rate_eq9_ok;
  return rep;
}

ExpurgationReport expurgation_budget(double eps_prime, double eps_dprime, double eta) {
  if (!(eps_prime > 0.0 && eps_dprime > 0.0 && eta > 0.0))
    throw_validation("OutOfWindow", "parameters must be positive");
  const double window = 3.0 * eps_prime + 2.0 * std::sqrt(eps_prime);
  if (!(window > 0.0 && window < 1.0))
    throw_validation("OutOfWindow", "need 0 < 3e' + 2*sqrt(e') < 1");

  ExpurgationReport rep;
  rep.p_error_avg_bound = window;
  rep.p_secrecy_avg_bound = 4.0 * eps_dprime + 2.0 * eta;
  rep.markov_error_prob =
      3.0 * std::pow(eps_prime, 0.75) + 2.0 * std::pow(eps_prime, 0.25);
  rep.markov_secrecy_prob =
      4.0 * std::pow(eps_dprime, 0.75) + 2.0 * std::pow(eps_dprime, 1.75);
  rep.good_code_prob = 1.0 - rep.markov_error_prob - rep.markov_secrecy_prob;
  rep.final_eps = std::max(std::pow(eps_prime, 0.25), std::pow(eps_dprime, 0.25));
  return rep;
}

}  // namespace qbc
