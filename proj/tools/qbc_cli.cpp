#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qbc/codingsim.hpp"
#include "qbc/divergences.hpp"
#include "qbc/json_io.hpp"
#include "qbc/modelzoo.hpp"
#include "qbc/oneshot.hpp"
#include "qbc/regions.hpp"
#include "qbc/sampling.hpp"
#include "qbc/splitlemmas.hpp"

namespace {

using namespace qbc;
using Clock = std::chrono::steady_clock;

struct GlobalOpts {
  double tol = 1e-8;
  int dim_cap = 16384;
  std::uint64_t seed = 1;
  bool no_meta = false;
};

double env_or(const char* name, double fallback) {
  const char* v = std::getenv(name);
  return v ? std::atof(v) : fallback;
}

std::uint64_t env_or_u64(const char* name, std::uint64_t fallback) {
  const char* v = std::getenv(name);
  return v ? static_cast<std::uint64_t>(std::atoll(v)) : fallback;
}

std::vector<std::string> split_labels(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string part;
  while (std::getline(is, part, ',')) out.push_back(part);
  return out;
}

void emit(Json j, const GlobalOpts& g, Clock::time_point started) {
  if (!g.no_meta) {
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
    j["runtime_ms"] = ms;
  }
  std::cout << j.dump(2) << "\n";
}

Json bracket_json(const BracketEstimate& br) {
  return Json{{"lower", br.lower}, {"upper", br.upper}, {"heuristic", br.heuristic},
              {"method", br.method}};
}

Json bracket_json(const Bracket& br) {
  return Json{{"lower", br.lower}, {"upper", br.upper}, {"heuristic", br.heuristic}};
}

// Loads either a density-operator file or a cq-state file, normalized to a
// labeled density operator.
DensityOperator load_any_state(const std::string& path) {
  Json j = load_json_file(path);
  if (j.contains("classical")) return cqstate_from_json(j).expand_density();
  return state_from_json(j);
}

int run_entropy(const std::string& sub, const GlobalOpts& g, const std::string& rho_path,
                const std::string& sigma_path, const std::string& cq_path, const std::string& a,
                const std::string& b, const std::string& given, double eps,
                Clock::time_point started) {
  Json out;
  out["quantity"] = sub;
  if (sub == "dh") {
    DHypoResult r = d_hypo(load_any_state(rho_path).matrix(),
                           load_any_state(sigma_path).matrix(), eps);
    out["value"] = r.bits;
    out["certificate_summary"] =
        Json{{"threshold", r.test.threshold},
             {"type1", r.test.type1},
             {"type2", r.test.type2},
             {"lagrangian_residual", r.certificate_residual},
             {"conic_fallback", r.conic_fallback}};
  } else if (sub == "rel") {
    bool viol = false;
    out["value"] = relative_entropy(load_any_state(rho_path).matrix(),
                                    load_any_state(sigma_path).matrix(), &viol);
    out["certificate_summary"] = Json{{"support_violation", viol}};
  } else if (sub == "dmax") {
    bool viol = false;
    out["value"] = d_max(load_any_state(rho_path).matrix(),
                         load_any_state(sigma_path).matrix(), &viol);
    out["certificate_summary"] = Json{{"support_violation", viol}};
  } else if (sub == "dmax-smooth") {
    SmoothOptions opts;
    opts.solver_tol = std::min(g.tol, 1e-7);
    SmoothingCertificate cert = d_max_smooth(load_any_state(rho_path).matrix(),
                                             load_any_state(sigma_path).matrix(), eps, opts);
    out["value"] = cert.lambda_bits;
    out["certificate_summary"] = Json{{"distance", cert.distance},
                                      {"feasibility_residual", cert.feasibility_residual},
                                      {"support_violation", cert.support_violation}};
  } else if (sub == "mi" || sub == "cmi") {
    const bool conditional = sub == "cmi";
    if (!cq_path.empty()) {
      CQState s = cqstate_from_json(load_json_file(cq_path));
      out["value"] = conditional
                         ? conditional_mutual_information(s, split_labels(a), split_labels(b),
                                                          split_labels(given))
                         : mutual_information(s, split_labels(a), split_labels(b));
    } else {
      DensityOperator s = load_any_state(rho_path);
      out["value"] = conditional
                         ? conditional_mutual_information(s, split_labels(a), split_labels(b),
                                                          split_labels(given))
                         : mutual_information(s, split_labels(a), split_labels(b));
    }
  } else if (sub == "imax-tilde") {
    BracketEstimate br;
    if (!cq_path.empty()) {
      CQState s = cqstate_from_json(load_json_file(cq_path));
      br = given.empty() ? i_max_tilde(s, split_labels(a), split_labels(b), eps)
                         : i_max_tilde_cond(s, split_labels(a), split_labels(b), given, eps);
    } else {
      br = i_max_tilde(load_any_state(rho_path), split_labels(a), split_labels(b), eps);
    }
    out["bracket"] = bracket_json(br);
  } else {
    throw_validation("UnknownSubcommand", sub);
  }
  emit(out, g, started);
  return 0;
}

struct TrialStats {
  int passed = 0;
  int failed = 0;
  double worst_slack = 1e300;
  Json failure;

  void add(const VerdictReport& v, const Json& reproducer) {
    if (v.passed) {
      ++passed;
    } else {
      ++failed;
      if (failure.is_null()) failure = reproducer;
    }
    worst_slack = std::min(worst_slack, v.slack);
  }
};

Json instance_fixture(const ConvexSplitInstance& inst, double eps, double delta) {
  // cqstate.json pair: the joint and the per-symbol product reference
  const int nx = static_cast<int>(inst.p_x.size());
  std::vector<double> probs(inst.p_x.data(), inst.p_x.data() + nx);
  std::vector<Mat> ref_blocks;
  for (int x = 0; x < nx; ++x)
    ref_blocks.push_back(kron(partial_trace(inst.rho_ab[x], {inst.dim_a, inst.dim_b}, {0}),
                              inst.sigma_b[x]));
  CQState rho({{"X", nx}}, {{"A", inst.dim_a}, {"B", inst.dim_b}}, probs, inst.rho_ab);
  CQState ref({{"X", nx}}, {{"A", inst.dim_a}, {"B", inst.dim_b}}, probs, ref_blocks);
  return Json{{"rho", cqstate_to_json(rho)}, {"sigma", cqstate_to_json(ref)},
              {"n", inst.n},     {"delta", delta},
              {"epsilon", eps},  {"k_bits", inst.k_bits}};
}

int run_verify(const std::string& sub, const GlobalOpts& g, int trials, int dim, int copies,
               double eps, double delta, const std::string& dump_path,
               Clock::time_point started) {
  if (trials < 1) throw_validation("InvalidTrialCount", "need at least one trial");
  Rng rng(g.seed);
  TrialStats stats;

  for (int t = 0; t < trials; ++t) {
    if (sub == "convex-split") {
      const int n = copies > 0 ? copies : 2 + static_cast<int>(rng() % 7);
      ConvexSplitInstance inst = random_convex_split_instance(rng, 2, 2, 2, n);
      stats.add(verify_convex_split(inst), instance_fixture(inst, 0.0, 0.0));
    } else if (sub == "convex-split-smooth") {
      ConvexSplitInstance inst = engineered_low_k_instance(rng, 2, 2, 2, 1.0);
      stats.add(verify_convex_split_smooth(inst, eps, delta),
                instance_fixture(inst, eps, delta));
    } else if (sub == "hayashi-nagaoka") {
      const int d = dim > 0 ? dim : 2 << (t % 3);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Mat u = random_unitary(rng, d);
      RVec eigs(d);
      for (int i = 0; i < d; ++i) eigs(i) = unit(rng);
      Mat s = u * eigs.asDiagonal() * u.adjoint();
      Mat tt = 3.0 * unit(rng) * random_density(rng, d);
      const double c = 0.05 + 3.0 * unit(rng);
      stats.add(verify_hayashi_nagaoka(s, tt, c),
                Json{{"d", d}, {"c", c}, {"seed_index", t}});
    } else if (sub == "decomposition") {
      const int m = 2 + static_cast<int>(rng() % 3);
      std::vector<Mat> comps;
      for (int i = 0; i < m; ++i) comps.push_back(random_density(rng, 2));
      stats.add(verify_decomposition_identity(comps, random_pmf(rng, m, 0.05),
                                              random_full_rank_density(rng, 2, 0.05)),
                Json{{"m", m}, {"seed_index", t}});
    } else if (sub == "smooth-max-bound") {
      // Diagnostic: the (D + h_b)/(1 - eps) form of the smooth-max bound.
      // Exact classical counterexamples exist (the /eps form always holds),
      // so this verifier is expected to fail on skewed instances.
      const int d = dim > 0 ? dim : 2 + t % 3;
      RVec p = random_pmf(rng, d), q = random_pmf(rng, d, 0.02);
      const double lhs = classical_dmax_smooth(p, q, std::sqrt(2.0 * eps), 1e-9);
      double rel = 0.0;
      for (int i = 0; i < d; ++i)
        if (p(i) > 0) rel += p(i) * std::log2(p(i) / q(i));
      const double bound = (rel + binary_entropy(eps)) / (1.0 - eps);
      Json repro;
      repro["p"] = std::vector<double>(p.data(), p.data() + d);
      repro["q"] = std::vector<double>(q.data(), q.data() + d);
      repro["eps"] = eps;
      repro["lhs"] = lhs;
      repro["bound_div_one_minus_eps"] = bound;
      repro["bound_div_eps"] = (rel + binary_entropy(eps)) / eps;
      stats.add(make_verdict(lhs, bound, "smooth-max-bound", 1e-6), repro);
    } else if (sub == "pinsker") {
      const int d = dim > 0 ? dim : (t % 2 ? 3 : 2);
      Mat rho = random_density(rng, d);
      Mat sigma = random_full_rank_density(rng, d, 0.05);
      const double f = fidelity(rho, sigma);
      const double rel = relative_entropy(rho, sigma);
      stats.add(make_verdict(std::pow(2.0, -rel), f * f, "pinsker", 1e-9),
                Json{{"d", d}, {"seed_index", t}});
    } else if (sub == "purified-props") {
      const int d = dim > 0 ? dim : 3;
      Mat a = random_density(rng, d), b = random_density(rng, d), c = random_density(rng, d);
      VerdictReport tri = make_verdict(
          purified_distance(a, b), purified_distance(a, c) + purified_distance(c, b), "triangle",
          1e-9);
      stats.add(tri, Json{{"prop", "triangle"}, {"seed_index", t}});
      KrausChannel ch(d, {d}, random_kraus(rng, d, d, 2));
      stats.add(make_verdict(purified_distance(ch.apply(a), ch.apply(b)),
                             purified_distance(a, b), "monotonicity", 1e-9),
                Json{{"prop", "monotonicity"}, {"seed_index", t}});
      Mat proj = random_projector(rng, d, 1 + static_cast<int>(rng() % (d - 1)));
      Mat clipped = proj * a * proj;
      const double miss = 1.0 - trace_real(clipped);
      const double fc = fidelity(a, clipped);
      stats.add(make_verdict(std::sqrt(std::max(0.0, 1.0 - fc * fc)),
                             std::sqrt(std::max(0.0, 2.0 * miss - miss * miss)),
                             "projector-perturbation", 1e-9),
                Json{{"prop", "projector-perturbation"}, {"seed_index", t}});
      stats.add(make_verdict(std::abs(fidelity(proj * a * proj, b) -
                                      fidelity(a, proj * b * proj)),
                             1e-9, "overlap-swap", 1e-9),
                Json{{"prop", "overlap-swap"}, {"seed_index", t}});
    } else {
      throw_validation("UnknownSubcommand", sub);
    }
  }

  Json out;
  out["verifier"] = sub;
  out["trials"] = trials;
  out["passed"] = stats.passed;
  out["failed"] = stats.failed;
  out["worst_slack"] = stats.worst_slack;
  if (stats.failed > 0) {
    std::string path = dump_path.empty() ? ("qbc-verify-" + sub + "-failure.json") : dump_path;
    save_json_file(path, stats.failure);
    out["reproducer"] = path;
  }
  emit(out, g, started);
  return stats.failed == 0 ? 0 : 1;
}

EpsilonBudget budget_from_json(const Json& j) {
  EpsilonBudget b;
  b.eps_prime = j.at("eps1").get<double>();
  b.eps_dprime = j.at("eps2").get<double>();
  b.delta1 = j.at("delta1").get<double>();
  b.delta2 = j.at("delta2").get<double>();
  b.delta3 = j.at("delta3").get<double>();
  b.eta = j.at("eta").get<double>();
  return b;
}

int run_simulate(const GlobalOpts& g, const std::string& config_path, Clock::time_point started) {
  Json j = load_json_file(config_path);
  BroadcastChannelModel model = model_from_json(j.at("model"));
  CodebookConfig cfg(j.at("M0").get<int>(), j.at("Ms").get<int>(), j.at("M1").get<int>(),
                     j.at("Md").get<int>(), model, budget_from_json(j),
                     j.value("seed", 0), g.dim_cap);
  SimReport rep = simulate_all(cfg);

  Json out;
  out["p_error_common_B"] = rep.p_error_common_B;
  out["p_error_common_C"] = rep.p_error_common_C;
  out["p_error_pair"] = rep.p_error_pair;
  out["hn_bound_common_B"] = rep.hn_bound_common_B;
  out["hn_bound_common_C"] = rep.hn_bound_common_C;
  out["hn_bound_pair"] = rep.hn_bound_pair;
  out["c_star_common"] = rep.c_star_common;
  out["c_star_pair"] = rep.c_star_pair;
  out["ih_ub"] = rep.ih_ub;
  out["ih_uc"] = rep.ih_uc;
  out["ih_vb_given_u"] = rep.ih_vb_cond;
  out["secrecy_tv_per_m0"] = rep.secrecy_tv_per_m0;
  out["secrecy_bound"] = rep.secrecy_bound;
  out["itilde_vc_upper"] = rep.itilde_vc_upper;
  out["itilde_xc_upper"] = rep.itilde_xc_upper;
  out["rate_eq8_ok"] = rep.rate_eq8_ok;
  out["rate_eq9_ok"] = rep.rate_eq9_ok;
  out["completeness_residual"] = rep.completeness_residual;
  emit(out, g, started);
  return 0;
}

Json region_json(const RegionReport& rep) {
  Json out;
  for (const auto& [name, value] : rep.quantities) out["quantities"][name] = value;
  for (const auto& [name, br] : rep.brackets) out["quantities"][name] = bracket_json(br);
  Json cons = Json::array();
  for (const auto& c : rep.constraints)
    cons.push_back(Json{{"label", c.label},
                        {"direction", c.is_upper ? "<=" : ">="},
                        {"rhs", c.rhs},
                        {"rhs_optimistic", c.rhs_optimistic}});
  out["constraints"] = cons;
  if (rep.has_verdict) {
    out["member"] = rep.member;
    out["member_optimistic_uncertified"] = rep.member_optimistic;
  }
  return out;
}

int run_region(const std::string& sub, const GlobalOpts& g, const std::string& model_path,
               const EpsilonBudget& budget, double eps, const std::string& quad_csv,
               const std::string& scan_path, const std::string& out_path,
               Clock::time_point started) {
  BroadcastChannelModel model = model_from_json(load_json_file(model_path));

  if (!scan_path.empty()) {
    Json sj = load_json_file(scan_path);
    ScanSpec spec;
    spec.region = sub;
    spec.sweep = sj.value("sweep", "none");
    if (sj.contains("values")) spec.values = sj.at("values").get<std::vector<double>>();
    spec.budget = budget;
    spec.eps = eps;
    const std::string csv = scan_csv(model, spec);
    if (out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream f(out_path);
      f << csv;
      Json out{{"rows", std::count(csv.begin(), csv.end(), '\n') - 1}, {"csv", out_path}};
      emit(out, g, started);
    }
    return 0;
  }

  std::optional<RateQuadruple> quad;
  if (!quad_csv.empty()) {
    auto parts = split_labels(quad_csv);
    if (parts.size() != 4) throw_validation("SchemaViolation", "--quad needs R0,R1,Rs,Rd");
    quad = RateQuadruple{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
                         std::stod(parts[3])};
  }

  Json out;
  if (sub == "achievability")
    out = region_json(achievability_region(model, budget, quad ? &*quad : nullptr));
  else if (sub == "converse")
    out = region_json(converse_region(model, eps, quad ? &*quad : nullptr));
  else if (sub == "asymptotic")
    out = region_json(asymptotic_region(model, quad ? &*quad : nullptr));
  else if (sub == "classical")
    out = region_json(classical_fastpath_region(model, quad ? &*quad : nullptr));
  else if (sub == "cq") {
    CqReport rep = cq_specialization(model, budget, eps);
    out = Json{{"achievable_rc", rep.ach_rc},   {"achievable_rq", rep.ach_rq},
               {"converse_rc", rep.conv_rc},    {"converse_rq", rep.conv_rq},
               {"asymptotic_rc", rep.asym_rc},  {"asymptotic_rq", rep.asym_rq},
               {"tilde_ve", bracket_json(rep.tilde_ve)}};
  } else {
    throw_validation("UnknownSubcommand", sub);
  }
  emit(out, g, started);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto started = Clock::now();
  GlobalOpts g;
  g.tol = env_or("QBC_TOL", g.tol);
  g.dim_cap = static_cast<int>(env_or("QBC_DIM_CAP", g.dim_cap));
  g.seed = env_or_u64("QBC_SEED", g.seed);

  CLI::App app{"One-shot quantum broadcast-channel laboratory"};
  app.require_subcommand(1);
  app.add_option("--tol", g.tol, "solver tolerance");
  app.add_option("--dim-cap", g.dim_cap, "expanded-dimension cap");
  app.add_option("--seed", g.seed, "rng seed");
  app.add_flag("--no-meta", g.no_meta, "omit runtime metadata for byte-stable output");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "one-shot and asymptotic quantities");
  entropy->require_subcommand(1);
  entropy->fallthrough();
  std::string rho_path, sigma_path, cq_path, labels_a, labels_b, labels_given;
  double eps = 0.1;
  for (const char* name :
       {"dh", "rel", "dmax", "dmax-smooth", "mi", "cmi", "imax-tilde"}) {
    auto* sc = entropy->add_subcommand(name);
    sc->fallthrough();
    sc->add_option("--rho", rho_path, "state.json");
    sc->add_option("--sigma", sigma_path, "state.json");
    sc->add_option("--cq", cq_path, "cqstate.json");
    sc->add_option("--a", labels_a, "comma-separated labels");
    sc->add_option("--b", labels_b, "comma-separated labels");
    sc->add_option("--given", labels_given, "conditioning label(s)");
    sc->add_option("--eps", eps, "smoothing / error parameter");
  }

  // verify
  auto* verify = app.add_subcommand("verify", "constructive lemma verifiers");
  verify->require_subcommand(1);
  verify->fallthrough();
  int trials = 100, dim = 0, copies = 0;
  double v_eps = 0.1, v_delta = 0.5;
  std::string dump_path;
  for (const char* name : {"convex-split", "convex-split-smooth", "hayashi-nagaoka",
                           "decomposition", "pinsker", "purified-props", "smooth-max-bound"}) {
    auto* sc = verify->add_subcommand(name);
    sc->fallthrough();
    sc->add_option("--trials", trials, "trial count");
    sc->add_option("--dims", dim, "operator dimension");
    sc->add_option("--n", copies, "copy count (convex split)");
    sc->add_option("--eps", v_eps, "smoothing parameter");
    sc->add_option("--delta", v_delta, "distance parameter");
    sc->add_option("--dump", dump_path, "reproducer path on failure");
  }

  // simulate
  auto* simulate = app.add_subcommand("simulate", "tiny-scale coding simulation");
  simulate->fallthrough();
  std::string config_path;
  simulate->add_option("--config", config_path, "sim.json")->required();

  // region
  auto* region = app.add_subcommand("region", "rate-region evaluation");
  region->require_subcommand(1);
  region->fallthrough();
  std::string model_path, quad_csv, scan_path, out_path;
  double eps1 = 0.08, eps2 = 0.3, d1 = 0.04, d2 = 0.04, d3 = 0.04, eta = 0.05, r_eps = 0.1;
  for (const char* name : {"achievability", "converse", "asymptotic", "classical", "cq"}) {
    auto* sc = region->add_subcommand(name);
    sc->fallthrough();
    sc->add_option("--model", model_path, "model.json")->required();
    sc->add_option("--eps1", eps1, "test error budget");
    sc->add_option("--eps2", eps2, "covering smoothing budget");
    sc->add_option("--d1", d1);
    sc->add_option("--d2", d2);
    sc->add_option("--d3", d3);
    sc->add_option("--eta", eta);
    sc->add_option("--eps", r_eps, "converse epsilon");
    sc->add_option("--quad", quad_csv, "R0,R1,Rs,Rd membership query");
    sc->add_option("--scan", scan_path, "grid.json");
    sc->add_option("--out", out_path, "csv output path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (entropy->parsed()) {
      return run_entropy(entropy->get_subcommands()[0]->get_name(), g, rho_path, sigma_path,
                         cq_path, labels_a, labels_b, labels_given, eps, started);
    }
    if (verify->parsed()) {
      return run_verify(verify->get_subcommands()[0]->get_name(), g, trials, dim, copies, v_eps,
                        v_delta, dump_path, started);
    }
    if (simulate->parsed()) return run_simulate(g, config_path, started);
    if (region->parsed()) {
      EpsilonBudget budget;
      budget.eps_prime = eps1;
      budget.eps_dprime = eps2;
      budget.delta1 = d1;
      budget.delta2 = d2;
      budget.delta3 = d3;
      budget.eta = eta;
      return run_region(region->get_subcommands()[0]->get_name(), g, model_path, budget, r_eps,
                        quad_csv, scan_path, out_path, started);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Validation:
        return 2;
      case ErrorKind::Solver:
        return 3;
      case ErrorKind::DimensionCap:
        return 4;
    }
  } catch (const Json::exception& e) {
    std::cerr << "error: MalformedJson: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
