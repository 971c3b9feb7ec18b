#include "qbc/regions.hpp"

#include <cmath>
#include <sstream>

#include "qbc/divergences.hpp"
#include "qbc/modelzoo.hpp"

namespace qbc {

namespace {

void evaluate_membership(RegionReport& rep, const RateQuadruple* quad) {
  if (!quad) return;
  quad->validate();
  rep.has_verdict = true;
  rep.member = true;
  rep.member_optimistic = true;
  for (const auto& c : rep.constraints) {
    const double lhs = rate_lhs_value(c.lhs, *quad);
    const bool ok = c.is_upper ? lhs <= c.rhs : lhs >= c.rhs;
    const bool ok_opt = c.is_upper ? lhs <= c.rhs_optimistic : lhs >= c.rhs_optimistic;
    rep.member = rep.member && ok;
    rep.member_optimistic = rep.member_optimistic && ok_opt;
  }
}

// Joint pmf helper for the diagonal fast path.
struct ClassicalJoint {
  std::vector<int> dims;
  RVec probs;

  double entropy(const std::vector<int>& subset) const {
    std::map<std::vector<int>, double> marg;
    const int total = static_cast<int>(probs.size());
    for (int f = 0; f < total; ++f) {
      if (probs(f) <= 0.0) continue;
      int rem = f;
      std::vector<int> tup(dims.size());
      for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        tup[k] = rem % dims[k];
        rem /= dims[k];
      }
      std::vector<int> key;
      for (int k : subset) key.push_back(tup[k]);
      marg[key] += probs(f);
    }
    double h = 0.0;
    for (const auto& [key, p] : marg)
      if (p > 0.0) h -= p * std::log2(p);
    return h;
  }

  double cmi(const std::vector<int>& a, const std::vector<int>& b,
             const std::vector<int>& c) const {
    auto join = [](std::vector<int> x, const std::vector<int>& y) {
      x.insert(x.end(), y.begin(), y.end());
      return x;
    };
    return entropy(join(a, c)) + entropy(join(b, c)) - entropy(join(join(a, b), c)) -
           (c.empty() ? 0.0 : entropy(c));
  }
};

}  // namespace

void RateQuadruple::validate() const {
  if (!std::isfinite(r0) || !std::isfinite(r1) || !std::isfinite(rs) || !std::isfinite(rd))
    throw_validation("NonFinite", "rates must be finite");
  if (rd < 0.0) throw_validation("NegativeRate", "randomness rate must be nonnegative");
}

double rate_lhs_value(RateLhs lhs, const RateQuadruple& quad) {
  switch (lhs) {
    case RateLhs::R0:
      return quad.r0;
    case RateLhs::R0R1Rs:
      return quad.r0 + quad.r1 + quad.rs;
    case RateLhs::Rs:
      return quad.rs;
    case RateLhs::R1Rd:
      return quad.r1 + quad.rd;
    case RateLhs::Rd:
      return quad.rd;
  }
  return 0.0;
}

RegionReport achievability_region(const BroadcastChannelModel& model, const EpsilonBudget& budget,
                                  const RateQuadruple* quad) {
  budget.validate();
  CQState s = model.induced_state();

  const double ihb = i_hypo(s, {"U"}, {"B"}, budget.eps_prime - budget.delta1);
  const double ihc = i_hypo(s, {"U"}, {"C"}, budget.eps_prime - budget.delta2);
  const double ihvb = i_hypo_cond(s, {"V"}, {"B"}, "U", budget.eps_prime - budget.delta3);
  BracketEstimate tvc = i_max_tilde_cond(s, {"V"}, {"C"}, "U", budget.eps_dprime);
  BracketEstimate txc = i_max_tilde_cond(s, {"X"}, {"C"}, "V", budget.eps_dprime);

  const double l1 = std::log2(4.0 * budget.eps_prime / (budget.delta1 * budget.delta1));
  const double l2 = std::log2(4.0 * budget.eps_prime / (budget.delta2 * budget.delta2));
  const double l3 = std::log2(4.0 * budget.eps_prime / (budget.delta3 * budget.delta3));
  const double leta = std::log2(1.0 / budget.eta);

  RegionReport rep;
  rep.quantities["ih_ub"] = ihb;
  rep.quantities["ih_uc"] = ihc;
  rep.quantities["ih_vb_given_u"] = ihvb;
  rep.brackets["itilde_vc_given_u"] = {tvc.lower, tvc.upper, tvc.heuristic};
  rep.brackets["itilde_xc_given_v"] = {txc.lower, txc.upper, txc.heuristic};

  const double common = std::min(ihb - l1, ihc - l2);
  rep.constraints.push_back({"eq5", RateLhs::R0, true, common, common});
  rep.constraints.push_back({"eq6", RateLhs::R0R1Rs, true, ihvb - l3 + common, ihvb - l3 + common});
  rep.constraints.push_back({"eq7", RateLhs::Rs, true,
                             ihvb - tvc.upper - l3 - 2.0 * leta,
                             ihvb - tvc.heuristic - l3 - 2.0 * leta});
  rep.constraints.push_back({"eq8", RateLhs::R1Rd, false,
                             tvc.upper + txc.upper + 4.0 * leta,
                             tvc.heuristic + txc.heuristic + 4.0 * leta});
  rep.constraints.push_back({"eq9", RateLhs::Rd, false, txc.upper + 2.0 * leta,
                             txc.heuristic + 2.0 * leta});
  evaluate_membership(rep, quad);
  return rep;
}

RegionReport converse_region(const BroadcastChannelModel& model, double eps,
                             const RateQuadruple* quad) {
  if (!(eps > 0.0 && eps <= 0.25))
    throw_validation("InvalidEpsilon", "converse needs eps in (0, 1/4]");
  CQState s = model.induced_state();
  const double root = std::sqrt(2.0 * eps);

  const double ihb = i_hypo(s, {"U"}, {"B"}, eps);
  const double ihc = i_hypo(s, {"U"}, {"C"}, eps);
  const double ihvb = i_hypo_cond(s, {"V"}, {"B"}, "U", eps);
  const double dvc = d_max_cmi(s, {"V"}, {"C"}, "U", root);
  const double dxc = d_max_cmi(s, {"X"}, {"C"}, "V", root);

  RegionReport rep;
  rep.quantities["ih_ub"] = ihb;
  rep.quantities["ih_uc"] = ihc;
  rep.quantities["ih_vb_given_u"] = ihvb;
  rep.quantities["dmax_vc_given_u"] = dvc;
  rep.quantities["dmax_xc_given_v"] = dxc;

  const double common = std::min(ihb, ihc);
  rep.constraints.push_back({"eq10", RateLhs::R0, true, common, common});
  rep.constraints.push_back({"eq11", RateLhs::R0R1Rs, true, ihvb + common, ihvb + common});
  rep.constraints.push_back({"eq12", RateLhs::Rs, true, ihvb - dvc, ihvb - dvc});
  rep.constraints.push_back({"eq13", RateLhs::R1Rd, false, dvc + dxc, dvc + dxc});
  rep.constraints.push_back({"eq14", RateLhs::Rd, false, dxc, dxc});
  evaluate_membership(rep, quad);
  return rep;
}

RegionReport asymptotic_region(const BroadcastChannelModel& model, const RateQuadruple* quad) {
  CQState s = model.induced_state();
  const double iub = mutual_information(s, {"U"}, {"B"});
  const double iuc = mutual_information(s, {"U"}, {"C"});
  const double ivb = conditional_mutual_information(s, {"V"}, {"B"}, {"U"});
  const double ivc = conditional_mutual_information(s, {"V"}, {"C"}, {"U"});
  const double ixc = conditional_mutual_information(s, {"X"}, {"C"}, {"V"});

  RegionReport rep;
  rep.quantities["i_ub"] = iub;
  rep.quantities["i_uc"] = iuc;
  rep.quantities["i_vb_given_u"] = ivb;
  rep.quantities["i_vc_given_u"] = ivc;
  rep.quantities["i_xc_given_v"] = ixc;

  const double common = std::min(iub, iuc);
  rep.constraints.push_back({"commonaa", RateLhs::R0, true, common, common});
  rep.constraints.push_back({"allaa", RateLhs::R0R1Rs, true, ivb + common, ivb + common});
  rep.constraints.push_back({"confiaa", RateLhs::Rs, true, ivb - ivc, ivb - ivc});
  rep.constraints.push_back({"convex2aa", RateLhs::R1Rd, false, ivc + ixc, ivc + ixc});
  rep.constraints.push_back({"convex1aa", RateLhs::Rd, false, ixc, ixc});
  evaluate_membership(rep, quad);
  return rep;
}

RegionReport classical_fastpath_region(const BroadcastChannelModel& model,
                                       const RateQuadruple* quad) {
  CQState s = model.induced_state();
  for (int t = 0; t < s.classical_size(); ++t) {
    if (s.prob(t) <= 0.0) continue;
    Mat offdiag = s.block(t);
    offdiag.diagonal().setZero();
    if (max_abs(offdiag) > 1e-12)
      throw_validation("NotClassical", "induced blocks are not diagonal");
  }

  const int nu = model.card_u(), nv = model.card_v(), nx = model.card_x();
  const int db = model.channel().out_dims()[0], dc = model.channel().out_dims()[1];
  ClassicalJoint joint;
  joint.dims = {nu, nv, nx, db, dc};
  joint.probs = RVec::Zero(nu * nv * nx * db * dc);
  for (int t = 0; t < s.classical_size(); ++t) {
    if (s.prob(t) <= 0.0) continue;
    const auto tup = s.tuple_of(t);
    const Mat& block = s.block(t);
    for (int y = 0; y < db; ++y)
      for (int z = 0; z < dc; ++z) {
        const int idx = (((tup[0] * nv + tup[1]) * nx + tup[2]) * db + y) * dc + z;
        joint.probs(idx) = s.prob(t) * block(y * dc + z, y * dc + z).real();
      }
  }

  const double iub = joint.cmi({0}, {3}, {});
  const double iuc = joint.cmi({0}, {4}, {});
  const double ivb = joint.cmi({1}, {3}, {0});
  const double ivc = joint.cmi({1}, {4}, {0});
  const double ixc = joint.cmi({2}, {4}, {1});

  RegionReport rep;
  rep.quantities["i_ub"] = iub;
  rep.quantities["i_uc"] = iuc;
  rep.quantities["i_vb_given_u"] = ivb;
  rep.quantities["i_vc_given_u"] = ivc;
  rep.quantities["i_xc_given_v"] = ixc;

  const double common = std::min(iub, iuc);
  rep.constraints.push_back({"commonaa", RateLhs::R0, true, common, common});
  rep.constraints.push_back({"allaa", RateLhs::R0R1Rs, true, ivb + common, ivb + common});
  rep.constraints.push_back({"confiaa", RateLhs::Rs, true, ivb - ivc, ivb - ivc});
  rep.constraints.push_back({"convex2aa", RateLhs::R1Rd, false, ivc + ixc, ivc + ixc});
  rep.constraints.push_back({"convex1aa", RateLhs::Rd, false, ixc, ixc});
  evaluate_membership(rep, quad);
  return rep;
}

CqReport cq_specialization(const BroadcastChannelModel& model, const EpsilonBudget& budget,
                           double eps_converse) {
  budget.validate();
  if (!(eps_converse > 0.0 && eps_converse <= 0.25))
    throw_validation("InvalidEpsilon", "converse needs eps in (0, 1/4]");
  CQState s = model.induced_state();

  const double l1 = std::log2(4.0 * budget.eps_prime / (budget.delta1 * budget.delta1));
  const double l3 = std::log2(4.0 * budget.eps_prime / (budget.delta3 * budget.delta3));
  const double leta = std::log2(1.0 / budget.eta);

  CqReport rep;
  BracketEstimate tve = i_max_tilde_cond(s, {"V"}, {"C"}, "U", budget.eps_dprime);
  rep.tilde_ve = {tve.lower, tve.upper, tve.heuristic};
  rep.ach_rc = i_hypo(s, {"U"}, {"B"}, budget.eps_prime - budget.delta1) - l1;
  rep.ach_rq = i_hypo_cond(s, {"V"}, {"B"}, "U", budget.eps_prime - budget.delta3) - tve.upper -
               l3 - 2.0 * leta;
  rep.conv_rc = i_hypo(s, {"U"}, {"B"}, eps_converse);
  rep.conv_rq = i_hypo_cond(s, {"V"}, {"B"}, "U", eps_converse) -
                d_max_cmi(s, {"V"}, {"C"}, "U", std::sqrt(2.0 * eps_converse));
  rep.asym_rc = mutual_information(s, {"U"}, {"B"});
  rep.asym_rq = conditional_mutual_information(s, {"V"}, {"B"}, {"U"}) -
                conditional_mutual_information(s, {"V"}, {"C"}, {"U"});
  return rep;
}

double coherent_info_identity_residual(const RVec& p_u, const std::vector<Vec>& phi_ru,
                                       int dim_r, int dim_a, const Mat& isometry, int dim_b,
                                       int dim_e) {
  if (static_cast<int>(phi_ru.size()) != p_u.size())
    throw_validation("DimMismatch", "ensemble size mismatch");
  if (isometry.rows() != dim_b * dim_e || isometry.cols() != dim_a)
    throw_validation("DimMismatch", "isometry shape mismatch");
  if (max_abs(isometry.adjoint() * isometry - Mat::Identity(dim_a, dim_a)) > 1e-9)
    throw_validation("NotPureEnsemble", "channel map is not an isometry");

  double lhs = 0.0, rhs = 0.0;
  for (int u = 0; u < p_u.size(); ++u) {
    if (p_u(u) <= 0.0) continue;
    const Vec& phi = phi_ru[u];
    if (phi.size() != dim_r * dim_a)
      throw_validation("DimMismatch", "ensemble vector dimension mismatch");
    if (std::abs(phi.norm() - 1.0) > 1e-9)
      throw_validation("NotPureEnsemble", "ensemble states must be normalized pure vectors");
    Vec psi = kron(Mat::Identity(dim_r, dim_r), isometry) * phi;  // on (R, B, E)
    Mat full = psi * psi.adjoint();
    const std::vector<int> dims{dim_r, dim_b, dim_e};

    Mat rho_b = partial_trace(full, dims, {1});
    Mat rho_rb = partial_trace(full, dims, {0, 1});
    lhs += p_u(u) * (von_neumann_entropy(rho_b) - von_neumann_entropy(rho_rb));

    // Measure R in its eigenbasis; the outcomes define the classical V.
    Mat rho_r = partial_trace(full, dims, {0});
    Spectrum sr = eig_hermitian(rho_r);
    double term = von_neumann_entropy(rho_b);
    double term_e = von_neumann_entropy(partial_trace(full, dims, {2}));
    for (Eigen::Index v = 0; v < sr.eigenvalues.size(); ++v) {
      const double lam = sr.eigenvalues(v);
      if (lam <= 1e-14) continue;
      // post-measurement state on (B,E) for outcome v
      Vec f = Vec::Zero(dim_b * dim_e);
      for (int r = 0; r < dim_r; ++r)
        f += std::conj(sr.eigenvectors(r, v)) * psi.segment(r * dim_b * dim_e, dim_b * dim_e);
      f /= std::sqrt(lam);
      Mat fbe = f * f.adjoint();
      Mat fb = partial_trace(fbe, {dim_b, dim_e}, {0});
      Mat fe = partial_trace(fbe, {dim_b, dim_e}, {1});
      term -= lam * von_neumann_entropy(fb);
      term_e -= lam * von_neumann_entropy(fe);
    }
    rhs += p_u(u) * (term - term_e);
  }
  return std::abs(lhs - rhs);
}

std::string scan_csv(const BroadcastChannelModel& base, const ScanSpec& spec) {
  std::vector<std::string> labels, quantity_names;
  if (spec.region == "achievability") {
    labels = {"eq5", "eq6", "eq7", "eq8", "eq9"};
    quantity_names = {"ih_ub", "ih_uc", "ih_vb_given_u"};
  } else if (spec.region == "converse") {
    labels = {"eq10", "eq11", "eq12", "eq13", "eq14"};
    quantity_names = {"ih_ub", "ih_uc", "ih_vb_given_u", "dmax_vc_given_u", "dmax_xc_given_v"};
  } else if (spec.region == "asymptotic" || spec.region == "classical") {
    labels = {"commonaa", "allaa", "confiaa", "convex2aa", "convex1aa"};
    quantity_names = {"i_ub", "i_uc", "i_vb_given_u", "i_vc_given_u", "i_xc_given_v"};
  } else {
    throw_validation("BadPartition", "unknown region " + spec.region);
  }

  std::ostringstream csv;
  csv.precision(12);
  csv << "param";
  for (const auto& q : quantity_names) csv << "," << q;
  for (const auto& l : labels) csv << "," << l;
  csv << ",error\n";

  std::vector<double> values = spec.values;
  if (spec.sweep == "none" && values.empty()) values = {0.0};

  for (double value : values) {
    csv << value;
    try {
      BroadcastChannelModel model = base;
      if (spec.sweep == "depolarize-outputs")
        model = depolarize_outputs(base, value);
      else if (spec.sweep != "none")
        throw_validation("BadPartition", "unknown sweep " + spec.sweep);

      RegionReport rep;
      if (spec.region == "achievability")
        rep = achievability_region(model, spec.budget);
      else if (spec.region == "converse")
        rep = converse_region(model, spec.eps);
      else if (spec.region == "asymptotic")
        rep = asymptotic_region(model);
      else
        rep = classical_fastpath_region(model);

      for (const auto& q : quantity_names) csv << "," << rep.quantities.at(q);
      for (const auto& c : rep.constraints) csv << "," << c.rhs;
      csv << ",\n";
    } catch (const Error& e) {
      for (size_t i = 0; i < quantity_names.size() + labels.size(); ++i) csv << ",";
      csv << "," << e.code() << "\n";
    }
  }
  return csv.str();
}

}  // namespace qbc
