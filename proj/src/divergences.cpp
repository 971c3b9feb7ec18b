#include "qbc/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qbc {

namespace {

constexpr double kSupportLeakTol = 1e-9;

// log2 on the support, 0 elsewhere.
Mat log2_on_support(const Mat& psd) {
  return mat_fn_on_support(psd, [](double x) { return std::log2(x); });
}

double entropy_of_eigs(const RVec& eigs) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    if (eigs(i) > 0) s -= eigs(i) * std::log2(eigs(i));
  return s;
}

// Weight of rho outside supp(sigma).
double support_leak(const Mat& rho, const Mat& sigma) {
  Mat proj = support_projector(hermitian_part(sigma));
  const int d = static_cast<int>(proj.rows());
  return ((Mat::Identity(d, d) - proj) * rho).trace().real();
}

struct Partition {
  CQState ac, bc, abc, c;
  bool has_c;
};

void check_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& la : a)
    for (const auto& lb : b)
      if (la == lb) throw_validation("BadPartition", "label " + la + " appears on both sides");
}

}  // namespace

double von_neumann_entropy(const Mat& rho) {
  Spectrum s = eig_hermitian(rho);
  return entropy_of_eigs(s.eigenvalues);
}

double von_neumann_entropy(const CQState& s) {
  double h = 0.0;
  for (int t = 0; t < s.classical_size(); ++t) {
    const double p = s.prob(t);
    if (p <= 0) continue;
    h += -p * std::log2(p) + p * von_neumann_entropy(s.block(t));
  }
  return h;
}

double relative_entropy(const Mat& rho, const Mat& sigma, bool* support_violation) {
  if (rho.rows() != sigma.rows()) throw_validation("DimMismatch", "state dimensions differ");
  if (support_violation) *support_violation = false;
  if (support_leak(rho, sigma) > kSupportLeakTol) {
    if (support_violation) *support_violation = true;
    return std::numeric_limits<double>::infinity();
  }
  Spectrum sr = eig_hermitian(rho);
  double tr_rho_log_rho = 0.0;
  for (Eigen::Index i = 0; i < sr.eigenvalues.size(); ++i)
    if (sr.eigenvalues(i) > 0) tr_rho_log_rho += sr.eigenvalues(i) * std::log2(sr.eigenvalues(i));
  const double tr_rho_log_sigma = (hermitian_part(rho) * log2_on_support(sigma)).trace().real();
  return tr_rho_log_rho - tr_rho_log_sigma;
}

double relative_entropy_variance(const Mat& rho, const Mat& sigma, bool* support_violation) {
  if (rho.rows() != sigma.rows()) throw_validation("DimMismatch", "state dimensions differ");
  if (support_violation) *support_violation = false;
  if (support_leak(rho, sigma) > kSupportLeakTol) {
    if (support_violation) *support_violation = true;
    return std::numeric_limits<double>::infinity();
  }
  Mat diff = log2_on_support(rho) - log2_on_support(sigma);
  const double d = relative_entropy(rho, sigma);
  const double second = (hermitian_part(rho) * diff * diff).trace().real();
  return std::max(0.0, second - d * d);
}

double binary_entropy(double eps) {
  if (eps < 0.0 || eps > 1.0) throw_validation("InvalidEpsilon", "binary entropy needs [0,1]");
  double h = 0.0;
  if (eps > 0.0) h -= eps * std::log2(eps);
  if (eps < 1.0) h -= (1.0 - eps) * std::log2(1.0 - eps);
  return h;
}

double trace_norm(const Mat& m) {
  Spectrum s = eig_hermitian(m);
  return s.eigenvalues.cwiseAbs().sum();
}

double trace_distance(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw_validation("DimMismatch", "state dimensions differ");
  return 0.5 * trace_norm(rho - sigma);
}

double fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw_validation("DimMismatch", "state dimensions differ");
  // ||sqrt(rho) sqrt(sigma)||_1 via the eigenvalues of sqrt(rho) sigma sqrt(rho).
  Mat root = mat_fn_on_support(rho, [](double x) { return std::sqrt(x); });
  Spectrum s = eig_hermitian(hermitian_part(root * hermitian_part(sigma) * root));
  double f = 0.0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues(i) > 0) f += std::sqrt(s.eigenvalues(i));
  return f;
}

double purified_distance(const Mat& rho, const Mat& sigma) {
  const double f = fidelity(rho, sigma);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double mutual_information(const DensityOperator& s, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  check_disjoint(a, b);
  std::vector<std::string> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  DensityOperator joint = s.marginal(ab);
  const double sa = von_neumann_entropy(joint.marginal(a).matrix());
  const double sb = von_neumann_entropy(joint.marginal(b).matrix());
  const double sab = von_neumann_entropy(joint.matrix());
  return sa + sb - sab;
}

double mutual_information(const CQState& s, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  check_disjoint(a, b);
  auto split = [&](const std::vector<std::string>& labels, std::vector<std::string>& cls,
                   std::vector<std::string>& qnt) {
    for (const auto& l : labels)
      (s.has_classical(l) ? cls : qnt).push_back(l);
  };
  std::vector<std::string> ac, aq, bc, bq;
  split(a, ac, aq);
  split(b, bc, bq);
  std::vector<std::string> abc = ac, abq = aq;
  abc.insert(abc.end(), bc.begin(), bc.end());
  abq.insert(abq.end(), bq.begin(), bq.end());
  const double sa = von_neumann_entropy(s.marginal(ac, aq));
  const double sb = von_neumann_entropy(s.marginal(bc, bq));
  const double sab = von_neumann_entropy(s.marginal(abc, abq));
  return sa + sb - sab;
}

double conditional_mutual_information(const DensityOperator& s, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b,
                                      const std::vector<std::string>& given) {
  check_disjoint(a, b);
  check_disjoint(a, given);
  check_disjoint(b, given);
  auto join = [](std::vector<std::string> x, const std::vector<std::string>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  const double sac = von_neumann_entropy(s.marginal(join(a, given)).matrix());
  const double sbc = von_neumann_entropy(s.marginal(join(b, given)).matrix());
  const double sabc = von_neumann_entropy(s.marginal(join(join(a, b), given)).matrix());
  const double sc = given.empty() ? 0.0 : von_neumann_entropy(s.marginal(given).matrix());
  return sac + sbc - sabc - sc;
}

double conditional_mutual_information(const CQState& s, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b,
                                      const std::vector<std::string>& given) {
  check_disjoint(a, b);
  check_disjoint(a, given);
  check_disjoint(b, given);
  // Classical conditioning decomposes as an average over the conditioned symbols.
  for (const auto& g : given)
    if (!s.has_classical(g))
      throw_validation("BadPartition", "conditioning register " + g + " must be classical");
  if (given.empty()) return mutual_information(s, a, b);

  std::vector<std::string> keep_c, keep_q;
  for (const auto& l : a) (s.has_classical(l) ? keep_c : keep_q).push_back(l);
  for (const auto& l : b) (s.has_classical(l) ? keep_c : keep_q).push_back(l);
  std::vector<std::string> all_c = keep_c;
  all_c.insert(all_c.end(), given.begin(), given.end());
  CQState reduced = s.marginal(all_c, keep_q);

  // Average I(A;B) over the joint symbols of the conditioning registers.
  double total = 0.0;
  CQState given_marginal = reduced.marginal(given, {});
  for (int t = 0; t < given_marginal.classical_size(); ++t) {
    const double p = given_marginal.prob(t);
    if (p <= 0) continue;
    auto tup = given_marginal.tuple_of(t);
    CQState slice = reduced;
    for (size_t k = 0; k < given.size(); ++k) slice = slice.condition_on(given[k], tup[k]);
    total += p * mutual_information(slice, a, b);
  }
  return total;
}

}  // namespace qbc
