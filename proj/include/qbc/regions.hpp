#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbc/budget.hpp"
#include "qbc/oneshot.hpp"
#include "qbc/states.hpp"

namespace qbc {

struct RateQuadruple {
  double r0 = 0.0;
  double r1 = 0.0;
  double rs = 0.0;
  double rd = 0.0;

  void validate() const;
};

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double heuristic = 0.0;
};

// Which rate combination a constraint bounds.
enum class RateLhs { R0, R0R1Rs, Rs, R1Rd, Rd };

struct RegionConstraint {
  std::string label;  // equation tag used in reports and CSV headers
  RateLhs lhs;
  bool is_upper = true;          // lhs <= rhs when true, lhs >= rhs otherwise
  double rhs = 0.0;              // certified value (conservative bracket ends)
  double rhs_optimistic = 0.0;   // heuristic bracket values instead
};

struct RegionReport {
  std::map<std::string, double> quantities;
  std::map<std::string, Bracket> brackets;
  std::vector<RegionConstraint> constraints;
  bool has_verdict = false;
  bool member = false;             // certified verdict
  bool member_optimistic = false;  // non-certified variant
};

double rate_lhs_value(RateLhs lhs, const RateQuadruple& quad);

RegionReport achievability_region(const BroadcastChannelModel& model, const EpsilonBudget& budget,
                                  const RateQuadruple* quad = nullptr);
RegionReport converse_region(const BroadcastChannelModel& model, double eps,
                             const RateQuadruple* quad = nullptr);
RegionReport asymptotic_region(const BroadcastChannelModel& model,
                               const RateQuadruple* quad = nullptr);
// Classical fast path on diagonal models; must agree with asymptotic_region.
RegionReport classical_fastpath_region(const BroadcastChannelModel& model,
                                       const RateQuadruple* quad = nullptr);

// Classical+quantum specialization: the third-party slot is read as the
// inaccessible environment E.
struct CqReport {
  double ach_rc = 0.0;
  double ach_rq = 0.0;
  double conv_rc = 0.0;
  double conv_rq = 0.0;
  double asym_rc = 0.0;
  double asym_rq = 0.0;
  Bracket tilde_ve;
};
CqReport cq_specialization(const BroadcastChannelModel& model, const EpsilonBudget& budget,
                           double eps_converse);

// |I(R>BU) - (I(V;B|U) - I(V;E|U))| with V obtained by measuring R in the
// per-symbol Schmidt basis; the ensemble states must be pure and the channel
// an isometry.
double coherent_info_identity_residual(const RVec& p_u, const std::vector<Vec>& phi_ru,
                                       int dim_r, int dim_a, const Mat& isometry, int dim_b,
                                       int dim_e);

struct ScanSpec {
  std::string region = "asymptotic";  // achievability | converse | asymptotic | classical
  std::string sweep = "none";         // none | depolarize-outputs
  std::vector<double> values;         // sweep parameter values (one row each)
  EpsilonBudget budget;               // used by achievability
  double eps = 0.1;                   // used by converse
};

// One CSV row per grid point; per-point failures are recorded in-row and the
// scan continues.
std::string scan_csv(const BroadcastChannelModel& base, const ScanSpec& spec);

}  // namespace qbc
