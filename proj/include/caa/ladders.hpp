#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace caa::ladders {

/// Loss improvements between adjacent rungs of a budget ladder.
///
/// Rung j = 0..B has budget budgets[j] (budgets[0] is the base rung, 0 by
/// default). deltas_raw[j-1] = losses[j-1] - losses[j] may be negative from
/// estimation noise; `deltas` are the same values clamped at 0 and are what
/// the indicators use.
struct AdvantageProfile {
  std::vector<int> budgets;
  std::vector<double> losses;
  std::vector<double> deltas_raw;
  std::vector<double> deltas;
  std::vector<double> cum_mass;     // cumulative clamped mass through rung j (j = 1..B)
  std::vector<double> tail_regret;  // r_j for j = 0..B
  double total_mass = 0.0;

  std::size_t rungs() const noexcept { return deltas.size(); }  // B
};

/// `losses[j]` for rungs 0..B. `budgets` defaults to 0..B.
///
/// Tail regret r_j = min(losses[0..j]) - min(losses): the advantage still
/// unclaimed by an observer that may use any budget up to rung j. For a
/// non-increasing loss ladder this is losses[j] - min(losses).
AdvantageProfile advantage_profile(std::span<const double> losses, std::span<const int> budgets = {});

/// Sum of clamped deltas over rungs j > floor(alpha * B), over total mass.
/// nullopt when the total mass is zero.
std::optional<double> tail_frac(const AdvantageProfile& profile, double alpha = 2.0 / 3.0);

/// Budget of the first rung whose cumulative mass reaches half the total.
std::optional<int> half_mass_budget(const AdvantageProfile& profile);

/// (1/B) * sum_b b * dL_b / M, the mean relative rung at which gains occur.
std::optional<double> depth_score(const AdvantageProfile& profile);

struct DepthIndicators {
  bool defined = false;  // false when total mass is zero
  double alpha = 2.0 / 3.0;
  double tail_frac = 0.0;
  int half_mass_budget = 0;
  double depth_score = 0.0;
};

DepthIndicators depth_indicators(const AdvantageProfile& profile, double alpha = 2.0 / 3.0);

/// Columns: budget,loss,delta_raw,delta_clamped,cum_mass,tail_regret.
/// The base rung row leaves the delta columns empty.
std::string profile_csv(const AdvantageProfile& profile);

nlohmann::json to_json(const DepthIndicators& d);
nlohmann::json to_json(const AdvantageProfile& p);

}  // namespace caa::ladders
