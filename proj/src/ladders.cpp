#include "caa/ladders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "caa/format.hpp"

namespace caa::ladders {

namespace {

// Masses below this are treated as zero (no advantage anywhere on the ladder).
constexpr double kZeroMass = 1e-12;

bool has_mass(const AdvantageProfile& p) { return p.total_mass > kZeroMass; }

}  // namespace

AdvantageProfile advantage_profile(std::span<const double> losses, std::span<const int> budgets) {
  if (losses.size() < 2) throw std::invalid_argument("advantage profile needs at least two rungs");
  AdvantageProfile p;
  if (budgets.empty()) {
    p.budgets.resize(losses.size());
    std::iota(p.budgets.begin(), p.budgets.end(), 0);
  } else {
    if (budgets.size() != losses.size()) throw std::invalid_argument("one budget per loss required");
    for (std::size_t j = 1; j < budgets.size(); ++j)
      if (budgets[j] <= budgets[j - 1]) throw std::invalid_argument("budgets must be strictly ascending");
    p.budgets.assign(budgets.begin(), budgets.end());
  }
  p.losses.assign(losses.begin(), losses.end());
  const double best = *std::min_element(losses.begin(), losses.end());
  double running_min = losses[0];
  p.tail_regret.push_back(running_min - best);
  double cum = 0.0;
  for (std::size_t j = 1; j < losses.size(); ++j) {
    const double raw = losses[j - 1] - losses[j];
    p.deltas_raw.push_back(raw);
    p.deltas.push_back(std::max(raw, 0.0));
    cum += p.deltas.back();
    p.cum_mass.push_back(cum);
    running_min = std::min(running_min, losses[j]);
    p.tail_regret.push_back(running_min - best);
  }
  p.total_mass = cum;
  return p;
}

std::optional<double> tail_frac(const AdvantageProfile& profile, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (!has_mass(profile)) return std::nullopt;
  const std::size_t b = profile.rungs();
  // Guard the floor against alpha*B landing a hair below an integer.
  const auto cut = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(b) + 1e-9));
  double tail = 0.0;
  for (std::size_t j = cut + 1; j <= b; ++j) tail += profile.deltas[j - 1];
  return tail / profile.total_mass;
}

std::optional<int> half_mass_budget(const AdvantageProfile& profile) {
  if (!has_mass(profile)) return std::nullopt;
  const double half = profile.total_mass / 2.0;
  for (std::size_t j = 1; j <= profile.rungs(); ++j)
    if (profile.cum_mass[j - 1] >= half * (1.0 - 1e-12)) return profile.budgets[j];
  return profile.budgets.back();
}

std::optional<double> depth_score(const AdvantageProfile& profile) {
  if (!has_mass(profile)) return std::nullopt;
  const std::size_t b = profile.rungs();
  double weighted = 0.0;
  for (std::size_t j = 1; j <= b; ++j) weighted += static_cast<double>(j) * profile.deltas[j - 1];
  return weighted / profile.total_mass / static_cast<double>(b);
}

DepthIndicators depth_indicators(const AdvantageProfile& profile, double alpha) {
  DepthIndicators d;
  d.alpha = alpha;
  const auto tf = tail_frac(profile, alpha);
  if (!tf) return d;
  d.defined = true;
  d.tail_frac = *tf;
  d.half_mass_budget = *half_mass_budget(profile);
  d.depth_score = *depth_score(profile);
  return d;
}

std::string profile_csv(const AdvantageProfile& p) {
  std::ostringstream out;
  out << "budget,loss,delta_raw,delta_clamped,cum_mass,tail_regret\n";
  out << p.budgets[0] << ',' << format::num(p.losses[0]) << ",,,0," << format::num(p.tail_regret[0]) << '\n';
  for (std::size_t j = 1; j < p.losses.size(); ++j)
    out << p.budgets[j] << ',' << format::num(p.losses[j]) << ',' << format::num(p.deltas_raw[j - 1]) << ','
        << format::num(p.deltas[j - 1]) << ',' << format::num(p.cum_mass[j - 1]) << ','
        << format::num(p.tail_regret[j]) << '\n';
  return out.str();
}

nlohmann::json to_json(const DepthIndicators& d) {
  if (!d.defined) return {{"defined", false}, {"alpha", d.alpha}, {"reason", "zero total advantage mass"}};
  return {{"defined", true},
          {"alpha", d.alpha},
          {"tail_frac", d.tail_frac},
          {"half_mass_budget", d.half_mass_budget},
          {"depth_score", d.depth_score}};
}

nlohmann::json to_json(const AdvantageProfile& p) {
  return {{"budgets", p.budgets},       {"losses", p.losses},     {"deltas_raw", p.deltas_raw},
          {"deltas", p.deltas},         {"cum_mass", p.cum_mass}, {"tail_regret", p.tail_regret},
          {"total_mass", p.total_mass}};
}

}  // namespace caa::ladders
