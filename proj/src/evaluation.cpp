#include "caa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "caa/format.hpp"

namespace caa::evaluation {

LossReport average_log_loss(observers::Observer& observer, const SymbolSequence& sequence,
                            std::size_t burn_in, const ObserverSpec& spec) {
  if (burn_in >= sequence.size()) throw std::invalid_argument("burn_in leaves no scored steps");
  if (observer.alphabet_size() != sequence.alphabet_size())
    throw std::invalid_argument("observer and sequence alphabets differ");
  const auto symbols = sequence.symbols();
  double total = 0.0;
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    if (t >= burn_in) total -= std::log2(observer.probability(symbols[t]));
    observer.update(symbols[t]);
  }
  const std::size_t scored = symbols.size() - burn_in;
  return {spec, total / static_cast<double>(scored), scored, burn_in, sequence.fingerprint()};
}

LossReport average_log_loss(const ObserverSpec& spec, const SymbolSequence& sequence, std::size_t burn_in) {
  auto observer = observers::make_observer(spec, sequence);
  return average_log_loss(*observer, sequence, burn_in, spec);
}

LossReport codelength_report(coders::Coder coder, const SymbolSequence& sequence) {
  const auto cl = coders::codelength(coder, sequence);
  ObserverSpec spec{observers::ObserverKind::coder, coders::coder_id(coder), 1.0, -1};
  return {spec, cl.bits_per_symbol, sequence.size(), 0, sequence.fingerprint()};
}

RegretTable regret_table(std::span<const LossReport> reports) {
  if (reports.empty()) throw std::invalid_argument("regret table needs at least one report");
  for (const auto& r : reports) {
    if (r.sequence_id != reports.front().sequence_id)
      throw std::invalid_argument("loss reports come from different sequences");
    if (r.burn_in != reports.front().burn_in)
      throw std::invalid_argument("loss reports use different burn-in");
  }
  RegretTable table;
  table.l_star = std::min_element(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
                   return a.avg_loss < b.avg_loss;
                 })->avg_loss;
  for (const auto& r : reports) table.entries.push_back({r.observer, r.avg_loss, r.avg_loss - table.l_star});
  return table;
}

RegretTable regret_table_from_losses(std::span<const double> losses) {
  std::vector<LossReport> reports;
  for (std::size_t i = 0; i < losses.size(); ++i)
    reports.push_back({ObserverSpec::markov(static_cast<int>(i)), losses[i], 1, 0, 0});
  return regret_table(reports);
}

CAAResult caa_variance(const RegretTable& table, std::span<const double> prior) {
  const std::size_t n = table.entries.size();
  if (n == 0) throw std::invalid_argument("empty regret table");
  CAAResult out;
  if (prior.empty()) {
    out.prior.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (prior.size() != n) throw std::invalid_argument("prior length does not match observers");
    double sum = 0.0;
    for (double p : prior) {
      if (!(p >= 0.0)) throw std::invalid_argument("prior has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("prior does not sum to 1");
    out.prior.assign(prior.begin(), prior.end());
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += out.prior[i] * table.entries[i].regret;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = table.entries[i].regret - mean;
    out.variance += out.prior[i] * d * d;
  }
  out.max_gap = caa_max(table);
  return out;
}

double caa_max(const RegretTable& table) {
  if (table.entries.empty()) throw std::invalid_argument("empty regret table");
  auto [lo, hi] = std::minmax_element(table.entries.begin(), table.entries.end(),
                                      [](const auto& a, const auto& b) { return a.regret < b.regret; });
  return hi->regret - lo->regret;
}

double two_alg_closed_form(double delta_loss, double p) {
  if (delta_loss < 0.0) throw std::invalid_argument("delta loss must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0,1]");
  return p * (1.0 - p) * delta_loss * delta_loss;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

void to_json(nlohmann::json& j, const LossReport& r) {
  j = nlohmann::json{{"observer", r.observer},
                     {"label", r.observer.label()},
                     {"avg_loss", r.avg_loss},
                     {"n_scored", r.n_scored},
                     {"burn_in", r.burn_in},
                     {"sequence_id", format::hex64(r.sequence_id)}};
}

void to_json(nlohmann::json& j, const RegretTable& t) {
  j = nlohmann::json{{"l_star", t.l_star}, {"entries", nlohmann::json::array()}};
  for (const auto& e : t.entries)
    j["entries"].push_back({{"observer", e.observer}, {"label", e.observer.label()},
                            {"avg_loss", e.avg_loss}, {"regret", e.regret}});
}

void to_json(nlohmann::json& j, const CAAResult& c) {
  j = nlohmann::json{{"variance", c.variance}, {"max_gap", c.max_gap}, {"prior", c.prior}};
}

std::string regret_csv_header() { return "source,replicate,observer,avg_loss,regret\n"; }

std::string regret_csv_rows(const RegretTable& table, const std::string& source, std::size_t replicate) {
  std::ostringstream out;
  for (const auto& e : table.entries)
    out << source << ',' << replicate << ',' << e.observer.label() << ',' << format::num(e.avg_loss) << ','
        << format::num(e.regret) << '\n';
  return out.str();
}

}  // namespace caa::evaluation
