#include "caa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Core>
#include <zlib.h>

#include "caa/coders.hpp"
#include "caa/evaluation.hpp"
#include "caa/format.hpp"
#include "caa/infotheory.hpp"
#include "caa/ladders.hpp"
#include "caa/observers.hpp"
#include "caa/rng.hpp"
#include "caa/sources.hpp"

#ifndef CAA_VERSION
#define CAA_VERSION "0.0.0"
#endif

namespace caa::experiments {

using nlohmann::json;
using cli::Experiment;
using cli::ExperimentConfig;
using evaluation::mean_std;
using format::num;
using observers::ObserverSpec;

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1U), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

double loss_of(const ObserverSpec& spec, const SymbolSequence& seq, std::size_t burn_in) {
  return evaluation::average_log_loss(spec, seq, burn_in).avg_loss;
}

double uniform_caa(std::span<const double> losses) {
  return evaluation::caa_variance(evaluation::regret_table_from_losses(losses)).variance;
}

}  // namespace

const std::map<std::string, std::string>& csv_schemas() {
  static const std::map<std::string, std::string> schemas{
      {"ucurve.csv", "p,pair,mean_gap,std_gap,mean_caa,std_caa"},
      {"ucurve_runs.csv", "pair,p,replicate,loss_naive,loss_soph,gap,caa"},
      {"relativistic.csv", "source,observer_family,gap,std_gap"},
      {"relativistic_runs.csv", "source,observer_family,replicate,loss_naive,loss_soph,gap"},
      {"crypto_ladder_m{}.csv", "budget,loss,delta_raw,delta_clamped,cum_mass,tail_regret"},
      {"crypto_ladder_runs.csv", "key_length,replicate,budget,loss"},
      {"ca_ladder_rule{}.csv", "budget,loss,delta_raw,delta_clamped,cum_mass,tail_regret"},
      {"ca_ladder_runs.csv", "rule,replicate,budget,loss"},
      {"coders.csv", "source,observer_set,caa,caa_std,delta"},
      {"coders_runs.csv", "source,replicate,coder,bits,bits_per_symbol,excess"},
      {"infocheck.csv", "source,replicate,truncated_e,analytic_e,abs_error,online_advantage"},
      {"infocheck_atoms.csv", "source,replicate,m,atom_raw,atom_clamped,partial_sum"},
      {"infocheck_online.csv", "source,replicate,order,cond_entropy,online_loss,cum_advantage"},
  };
  return schemas;
}

std::string schema_for(const std::string& file_name) {
  for (const auto& [pattern, header] : csv_schemas()) {
    const auto brace = pattern.find("{}");
    if (brace == std::string::npos) {
      if (pattern == file_name) return header;
      continue;
    }
    const std::string prefix = pattern.substr(0, brace), suffix = pattern.substr(brace + 2);
    if (file_name.size() > prefix.size() + suffix.size() && file_name.starts_with(prefix) &&
        file_name.ends_with(suffix)) {
      const std::string key = file_name.substr(prefix.size(), file_name.size() - prefix.size() - suffix.size());
      if (std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) return header;
    }
  }
  return "";
}

// -- U-curve: two Markov orders on a noisy periodic source ---------------------

RunOutput run_ucurve(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto grid = s.at("p_grid").get<std::vector<double>>();
  const json& pairs = s.at("pairs");
  const std::size_t n_pairs = pairs.size(), n_grid = grid.size(), reps = cfg.replicates();

  struct Run {
    double naive = 0.0, soph = 0.0;
  };
  std::vector<Run> runs(n_pairs * n_grid * reps);
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t pair = i / (n_grid * reps), gi = (i / reps) % n_grid, rep = i % reps;
    const auto tmpl = pairs[pair].at("template").get<std::vector<std::uint8_t>>();
    const auto seq = sources::gen_periodic_noise(tmpl, grid[gi], cfg.n(),
                                                 derive_seed(cfg.seed(), "ucurve", pair, gi, rep));
    runs[i].naive = loss_of(ObserverSpec::markov(pairs[pair].at("naive_order").get<int>(), cfg.alpha()), seq,
                            cfg.burn_in());
    runs[i].soph = loss_of(ObserverSpec::markov(pairs[pair].at("soph_order").get<int>(), cfg.alpha()), seq,
                           cfg.burn_in());
  });

  RunOutput out;
  std::ostringstream summary_csv, runs_csv;
  summary_csv << schema_for("ucurve.csv") << '\n';
  runs_csv << schema_for("ucurve_runs.csv") << '\n';
  json pair_summary = json::object();
  for (std::size_t pair = 0; pair < n_pairs; ++pair) {
    const auto name = pairs[pair].at("name").get<std::string>();
    json curve{{"p", grid}, {"mean_gap", json::array()}, {"std_gap", json::array()}, {"mean_caa", json::array()}};
    for (std::size_t gi = 0; gi < n_grid; ++gi) {
      std::vector<double> gaps, caas;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Run& r = runs[(pair * n_grid + gi) * reps + rep];
        const double gap = r.naive - r.soph;
        const double losses[] = {r.naive, r.soph};
        gaps.push_back(gap);
        caas.push_back(uniform_caa(losses));
        runs_csv << name << ',' << num(grid[gi]) << ',' << rep << ',' << num(r.naive) << ',' << num(r.soph) << ','
                 << num(gap) << ',' << num(caas.back()) << '\n';
      }
      const auto g = mean_std(gaps), c = mean_std(caas);
      summary_csv << num(grid[gi]) << ',' << name << ',' << num(g.mean) << ',' << num(g.std) << ',' << num(c.mean)
                  << ',' << num(c.std) << '\n';
      curve["mean_gap"].push_back(g.mean);
      curve["std_gap"].push_back(g.std);
      curve["mean_caa"].push_back(c.mean);
    }
    pair_summary[name] = curve;
  }
  out.files["ucurve.csv"] = summary_csv.str();
  out.files["ucurve_runs.csv"] = runs_csv.str();
  out.summary = {{"pairs", pair_summary}};
  return out;
}

// -- relativistic separation: statistical vs search observers ------------------

RunOutput run_relativistic(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto key_lengths = s.at("key_lengths").get<std::vector<int>>();
  const auto orders = s.at("stat_orders").get<std::vector<int>>();
  const int search_budget = s.at("search_budget").get<int>();
  sources::HmmParams hmm;
  const auto t = s.at("hmm").at("transition").get<std::vector<std::vector<double>>>();
  const auto e = s.at("hmm").at("emission").get<std::vector<std::vector<double>>>();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      hmm.transition[i][j] = t[i][j];
      hmm.emission[i][j] = e[i][j];
    }
  hmm.validate();

  std::vector<std::string> source_names{"hmm"};
  for (int m : key_lengths) source_names.push_back("crypto_m" + std::to_string(m));
  const std::vector<std::string> families{"stat", "search"};
  // (naive, sophisticated) member of each family.
  const std::pair<ObserverSpec, ObserverSpec> members[] = {
      {ObserverSpec::markov(orders[0], cfg.alpha()), ObserverSpec::markov(orders[1], cfg.alpha())},
      {ObserverSpec::keysearch(0, 0, cfg.alpha()), ObserverSpec::keysearch(search_budget, 1, cfg.alpha())}};

  const std::size_t reps = cfg.replicates();
  std::vector<std::array<double, 4>> runs(source_names.size() * reps);
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t src = i / reps, rep = i % reps;
    const std::uint64_t seed = derive_seed(cfg.seed(), "relativistic", src, rep);
    std::size_t burn = cfg.burn_in();
    auto seq = [&] {
      if (src == 0) return sources::gen_hmm(hmm, cfg.n(), seed);
      const auto m = static_cast<std::size_t>(key_lengths[src - 1]);
      // i.i.d. fair key bits: short keys may be periodic themselves (e.g. 000),
      // which is what lets low-order models exploit short-key ciphertexts.
      Rng key_rng(derive_seed(cfg.seed(), "relativistic-key", m, rep));
      std::vector<std::uint8_t> key(m);
      for (auto& b : key) b = key_rng.bit();
      sources::CryptoParams cp{std::move(key),
                               s.at("prefix_len").get<std::size_t>(), s.at("reveal").get<bool>()};
      return sources::gen_xor_crypto(cp, cfg.n(), seed);
    }();
    burn = std::max(burn, seq.meta().body_start);
    for (std::size_t f = 0; f < 2; ++f) {
      runs[i][2 * f] = loss_of(members[f].first, seq, burn);
      runs[i][2 * f + 1] = loss_of(members[f].second, seq, burn);
    }
  });

  RunOutput out;
  std::ostringstream summary_csv, runs_csv;
  summary_csv << schema_for("relativistic.csv") << '\n';
  runs_csv << schema_for("relativistic_runs.csv") << '\n';
  json gaps_json = json::object();
  for (std::size_t src = 0; src < source_names.size(); ++src)
    for (std::size_t f = 0; f < 2; ++f) {
      std::vector<double> gaps;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& r = runs[src * reps + rep];
        gaps.push_back(r[2 * f] - r[2 * f + 1]);
        runs_csv << source_names[src] << ',' << families[f] << ',' << rep << ',' << num(r[2 * f]) << ','
                 << num(r[2 * f + 1]) << ',' << num(gaps.back()) << '\n';
      }
      const auto g = mean_std(gaps);
      summary_csv << source_names[src] << ',' << families[f] << ',' << num(g.mean) << ',' << num(g.std) << '\n';
      gaps_json[source_names[src]][families[f]] = g.mean;
    }
  out.files["relativistic.csv"] = summary_csv.str();
  out.files["relativistic_runs.csv"] = runs_csv.str();
  out.summary = {{"gaps", gaps_json},
                 {"observers",
                  {{"stat", {members[0].first.label(), members[0].second.label()}},
                   {"search", {members[1].first.label(), members[1].second.label()}}}}};
  return out;
}

// -- crypto ladder: keysearch observers with growing key-length bound ----------

RunOutput run_crypto_ladder(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto key_lengths = s.at("key_lengths").get<std::vector<int>>();
  const int max_budget = s.at("max_budget").get<int>();
  const int fallback = s.at("fallback_order").get<int>();
  const std::size_t reps = cfg.replicates(), rungs = static_cast<std::size_t>(max_budget) + 1;

  std::vector<std::vector<double>> runs(key_lengths.size() * reps);
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t ki = i / reps, rep = i % reps;
    const auto m = static_cast<std::size_t>(key_lengths[ki]);
    Rng key_rng(derive_seed(cfg.seed(), "crypto-ladder-key", m, rep));
    sources::CryptoParams cp{sources::random_primitive_key(m, key_rng), s.at("prefix_len").get<std::size_t>(),
                             s.at("reveal").get<bool>()};
    const auto seq = sources::gen_xor_crypto(cp, cfg.n(), derive_seed(cfg.seed(), "crypto-ladder", m, rep));
    const std::size_t burn = std::max(cfg.burn_in(), seq.meta().body_start);
    for (std::size_t b = 0; b < rungs; ++b)
      runs[i].push_back(loss_of(ObserverSpec::keysearch(static_cast<int>(b), fallback, cfg.alpha()), seq, burn));
  });

  RunOutput out;
  std::ostringstream runs_csv;
  runs_csv << schema_for("crypto_ladder_runs.csv") << '\n';
  json ladders = json::array();
  std::vector<int> budgets(rungs);
  for (std::size_t b = 0; b < rungs; ++b) budgets[b] = static_cast<int>(b);
  for (std::size_t ki = 0; ki < key_lengths.size(); ++ki) {
    const int m = key_lengths[ki];
    std::vector<double> mean_loss(rungs, 0.0);
    for (std::size_t rep = 0; rep < reps; ++rep)
      for (std::size_t b = 0; b < rungs; ++b) {
        const double l = runs[ki * reps + rep][b];
        mean_loss[b] += l / static_cast<double>(reps);
        runs_csv << m << ',' << rep << ',' << b << ',' << num(l) << '\n';
      }
    const auto profile = ladders::advantage_profile(mean_loss, budgets);
    const auto ind = ladders::depth_indicators(profile);
    const auto peak = std::max_element(profile.deltas_raw.begin(), profile.deltas_raw.end());
    double off_peak = 0.0;
    for (std::size_t j = 0; j < profile.deltas_raw.size(); ++j)
      if (static_cast<int>(j) + 1 != m) off_peak = std::max(off_peak, profile.deltas_raw[j]);
    ladders.push_back({{"key_length", m},
                       {"argmax_budget", profile.budgets[static_cast<std::size_t>(peak - profile.deltas_raw.begin()) + 1]},
                       {"tail_regret_at_key_length", profile.tail_regret[static_cast<std::size_t>(m)]},
                       {"max_delta_off_key_length", off_peak},
                       {"indicators", ladders::to_json(ind)},
                       {"profile", ladders::to_json(profile)}});
    out.files["crypto_ladder_m" + std::to_string(m) + ".csv"] = ladders::profile_csv(profile);
  }
  out.files["crypto_ladder_runs.csv"] = runs_csv.str();
  out.summary = {{"ladders", ladders}};
  out.files["crypto_ladder.json"] = out.summary.dump(2) + '\n';
  return out;
}

// -- CA ladder: local light-cone simulators with growing radius ----------------

RunOutput run_ca_ladder(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto rules = s.at("rules").get<std::vector<int>>();
  const auto radii = s.at("radii").get<std::vector<int>>();
  const auto horizon = s.at("horizon").get<std::size_t>();
  const auto width = s.at("width").get<std::size_t>();
  const double tail_alpha = s.at("tail_alpha").get<double>();
  observers::CaObserver::Options opts{s.at("enumerate_limit").get<std::size_t>(), s.at("samples").get<std::size_t>(),
                                      s.at("epsilon").get<double>()};
  std::vector<int> budgets{0};
  budgets.insert(budgets.end(), radii.begin(), radii.end());
  const std::size_t reps = cfg.replicates(), max_radius = static_cast<std::size_t>(radii.back());

  std::vector<std::vector<double>> runs(rules.size() * reps);
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t ri = i / reps, rep = i % reps;
    const auto rule = static_cast<std::uint64_t>(rules[ri]);
    const auto sample = sources::gen_eca({rules[ri], width, horizon}, cfg.n(), max_radius,
                                         derive_seed(cfg.seed(), "ca-ladder", rule, rep));
    for (int budget : budgets) {
      observers::CaObserver obs(rules[ri], static_cast<std::size_t>(budget), horizon,
                                derive_seed(cfg.seed(), "ca-observer", rule, rep, static_cast<std::uint64_t>(budget)),
                                opts);
      double total = 0.0;
      for (const auto& inst : sample.instances) total -= std::log2(obs.predict(inst.window).probs[inst.target]);
      runs[i].push_back(total / static_cast<double>(sample.instances.size()));
    }
  });

  RunOutput out;
  std::ostringstream runs_csv;
  runs_csv << schema_for("ca_ladder_runs.csv") << '\n';
  json table = json::array();
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    std::vector<double> mean_loss(budgets.size(), 0.0);
    for (std::size_t rep = 0; rep < reps; ++rep)
      for (std::size_t j = 0; j < budgets.size(); ++j) {
        const double l = runs[ri * reps + rep][j];
        mean_loss[j] += l / static_cast<double>(reps);
        runs_csv << rules[ri] << ',' << rep << ',' << budgets[j] << ',' << num(l) << '\n';
      }
    const auto profile = ladders::advantage_profile(mean_loss, budgets);
    json row = ladders::to_json(ladders::depth_indicators(profile, tail_alpha));
    row["rule"] = rules[ri];
    row["total_mass"] = profile.total_mass;
    row["horizon"] = horizon;
    table.push_back(row);
    out.files["ca_ladder_rule" + std::to_string(rules[ri]) + ".csv"] = ladders::profile_csv(profile);
  }
  out.files["ca_ladder_runs.csv"] = runs_csv.str();
  out.summary = {{"rules", table}};
  out.files["ca_ladder.json"] = out.summary.dump(2) + '\n';
  return out;
}

// -- coders: CAA of excess codelength across coder sets ------------------------

RunOutput run_coders(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto text = sources::load_text(s.at("corpus").get<std::string>());
  const auto symbols = s.at("periodic").at("symbols").get<std::size_t>();
  const auto run_length = s.at("periodic").at("run_length").get<std::size_t>();
  const auto iid_alphabet = s.at("iid_alphabet").get<std::size_t>();
  const auto shuffle_block = s.at("shuffle_block").get<std::size_t>();

  std::vector<std::pair<std::string, std::vector<coders::Coder>>> sets;
  for (const auto& [name, list] : s.at("sets").items()) {
    std::vector<coders::Coder> members;
    for (const auto& id : list.get<std::vector<std::string>>()) members.push_back(coders::coder_from_string(id));
    sets.emplace_back(name, members);
  }
  if (s.at("rle_control").get<bool>()) {
    auto a2 = std::find_if(sets.begin(), sets.end(), [](const auto& p) { return p.first == "A2"; })->second;
    if (std::find(a2.begin(), a2.end(), coders::Coder::rle) == a2.end()) a2.push_back(coders::Coder::rle);
    sets.emplace_back("A2+rle", a2);
  }
  std::vector<coders::Coder> used;
  for (const auto& [name, members] : sets)
    for (auto c : members)
      if (std::find(used.begin(), used.end(), c) == used.end()) used.push_back(c);
  std::sort(used.begin(), used.end());

  const std::vector<std::string> source_names{"periodic", "iid", "text", "text_shuffled"};
  const std::size_t reps = cfg.replicates();
  std::vector<std::vector<coders::CodeLength>> runs(source_names.size() * reps);
  std::vector<std::size_t> lengths(runs.size());
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t src = i / reps, rep = i % reps;
    const std::uint64_t seed = derive_seed(cfg.seed(), "coders", src, rep);
    const auto seq = [&] {
      switch (src) {
        case 0: return sources::gen_periodic_runs(symbols, run_length, cfg.n(), seed);
        case 1: {
          const std::vector<double> probs(iid_alphabet, 1.0 / static_cast<double>(iid_alphabet));
          return sources::gen_iid(probs, cfg.n(), seed);
        }
        case 2: return text;
        default: return sources::block_shuffle(text, shuffle_block, seed);
      }
    }();
    lengths[i] = seq.size();
    for (auto c : used) runs[i].push_back(coders::codelength(c, seq));
  });

  auto coder_index = [&](coders::Coder c) {
    return static_cast<std::size_t>(std::find(used.begin(), used.end(), c) - used.begin());
  };

  RunOutput out;
  std::ostringstream summary_csv, runs_csv;
  summary_csv << schema_for("coders.csv") << '\n';
  runs_csv << schema_for("coders_runs.csv") << '\n';
  json table = json::object();
  for (std::size_t src = 0; src < source_names.size(); ++src) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& r = runs[src * reps + rep];
      double best = r.front().bits_per_symbol;
      for (const auto& cl : r) best = std::min(best, cl.bits_per_symbol);
      for (std::size_t c = 0; c < used.size(); ++c)
        runs_csv << source_names[src] << ',' << rep << ',' << coders::to_string(used[c]) << ',' << r[c].bits << ','
                 << num(r[c].bits_per_symbol) << ',' << num(r[c].bits_per_symbol - best) << '\n';
    }
    std::vector<double> base_caa;
    for (const auto& [set_name, members] : sets) {
      std::vector<double> caas;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        std::vector<double> losses;
        for (auto c : members) losses.push_back(runs[src * reps + rep][coder_index(c)].bits_per_symbol);
        caas.push_back(uniform_caa(losses));
      }
      if (base_caa.empty()) base_caa = caas;
      std::vector<double> deltas(reps);
      for (std::size_t rep = 0; rep < reps; ++rep) deltas[rep] = caas[rep] - base_caa[rep];
      const auto c = mean_std(caas), d = mean_std(deltas);
      summary_csv << source_names[src] << ',' << set_name << ',' << num(c.mean) << ',' << num(c.std) << ','
                  << num(d.mean) << '\n';
      table[source_names[src]][set_name] = {{"caa", c.mean}, {"delta", d.mean}};
    }
  }
  out.files["coders.csv"] = summary_csv.str();
  out.files["coders_runs.csv"] = runs_csv.str();

  json controls = json::object();
  const double text_a2 = table["text"]["A2"]["caa"].get<double>();
  if (text_a2 > 0.0)
    controls["text_shuffle_caa_reduction"] = 1.0 - table["text_shuffled"]["A2"]["caa"].get<double>() / text_a2;
  if (table["periodic"].contains("A2+rle")) {
    const double periodic_a2 = table["periodic"]["A2"]["caa"].get<double>();
    if (periodic_a2 > 0.0)
      controls["periodic_rle_caa_reduction"] = 1.0 - table["periodic"]["A2+rle"]["caa"].get<double>() / periodic_a2;
  }
  json set_json = json::object();
  for (const auto& [name, members] : sets) {
    json names = json::array();
    for (auto c : members) names.push_back(coders::to_string(c));
    set_json[name] = names;
  }
  out.summary = {{"table", table}, {"controls", controls}, {"sets", set_json}, {"text_bytes", text.size()}};
  out.files["coders.json"] = out.summary.dump(2) + '\n';
  return out;
}

// -- infocheck: CMI atoms against analytic excess entropy ----------------------

RunOutput run_infocheck(const ExperimentConfig& cfg) {
  const json& s = cfg.section();
  const auto max_order = s.at("max_order").get<unsigned>();
  const json& srcs = s.at("sources");
  const std::size_t reps = cfg.replicates();

  struct Run {
    infotheory::CmiAtomSeries series;
    double analytic = 0.0;
    std::vector<double> online;  // orders 0..M
  };
  std::vector<Run> runs(srcs.size() * reps);
  parallel_for(runs.size(), cfg.jobs(), [&](std::size_t i) {
    const std::size_t src = i / reps, rep = i % reps;
    sources::MarkovChainParams params{2, srcs[src].at("order").get<unsigned>(),
                                      srcs[src].at("next").get<std::vector<std::vector<double>>>()};
    const auto seq = sources::gen_markov_chain(params, cfg.n(), derive_seed(cfg.seed(), "infocheck", src, rep));
    runs[i].series = infotheory::excess_entropy_truncated(seq, max_order);
    runs[i].analytic = infotheory::markov_chain_entropies(params).excess();
    for (unsigned m = 0; m <= max_order; ++m)
      runs[i].online.push_back(loss_of(ObserverSpec::markov(static_cast<int>(m), cfg.alpha()), seq, cfg.burn_in()));
  });

  RunOutput out;
  std::ostringstream main_csv, atoms_csv, online_csv;
  main_csv << schema_for("infocheck.csv") << '\n';
  atoms_csv << schema_for("infocheck_atoms.csv") << '\n';
  online_csv << schema_for("infocheck_online.csv") << '\n';
  json results = json::array();
  for (std::size_t src = 0; src < srcs.size(); ++src) {
    const auto name = srcs[src].at("name").get<std::string>();
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Run& r = runs[src * reps + rep];
      const double e = r.series.truncated_excess_entropy;
      const double advantage = r.online.front() - r.online.back();
      main_csv << name << ',' << rep << ',' << num(e) << ',' << num(r.analytic) << ',' << num(std::abs(e - r.analytic))
               << ',' << num(advantage) << '\n';
      for (std::size_t m = 0; m < r.series.atoms.size(); ++m)
        atoms_csv << name << ',' << rep << ',' << m + 1 << ',' << num(r.series.atoms_raw[m]) << ','
                  << num(r.series.atoms[m]) << ',' << num(r.series.partial_sums[m]) << '\n';
      for (std::size_t m = 0; m < r.online.size(); ++m)
        online_csv << name << ',' << rep << ',' << m << ',' << num(r.series.conditional_entropies[m]) << ','
                   << num(r.online[m]) << ',' << num(r.online.front() - r.online[m]) << '\n';
      results.push_back({{"source", name},
                         {"replicate", rep},
                         {"truncated_e", e},
                         {"analytic_e", r.analytic},
                         {"atoms", r.series.atoms_raw},
                         {"online_advantage", advantage}});
    }
  }
  out.files["infocheck.csv"] = main_csv.str();
  out.files["infocheck_atoms.csv"] = atoms_csv.str();
  out.files["infocheck_online.csv"] = online_csv.str();
  out.summary = {{"results", results}};
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::ucurve: return run_ucurve(cfg);
    case Experiment::relativistic: return run_relativistic(cfg);
    case Experiment::crypto_ladder: return run_crypto_ladder(cfg);
    case Experiment::ca_ladder: return run_ca_ladder(cfg);
    case Experiment::coders: return run_coders(cfg);
    case Experiment::infocheck: return run_infocheck(cfg);
  }
  throw std::logic_error("unknown experiment");
}

json make_manifest(const ExperimentConfig& cfg, const RunOutput& output) {
  json files = json::object();
  for (const auto& [name, content] : output.files)
    files[name] = {{"bytes", content.size()}, {"fnv1a64", format::hex64(fnv1a64(content))}};
  std::ostringstream eigen, nl;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
  return {{"tool", "caa"},
          {"experiment", cli::to_string(cfg.experiment)},
          {"config_hash", format::hex64(cfg.config_hash())},
          {"seed", cfg.seed()},
          {"rng", std::string(kRngAlgorithm)},
          {"versions", {{"caa", CAA_VERSION}, {"zlib", ZLIB_VERSION}, {"eigen", eigen.str()}, {"nlohmann_json", nl.str()}}},
          {"config", cfg.values},
          {"outputs", files},
          {"summary", output.summary}};
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunOutput& output) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : output.files) write_atomically(dir / name, content);
  write_atomically(dir / "manifest.json", make_manifest(cfg, output).dump(2) + '\n');
}

}  // namespace caa::experiments
