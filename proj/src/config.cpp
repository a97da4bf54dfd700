#include "caa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "caa/coders.hpp"
#include "caa/rng.hpp"

#ifndef CAA_DEFAULT_CORPUS
#define CAA_DEFAULT_CORPUS "data/corpus/english.txt"
#endif

namespace caa::cli {

using nlohmann::json;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::ucurve: return "ucurve";
    case Experiment::relativistic: return "relativistic";
    case Experiment::crypto_ladder: return "crypto-ladder";
    case Experiment::ca_ladder: return "ca-ladder";
    case Experiment::coders: return "coders";
    case Experiment::infocheck: return "infocheck";
  }
  return "unknown";
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all{Experiment::ucurve,    Experiment::relativistic,
                                           Experiment::crypto_ladder, Experiment::ca_ladder,
                                           Experiment::coders,    Experiment::infocheck};
  return all;
}

Experiment experiment_from_string(const std::string& name) {
  for (auto e : all_experiments())
    if (to_string(e) == name) return e;
  throw ConfigError("unknown experiment: " + name);
}

json default_config(Experiment e) {
  json c{{"experiment", to_string(e)},
         {"seed", 20251016},
         {"jobs", 1},
         {"output_dir", "out/" + to_string(e)},
         {"n", 60000},
         {"replicates", 16},
         {"alpha", 1.0},
         {"burn_in", 1000}};
  switch (e) {
    case Experiment::ucurve:
      c["ucurve"] = {{"p_grid", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
                     {"pairs",
                      {{{"name", "A"}, {"template", {0, 1}}, {"naive_order", 1}, {"soph_order", 3}},
                       {{"name", "B"}, {"template", {0, 0, 0, 1, 1, 1}}, {"naive_order", 3}, {"soph_order", 5}}}}};
      break;
    case Experiment::relativistic:
      c["n"] = 50000;
      c["relativistic"] = {{"hmm", {{"transition", {{0.98, 0.02}, {0.02, 0.98}}},
                                    {"emission", {{0.85, 0.15}, {0.15, 0.85}}}}},
                           {"key_lengths", {32, 3}},
                           {"prefix_len", 64},
                           {"reveal", true},
                           {"stat_orders", {0, 1}},
                           {"search_budget", 64}};
      break;
    case Experiment::crypto_ladder:
      c["n"] = 50000;
      c["crypto-ladder"] = {{"key_lengths", {8}},
                            {"max_budget", 16},
                            {"prefix_len", 64},
                            {"reveal", true},
                            {"fallback_order", -1}};
      break;
    case Experiment::ca_ladder: {
      c["n"] = 2000;  // prediction instances per rule and replicate
      json radii = json::array();
      for (int r = 1; r <= 20; ++r) radii.push_back(r);
      c["ca-ladder"] = {{"rules", {90, 30, 110}},
                        {"horizon", 20},
                        {"radii", radii},
                        {"width", 8192},
                        {"enumerate_limit", 12},
                        {"samples", 512},
                        {"epsilon", 1e-6},
                        {"tail_alpha", 2.0 / 3.0}};
      break;
    }
    case Experiment::coders:
      c["n"] = 100000;
      c["replicates"] = 4;
      c["coders"] = {{"corpus", CAA_DEFAULT_CORPUS},
                     {"periodic", {{"symbols", 8}, {"run_length", 32}}},
                     {"iid_alphabet", 256},
                     {"shuffle_block", 4},
                     {"sets", {{"A1", {"lz_deflate", "blocksort"}}, {"A2", {"lz_deflate", "blocksort", "huffman0"}}}},
                     {"rle_control", true}};
      break;
    case Experiment::infocheck:
      c["n"] = 100000;
      c["replicates"] = 1;
      c["infocheck"] = {
          {"max_order", 6},
          {"sources",
           {{{"name", "flip0.1"}, {"order", 1}, {"next", {{0.9, 0.1}, {0.1, 0.9}}}},
            {{"name", "iid"}, {"order", 0}, {"next", {{0.5, 0.5}}}},
            {{"name", "order2"}, {"order", 2}, {"next", {{0.8, 0.2}, {0.3, 0.7}, {0.1, 0.9}, {0.75, 0.25}}}},
            {{"name", "order3"},
             {"order", 3},
             {"next", {{0.9, 0.1}, {0.2, 0.8}, {0.4, 0.6}, {0.7, 0.3}, {0.15, 0.85}, {0.8, 0.2}, {0.6, 0.4}, {0.3, 0.7}}}}}}};
      break;
  }
  return c;
}

namespace {

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (long long i; YAML::convert<long long>::decode(node, i)) return i;
      if (double d; YAML::convert<double>::decode(node, d)) return d;
      if (bool b; YAML::convert<bool>::decode(node, b)) return b;
      return s;
    }
  }
  return nullptr;
}

// Every key of `tree` must exist in `reference` (recursively for objects).
void check_known_keys(const json& tree, const json& reference, const std::string& path) {
  if (!tree.is_object() || !reference.is_object()) return;
  for (const auto& [key, value] : tree.items()) {
    if (!reference.contains(key)) throw ConfigError("unknown config key: " + path + key);
    if (key == "pairs" || key == "sources" || key == "sets") continue;  // free-form lists/maps
    check_known_keys(value, reference.at(key), path + key + ".");
  }
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError("config key '" + key + "': " + ex.what());
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void require_ascending(const std::vector<int>& v, const std::string& what) {
  require(!v.empty(), what + " must be nonempty");
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], what + " must be strictly ascending");
}

void require_stochastic(const std::vector<std::vector<double>>& rows, std::size_t width, const std::string& what) {
  for (const auto& row : rows) {
    require(row.size() == width, what + ": wrong row width");
    double sum = 0.0;
    for (double v : row) {
      require(v >= 0.0 && v <= 1.0, what + ": entries must be in [0,1]");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, what + ": rows must sum to 1");
  }
}

}  // namespace

json parse_config_text(const std::string& text) {
  try {
    json tree = yaml_to_json(YAML::Load(text));
    if (tree.is_null()) return json::object();
    if (!tree.is_object()) throw ConfigError("config must be a mapping");
    if (tree.contains("config") && tree.contains("config_hash")) return tree.at("config");
    return tree;
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("cannot parse config: ") + ex.what());
  }
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  json value;
  try {
    value = yaml_to_json(YAML::Load(assignment.substr(eq + 1)));
  } catch (const YAML::Exception& ex) {
    throw ConfigError("cannot parse override value for " + key + ": " + ex.what());
  }
  json* node = &tree;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad override key: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (!node->is_object()) *node = json::object();
    start = dot + 1;
  }
}

ExperimentConfig resolve_config(Experiment e, const json& file_tree, const Overrides& overrides) {
  json tree = file_tree.is_null() ? json::object() : file_tree;
  if (tree.contains("experiment") && tree.at("experiment") != to_string(e))
    throw ConfigError("config is for experiment '" + tree.at("experiment").get<std::string>() +
                      "', not '" + to_string(e) + "'");
  for (const auto& a : overrides.assignments) apply_override(tree, a);
  if (overrides.seed) tree["seed"] = *overrides.seed;
  if (overrides.output_dir) tree["output_dir"] = *overrides.output_dir;
  if (overrides.jobs) tree["jobs"] = *overrides.jobs;

  const json defaults = default_config(e);
  check_known_keys(tree, defaults, "");
  json merged = defaults;
  merged.merge_patch(tree);
  merged["experiment"] = to_string(e);

  ExperimentConfig cfg{e, std::move(merged)};
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::canonical() const {
  json v = values;
  v.erase("jobs");
  v.erase("output_dir");
  return v.dump();
}

std::uint64_t ExperimentConfig::config_hash() const { return fnv1a64(canonical()); }

void ExperimentConfig::validate() const {
  const json& v = values;
  require(get<long long>(v, "n") >= 1000, "n must be >= 1000");
  require(get<long long>(v, "replicates") >= 1, "replicates must be >= 1");
  require(get<long long>(v, "jobs") >= 1, "jobs must be >= 1");
  require(get<double>(v, "alpha") > 0.0, "alpha must be > 0");
  require(get<long long>(v, "burn_in") >= 0, "burn_in must be >= 0");
  require(v.at("seed").is_number_unsigned() || (v.at("seed").is_number_integer() && v.at("seed").get<long long>() >= 0),
          "seed must be a non-negative integer");
  require(!get<std::string>(v, "output_dir").empty(), "output_dir must be set");
  const json& s = section();

  switch (experiment) {
    case Experiment::ucurve: {
      require(get<std::size_t>(v, "burn_in") < get<std::size_t>(v, "n"), "burn_in must be < n");
      const auto grid = get<std::vector<double>>(s, "p_grid");
      require(!grid.empty(), "p_grid must be nonempty");
      for (double p : grid) require(p >= 0.0 && p <= 1.0, "p_grid values must be in [0,1]");
      require(s.at("pairs").is_array() && !s.at("pairs").empty(), "ucurve.pairs must be a nonempty list");
      for (const auto& pair : s.at("pairs")) {
        (void)get<std::string>(pair, "name");
        const auto tmpl = get<std::vector<int>>(pair, "template");
        require(!tmpl.empty(), "pair template must be nonempty");
        for (int b : tmpl) require(b == 0 || b == 1, "pair template must be binary");
        require(get<int>(pair, "naive_order") >= 0 && get<int>(pair, "soph_order") >= 0, "orders must be >= 0");
        require(get<int>(pair, "naive_order") <= 20 && get<int>(pair, "soph_order") <= 20, "orders must be <= 20");
      }
      break;
    }
    case Experiment::relativistic: {
      require(get<std::size_t>(v, "burn_in") < get<std::size_t>(v, "n"), "burn_in must be < n");
      const auto keys = get<std::vector<int>>(s, "key_lengths");
      require(!keys.empty(), "key_lengths must be nonempty");
      for (int m : keys) require(m >= 1, "key lengths must be >= 1");
      const auto orders = get<std::vector<int>>(s, "stat_orders");
      require(orders.size() == 2 && orders[0] >= 0 && orders[1] >= 0 && orders[0] <= 20 && orders[1] <= 20,
              "stat_orders must be two orders in [0,20]");
      require(get<int>(s, "search_budget") >= 1, "search_budget must be >= 1");
      require(get<long long>(s, "prefix_len") >= 0, "prefix_len must be >= 0");
      (void)get<bool>(s, "reveal");
      require_stochastic(get<std::vector<std::vector<double>>>(s.at("hmm"), "transition"), 2, "hmm.transition");
      require_stochastic(get<std::vector<std::vector<double>>>(s.at("hmm"), "emission"), 2, "hmm.emission");
      for (int m : keys)
        require(get<long long>(s, "prefix_len") + 2LL * m + 2 < get<long long>(v, "n"),
                "n too small for the crypto prefix and key");
      break;
    }
    case Experiment::crypto_ladder: {
      const int max_budget = get<int>(s, "max_budget");
      require(max_budget >= 1, "max_budget must be >= 1");
      const auto keys = get<std::vector<int>>(s, "key_lengths");
      require(!keys.empty(), "key_lengths must be nonempty");
      for (int m : keys) {
        require(m >= 1, "key lengths must be >= 1");
        require(m <= max_budget, "key length exceeds the largest budget");
        require(get<long long>(s, "prefix_len") + 2LL * m + 2 < get<long long>(v, "n"),
                "n too small for the crypto prefix and key");
      }
      require(get<long long>(s, "prefix_len") >= 0, "prefix_len must be >= 0");
      require(get<int>(s, "fallback_order") <= 20, "fallback_order must be <= 20");
      (void)get<bool>(s, "reveal");
      break;
    }
    case Experiment::ca_ladder: {
      const auto rules = get<std::vector<int>>(s, "rules");
      require(!rules.empty(), "rules must be nonempty");
      for (int r : rules) require(r >= 0 && r <= 255, "rules must be in [0,255]");
      const int horizon = get<int>(s, "horizon");
      require(horizon >= 1 && horizon <= 40, "horizon must be in [1,40]");
      const auto radii = get<std::vector<int>>(s, "radii");
      require_ascending(radii, "radii");
      require(radii.front() >= 1, "radii must be >= 1");
      require(get<long long>(s, "width") >= 2LL * horizon + 1, "width must be >= 2*horizon+1");
      require(get<long long>(s, "enumerate_limit") >= 0 && get<long long>(s, "enumerate_limit") <= 30,
              "enumerate_limit must be in [0,30]");
      require(get<long long>(s, "samples") >= 1, "samples must be >= 1");
      const double eps = get<double>(s, "epsilon");
      require(eps > 0.0 && eps < 0.5, "epsilon must be in (0,0.5)");
      const double ta = get<double>(s, "tail_alpha");
      require(ta > 0.0 && ta < 1.0, "tail_alpha must be in (0,1)");
      break;
    }
    case Experiment::coders: {
      const auto corpus = get<std::string>(s, "corpus");
      require(std::filesystem::exists(corpus), "text corpus not found: " + corpus);
      require(get<int>(s.at("periodic"), "symbols") >= 1 && get<int>(s.at("periodic"), "symbols") <= 256,
              "periodic.symbols must be in [1,256]");
      require(get<int>(s.at("periodic"), "run_length") >= 1, "periodic.run_length must be >= 1");
      const int iid_alphabet = get<int>(s, "iid_alphabet");
      require(iid_alphabet >= 2 && iid_alphabet <= 256, "iid_alphabet must be in [2,256]");
      require(get<int>(s, "shuffle_block") >= 1, "shuffle_block must be >= 1");
      require(s.at("sets").is_object() && s.at("sets").contains("A1") && s.at("sets").contains("A2"),
              "coders.sets needs A1 and A2");
      for (const auto& [name, list] : s.at("sets").items()) {
        const auto ids = list.get<std::vector<std::string>>();
        require(!ids.empty(), "coder set " + name + " is empty");
        for (const auto& id : ids) {
          try {
            (void)coders::coder_from_string(id);
          } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
          }
        }
      }
      (void)get<bool>(s, "rle_control");
      break;
    }
    case Experiment::infocheck: {
      require(get<std::size_t>(v, "burn_in") < get<std::size_t>(v, "n"), "burn_in must be < n");
      const int max_order = get<int>(s, "max_order");
      require(max_order >= 1 && max_order <= 20, "max_order must be in [1,20]");
      require(s.at("sources").is_array() && !s.at("sources").empty(), "infocheck.sources must be a nonempty list");
      for (const auto& src : s.at("sources")) {
        (void)get<std::string>(src, "name");
        const int order = get<int>(src, "order");
        require(order >= 0 && order <= 12, "source order must be in [0,12]");
        const auto rows = get<std::vector<std::vector<double>>>(src, "next");
        require(rows.size() == (std::size_t{1} << order), "source table needs 2^order rows");
        require_stochastic(rows, 2, "source " + src.at("name").get<std::string>());
      }
      break;
    }
  }
}

}  // namespace caa::cli
