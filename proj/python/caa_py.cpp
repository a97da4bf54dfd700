#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "caa/coders.hpp"
#include "caa/config.hpp"
#include "caa/evaluation.hpp"
#include "caa/experiments.hpp"
#include "caa/infotheory.hpp"
#include "caa/ladders.hpp"
#include "caa/observers.hpp"
#include "caa/sources.hpp"

namespace py = pybind11;
using namespace caa;

namespace {

std::vector<std::uint8_t> to_vector(const SymbolSequence& s) { return {s.symbols().begin(), s.symbols().end()}; }

observers::ObserverSpec parse_spec(const std::string& kind, int budget, double alpha, int fallback_order) {
  observers::ObserverSpec spec{observers::observer_kind_from_string(kind), budget, alpha, fallback_order};
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regret-dispersion toolkit: sources, observers, coders, ladders and entropy estimators";

  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SymbolSequence>(m, "SymbolSequence")
      .def(py::init([](std::vector<std::uint8_t> symbols, unsigned alphabet_size) {
             return SymbolSequence(std::move(symbols), alphabet_size);
           }),
           py::arg("symbols"), py::arg("alphabet_size"))
      .def_property_readonly("symbols", &to_vector)
      .def_property_readonly("alphabet_size", &SymbolSequence::alphabet_size)
      .def_property_readonly("body_start", [](const SymbolSequence& s) { return s.meta().body_start; })
      .def_property_readonly("source", [](const SymbolSequence& s) { return s.meta().name; })
      .def("fingerprint", &SymbolSequence::fingerprint)
      .def("__len__", &SymbolSequence::size)
      .def("__eq__", [](const SymbolSequence& a, const SymbolSequence& b) { return a == b; });

  // -- sources
  m.def("gen_periodic_noise",
        [](std::vector<std::uint8_t> tmpl, double p, std::size_t n, std::uint64_t seed,
           std::optional<std::size_t> phase) { return sources::gen_periodic_noise(tmpl, p, n, seed, phase); },
        py::arg("template"), py::arg("p"), py::arg("n"), py::arg("seed"), py::arg("phase") = py::none());
  m.def("gen_hmm",
        [](std::array<std::array<double, 2>, 2> transition, std::array<std::array<double, 2>, 2> emission,
           std::size_t n, std::uint64_t seed) {
          return sources::gen_hmm({transition, emission}, n, seed);
        },
        py::arg("transition"), py::arg("emission"), py::arg("n"), py::arg("seed"));
  m.def("gen_xor_crypto",
        [](std::vector<std::uint8_t> key, std::size_t n, std::uint64_t seed, std::size_t prefix_len, bool reveal) {
          return sources::gen_xor_crypto({std::move(key), prefix_len, reveal}, n, seed);
        },
        py::arg("key"), py::arg("n"), py::arg("seed"), py::arg("prefix_len") = 64, py::arg("reveal") = true);
  m.def("gen_iid", [](std::vector<double> probs, std::size_t n, std::uint64_t seed) {
    return sources::gen_iid(probs, n, seed);
  }, py::arg("probs"), py::arg("n"), py::arg("seed"));
  m.def("gen_markov_chain",
        [](unsigned order, std::vector<std::vector<double>> next, std::size_t n, std::uint64_t seed) {
          return sources::gen_markov_chain({2, order, std::move(next)}, n, seed);
        },
        py::arg("order"), py::arg("next"), py::arg("n"), py::arg("seed"));
  m.def("load_text", [](const std::string& path) { return sources::load_text(path); }, py::arg("path"));
  m.def("eca_evolve", &sources::eca_evolve, py::arg("rule"), py::arg("initial"), py::arg("steps"));

  // -- observers and evaluation
  m.def("average_log_loss",
        [](const std::string& kind, int budget, const SymbolSequence& seq, std::size_t burn_in, double alpha,
           int fallback_order) {
          return evaluation::average_log_loss(parse_spec(kind, budget, alpha, fallback_order), seq, burn_in).avg_loss;
        },
        py::arg("kind"), py::arg("budget"), py::arg("sequence"), py::arg("burn_in") = 0, py::arg("alpha") = 1.0,
        py::arg("fallback_order") = 3);
  m.def("caa_variance",
        [](std::vector<double> losses, std::vector<double> prior) {
          return evaluation::caa_variance(evaluation::regret_table_from_losses(losses), prior).variance;
        },
        py::arg("losses"), py::arg("prior") = std::vector<double>{});
  m.def("caa_max", [](std::vector<double> losses) {
    return evaluation::caa_max(evaluation::regret_table_from_losses(losses));
  }, py::arg("losses"));
  m.def("two_alg_closed_form", &evaluation::two_alg_closed_form, py::arg("delta_loss"), py::arg("p"));

  // -- coders
  m.def("codelength_bits",
        [](const std::string& coder, const SymbolSequence& seq) {
          return coders::codelength(coders::coder_from_string(coder), seq).bits;
        },
        py::arg("coder"), py::arg("sequence"));
  m.def("roundtrip",
        [](const std::string& coder, const SymbolSequence& seq) {
          const auto c = coders::coder_from_string(coder);
          return coders::decompress(c, coders::compress(c, seq), seq.alphabet_size());
        },
        py::arg("coder"), py::arg("sequence"), "compress then decompress; returns the decoded symbols");

  // -- ladders
  m.def("depth_indicators",
        [](std::vector<double> losses, std::vector<int> budgets, double alpha) {
          const auto profile = ladders::advantage_profile(losses, budgets);
          return ladders::to_json(ladders::depth_indicators(profile, alpha)).dump();
        },
        py::arg("losses"), py::arg("budgets") = std::vector<int>{}, py::arg("alpha") = 2.0 / 3.0);
  m.def("profile_csv",
        [](std::vector<double> losses, std::vector<int> budgets) {
          return ladders::profile_csv(ladders::advantage_profile(losses, budgets));
        },
        py::arg("losses"), py::arg("budgets") = std::vector<int>{});

  // -- information theory
  m.def("conditional_entropy",
        [](const SymbolSequence& seq, unsigned order) {
          return infotheory::empirical_conditional_entropy(seq, order).value;
        },
        py::arg("sequence"), py::arg("order"));
  m.def("cmi_atom", &infotheory::cmi_atom, py::arg("sequence"), py::arg("m"), py::arg("start") = py::none());
  m.def("excess_entropy_truncated",
        [](const SymbolSequence& seq, unsigned max_order) {
          const auto s = infotheory::excess_entropy_truncated(seq, max_order);
          return py::dict(py::arg("atoms") = s.atoms_raw, py::arg("partial_sums") = s.partial_sums,
                          py::arg("conditional_entropies") = s.conditional_entropies,
                          py::arg("truncated_excess_entropy") = s.truncated_excess_entropy);
        },
        py::arg("sequence"), py::arg("max_order"));
  m.def("binary_entropy", &infotheory::binary_entropy, py::arg("p"));

  // -- experiments
  m.def("default_config", [](const std::string& name) {
    return cli::default_config(cli::experiment_from_string(name)).dump();
  }, py::arg("experiment"));
  m.def("run_experiment",
        [](const std::string& name, std::vector<std::string> assignments, std::optional<std::uint64_t> seed) {
          const auto cfg =
              cli::resolve_config(cli::experiment_from_string(name), {}, {seed, std::nullopt, std::nullopt, assignments});
          experiments::RunOutput out;
          {
            py::gil_scoped_release release;
            out = experiments::run_experiment(cfg);
          }
          return py::make_tuple(out.files, experiments::make_manifest(cfg, out).dump());
        },
        py::arg("experiment"), py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none());
  m.def("csv_schemas", &experiments::csv_schemas);
}
