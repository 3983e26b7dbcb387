#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tracenet/commands.hpp"
#include "tracenet/embedding.hpp"
#include "tracenet/errors.hpp"
#include "tracenet/forge.hpp"
#include "tracenet/graph.hpp"
#include "tracenet/tensor.hpp"
#include "tracenet/traces.hpp"

namespace py = pybind11;
using namespace tracenet;
using nlohmann::json;

namespace {

std::vector<std::vector<std::string>> traces_of(const TraceSet& ts) {
  std::vector<std::vector<std::string>> out;
  for (const Trace& t : ts.traces) out.push_back(t.tokens);
  return out;
}

std::string gen(std::uint64_t seed, const std::string& out_dir, std::size_t graphs, std::size_t variants) {
  GenOptions o;
  o.graphs = graphs;
  o.variants = variants;
  const GenReport r = cmd_gen(GlobalOptions{seed, 1, out_dir}, o);
  return json{{"base_graphs", r.base_graphs}, {"mutated_graphs", r.mutated_graphs}, {"pairs", r.pairs},
              {"train_pairs", r.train_pairs}, {"test_pairs", r.test_pairs}, {"histogram", r.histogram},
              {"dataset", r.dataset_path}}
      .dump();
}

std::string embed(std::uint64_t seed, const std::string& out_dir, const std::string& dataset, const std::string& mode,
                  std::size_t dim, std::size_t epochs) {
  EmbedOptions o;
  o.dataset = dataset;
  o.mode = mode;
  o.dim = dim;
  o.epochs = epochs;
  const EmbedReport r = cmd_embed(GlobalOptions{seed, 1, out_dir}, o);
  return json{{"graphs", r.graphs}, {"node_vectors", r.node_vectors}, {"word_vectors", r.word_vectors},
              {"node_path", r.node_path}, {"word_path", r.word_path}}
      .dump();
}

std::string train_model(std::uint64_t seed, const std::string& out_dir, const std::string& dataset,
                        const std::string& node_vectors, const std::string& word_vectors,
                        const std::string& model_json) {
  TrainOptions o;
  o.dataset = dataset;
  o.node_vectors = node_vectors;
  o.word_vectors = word_vectors;
  o.model = config_from_json(json::parse(model_json));
  const TrainReport r = cmd_train(GlobalOptions{seed, 1, out_dir}, o);
  return json{{"train_examples", r.train_examples}, {"val_examples", r.val_examples},
              {"best_epoch", r.result.best_epoch}, {"epochs", r.result.history.size()},
              {"checkpoint", r.checkpoint_path}}
      .dump();
}

std::string eval_model(std::uint64_t seed, const std::string& out_dir, const std::string& dataset,
                       const std::string& model_dir, const std::string& tasks, const std::string& split) {
  return metrics_to_json(cmd_eval(GlobalOptions{seed, 1, out_dir}, EvalOptions{dataset, model_dir, tasks, split}))
      .dump();
}

}  // namespace

PYBIND11_MODULE(_tracenet, m) {
  m.doc() = "Process graph / text consistency checking";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("normalize_graph", [](const std::string& doc) { return serialize_graph(parse_graph(doc)); },
        py::arg("document"), "Parse and validate a graph document; returns its canonical serialization.");
  m.def("flatten_tree", [](const std::string& doc) { return serialize_graph(flatten(parse_tree(doc))); },
        py::arg("document"));
  m.def("enumerate_traces",
        [](const std::string& doc, std::size_t max_traces, std::uint64_t seed) {
          return traces_of(enumerate_traces(parse_tree(doc), TraceCaps{max_traces, 200, seed}));
        },
        py::arg("document"), py::arg("max_traces") = 1000, py::arg("seed") = 0);
  m.def("sample_traces",
        [](const std::string& doc, std::size_t max_traces, std::uint64_t seed) {
          return traces_of(sample_traces(parse_graph(doc), TraceCaps{max_traces, 200, seed}));
        },
        py::arg("document"), py::arg("max_traces") = 1000, py::arg("seed") = 0);
  m.def("generate_tree",
        [](std::uint64_t seed, std::size_t max_activities) {
          GenConfig c;
          c.seed = seed;
          c.max_activities = max_activities;
          return serialize_tree(gen_graph(c));
        },
        py::arg("seed"), py::arg("max_activities") = 10);
  m.def("generate_text", [](const std::string& doc, std::uint64_t seed) {
    return generate_text(parse_tree(doc), seed).sentences;
  });
  m.def("bp_similarity",
        [](const std::string& a, const std::string& b) {
          return bp_similarity(behavior_profile(parse_tree(a), TraceCaps{}), behavior_profile(parse_tree(b), TraceCaps{}))
              .value();
        },
        py::arg("tree_a"), py::arg("tree_b"));
  m.def("quantile_loss",
        [](const std::vector<double>& e, const std::vector<double>& y, double gamma) {
          return quantile_loss(e, y, gamma).loss;
        },
        py::arg("predicted"), py::arg("gold"), py::arg("gamma") = 0.7);
  m.def("mean_absolute_error", [](const std::vector<double>& e, const std::vector<double>& y) {
    return mean_absolute_error(e, y);
  });
  m.def("huffman_code_length", [](const std::vector<std::uint64_t>& counts) {
    return weighted_code_length(build_huffman(counts), counts);
  });
  m.def("baseline",
        [](std::size_t n, std::uint64_t seed) {
          const BaselineReport r = cmd_baseline(n, seed);
          return json{{"n", r.n}, {"estimate", r.estimate}, {"error", r.error}, {"clt_bound", r.clt_bound}}.dump();
        },
        py::arg("n"), py::arg("seed") = 0);
  m.def("gradcheck",
        [](std::uint64_t seed, std::size_t seeds) {
          json lines = json::array();
          for (const GradcheckLine& l : cmd_gradcheck(seed, seeds).lines) {
            lines.push_back({{"layer", l.layer}, {"max_rel_error", l.max_rel_error}, {"pass", l.pass}});
          }
          return lines.dump();
        },
        py::arg("seed") = 0, py::arg("seeds") = 2);
  m.def("gen", &gen, py::arg("seed"), py::arg("out_dir"), py::arg("graphs") = 10, py::arg("variants") = 3);
  m.def("embed", &embed, py::arg("seed"), py::arg("out_dir"), py::arg("dataset"), py::arg("mode") = "tracewalk",
        py::arg("dim") = 100, py::arg("epochs") = 5);
  m.def("train", &train_model, py::arg("seed"), py::arg("out_dir"), py::arg("dataset"), py::arg("node_vectors"),
        py::arg("word_vectors"), py::arg("model_json") = "{}");
  m.def("eval", &eval_model, py::arg("seed"), py::arg("out_dir"), py::arg("dataset"), py::arg("model_dir"),
        py::arg("tasks") = "all", py::arg("split") = "test");
}
