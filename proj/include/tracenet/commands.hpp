#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracenet/forge.hpp"
#include "tracenet/model.hpp"

namespace tracenet {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Maps an exception thrown by a command to an exit code.
int exit_code_for(const std::exception& e);

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir = ".";
};

// ---- gen ---------------------------------------------------------------------------

struct GenOptions {
  std::size_t graphs = 10;
  std::size_t variants = 3;
  std::vector<std::size_t> n_ops{1, 2, 4};
  std::size_t cross_pairs = 1;
  double test_fraction = 0.2;
  std::size_t max_depth = 4;
  std::size_t max_activities = 10;
  std::size_t max_traces = 1000;
};

struct GenReport {
  std::size_t base_graphs = 0;
  std::size_t mutated_graphs = 0;
  std::size_t pairs = 0;
  std::size_t train_pairs = 0;
  std::size_t test_pairs = 0;
  std::vector<std::size_t> histogram;
  std::string dataset_path;
};

// Writes dataset.jsonl, manifest.json and histogram.json into out_dir.
GenReport cmd_gen(const GlobalOptions& global, const GenOptions& options);

// ---- embed -------------------------------------------------------------------------

struct EmbedOptions {
  std::string dataset;
  std::string mode = "tracewalk";  // tracewalk | deepwalk | none (words only)
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  std::size_t max_traces = 1000;
  std::size_t max_len = 200;
  std::size_t walks_per_node = 10;
  std::size_t walk_len = 40;
  bool words = true;
  std::string text_corpus;  // optional plain-text file for the word vectors
};

struct EmbedReport {
  std::size_t graphs = 0;
  std::size_t node_tokens = 0;   // distinct node tokens in the corpus
  std::size_t node_vectors = 0;
  std::size_t word_vectors = 0;
  std::string node_path;
  std::string word_path;
};

// Writes nodes_<mode>.vec and/or words.vec (word2vec text format).
EmbedReport cmd_embed(const GlobalOptions& global, const EmbedOptions& options);

// ---- train -------------------------------------------------------------------------

struct TrainOptions {
  std::string dataset;
  std::string node_vectors;  // may be empty when model.semantic_mode is None
  std::string word_vectors;
  ModelConfig model;
  double val_fraction = 0.1;  // share of training graphs held out for early stopping
  std::size_t log_every = 50;
};

struct TrainReport {
  TrainResult result;
  std::size_t train_examples = 0;
  std::size_t val_examples = 0;
  std::size_t missing_embeddings = 0;
  std::string checkpoint_path;
};

// Writes model.tnk, model.json (config + vector-vocabulary hashes) and history.json.
TrainReport cmd_train(const GlobalOptions& global, const TrainOptions& options, std::ostream* log = nullptr);

// ---- eval --------------------------------------------------------------------------

struct EvalOptions {
  std::string dataset;
  std::string model_dir;
  std::string tasks = "all";  // all | 1 | 2 | 3 | "model" (the trained task only)
  std::string split = "test";
};

struct TaskMetrics {
  int task = 3;
  std::string semantic_mode;
  double mae = 0.0;
  std::size_t n_examples = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<TaskMetrics> rows;
};

nlohmann::json metrics_to_json(const EvalReport& report);
std::string format_metrics_table(const EvalReport& report);

// Writes metrics.json into out_dir.
EvalReport cmd_eval(const GlobalOptions& global, const EvalOptions& options);

// A trained model together with the vector tables it was trained against.
struct LoadedModel {
  TraceNetModel model;
  VectorTable node_vectors;
  VectorTable word_vectors;
};

// Verifies the sidecar's vocabulary hashes against the vector files.
LoadedModel load_trained_model(const std::string& model_dir);

// ---- baseline ----------------------------------------------------------------------

struct BaselineReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double error = 0.0;       // |estimate - 1/3|
  double clt_bound = 0.0;   // 4 sigma / sqrt(n)
  double closed_form_1000 = 0.0;
  double direct_sum_1000 = 0.0;
};

// Mean |p - q| over n uniform draws on the unit square.
BaselineReport cmd_baseline(std::size_t n, std::uint64_t seed);

// Riemann-grid value of E|p - q| on an n x n grid: (1/n^3) sum |i - j|.
double grid_mean_abs_diff(std::size_t n);
// The finite-n partial-sum expression 1/3 - 1/(2 n^2). The exact grid value is
// (n^2 - 1) / (3 n^2); the two agree only in the limit.
double closed_form_mean_abs_diff(std::size_t n);

// ---- gradcheck ---------------------------------------------------------------------

struct GradcheckLine {
  std::string layer;
  double max_rel_error = 0.0;
  std::string worst;  // parameter[index] of the worst entry
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GradcheckLine> lines;
  bool pass() const;
};

inline constexpr double kGradTolerance = 1e-4;

// Every layer and the assembled model at `seeds` seeds. `inject_fault` skews
// each analytic gradient so every line must fail.
GradcheckReport cmd_gradcheck(std::uint64_t seed, std::size_t seeds = 10, bool inject_fault = false);

// ---- helpers -----------------------------------------------------------------------

// FNV-1a over the newline-joined tokens.
std::uint64_t vocab_hash(const std::vector<std::string>& tokens);

std::vector<DatasetRow> load_dataset(const std::string& path);
VectorTable load_vector_file(const std::string& path);

}  // namespace tracenet
