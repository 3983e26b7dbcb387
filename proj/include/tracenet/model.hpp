#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tracenet/embedding.hpp"
#include "tracenet/graph.hpp"
#include "tracenet/tensor.hpp"
#include "tracenet/traces.hpp"

namespace tracenet {

enum class SemanticMode { TraceWalk, DeepWalk, None };

std::string_view to_string(SemanticMode mode);
SemanticMode parse_semantic_mode(std::string_view s);
std::string_view to_string(ProjectionMode mode);
// Accepts "activities"/"gateways"/"all" and the task numbers "1"/"2"/"3".
ProjectionMode parse_task_mode(std::string_view s);
int task_number(ProjectionMode mode);

struct ModelConfig {
  std::size_t embed_dim = 100;
  std::vector<std::size_t> filter_widths{2, 3, 4};
  std::vector<std::size_t> filters_per_width{43, 43, 42};
  std::size_t hidden_units = 128;
  std::size_t max_tokens = 100;
  std::size_t max_nodes = 100;
  double gamma = 0.7;
  std::size_t batch = 128;
  std::size_t max_epochs = 10000;
  double lr = 2e-4;
  double lr_late = 1e-4;
  std::size_t lr_drop_epoch = 7000;
  std::size_t patience = 200;
  std::uint64_t seed = 1;
  SemanticMode semantic_mode = SemanticMode::TraceWalk;
  ProjectionMode task_mode = ProjectionMode::All;
  std::size_t workers = 1;

  std::size_t total_filters() const;
};

void validate(const ModelConfig& config);
nlohmann::json config_to_json(const ModelConfig& config);
// Missing keys keep their defaults; unknown keys raise SchemaError.
ModelConfig config_from_json(const nlohmann::json& doc, ModelConfig base = {});

// Lowercase ASCII; split on every non-alphanumeric ASCII byte. Bytes >= 0x80
// are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

// A padded rows x dim sequence. Rows at index >= used are zero.
struct Sequence {
  Tensor rows;
  std::size_t used = 0;
};

// Lookup (OOV -> zero row), truncate at max_rows, zero-pad to max_rows.
Sequence embed_text(const std::vector<std::string>& tokens, const VectorTable& vectors, std::size_t max_rows);

// Kahn order with ties broken by node id. A cycle releases the smallest
// remaining node that already has an emitted predecessor.
std::vector<std::size_t> topological_order(const ProcessGraph& graph);

struct GraphEncoding {
  Sequence semantic;  // S
  Sequence labels;    // L
  std::size_t missing_embeddings = 0;
};

// `node_vectors` may be null only when config.semantic_mode is None.
GraphEncoding encode_graph(const ProcessGraph& graph, const VectorTable* node_vectors, const VectorTable& word_vectors,
                           const ModelConfig& config);

Sequence encode_text(const ProcessText& text, const VectorTable& word_vectors, const ModelConfig& config);

struct EncodedPair {
  Sequence semantic;
  Sequence labels;
  Sequence text;
  double gold = 0.0;
};

EncodedPair encode_pair(const ProcessGraph& graph, const ProcessText& text, const VectorTable* node_vectors,
                        const VectorTable& word_vectors, const ModelConfig& config, double gold = 0.0);

enum class Channel { Semantic, Labels, Text };

// One filter bank: a weight tensor (f x h x k) and bias (f) per width.
struct FilterBank {
  std::vector<Parameter> weights;
  std::vector<Parameter> biases;
};

class TraceNetModel {
 public:
  explicit TraceNetModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  // Glorot uniform per matrix (filters: rows h, cols k); biases zero.
  void init_glorot(std::uint64_t seed);

  // The bank a channel is convolved with. Labels and Text return the same object.
  const FilterBank& filters(Channel channel) const;

  // Concatenated pooled features V = S + L + T (3 * total_filters).
  std::vector<double> features(const EncodedPair& pair) const;
  double forward(const EncodedPair& pair) const;

  // Forward, then backward with dJ/dscore = dloss(score); gradients are added
  // into `grads` (ordered as parameters()). Returns the score.
  double accumulate_gradient(const EncodedPair& pair, const std::function<double(double)>& dloss,
                             std::vector<Tensor>& grads) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<Tensor> zero_gradients() const;

 private:
  struct Pooling {
    std::vector<ConvPool> per_width;
  };
  Pooling pool(const FilterBank& bank, const Sequence& seq) const;

  ModelConfig config_;
  FilterBank text_bank_;  // tied: applied to L and T
  FilterBank semantic_bank_;
  Parameter w1_, b1_, w2_, b2_, wo_, bo_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean batch loss before each update
  double val_loss = 0.0;
  double val_mae = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

// Mini-batch Adam on the quantile loss; keeps the parameters of the epoch with
// the best validation loss (training loss when `validation` is empty).
// Per-batch gradients are summed in fixed-size chunks reduced in chunk order,
// so results do not depend on config.workers. Throws EmptyDataset.
TrainResult train(TraceNetModel& model, const std::vector<EncodedPair>& training,
                  const std::vector<EncodedPair>& validation, const ModelConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

struct Evaluation {
  double mae = 0.0;
  std::vector<double> predictions;
  std::vector<double> residuals;  // prediction - gold
};

Evaluation evaluate(const TraceNetModel& model, const std::vector<EncodedPair>& dataset);

ConsistencyScore predict(const TraceNetModel& model, const ProcessGraph& graph, const ProcessText& text,
                         const VectorTable* node_vectors, const VectorTable& word_vectors);

}  // namespace tracenet
