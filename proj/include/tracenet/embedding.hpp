#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tracenet/traces.hpp"

namespace tracenet {

struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return tokens.size(); }
  std::optional<std::size_t> find(std::string_view token) const;
};

// Descending frequency, ties broken lexicographically. Throws EmptyVocab.
Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count = 1);

// Per leaf: the branch signs from the root down (+1 left, -1 right) and the
// inner-node indices visited. Inner nodes are numbered in creation order, so
// the root is inner_count - 1.
struct HuffmanTree {
  std::vector<std::vector<std::int8_t>> codes;
  std::vector<std::vector<std::uint32_t>> points;
  std::size_t inner_count = 0;
};

// Ties are broken by (weight, smallest leaf index contained); the first node
// popped becomes the left child.
HuffmanTree build_huffman(std::span<const std::uint64_t> counts);
inline HuffmanTree build_huffman(const Vocabulary& vocab) { return build_huffman(vocab.counts); }

std::uint64_t weighted_code_length(const HuffmanTree& tree, std::span<const std::uint64_t> counts);

struct EmbeddingModel {
  std::size_t dim = 0;
  Vocabulary vocab;
  HuffmanTree tree;
  std::vector<double> input;  // |V| x dim, v_w
  std::vector<double> inner;  // (|V|-1) x dim, v'_n

  std::span<double> input_row(std::size_t i) { return {input.data() + i * dim, dim}; }
  std::span<const double> input_row(std::size_t i) const { return {input.data() + i * dim, dim}; }
  std::span<double> inner_row(std::size_t i) { return {inner.data() + i * dim, dim}; }
  std::span<const double> inner_row(std::size_t i) const { return {inner.data() + i * dim, dim}; }
};

struct SkipGramConfig {
  std::size_t window = 5;
  std::size_t dim = 100;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::uint64_t min_count = 1;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

void validate(const SkipGramConfig& config);

// Input rows uniform in [-0.5/dim, 0.5/dim], inner rows zero.
EmbeddingModel init_model(Vocabulary vocab, std::size_t dim, std::uint64_t seed);

// Ordered (center, context) pairs with 0 < |offset| <= c.
std::vector<std::pair<std::string, std::string>> context_pairs(const Sentence& trace, std::size_t c);
std::size_t context_pair_count(std::size_t length, std::size_t c);

double sigmoid(double x);

// p(target | center) as a product of branch probabilities along the target's path.
double hs_probability(const EmbeddingModel& model, std::size_t center, std::size_t target);

struct HsGrad {
  double loss = 0.0;
  std::vector<double> center_grad;               // dL/dv_center
  std::vector<std::uint32_t> inner_nodes;        // path of the target
  std::vector<std::vector<double>> inner_grads;  // dL/dv'_n per path node
};

// Throws UnknownToken.
HsGrad hs_loss_and_grad(const EmbeddingModel& model, const std::string& center, const std::string& target);

struct TrainStats {
  std::vector<double> epoch_loss;  // mean pair loss observed during each epoch
  std::vector<std::size_t> pairs_per_epoch;
};

EmbeddingModel train_skipgram(const Corpus& corpus, const SkipGramConfig& config, TrainStats* stats = nullptr);

// Continues SGD on `model` in place. Out-of-vocabulary tokens are skipped.
void train_epochs(EmbeddingModel& model, const Corpus& corpus, const SkipGramConfig& config,
                  TrainStats* stats = nullptr);

// Mean -log p(context | center) over all in-vocabulary pairs.
double corpus_loss(const EmbeddingModel& model, const Corpus& corpus, std::size_t window);

// Adds unseen tokens of `corpus` (counts merged), rebuilds the Huffman tree,
// keeps existing input rows and resets inner vectors to zero. Returns the
// model unchanged when every token is known.
EmbeddingModel extend_model(const EmbeddingModel& model, const Corpus& corpus, std::uint64_t seed);

// extend_model followed by training on `corpus` only.
EmbeddingModel update_model(const EmbeddingModel& model, const Corpus& corpus, const SkipGramConfig& config);

// Read-only token -> vector lookup (the loaded form of a vector file).
class VectorTable {
 public:
  VectorTable() = default;
  VectorTable(std::vector<std::string> tokens, std::size_t dim, std::vector<double> data);

  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> find(std::string_view token) const;
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

 private:
  std::vector<std::string> tokens_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

VectorTable to_table(const EmbeddingModel& model);

// word2vec text format: "<count> <dim>" then "<token> v1 ... vd", 6 decimals.
void save_vectors(std::ostream& out, const VectorTable& table);
void save_vectors(std::ostream& out, const EmbeddingModel& model);
// Throws FormatError carrying the 1-based line number.
VectorTable load_vectors(std::istream& in);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace tracenet
