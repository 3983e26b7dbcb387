#include "tracenet/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  const auto it = index.find(std::string(token));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

namespace {

Vocabulary vocab_from_counts(const std::map<std::string, std::uint64_t>& counts, std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  // std::map iteration is lexicographic, so a stable sort keeps that as the tie order.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : kept) {
    v.index.emplace(tok, v.tokens.size());
    v.tokens.push_back(tok);
    v.counts.push_back(n);
  }
  return v;
}

}  // namespace

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count) {
  std::map<std::string, std::uint64_t> counts;
  for (const Sentence& s : corpus) {
    for (const std::string& tok : s) ++counts[tok];
  }
  Vocabulary v = vocab_from_counts(counts, min_count);
  if (v.size() == 0) throw EmptyVocab("no token reaches min_count " + std::to_string(min_count));
  return v;
}

HuffmanTree build_huffman(std::span<const std::uint64_t> counts) {
  const std::size_t n = counts.size();
  HuffmanTree tree;
  tree.codes.assign(n, {});
  tree.points.assign(n, {});
  if (n <= 1) return tree;

  // (weight, smallest leaf index, node id); nodes >= n are inner.
  using Item = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i) heap.emplace(counts[i], i, i);
  std::vector<std::size_t> parent(2 * n - 1, 0);
  std::vector<std::int8_t> sign(2 * n - 1, 0);
  std::size_t next = n;
  while (heap.size() > 1) {
    const auto [wl, ml, left] = heap.top();
    heap.pop();
    const auto [wr, mr, right] = heap.top();
    heap.pop();
    parent[left] = parent[right] = next;
    sign[left] = 1;
    sign[right] = -1;
    heap.emplace(wl + wr, std::min(ml, mr), next);
    ++next;
  }
  const std::size_t root = 2 * n - 2;
  tree.inner_count = n - 1;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    auto& code = tree.codes[leaf];
    auto& points = tree.points[leaf];
    for (std::size_t v = leaf; v != root; v = parent[v]) {
      code.push_back(sign[v]);
      points.push_back(static_cast<std::uint32_t>(parent[v] - n));
    }
    std::reverse(code.begin(), code.end());
    std::reverse(points.begin(), points.end());
  }
  return tree;
}

std::uint64_t weighted_code_length(const HuffmanTree& tree, std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) total += counts[i] * tree.codes[i].size();
  return total;
}

void validate(const SkipGramConfig& c) {
  if (c.window == 0 || c.dim == 0 || c.epochs == 0 || c.min_count == 0 || c.workers == 0 || !(c.initial_lr > 0)) {
    throw ValidationError("SkipGramConfig", "window, dim, epochs, min_count, workers and initial_lr must be positive");
  }
}

EmbeddingModel init_model(Vocabulary vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingModel m;
  m.dim = dim;
  m.tree = build_huffman(vocab);
  m.vocab = std::move(vocab);
  m.input.resize(m.vocab.size() * dim);
  Rng rng(seed);
  const double r = 0.5 / static_cast<double>(dim);
  for (double& x : m.input) x = rng.uniform(-r, r);
  m.inner.assign(m.tree.inner_count * dim, 0.0);
  return m;
}

std::vector<std::pair<std::string, std::string>> context_pairs(const Sentence& trace, std::size_t c) {
  std::vector<std::pair<std::string, std::string>> out;
  const std::size_t n = trace.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= c ? i - c : 0;
    const std::size_t hi = std::min(n - 1, i + c);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) out.emplace_back(trace[i], trace[j]);
    }
  }
  return out;
}

std::size_t context_pair_count(std::size_t length, std::size_t c) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t lo = i >= c ? i - c : 0;
    const std::size_t hi = length == 0 ? 0 : std::min(length - 1, i + c);
    total += hi - lo;
  }
  return total;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// -log sigmoid(x)
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

std::size_t require(const Vocabulary& v, const std::string& token) {
  const auto i = v.find(token);
  if (!i) throw UnknownToken(token);
  return *i;
}

}  // namespace

double hs_probability(const EmbeddingModel& m, std::size_t center, std::size_t target) {
  double p = 1.0;
  const double* v = m.input_row(center).data();
  const auto& code = m.tree.codes[target];
  const auto& points = m.tree.points[target];
  for (std::size_t l = 0; l < code.size(); ++l) {
    p *= sigmoid(code[l] * dot(m.inner_row(points[l]).data(), v, m.dim));
  }
  return p;
}

HsGrad hs_loss_and_grad(const EmbeddingModel& m, const std::string& center, const std::string& target) {
  const std::size_t c = require(m.vocab, center);
  const std::size_t t = require(m.vocab, target);
  HsGrad g;
  g.center_grad.assign(m.dim, 0.0);
  const double* v = m.input_row(c).data();
  const auto& code = m.tree.codes[t];
  g.inner_nodes = m.tree.points[t];
  for (std::size_t l = 0; l < code.size(); ++l) {
    const double* w = m.inner_row(g.inner_nodes[l]).data();
    const double s = code[l];
    const double x = dot(w, v, m.dim);
    g.loss += neg_log_sigmoid(s * x);
    const double coeff = (sigmoid(s * x) - 1.0) * s;
    std::vector<double> gw(m.dim);
    for (std::size_t k = 0; k < m.dim; ++k) {
      g.center_grad[k] += coeff * w[k];
      gw[k] = coeff * v[k];
    }
    g.inner_grads.push_back(std::move(gw));
  }
  return g;
}

namespace {

// Plain accesses for the single-worker path; relaxed atomics for hogwild, where
// lost updates are tolerated but data races on doubles are not.
template <bool Shared>
struct Cell {
  static double load(double& x) {
    if constexpr (Shared) return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
    else return x;
  }
  static void store(double& x, double v) {
    if constexpr (Shared) std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
    else x = v;
  }
};

template <bool Shared>
double train_pair(EmbeddingModel& m, std::size_t center, std::size_t target, double lr, std::vector<double>& v,
                  std::vector<double>& neu1e) {
  using C = Cell<Shared>;
  const std::size_t d = m.dim;
  double* vin = m.input.data() + center * d;
  for (std::size_t k = 0; k < d; ++k) v[k] = C::load(vin[k]);
  std::fill(neu1e.begin(), neu1e.end(), 0.0);
  double loss = 0.0;
  const auto& code = m.tree.codes[target];
  const auto& points = m.tree.points[target];
  for (std::size_t l = 0; l < code.size(); ++l) {
    double* w = m.inner.data() + static_cast<std::size_t>(points[l]) * d;
    const double s = code[l];
    double x = 0.0;
    for (std::size_t k = 0; k < d; ++k) x += C::load(w[k]) * v[k];
    loss += neg_log_sigmoid(s * x);
    const double g = (sigmoid(s * x) - 1.0) * s;
    for (std::size_t k = 0; k < d; ++k) {
      const double wk = C::load(w[k]);
      neu1e[k] += g * wk;
      C::store(w[k], wk - lr * g * v[k]);
    }
  }
  for (std::size_t k = 0; k < d; ++k) C::store(vin[k], C::load(vin[k]) - lr * neu1e[k]);
  return loss;
}

std::vector<std::vector<std::size_t>> index_corpus(const EmbeddingModel& m, const Corpus& corpus) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(corpus.size());
  for (const Sentence& s : corpus) {
    std::vector<std::size_t> ids;
    for (const std::string& tok : s) {
      if (auto i = m.vocab.find(tok)) ids.push_back(*i);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

struct EpochResult {
  double loss = 0.0;
  std::size_t pairs = 0;
};

template <bool Shared>
EpochResult run_sentences(EmbeddingModel& m, const std::vector<std::vector<std::size_t>>& sentences,
                          std::size_t begin, std::size_t stride, std::size_t window, double initial_lr,
                          std::atomic<std::size_t>& processed, std::size_t total_pairs) {
  std::vector<double> v(m.dim), neu1e(m.dim);
  EpochResult r;
  for (std::size_t si = begin; si < sentences.size(); si += stride) {
    const auto& s = sentences[si];
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(n - 1, i + window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const std::size_t done = processed.fetch_add(1, std::memory_order_relaxed);
        const double frac = total_pairs ? static_cast<double>(done) / static_cast<double>(total_pairs) : 0.0;
        const double lr = initial_lr * (1.0 - 0.9 * std::min(frac, 1.0));
        r.loss += train_pair<Shared>(m, s[i], s[j], lr, v, neu1e);
        ++r.pairs;
      }
    }
  }
  return r;
}

}  // namespace

void train_epochs(EmbeddingModel& m, const Corpus& corpus, const SkipGramConfig& config, TrainStats* stats) {
  validate(config);
  const auto sentences = index_corpus(m, corpus);
  std::size_t per_epoch = 0;
  for (const auto& s : sentences) per_epoch += context_pair_count(s.size(), config.window);
  const std::size_t total = per_epoch * config.epochs;
  std::atomic<std::size_t> processed{0};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochResult r;
    if (config.workers == 1) {
      r = run_sentences<false>(m, sentences, 0, 1, config.window, config.initial_lr, processed, total);
    } else {
      std::vector<EpochResult> parts(config.workers);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < config.workers; ++w) {
        pool.emplace_back([&, w] {
          parts[w] = run_sentences<true>(m, sentences, w, config.workers, config.window, config.initial_lr,
                                         processed, total);
        });
      }
      for (auto& t : pool) t.join();
      for (const auto& p : parts) {
        r.loss += p.loss;
        r.pairs += p.pairs;
      }
    }
    if (stats) {
      stats->epoch_loss.push_back(r.pairs ? r.loss / static_cast<double>(r.pairs) : 0.0);
      stats->pairs_per_epoch.push_back(r.pairs);
    }
  }
}

EmbeddingModel train_skipgram(const Corpus& corpus, const SkipGramConfig& config, TrainStats* stats) {
  validate(config);
  EmbeddingModel m = init_model(build_vocab(corpus, config.min_count), config.dim, config.seed);
  train_epochs(m, corpus, config, stats);
  return m;
}

double corpus_loss(const EmbeddingModel& m, const Corpus& corpus, std::size_t window) {
  double loss = 0.0;
  std::size_t pairs = 0;
  for (const auto& s : index_corpus(m, corpus)) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(n - 1, i + window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const double* v = m.input_row(s[i]).data();
        const auto& code = m.tree.codes[s[j]];
        const auto& points = m.tree.points[s[j]];
        for (std::size_t l = 0; l < code.size(); ++l) {
          loss += neg_log_sigmoid(code[l] * dot(m.inner_row(points[l]).data(), v, m.dim));
        }
        ++pairs;
      }
    }
  }
  return pairs ? loss / static_cast<double>(pairs) : 0.0;
}

EmbeddingModel extend_model(const EmbeddingModel& model, const Corpus& corpus, std::uint64_t seed) {
  std::map<std::string, std::uint64_t> fresh;
  for (const Sentence& s : corpus) {
    for (const std::string& tok : s) {
      if (!model.vocab.find(tok)) ++fresh[tok];
    }
  }
  if (fresh.empty()) return model;

  // Existing tokens keep their indices (and rows); new ones are appended.
  EmbeddingModel m;
  m.dim = model.dim;
  m.vocab = model.vocab;
  for (const Sentence& s : corpus) {
    for (const std::string& tok : s) {
      if (auto i = model.vocab.find(tok)) ++m.vocab.counts[*i];
    }
  }
  const Vocabulary appended = vocab_from_counts(fresh, 1);
  for (std::size_t i = 0; i < appended.size(); ++i) {
    m.vocab.index.emplace(appended.tokens[i], m.vocab.tokens.size());
    m.vocab.tokens.push_back(appended.tokens[i]);
    m.vocab.counts.push_back(appended.counts[i]);
  }
  m.tree = build_huffman(m.vocab);
  m.input = model.input;
  Rng rng(seed);
  const double r = 0.5 / static_cast<double>(m.dim);
  for (std::size_t i = 0; i < appended.size() * m.dim; ++i) m.input.push_back(rng.uniform(-r, r));
  m.inner.assign(m.tree.inner_count * m.dim, 0.0);
  return m;
}

EmbeddingModel update_model(const EmbeddingModel& model, const Corpus& corpus, const SkipGramConfig& config) {
  EmbeddingModel m = extend_model(model, corpus, config.seed);
  train_epochs(m, corpus, config);
  return m;
}

// ---- vector tables ----------------------------------------------------------------

VectorTable::VectorTable(std::vector<std::string> tokens, std::size_t dim, std::vector<double> data)
    : tokens_(std::move(tokens)), dim_(dim), data_(std::move(data)) {
  if (data_.size() != tokens_.size() * dim_) throw ShapeError("vector table data does not match count x dim");
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

std::optional<std::size_t> VectorTable::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VectorTable to_table(const EmbeddingModel& m) { return VectorTable(m.vocab.tokens, m.dim, m.input); }

void save_vectors(std::ostream& out, const VectorTable& t) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{} {}\n", t.size(), t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{}", t.tokens()[i]);
    for (double x : t.row(i)) fmt::format_to(std::back_inserter(buf), " {:.6f}", x);
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void save_vectors(std::ostream& out, const EmbeddingModel& m) { save_vectors(out, to_table(m)); }

namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(line, "not a number: '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

VectorTable load_vectors(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "missing header");
  const auto header = fields(line);
  if (header.size() != 2) throw FormatError(1, "header must be '<count> <dim>'");
  const auto count = parse_number<std::size_t>(header[0], 1);
  const auto dim = parse_number<std::size_t>(header[1], 1);
  if (dim == 0) throw FormatError(1, "dimension must be positive");

  std::vector<std::string> tokens;
  std::vector<double> data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = fields(line);
    if (f.empty()) continue;
    if (tokens.size() == count) throw FormatError(lineno, "more rows than the header count " + std::to_string(count));
    if (f.size() != dim + 1) {
      throw FormatError(lineno, "expected token and " + std::to_string(dim) + " values, got " +
                                    std::to_string(f.size() - 1));
    }
    tokens.emplace_back(f[0]);
    for (std::size_t k = 1; k <= dim; ++k) data.push_back(parse_number<double>(f[k], lineno));
  }
  if (tokens.size() != count) {
    throw FormatError(lineno + 1, "header announces " + std::to_string(count) + " rows, found " +
                                      std::to_string(tokens.size()));
  }
  return VectorTable(std::move(tokens), dim, std::move(data));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace tracenet
