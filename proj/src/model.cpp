#include "tracenet/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <thread>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

std::string_view to_string(SemanticMode mode) {
  switch (mode) {
    case SemanticMode::TraceWalk: return "tracewalk";
    case SemanticMode::DeepWalk: return "deepwalk";
    case SemanticMode::None: return "none";
  }
  return "none";
}

SemanticMode parse_semantic_mode(std::string_view s) {
  if (s == "tracewalk") return SemanticMode::TraceWalk;
  if (s == "deepwalk") return SemanticMode::DeepWalk;
  if (s == "none") return SemanticMode::None;
  throw SchemaError("unknown semantic mode '" + std::string(s) + "' (tracewalk|deepwalk|none)");
}

std::string_view to_string(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::ActivitiesOnly: return "activities";
    case ProjectionMode::GatewaysOnly: return "gateways";
    case ProjectionMode::All: return "all";
  }
  return "all";
}

ProjectionMode parse_task_mode(std::string_view s) {
  if (s == "activities" || s == "1") return ProjectionMode::ActivitiesOnly;
  if (s == "gateways" || s == "2") return ProjectionMode::GatewaysOnly;
  if (s == "all" || s == "3") return ProjectionMode::All;
  throw SchemaError("unknown task mode '" + std::string(s) + "' (activities|gateways|all or 1|2|3)");
}

int task_number(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::ActivitiesOnly: return 1;
    case ProjectionMode::GatewaysOnly: return 2;
    case ProjectionMode::All: return 3;
  }
  return 3;
}

std::size_t ModelConfig::total_filters() const {
  return std::accumulate(filters_per_width.begin(), filters_per_width.end(), std::size_t{0});
}

void validate(const ModelConfig& c) {
  auto fail = [](const std::string& field, const std::string& what) { throw ValidationError(field, what); };
  if (c.embed_dim == 0 || c.hidden_units == 0 || c.max_tokens == 0 || c.max_nodes == 0) {
    fail("ModelConfig", "dimensions must be positive");
  }
  if (c.filter_widths.empty() || c.filter_widths.size() != c.filters_per_width.size()) {
    fail("filter_widths", "need one filter count per width");
  }
  for (std::size_t i = 0; i < c.filter_widths.size(); ++i) {
    const std::size_t h = c.filter_widths[i];
    if (h == 0 || h > c.max_tokens || h > c.max_nodes) fail("filter_widths", "widths must lie in [1, min(M, max_nodes)]");
    if (c.filters_per_width[i] == 0) fail("filters_per_width", "filter counts must be positive");
  }
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("gamma", "gamma must lie in [0, 1]");
  if (c.batch == 0 || c.max_epochs == 0 || c.workers == 0) fail("ModelConfig", "batch, max_epochs and workers must be positive");
  if (!(c.lr > 0.0) || !(c.lr_late > 0.0)) fail("lr", "learning rates must be positive");
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{{"embed_dim", c.embed_dim},
                        {"filter_widths", c.filter_widths},
                        {"filters_per_width", c.filters_per_width},
                        {"hidden_units", c.hidden_units},
                        {"max_tokens", c.max_tokens},
                        {"max_nodes", c.max_nodes},
                        {"gamma", c.gamma},
                        {"batch", c.batch},
                        {"max_epochs", c.max_epochs},
                        {"lr", c.lr},
                        {"lr_late", c.lr_late},
                        {"lr_drop_epoch", c.lr_drop_epoch},
                        {"patience", c.patience},
                        {"seed", c.seed},
                        {"semantic_mode", to_string(c.semantic_mode)},
                        {"task_mode", to_string(c.task_mode)},
                        {"workers", c.workers}};
}

ModelConfig config_from_json(const nlohmann::json& doc, ModelConfig c) {
  if (!doc.is_object()) throw SchemaError("model config must be a JSON object");
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "embed_dim") c.embed_dim = v.get<std::size_t>();
      else if (key == "filter_widths") c.filter_widths = v.get<std::vector<std::size_t>>();
      else if (key == "filters_per_width") c.filters_per_width = v.get<std::vector<std::size_t>>();
      else if (key == "hidden_units") c.hidden_units = v.get<std::size_t>();
      else if (key == "max_tokens") c.max_tokens = v.get<std::size_t>();
      else if (key == "max_nodes") c.max_nodes = v.get<std::size_t>();
      else if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "batch") c.batch = v.get<std::size_t>();
      else if (key == "max_epochs") c.max_epochs = v.get<std::size_t>();
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "lr_late") c.lr_late = v.get<double>();
      else if (key == "lr_drop_epoch") c.lr_drop_epoch = v.get<std::size_t>();
      else if (key == "patience") c.patience = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "semantic_mode") c.semantic_mode = parse_semantic_mode(v.get<std::string>());
      else if (key == "task_mode") c.task_mode = parse_task_mode(v.get<std::string>());
      else if (key == "workers") c.workers = v.get<std::size_t>();
      else throw SchemaError("unknown model config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  }
  return c;
}

// ---- encoding ----------------------------------------------------------------------

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80 || std::isalnum(u)) {
      cur.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Sequence embed_text(const std::vector<std::string>& tokens, const VectorTable& vectors, std::size_t max_rows) {
  const std::size_t d = vectors.dim();
  Sequence s{Tensor({max_rows, d}), std::min(tokens.size(), max_rows)};
  for (std::size_t i = 0; i < s.used; ++i) {
    if (auto r = vectors.find(tokens[i])) {
      const auto row = vectors.row(*r);
      std::copy(row.begin(), row.end(), s.rows.data.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
  }
  return s;
}

std::vector<std::size_t> topological_order(const ProcessGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t e = 0; e < g.edges().size(); ++e) ++indeg[g.target(e)];
  auto by_id = [&](std::size_t a, std::size_t b) { return g.node(a).id > g.node(b).id; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_id)> ready(by_id);
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<char> emitted(n, 0), touched(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (order.size() < n) {
    if (ready.empty()) {
      // Cycle: release the smallest pending node that some emitted node points to.
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!emitted[i] && touched[i] && (pick == n || g.node(i).id < g.node(pick).id)) pick = i;
      }
      ready.push(pick);
      indeg[pick] = 0;
    }
    const std::size_t v = ready.top();
    ready.pop();
    if (emitted[v]) continue;
    emitted[v] = 1;
    order.push_back(v);
    for (std::size_t e : g.out_edges(v)) {
      const std::size_t w = g.target(e);
      touched[w] = 1;
      if (!emitted[w] && indeg[w] > 0 && --indeg[w] == 0) ready.push(w);
    }
  }
  return order;
}

GraphEncoding encode_graph(const ProcessGraph& graph, const VectorTable* node_vectors, const VectorTable& word_vectors,
                           const ModelConfig& config) {
  if (word_vectors.dim() != config.embed_dim) {
    throw ShapeError("word vectors have dim " + std::to_string(word_vectors.dim()) + ", config expects " +
                     std::to_string(config.embed_dim));
  }
  const bool semantic = config.semantic_mode != SemanticMode::None;
  if (semantic && !node_vectors) throw ValidationError("node_vectors", "node vectors required for this semantic mode");
  if (semantic && node_vectors->dim() != config.embed_dim) {
    throw ShapeError("node vectors have dim " + std::to_string(node_vectors->dim()) + ", config expects " +
                     std::to_string(config.embed_dim));
  }
  const std::vector<std::size_t> order = topological_order(graph);
  GraphEncoding enc;
  enc.semantic = Sequence{Tensor({config.max_nodes, config.embed_dim}), 0};
  if (semantic) {
    for (std::size_t v : order) {
      const Node& node = graph.node(v);
      if (!keeps(config.task_mode, node)) continue;
      if (enc.semantic.used == config.max_nodes) break;
      const std::size_t row = enc.semantic.used++;
      if (auto r = node_vectors->find(qualified_token(graph.id(), node.id))) {
        const auto src = node_vectors->row(*r);
        std::copy(src.begin(), src.end(),
                  enc.semantic.rows.data.begin() + static_cast<std::ptrdiff_t>(row * config.embed_dim));
      } else {
        ++enc.missing_embeddings;
      }
    }
  }
  std::vector<std::string> words;
  for (std::size_t v : order) {
    if (!graph.node(v).is_activity()) continue;
    for (auto& w : tokenize(graph.node(v).label)) words.push_back(std::move(w));
  }
  enc.labels = embed_text(words, word_vectors, config.max_tokens);
  return enc;
}

Sequence encode_text(const ProcessText& text, const VectorTable& word_vectors, const ModelConfig& config) {
  std::vector<std::string> words;
  for (const std::string& s : text.sentences) {
    for (auto& w : tokenize(s)) words.push_back(std::move(w));
  }
  return embed_text(words, word_vectors, config.max_tokens);
}

EncodedPair encode_pair(const ProcessGraph& graph, const ProcessText& text, const VectorTable* node_vectors,
                        const VectorTable& word_vectors, const ModelConfig& config, double gold) {
  GraphEncoding g = encode_graph(graph, node_vectors, word_vectors, config);
  return EncodedPair{std::move(g.semantic), std::move(g.labels), encode_text(text, word_vectors, config), gold};
}

// ---- model -------------------------------------------------------------------------

namespace {

FilterBank make_bank(const std::string& prefix, const ModelConfig& c) {
  FilterBank b;
  for (std::size_t i = 0; i < c.filter_widths.size(); ++i) {
    const std::string h = std::to_string(c.filter_widths[i]);
    b.weights.emplace_back(prefix + ".w" + h, std::vector<std::size_t>{c.filters_per_width[i], c.filter_widths[i], c.embed_dim});
    b.biases.emplace_back(prefix + ".b" + h, std::vector<std::size_t>{c.filters_per_width[i]});
  }
  return b;
}

double sigm(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

TraceNetModel::TraceNetModel(ModelConfig config) : config_(std::move(config)) {
  validate(config_);
  const std::size_t f = config_.total_filters(), h = config_.hidden_units;
  text_bank_ = make_bank("text", config_);
  semantic_bank_ = make_bank("semantic", config_);
  w1_ = Parameter("fuse.w1", {h, 3 * f});
  b1_ = Parameter("fuse.b1", {h});
  w2_ = Parameter("fuse.w2", {h, h});
  b2_ = Parameter("fuse.b2", {h});
  wo_ = Parameter("out.w", {1, h});
  bo_ = Parameter("out.b", {1});
}

std::vector<Parameter*> TraceNetModel::parameters() {
  std::vector<Parameter*> out;
  for (FilterBank* b : {&text_bank_, &semantic_bank_}) {
    for (std::size_t i = 0; i < b->weights.size(); ++i) {
      out.push_back(&b->weights[i]);
      out.push_back(&b->biases[i]);
    }
  }
  for (Parameter* p : {&w1_, &b1_, &w2_, &b2_, &wo_, &bo_}) out.push_back(p);
  return out;
}

std::vector<const Parameter*> TraceNetModel::parameters() const {
  std::vector<const Parameter*> out;
  for (Parameter* p : const_cast<TraceNetModel*>(this)->parameters()) out.push_back(p);
  return out;
}

std::vector<Tensor> TraceNetModel::zero_gradients() const {
  std::vector<Tensor> g;
  for (const Parameter* p : parameters()) g.emplace_back(p->value.shape);
  return g;
}

void TraceNetModel::init_glorot(std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](Parameter& p, std::size_t r, std::size_t c) {
    const double a = glorot_bound(r, c);
    for (double& x : p.value.data) x = rng.uniform(-a, a);
  };
  for (FilterBank* b : {&text_bank_, &semantic_bank_}) {
    for (std::size_t i = 0; i < b->weights.size(); ++i) {
      fill(b->weights[i], b->weights[i].value.dim(1), b->weights[i].value.dim(2));
      b->biases[i].value.fill(0.0);
    }
  }
  for (Parameter* p : {&w1_, &w2_, &wo_}) fill(*p, p->value.dim(0), p->value.dim(1));
  for (Parameter* p : {&b1_, &b2_, &bo_}) p->value.fill(0.0);
}

const FilterBank& TraceNetModel::filters(Channel channel) const {
  return channel == Channel::Semantic ? semantic_bank_ : text_bank_;
}

TraceNetModel::Pooling TraceNetModel::pool(const FilterBank& bank, const Sequence& seq) const {
  Pooling p;
  for (std::size_t i = 0; i < bank.weights.size(); ++i) {
    p.per_width.push_back(conv_max_pool(seq.rows, seq.used, bank.weights[i].value, bank.biases[i].value));
  }
  return p;
}

namespace {

void append_pooled(std::vector<double>& v, const std::vector<ConvPool>& pools) {
  for (const ConvPool& cp : pools) v.insert(v.end(), cp.values.begin(), cp.values.end());
}

void check_pair(const EncodedPair& p, const ModelConfig& c) {
  auto ok = [&](const Sequence& s, std::size_t rows) {
    return s.rows.rank() == 2 && s.rows.dim(0) == rows && s.rows.dim(1) == c.embed_dim;
  };
  if (!ok(p.semantic, c.max_nodes) || !ok(p.labels, c.max_tokens) || !ok(p.text, c.max_tokens)) {
    throw ShapeError("encoded pair does not match the model configuration");
  }
}

}  // namespace

std::vector<double> TraceNetModel::features(const EncodedPair& pair) const {
  check_pair(pair, config_);
  std::vector<double> v;
  v.reserve(3 * config_.total_filters());
  if (config_.semantic_mode == SemanticMode::None) {
    v.assign(config_.total_filters(), 0.0);
  } else {
    append_pooled(v, pool(semantic_bank_, pair.semantic).per_width);
  }
  append_pooled(v, pool(text_bank_, pair.labels).per_width);
  append_pooled(v, pool(text_bank_, pair.text).per_width);
  return v;
}

double TraceNetModel::forward(const EncodedPair& pair) const {
  const std::vector<double> v = features(pair);
  const auto h1 = dense(v, w1_.value, b1_.value, Activation::Sigmoid);
  const auto h2 = dense(h1, w2_.value, b2_.value, Activation::Sigmoid);
  return dense(h2, wo_.value, bo_.value, Activation::Sigmoid)[0];
}

double TraceNetModel::accumulate_gradient(const EncodedPair& pair, const std::function<double(double)>& dloss,
                                          std::vector<Tensor>& grads) const {
  check_pair(pair, config_);
  const bool semantic = config_.semantic_mode != SemanticMode::None;
  const std::size_t f = config_.total_filters();
  Pooling ps, pl, pt;
  std::vector<double> v;
  v.reserve(3 * f);
  if (semantic) {
    ps = pool(semantic_bank_, pair.semantic);
    append_pooled(v, ps.per_width);
  } else {
    v.assign(f, 0.0);
  }
  pl = pool(text_bank_, pair.labels);
  pt = pool(text_bank_, pair.text);
  append_pooled(v, pl.per_width);
  append_pooled(v, pt.per_width);
  const auto h1 = dense(v, w1_.value, b1_.value, Activation::Sigmoid);
  const auto h2 = dense(h1, w2_.value, b2_.value, Activation::Sigmoid);
  const auto out = dense(h2, wo_.value, bo_.value, Activation::Sigmoid);

  const double g = dloss(out[0]);
  // Gradient slots follow parameters(): text bank, semantic bank, then fusion.
  const std::size_t widths = config_.filter_widths.size();
  const std::size_t fuse = 4 * widths;
  std::vector<double> gh2(h2.size(), 0.0), gh1(h1.size(), 0.0), gv(v.size(), 0.0);
  dense_backward(h2, wo_.value, out, std::vector<double>{g}, Activation::Sigmoid, grads[fuse + 4], grads[fuse + 5], gh2);
  dense_backward(h1, w2_.value, h2, gh2, Activation::Sigmoid, grads[fuse + 2], grads[fuse + 3], gh1);
  dense_backward(v, w1_.value, h1, gh1, Activation::Sigmoid, grads[fuse], grads[fuse + 1], gv);

  auto conv_back = [&](const FilterBank& bank, std::size_t slot0, const Sequence& seq, const Pooling& pooled,
                       std::size_t offset) {
    for (std::size_t i = 0; i < widths; ++i) {
      const std::size_t n = config_.filters_per_width[i];
      conv_max_pool_backward(seq.rows, bank.weights[i].value, pooled.per_width[i],
                             std::span<const double>(gv.data() + offset, n), grads[slot0 + 2 * i],
                             grads[slot0 + 2 * i + 1]);
      offset += n;
    }
  };
  if (semantic) conv_back(semantic_bank_, 2 * widths, pair.semantic, ps, 0);
  // Both textual branches write into the single text-bank slots.
  conv_back(text_bank_, 0, pair.labels, pl, f);
  conv_back(text_bank_, 0, pair.text, pt, 2 * f);
  return out[0];
}

// ---- training ----------------------------------------------------------------------

namespace {

constexpr std::size_t kChunk = 16;

void add_into(std::vector<Tensor>& acc, const std::vector<Tensor>& g) {
  for (std::size_t p = 0; p < acc.size(); ++p) {
    for (std::size_t i = 0; i < acc[p].data.size(); ++i) acc[p].data[i] += g[p].data[i];
  }
}

// Per-example quantile-loss derivative for a batch of size m.
double quantile_grad(double e, double y, double gamma, double m) {
  if (e < y) return -gamma / m;
  if (e > y) return (1.0 - gamma) / m;
  return 0.0;
}

double quantile_term(double e, double y, double gamma) {
  const double d = std::abs(e - y);
  return e <= y ? gamma * d : (1.0 - gamma) * d;
}

struct BatchResult {
  double loss = 0.0;
};

BatchResult batch_gradient(const TraceNetModel& model, const std::vector<EncodedPair>& data,
                           std::span<const std::size_t> batch, double gamma, std::size_t workers,
                           std::vector<Tensor>& total) {
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<Tensor>> partial(chunks);
  std::vector<double> chunk_loss(chunks, 0.0);
  const double m = static_cast<double>(batch.size());
  auto run_chunk = [&](std::size_t c) {
    partial[c] = model.zero_gradients();
    const std::size_t lo = c * kChunk, hi = std::min(batch.size(), lo + kChunk);
    for (std::size_t k = lo; k < hi; ++k) {
      const EncodedPair& ex = data[batch[k]];
      double score = 0.0;
      model.accumulate_gradient(
          ex,
          [&](double e) {
            score = e;
            return quantile_grad(e, ex.gold, gamma, m);
          },
          partial[c]);
      chunk_loss[c] += quantile_term(score, ex.gold, gamma);
    }
  };
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, chunks); ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  BatchResult r;
  for (std::size_t c = 0; c < chunks; ++c) {
    add_into(total, partial[c]);
    r.loss += chunk_loss[c];
  }
  r.loss /= m;
  return r;
}

std::pair<double, double> dataset_loss(const TraceNetModel& model, const std::vector<EncodedPair>& data, double gamma) {
  double loss = 0.0, mae = 0.0;
  for (const EncodedPair& ex : data) {
    const double e = model.forward(ex);
    loss += quantile_term(e, ex.gold, gamma);
    mae += std::abs(e - ex.gold);
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, mae / n};
}

}  // namespace

TrainResult train(TraceNetModel& model, const std::vector<EncodedPair>& training,
                  const std::vector<EncodedPair>& validation, const ModelConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  validate(config);
  if (training.empty()) throw EmptyDataset("no training examples");
  const std::vector<Parameter*> params = model.parameters();
  AdamState adam;
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best;
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, epoch));
    rng.shuffle(order);
    const double lr = epoch < config.lr_drop_epoch ? config.lr : config.lr_late;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::vector<Tensor> grads = model.zero_gradients();
      const BatchResult br = batch_gradient(model, training, std::span<const std::size_t>(order).subspan(start, end - start),
                                            config.gamma, config.workers, grads);
      for (std::size_t p = 0; p < params.size(); ++p) params[p]->grad = std::move(grads[p]);
      adam_step(params, adam, lr);
      loss_sum += br.loss;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    if (!validation.empty()) {
      std::tie(rec.val_loss, rec.val_mae) = dataset_loss(model, validation, config.gamma);
    } else {
      std::tie(rec.val_loss, rec.val_mae) = dataset_loss(model, training, config.gamma);
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      best.clear();
      for (const Parameter* p : params) best.push_back(p->value);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    params[p]->value = best[p];
    params[p]->zero_grad();
  }
  return result;
}

Evaluation evaluate(const TraceNetModel& model, const std::vector<EncodedPair>& dataset) {
  if (dataset.empty()) throw EmptyDataset("nothing to evaluate");
  Evaluation ev;
  for (const EncodedPair& ex : dataset) {
    const double e = model.forward(ex);
    ev.predictions.push_back(e);
    ev.residuals.push_back(e - ex.gold);
    ev.mae += std::abs(e - ex.gold);
  }
  ev.mae /= static_cast<double>(dataset.size());
  return ev;
}

ConsistencyScore predict(const TraceNetModel& model, const ProcessGraph& graph, const ProcessText& text,
                         const VectorTable* node_vectors, const VectorTable& word_vectors) {
  const EncodedPair p = encode_pair(graph, text, node_vectors, word_vectors, model.config());
  return ConsistencyScore(model.forward(p));
}

}  // namespace tracenet
