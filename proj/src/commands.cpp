#include "tracenet/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kExitIo;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return kExitUsage;
  return kExitFailure;
}

// ---- file helpers ------------------------------------------------------------------

namespace {

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(dir, "cannot create output directory");
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  if (!out) throw IoError(path.string(), "write failed");
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  if (path.empty()) throw ValidationError("path", "missing input path");
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError(path, "cannot open for reading");
  return in;
}

json read_json(const fs::path& path) {
  auto in = open_input(path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(0, path.string() + ": " + e.what());
  }
}

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

}  // namespace

std::uint64_t vocab_hash(const std::vector<std::string>& tokens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const std::string& t : tokens) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

std::vector<DatasetRow> load_dataset(const std::string& path) {
  auto in = open_input(path);
  auto rows = read_dataset_jsonl(in);
  if (rows.empty()) throw EmptyDataset(path + " holds no rows");
  return rows;
}

VectorTable load_vector_file(const std::string& path) {
  auto in = open_input(path);
  return load_vectors(in);
}

// ---- gen ---------------------------------------------------------------------------

GenReport cmd_gen(const GlobalOptions& global, const GenOptions& o) {
  if (o.graphs == 0) throw ValidationError("graphs", "need at least one graph");
  const fs::path dir = prepare_dir(global.out_dir);
  GenConfig gc;
  gc.max_depth = o.max_depth;
  gc.max_activities = o.max_activities;
  std::vector<BlockTree> bases;
  for (std::size_t i = 0; i < o.graphs; ++i) {
    gc.seed = mix_seed(global.seed, i);
    bases.push_back(gen_graph(gc, "p" + std::to_string(i)));
  }
  DatasetConfig dc;
  dc.variants = o.variants;
  dc.n_ops = o.n_ops;
  dc.cross_pairs = o.cross_pairs;
  dc.test_fraction = o.test_fraction;
  dc.caps = TraceCaps{o.max_traces, 200, global.seed};
  dc.seed = global.seed;
  const Dataset d = build_dataset(bases, dc);

  GenReport r;
  r.base_graphs = d.base_count;
  r.mutated_graphs = d.graphs.size() - d.base_count;
  r.pairs = d.pairs.size();
  for (const LabeledPair& p : d.pairs) (p.split == Split::Train ? r.train_pairs : r.test_pairs)++;
  r.histogram = gold_histogram(d.pairs);
  r.dataset_path = (dir / "dataset.jsonl").string();

  std::ostringstream rows;
  write_dataset_jsonl(rows, d);
  write_file(r.dataset_path, rows.str());

  json edges = json::array();
  for (std::size_t b = 0; b <= r.histogram.size(); ++b) edges.push_back(static_cast<double>(b) / r.histogram.size());
  const json histogram{{"edges", edges}, {"counts", r.histogram}, {"total", r.pairs}};
  write_file(dir / "histogram.json", histogram.dump(2) + "\n");
  const json manifest{{"seed", global.seed},
                      {"base_graphs", r.base_graphs},
                      {"mutated_graphs", r.mutated_graphs},
                      {"graphs", d.graphs.size()},
                      {"pairs", r.pairs},
                      {"train_pairs", r.train_pairs},
                      {"test_pairs", r.test_pairs},
                      {"options",
                       {{"variants", o.variants},
                        {"n_ops", o.n_ops},
                        {"cross_pairs", o.cross_pairs},
                        {"test_fraction", o.test_fraction},
                        {"max_depth", o.max_depth},
                        {"max_activities", o.max_activities},
                        {"max_traces", o.max_traces}}},
                      {"histogram", histogram}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return r;
}

// ---- embed -------------------------------------------------------------------------

namespace {

// Distinct graphs in order of first appearance.
std::vector<BlockTree> distinct_graphs(const std::vector<DatasetRow>& rows) {
  std::vector<BlockTree> out;
  std::set<std::string> seen;
  for (const DatasetRow& r : rows) {
    if (seen.insert(r.graph.id).second) out.push_back(r.graph);
  }
  return out;
}

Sentence tokens_of(const std::vector<std::string>& sentences) {
  Sentence out;
  for (const std::string& s : sentences) {
    for (auto& t : tokenize(s)) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

EmbedReport cmd_embed(const GlobalOptions& global, const EmbedOptions& o) {
  if (o.mode != "tracewalk" && o.mode != "deepwalk" && o.mode != "none") {
    throw ValidationError("mode", "mode must be tracewalk, deepwalk or none");
  }
  const auto rows = load_dataset(o.dataset);
  const fs::path dir = prepare_dir(global.out_dir);
  const auto graphs = distinct_graphs(rows);
  EmbedReport r;
  r.graphs = graphs.size();
  SkipGramConfig sc;
  sc.window = o.window;
  sc.dim = o.dim;
  sc.epochs = o.epochs;
  sc.initial_lr = o.lr;
  sc.workers = global.workers;

  if (o.mode != "none") {
    Corpus corpus;
    for (std::size_t g = 0; g < graphs.size(); ++g) {
      const std::uint64_t s = mix_seed(global.seed, g);
      if (o.mode == "tracewalk") {
        append_traces(corpus, graphs[g].id, enumerate_traces(graphs[g], TraceCaps{o.max_traces, o.max_len, s}));
      } else {
        append_traces(corpus, graphs[g].id, structural_walks(flatten(graphs[g]), o.walks_per_node, o.walk_len, s));
      }
    }
    r.node_tokens = build_vocab(corpus).size();
    sc.seed = mix_seed(global.seed, 0x6e6f646573);
    const EmbeddingModel m = train_skipgram(corpus, sc);
    r.node_vectors = m.vocab.size();
    r.node_path = (dir / ("nodes_" + o.mode + ".vec")).string();
    std::ostringstream out;
    save_vectors(out, m);
    write_file(r.node_path, out.str());
  }

  if (o.words) {
    Corpus corpus;
    if (!o.text_corpus.empty()) {
      auto in = open_input(o.text_corpus);
      std::string line;
      while (std::getline(in, line)) {
        Sentence s = tokenize(line);
        if (!s.empty()) corpus.push_back(std::move(s));
      }
    } else {
      std::set<std::string> seen_text;
      for (const DatasetRow& row : rows) {
        Sentence s = tokens_of(row.text.sentences);
        std::string key;
        for (const auto& t : s) key += t + " ";
        if (seen_text.insert(key).second) corpus.push_back(std::move(s));
      }
      for (const BlockTree& g : graphs) {
        std::vector<const Block*> acts;
        collect_activities(g.root, acts);
        std::vector<std::string> labels;
        for (const Block* a : acts) labels.push_back(a->label);
        corpus.push_back(tokens_of(labels));
      }
    }
    sc.seed = mix_seed(global.seed, 0x776f726473);
    const EmbeddingModel m = train_skipgram(corpus, sc);
    r.word_vectors = m.vocab.size();
    r.word_path = (dir / "words.vec").string();
    std::ostringstream out;
    save_vectors(out, m);
    write_file(r.word_path, out.str());
  }
  return r;
}

// ---- train -------------------------------------------------------------------------

namespace {

json history_to_json(const TrainResult& r) {
  json h = json::array();
  for (const EpochRecord& e : r.history) {
    h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_mae", e.val_mae}});
  }
  return json{{"history", h},
              {"best_epoch", r.best_epoch},
              {"best_val_loss", r.best_val_loss},
              {"early_stopped", r.early_stopped}};
}

struct Encoded {
  std::vector<EncodedPair> pairs;
  std::size_t missing = 0;
};

Encoded encode_rows(const std::vector<const DatasetRow*>& rows, const VectorTable* nodes, const VectorTable& words,
                    const ModelConfig& config) {
  Encoded e;
  for (const DatasetRow* r : rows) {
    const ProcessGraph g = flatten(r->graph);
    GraphEncoding ge = encode_graph(g, nodes, words, config);
    e.missing += ge.missing_embeddings;
    e.pairs.push_back(EncodedPair{std::move(ge.semantic), std::move(ge.labels), encode_text(r->text, words, config),
                                  r->gold});
  }
  return e;
}

}  // namespace

TrainReport cmd_train(const GlobalOptions& global, const TrainOptions& o, std::ostream* log) {
  const auto rows = load_dataset(o.dataset);
  ModelConfig cfg = o.model;
  cfg.seed = global.seed;
  cfg.workers = global.workers;
  const VectorTable words = load_vector_file(o.word_vectors);
  cfg.embed_dim = words.dim();
  VectorTable nodes;
  const bool semantic = cfg.semantic_mode != SemanticMode::None;
  if (semantic) {
    nodes = load_vector_file(o.node_vectors);
    if (nodes.dim() != words.dim()) {
      throw ShapeError(fmt::format("node vectors have dim {}, word vectors {}", nodes.dim(), words.dim()));
    }
  }
  validate(cfg);
  const fs::path dir = prepare_dir(global.out_dir);

  std::vector<const DatasetRow*> train_rows, val_rows;
  for (const DatasetRow& r : rows) {
    if (r.split != Split::Train) continue;
    const bool held = static_cast<double>(mix_seed(global.seed, vocab_hash({r.graph.id})) % 1000) <
                      o.val_fraction * 1000.0;
    (held ? val_rows : train_rows).push_back(&r);
  }
  if (train_rows.empty()) throw EmptyDataset("no training rows in " + o.dataset);
  const Encoded train_set = encode_rows(train_rows, semantic ? &nodes : nullptr, words, cfg);
  const Encoded val_set = encode_rows(val_rows, semantic ? &nodes : nullptr, words, cfg);

  TraceNetModel model(cfg);
  model.init_glorot(mix_seed(global.seed, 0x696e6974));
  TrainReport r;
  r.train_examples = train_set.pairs.size();
  r.val_examples = val_set.pairs.size();
  r.missing_embeddings = train_set.missing + val_set.missing;
  r.result = train(model, train_set.pairs, val_set.pairs, cfg, [&](const EpochRecord& e) {
    if (log && o.log_every && e.epoch % o.log_every == 0) {
      *log << fmt::format("epoch {:5d}  train {:.5f}  val {:.5f}  val_mae {:.5f}\n", e.epoch, e.train_loss,
                          e.val_loss, e.val_mae);
    }
  });

  r.checkpoint_path = (dir / "model.tnk").string();
  std::ostringstream ckpt;
  const auto params = model.parameters();
  save_checkpoint(ckpt, params);
  write_file(r.checkpoint_path, ckpt.str());
  json sidecar{{"config", config_to_json(cfg)},
               {"checkpoint", "model.tnk"},
               {"word_vectors", absolute(o.word_vectors)},
               {"vocab_hashes", {{"word", hex(vocab_hash(words.tokens()))}}},
               {"train_examples", r.train_examples},
               {"val_examples", r.val_examples},
               {"missing_embeddings", r.missing_embeddings}};
  if (semantic) {
    sidecar["node_vectors"] = absolute(o.node_vectors);
    sidecar["vocab_hashes"]["node"] = hex(vocab_hash(nodes.tokens()));
  }
  write_file(dir / "model.json", sidecar.dump(2) + "\n");
  write_file(dir / "history.json", history_to_json(r.result).dump(2) + "\n");
  return r;
}

// ---- eval --------------------------------------------------------------------------

LoadedModel load_trained_model(const std::string& model_dir) {
  const fs::path dir(model_dir);
  const json side = read_json(dir / "model.json");
  ModelConfig cfg;
  VectorTable words, nodes;
  try {
    cfg = config_from_json(side.at("config"));
    words = load_vector_file(side.at("word_vectors").get<std::string>());
    if (hex(vocab_hash(words.tokens())) != side.at("vocab_hashes").at("word").get<std::string>()) {
      throw Error("word vectors changed since training: " + side.at("word_vectors").get<std::string>());
    }
    if (cfg.semantic_mode != SemanticMode::None) {
      nodes = load_vector_file(side.at("node_vectors").get<std::string>());
      if (hex(vocab_hash(nodes.tokens())) != side.at("vocab_hashes").at("node").get<std::string>()) {
        throw Error("node vectors changed since training: " + side.at("node_vectors").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model.json: ") + e.what());
  }
  TraceNetModel model(cfg);
  auto in = open_input((dir / side.value("checkpoint", "model.tnk")).string(), true);
  const auto params = model.parameters();
  restore_parameters(load_checkpoint(in), params);
  return LoadedModel{std::move(model), std::move(nodes), std::move(words)};
}

nlohmann::json metrics_to_json(const EvalReport& report) {
  json rows = json::array();
  for (const TaskMetrics& m : report.rows) {
    rows.push_back({{"task", m.task},
                    {"semantic_mode", m.semantic_mode},
                    {"mae", m.mae},
                    {"n_examples", m.n_examples},
                    {"wall_time_s", m.wall_time_s},
                    {"seed", m.seed}});
  }
  return json{{"rows", rows}};
}

std::string format_metrics_table(const EvalReport& report) {
  std::string out = fmt::format("{:<6} {:<10} {:>8} {:>6} {:>9}\n", "task", "semantic", "MAE", "n", "time_s");
  for (const TaskMetrics& m : report.rows) {
    out += fmt::format("{:<6} {:<10} {:>8.4f} {:>6} {:>9.3f}\n", m.task, m.semantic_mode, m.mae, m.n_examples,
                       m.wall_time_s);
  }
  out += "reference (published Task 3 MAE on other corpora, not comparable): 0.109 / 0.134 / 0.064 / 0.067\n";
  return out;
}

EvalReport cmd_eval(const GlobalOptions& global, const EvalOptions& o) {
  if (o.split != "test" && o.split != "train" && o.split != "all") {
    throw ValidationError("split", "split must be test, train or all");
  }
  LoadedModel lm = load_trained_model(o.model_dir);
  const ModelConfig& base = lm.model.config();
  std::vector<int> tasks;
  if (o.tasks == "all") {
    tasks = {1, 2, 3};
  } else if (o.tasks == "model") {
    tasks = {task_number(base.task_mode)};
  } else {
    tasks = {task_number(parse_task_mode(o.tasks))};
  }
  const auto rows = load_dataset(o.dataset);
  std::vector<const DatasetRow*> chosen;
  for (const DatasetRow& r : rows) {
    if (o.split == "all" || to_string(r.split) == o.split) chosen.push_back(&r);
  }
  if (chosen.empty()) throw EmptyDataset("no rows in split " + o.split);
  const VectorTable* nodes = base.semantic_mode == SemanticMode::None ? nullptr : &lm.node_vectors;

  EvalReport report;
  for (int t : tasks) {
    const auto start = std::chrono::steady_clock::now();
    ModelConfig cfg = base;
    cfg.task_mode = parse_task_mode(std::to_string(t));
    const Encoded enc = encode_rows(chosen, nodes, lm.word_vectors, cfg);
    const Evaluation ev = evaluate(lm.model, enc.pairs);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    report.rows.push_back(
        TaskMetrics{t, std::string(to_string(base.semantic_mode)), ev.mae, enc.pairs.size(), dt.count(), global.seed});
  }
  const fs::path dir = prepare_dir(global.out_dir);
  write_file(dir / "metrics.json", metrics_to_json(report).dump(2) + "\n");
  return report;
}

// ---- baseline ----------------------------------------------------------------------

double grid_mean_abs_diff(std::size_t n) {
  long double total = 0.0L;
  const long double nn = static_cast<long double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const long double a = static_cast<long double>(i - 1), b = static_cast<long double>(n - i);
    total += a * (a + 1) / 2 + b * (b + 1) / 2;
  }
  return static_cast<double>(total / (nn * nn * nn));
}

double closed_form_mean_abs_diff(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 1.0 / 3.0 - 1.0 / (2.0 * nn * nn);
}

BaselineReport cmd_baseline(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("n", "need at least one sample");
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = rng.uniform(), q = rng.uniform();
    sum += std::abs(p - q);
  }
  BaselineReport r;
  r.n = n;
  r.seed = seed;
  r.estimate = sum / static_cast<double>(n);
  r.error = std::abs(r.estimate - 1.0 / 3.0);
  r.clt_bound = 4.0 * std::sqrt(1.0 / 18.0) / std::sqrt(static_cast<double>(n));
  r.closed_form_1000 = closed_form_mean_abs_diff(1000);
  r.direct_sum_1000 = grid_mean_abs_diff(1000);
  return r;
}

// ---- gradcheck ---------------------------------------------------------------------

bool GradcheckReport::pass() const {
  return !lines.empty() && std::all_of(lines.begin(), lines.end(), [](const GradcheckLine& l) { return l.pass; });
}

namespace {

void randomize(Tensor& t, Rng& rng, double scale = 1.0) {
  for (double& x : t.data) x = rng.uniform(-scale, scale);
}

void skew(std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    for (double& g : p->grad.data) g = 1.5 * g + 1e-2;
  }
}

void zero(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

// Smallest gap between the winner and runner-up over the filters of a map.
double pool_margin(const Tensor& map) {
  double margin = 1e300;
  for (std::size_t f = 0; f < map.dim(0); ++f) {
    double a = -1e300, b = -1e300;
    for (std::size_t j = 0; j < map.dim(1); ++j) {
      const double x = map(f, j);
      if (x > a) {
        b = a;
        a = x;
      } else if (x > b) {
        b = x;
      }
    }
    if (map.dim(1) > 1) margin = std::min(margin, a - b);
  }
  return margin;
}

using Case = std::function<GradCheckResult(Rng&, bool fault)>;

GradCheckResult conv_case(Rng& rng, bool fault) {
  Parameter w("conv.w", {2, 3, 4}), b("conv.b", {2}), x("conv.x", {6, 4});
  for (Parameter* p : {&w, &b, &x}) randomize(p->value, rng);
  Tensor c({2, 4});
  randomize(c, rng);
  Parameter* ps[] = {&w, &b, &x};
  auto loss = [&](bool grad) {
    const Tensor y = conv1d(x.value, w.value, b.value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * c.data[i];
    if (grad) {
      zero(ps);
      conv1d_backward(x.value, w.value, y, c, w.grad, b.grad, &x.grad);
      if (fault) skew(ps);
    }
    return s;
  };
  return grad_check(loss, ps);
}

GradCheckResult pool_case(Rng& rng, bool fault) {
  Parameter w("pool.w", {3, 2, 4}), b("pool.b", {3});
  Tensor x({7, 4});
  do {
    randomize(w.value, rng);
    randomize(b.value, rng);
    randomize(x, rng);
    for (std::size_t i = 5 * 4; i < x.size(); ++i) x.data[i] = 0.0;  // two padding rows
  } while (pool_margin(conv1d(x, w.value, b.value)) < 1e-3);
  std::vector<double> c(3);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  Parameter* ps[] = {&w, &b};
  auto loss = [&](bool grad) {
    const ConvPool cp = conv_max_pool(x, 5, w.value, b.value);
    double s = 0.0;
    for (std::size_t f = 0; f < 3; ++f) s += c[f] * cp.values[f];
    if (grad) {
      zero(ps);
      conv_max_pool_backward(x, w.value, cp, c, w.grad, b.grad);
      if (fault) skew(ps);
    }
    return s;
  };
  return grad_check(loss, ps);
}

GradCheckResult dense_case(Rng& rng, bool fault, Activation act) {
  Parameter w("dense.w", {3, 5}), b("dense.b", {3}), x("dense.x", {5});
  for (Parameter* p : {&w, &b, &x}) randomize(p->value, rng);
  std::vector<double> c(3);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  Parameter* ps[] = {&w, &b, &x};
  auto loss = [&](bool grad) {
    const auto y = dense(x.value.data, w.value, b.value, act);
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += c[i] * y[i];
    if (grad) {
      zero(ps);
      dense_backward(x.value.data, w.value, y, c, act, w.grad, b.grad, x.grad.data);
      if (fault) skew(ps);
    }
    return s;
  };
  return grad_check(loss, ps);
}

GradCheckResult quantile_case(Rng& rng, bool fault) {
  Parameter w("head.w", {4, 6}), b("head.b", {4});
  randomize(w.value, rng);
  randomize(b.value, rng);
  std::vector<double> x(6), gold(4);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const auto y0 = dense(x, w.value, b.value, Activation::Sigmoid);
  // Targets well away from the predictions keep the probe off the kink.
  for (std::size_t i = 0; i < 4; ++i) gold[i] = y0[i] > 0.5 ? y0[i] - 0.3 : y0[i] + 0.3;
  Parameter* ps[] = {&w, &b};
  auto loss = [&](bool grad) {
    const auto y = dense(x, w.value, b.value, Activation::Sigmoid);
    const LossResult l = quantile_loss(y, gold, 0.7);
    if (grad) {
      zero(ps);
      dense_backward(x, w.value, y, l.grad, Activation::Sigmoid, w.grad, b.grad, {});
      if (fault) skew(ps);
    }
    return l.loss;
  };
  return grad_check(loss, ps);
}

GradCheckResult model_case(Rng& rng, bool fault) {
  ModelConfig c;
  c.embed_dim = 4;
  c.filter_widths = {2, 3};
  c.filters_per_width = {3, 2};
  c.hidden_units = 6;
  c.max_tokens = 8;
  c.max_nodes = 7;
  TraceNetModel m(c);
  m.init_glorot(rng.next());
  const auto params = m.parameters();
  for (Parameter* p : params) {
    if (p->value.rank() == 1) randomize(p->value, rng, 0.3);
  }
  auto seq = [&](std::size_t rows, std::size_t used) {
    Sequence s{Tensor({rows, c.embed_dim}), used};
    for (std::size_t i = 0; i < used * c.embed_dim; ++i) s.rows.data[i] = rng.uniform(-1.0, 1.0);
    return s;
  };
  std::vector<EncodedPair> batch;
  for (int k = 0; k < 3; ++k) {
    EncodedPair p{seq(c.max_nodes, 2 + rng.below(c.max_nodes - 1)), seq(c.max_tokens, 3 + rng.below(6)),
                  seq(c.max_tokens, 3 + rng.below(6)), 0.0};
    const double e = m.forward(p);
    p.gold = e > 0.5 ? e - 0.3 : e + 0.3;
    batch.push_back(std::move(p));
  }
  auto loss = [&](bool grad) {
    std::vector<double> pred;
    std::vector<double> gold;
    for (const EncodedPair& ex : batch) {
      pred.push_back(m.forward(ex));
      gold.push_back(ex.gold);
    }
    const LossResult l = quantile_loss(pred, gold, 0.7);
    if (grad) {
      std::vector<Tensor> g = m.zero_gradients();
      for (std::size_t i = 0; i < batch.size(); ++i) {
        m.accumulate_gradient(batch[i], [&](double) { return l.grad[i]; }, g);
      }
      for (std::size_t i = 0; i < params.size(); ++i) params[i]->grad = std::move(g[i]);
      if (fault) skew(params);
    }
    return l.loss;
  };
  return grad_check(loss, params, 1e-5, 16, rng.next());
}

}  // namespace

GradcheckReport cmd_gradcheck(std::uint64_t seed, std::size_t seeds, bool inject_fault) {
  const std::vector<std::pair<std::string, Case>> cases{
      {"conv1d", conv_case},
      {"conv_max_pool", pool_case},
      {"dense.identity", [](Rng& r, bool f) { return dense_case(r, f, Activation::Identity); }},
      {"dense.sigmoid", [](Rng& r, bool f) { return dense_case(r, f, Activation::Sigmoid); }},
      {"quantile_head", quantile_case},
      {"tracenet", model_case},
  };
  GradcheckReport report;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    GradcheckLine line{cases[c].first, 0.0, "", true};
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng(mix_seed(mix_seed(seed, c), s));
      const GradCheckResult r = cases[c].second(rng, inject_fault);
      if (r.max_rel_error >= line.max_rel_error) {
        line.max_rel_error = r.max_rel_error;
        line.worst = fmt::format("{}[{}] seed {}", r.worst_param, r.worst_index, s);
      }
    }
    line.pass = line.max_rel_error < kGradTolerance;
    report.lines.push_back(std::move(line));
  }
  return report;
}

}  // namespace tracenet
