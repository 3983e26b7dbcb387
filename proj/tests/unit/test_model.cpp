#include <doctest.h>

#include <cmath>

#include "tracenet/errors.hpp"
#include "tracenet/model.hpp"
#include "tracenet/random.hpp"

using namespace tracenet;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.embed_dim = 4;
  c.filter_widths = {2, 3};
  c.filters_per_width = {3, 2};
  c.hidden_units = 6;
  c.max_tokens = 8;
  c.max_nodes = 7;
  c.batch = 32;
  c.max_epochs = 5;
  c.patience = 1000;
  return c;
}

Sequence random_sequence(Rng& rng, std::size_t rows, std::size_t dim, std::size_t used) {
  Sequence s{Tensor({rows, dim}), used};
  for (std::size_t i = 0; i < used * dim; ++i) s.rows.data[i] = rng.uniform(-1.0, 1.0);
  return s;
}

EncodedPair random_pair(Rng& rng, const ModelConfig& c) {
  return EncodedPair{random_sequence(rng, c.max_nodes, c.embed_dim, 1 + rng.below(c.max_nodes)),
                     random_sequence(rng, c.max_tokens, c.embed_dim, 3 + rng.below(c.max_tokens - 2)),
                     random_sequence(rng, c.max_tokens, c.embed_dim, 3 + rng.below(c.max_tokens - 2)),
                     rng.uniform()};
}

VectorTable words() {
  return VectorTable({"check", "order", "ship", "goods"}, 4,
                     {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
}

const char* kGraph = R"({
  "id": "p1", "entry": "A", "exit": "C",
  "nodes": [
    {"id": "A", "kind": "activity", "label": "Check order"},
    {"id": "g1s", "kind": "gateway", "gateway_kind": "and", "gateway_role": "split"},
    {"id": "B", "kind": "activity", "label": "Ship goods"},
    {"id": "D", "kind": "activity", "label": "Bill"},
    {"id": "g1j", "kind": "gateway", "gateway_kind": "and", "gateway_role": "join"},
    {"id": "C", "kind": "activity", "label": "archive"}
  ],
  "edges": [["A","g1s"],["g1s","B"],["g1s","D"],["B","g1j"],["D","g1j"],["g1j","C"]]
})";

}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize("Check the Order, then ship!") ==
        std::vector<std::string>{"check", "the", "order", "then", "ship"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("re-check v2") == std::vector<std::string>{"re", "check", "v2"});
  CHECK(tokenize("caf\xc3\xa9 ok") == std::vector<std::string>{"caf\xc3\xa9", "ok"});
}

TEST_CASE("embed_text pads, truncates and zeroes unknown words") {
  const VectorTable t = words();
  const Sequence s = embed_text({"ship", "unknown", "order"}, t, 5);
  CHECK(s.rows.shape == std::vector<std::size_t>{5, 4});
  CHECK(s.used == 3);
  CHECK(s.rows(0, 2) == 1.0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(s.rows(1, j) == 0.0);
  CHECK(s.rows(2, 1) == 1.0);
  for (std::size_t i = 3; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(s.rows(i, j) == 0.0);
  const Sequence cut = embed_text({"ship", "order", "goods"}, t, 2);
  CHECK(cut.used == 2);
  CHECK(cut.rows(1, 1) == 1.0);
}

TEST_CASE("topological order breaks ties by node id") {
  const ProcessGraph g = parse_graph(kGraph);
  std::vector<std::string> ids;
  for (std::size_t v : topological_order(g)) ids.push_back(g.node(v).id);
  CHECK(ids == std::vector<std::string>{"A", "g1s", "B", "D", "g1j", "C"});
}

TEST_CASE("encode_graph builds the semantic and label channels") {
  const ProcessGraph g = parse_graph(kGraph);
  ModelConfig c = tiny_config();
  std::vector<std::string> toks;
  std::vector<double> data;
  for (const Node& n : g.nodes()) {
    if (n.id == "C") continue;  // one missing embedding
    toks.push_back(qualified_token("p1", n.id));
    for (int j = 0; j < 4; ++j) data.push_back(static_cast<double>(toks.size()) + 0.1 * j);
  }
  const VectorTable nodes(toks, 4, data);

  SUBCASE("all nodes") {
    const GraphEncoding e = encode_graph(g, &nodes, words(), c);
    CHECK(e.semantic.used == 6);
    CHECK(e.missing_embeddings == 1);
    CHECK(e.semantic.rows(0, 0) == doctest::Approx(1.0));  // A
    CHECK(e.semantic.rows(1, 0) == doctest::Approx(2.0));  // g1s
    CHECK(e.semantic.rows(5, 0) == 0.0);                   // C missing
    // check order ship goods bill archive
    CHECK(e.labels.used == 6);
    CHECK(e.labels.rows(0, 0) == 1.0);
    CHECK(e.labels.rows(3, 3) == 1.0);
    CHECK(e.labels.rows(4, 0) == 0.0);
  }
  SUBCASE("activities only") {
    c.task_mode = ProjectionMode::ActivitiesOnly;
    const GraphEncoding e = encode_graph(g, &nodes, words(), c);
    CHECK(e.semantic.used == 4);
    CHECK(e.semantic.rows(1, 0) == doctest::Approx(3.0));  // B
  }
  SUBCASE("gateways only") {
    c.task_mode = ProjectionMode::GatewaysOnly;
    const GraphEncoding e = encode_graph(g, &nodes, words(), c);
    CHECK(e.semantic.used == 2);
    CHECK(e.missing_embeddings == 0);
  }
  SUBCASE("no semantic channel") {
    c.semantic_mode = SemanticMode::None;
    const GraphEncoding e = encode_graph(g, nullptr, words(), c);
    CHECK(e.semantic.used == 0);
    for (double x : e.semantic.rows.data) CHECK(x == 0.0);
  }
  SUBCASE("truncation") {
    c.max_nodes = 3;
    c.filter_widths = {2};
    c.filters_per_width = {2};
    CHECK(encode_graph(g, &nodes, words(), c).semantic.used == 3);
  }
  SUBCASE("gateway-free graph in gateway mode") {
    c.task_mode = ProjectionMode::GatewaysOnly;
    const ProcessGraph two = parse_graph(R"({"id":"m","entry":"A","exit":"B",
      "nodes":[{"id":"A","kind":"activity","label":"ship"},{"id":"B","kind":"activity","label":"order"}],
      "edges":[["A","B"]]})");
    const GraphEncoding e = encode_graph(two, &nodes, words(), c);
    CHECK(e.semantic.used == 0);
    TraceNetModel m(c);
    m.init_glorot(3);
    const ProcessText text{{"Ship the order."}};
    const double s = predict(m, two, text, &nodes, words()).value();
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(encode_graph(g, nullptr, words(), c), ValidationError);
    c.embed_dim = 5;
    CHECK_THROWS_AS(encode_graph(g, &nodes, words(), c), ShapeError);
  }
}

TEST_CASE("model config validation and json round trip") {
  ModelConfig c = tiny_config();
  c.semantic_mode = SemanticMode::DeepWalk;
  c.task_mode = ProjectionMode::GatewaysOnly;
  const ModelConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), SchemaError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"gamma", "x"}}), SchemaError);
  CHECK(parse_task_mode("2") == ProjectionMode::GatewaysOnly);
  CHECK(task_number(ProjectionMode::All) == 3);
  ModelConfig bad = c;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.filter_widths = {9};
  bad.filters_per_width = {1};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.filters_per_width = {1};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  CHECK(ModelConfig{}.total_filters() == 128);
}

TEST_CASE("scores lie strictly inside the unit interval") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    m.init_glorot(seed);
    for (int k = 0; k < 10; ++k) {
      const double s = m.forward(random_pair(rng, c));
      CHECK(s > 0.0);
      CHECK(s < 1.0);
    }
  }
}

TEST_CASE("all-zero parameters score one half") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);
  Rng rng(1);
  CHECK(m.forward(random_pair(rng, c)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("labels and text share the filter bank") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);
  m.init_glorot(4);
  CHECK(&m.filters(Channel::Labels) == &m.filters(Channel::Text));
  CHECK(&m.filters(Channel::Labels) != &m.filters(Channel::Semantic));
  Rng rng(2);
  EncodedPair p = random_pair(rng, c);
  p.text = p.labels;
  const auto v = m.features(p);
  const std::size_t f = c.total_filters();
  REQUIRE(v.size() == 3 * f);
  for (std::size_t i = 0; i < f; ++i) CHECK(v[f + i] == v[2 * f + i]);
}

TEST_CASE("semantic mode none zeroes the S features") {
  ModelConfig c = tiny_config();
  c.semantic_mode = SemanticMode::None;
  TraceNetModel m(c);
  m.init_glorot(8);
  Rng rng(3);
  const auto v = m.features(random_pair(rng, c));
  for (std::size_t i = 0; i < c.total_filters(); ++i) CHECK(v[i] == 0.0);
  std::vector<Tensor> g = m.zero_gradients();
  m.accumulate_gradient(random_pair(rng, c), [](double) { return 1.0; }, g);
  // Semantic bank slots follow the text bank slots.
  for (std::size_t s = 2 * c.filter_widths.size(); s < 4 * c.filter_widths.size(); ++s) {
    for (double x : g[s].data) CHECK(x == 0.0);
  }
}

TEST_CASE("glorot initialization respects the bounds") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);
  m.init_glorot(11);
  for (const Parameter* p : m.parameters()) {
    if (p->value.rank() == 1) {
      for (double x : p->value.data) CHECK(x == 0.0);
      continue;
    }
    const std::size_t r = p->value.dim(p->value.rank() == 3 ? 1 : 0);
    const std::size_t col = p->value.dim(p->value.rank() == 3 ? 2 : 1);
    const double a = glorot_bound(r, col);
    double hi = 0.0;
    for (double x : p->value.data) hi = std::max(hi, std::abs(x));
    CHECK(hi <= a);
    CHECK(hi > 0.5 * a);
  }
}

TEST_CASE("full model gradients match finite differences") {
  for (SemanticMode mode : {SemanticMode::TraceWalk, SemanticMode::None}) {
    ModelConfig c = tiny_config();
    c.semantic_mode = mode;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      TraceNetModel m(c);
      m.init_glorot(seed);
      // Move biases off zero so every path is exercised.
      Rng rng(100 + seed);
      for (Parameter* p : m.parameters()) {
        if (p->value.rank() == 1) {
          for (double& x : p->value.data) x = rng.uniform(-0.3, 0.3);
        }
      }
      std::vector<EncodedPair> batch;
      for (int k = 0; k < 3; ++k) batch.push_back(random_pair(rng, c));
      const auto params = m.parameters();
      // Smooth surrogate loss, avoids the quantile kink at e == y.
      auto loss = [&](bool grad) {
        double total = 0.0;
        std::vector<Tensor> g = m.zero_gradients();
        for (const EncodedPair& ex : batch) {
          const double e = grad ? m.accumulate_gradient(ex, [&](double s) { return s - ex.gold; }, g) : m.forward(ex);
          total += 0.5 * (e - ex.gold) * (e - ex.gold);
        }
        if (grad) {
          for (std::size_t i = 0; i < params.size(); ++i) params[i]->grad = g[i];
        }
        return total;
      };
      const GradCheckResult r = grad_check(loss, params, 1e-5, 12, seed);
      INFO(r.worst_param, " ", r.worst_index, " ", r.analytic, " ", r.numeric);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

namespace {

// Gold depends on whether the text mentions a marker direction.
std::vector<EncodedPair> synthetic(std::size_t n, std::uint64_t seed, const ModelConfig& c) {
  Rng rng(seed);
  std::vector<EncodedPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    EncodedPair p = random_pair(rng, c);
    const bool marked = rng.below(2) == 1;
    if (marked) {
      const std::size_t r = rng.below(p.text.used);
      for (std::size_t j = 0; j < c.embed_dim; ++j) p.text.rows(r, j) = j == 0 ? 3.0 : 0.0;
    }
    p.gold = marked ? 0.85 : 0.15;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("training reduces the quantile loss") {
  ModelConfig c = tiny_config();
  c.max_epochs = 120;
  c.lr = 0.01;
  c.lr_late = 0.005;
  c.lr_drop_epoch = 80;
  const auto train_set = synthetic(200, 1, c);
  const auto val_set = synthetic(60, 2, c);
  TraceNetModel m(c);
  m.init_glorot(c.seed);
  std::size_t callbacks = 0;
  const TrainResult r = train(m, train_set, val_set, c, [&](const EpochRecord&) { ++callbacks; });
  REQUIRE(r.history.size() == 120);
  CHECK(callbacks == 120);
  CHECK(r.history.back().train_loss < 0.5 * r.history.front().train_loss);
  CHECK(r.best_val_loss == doctest::Approx(r.history[r.best_epoch].val_loss));
  // The restored parameters are the best epoch's.
  const Evaluation ev = evaluate(m, val_set);
  CHECK(ev.mae == doctest::Approx(r.history[r.best_epoch].val_mae).epsilon(1e-12));
  CHECK(ev.mae < 0.2);
}

TEST_CASE("training is independent of the worker count") {
  ModelConfig c = tiny_config();
  c.max_epochs = 4;
  c.lr = 0.01;
  const auto data = synthetic(70, 9, c);
  auto run = [&](std::size_t workers) {
    ModelConfig cw = c;
    cw.workers = workers;
    TraceNetModel m(cw);
    m.init_glorot(2);
    train(m, data, {}, cw);
    std::vector<double> flat;
    for (const Parameter* p : m.parameters()) flat.insert(flat.end(), p->value.data.begin(), p->value.data.end());
    return flat;
  };
  const auto one = run(1);
  CHECK(one == run(3));
  CHECK(one == run(1));
}

TEST_CASE("early stopping honours the patience") {
  ModelConfig c = tiny_config();
  c.max_epochs = 200;
  c.patience = 3;
  c.lr = 0.5;  // overshoots, so validation stops improving quickly
  const auto data = synthetic(40, 4, c);
  const auto val = synthetic(40, 5, c);
  TraceNetModel m(c);
  m.init_glorot(1);
  const TrainResult r = train(m, data, val, c);
  CHECK(r.early_stopped);
  CHECK(r.history.size() == r.best_epoch + 1 + 3);
}

TEST_CASE("train and evaluate reject empty data") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);
  CHECK_THROWS_AS(train(m, {}, {}, c), EmptyDataset);
  CHECK_THROWS_AS(evaluate(m, {}), EmptyDataset);
}

TEST_CASE("constant one-half predictor has MAE one quarter on uniform gold") {
  const ModelConfig c = tiny_config();
  TraceNetModel m(c);  // all-zero parameters
  Rng rng(77);
  std::vector<EncodedPair> data;
  for (int i = 0; i < 4000; ++i) data.push_back(random_pair(rng, c));
  const Evaluation ev = evaluate(m, data);
  CHECK(ev.mae == doctest::Approx(0.25).epsilon(0.04));
  CHECK(ev.residuals[0] == doctest::Approx(0.5 - data[0].gold));
}
