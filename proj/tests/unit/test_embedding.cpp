#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "tracenet/embedding.hpp"
#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

using namespace tracenet;

namespace {

// Minimal total merge cost over every merge order; equals the optimal
// weighted code length since every full binary tree arises from some order.
std::uint64_t brute_force_optimum(std::vector<std::uint64_t> w, std::map<std::vector<std::uint64_t>, std::uint64_t>& memo) {
  if (w.size() <= 1) return 0;
  std::sort(w.begin(), w.end());
  if (auto it = memo.find(w); it != memo.end()) return it->second;
  std::uint64_t best = UINT64_MAX;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      std::vector<std::uint64_t> next;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (k != i && k != j) next.push_back(w[k]);
      }
      next.push_back(w[i] + w[j]);
      best = std::min(best, w[i] + w[j] + brute_force_optimum(next, memo));
    }
  }
  memo[w] = best;
  return best;
}

bool prefix_free(const HuffmanTree& t) {
  for (std::size_t a = 0; a < t.codes.size(); ++a) {
    for (std::size_t b = 0; b < t.codes.size(); ++b) {
      if (a == b || t.codes[a].size() > t.codes[b].size()) continue;
      if (std::equal(t.codes[a].begin(), t.codes[a].end(), t.codes[b].begin())) return false;
    }
  }
  return true;
}

double kraft_sum(const HuffmanTree& t) {
  double s = 0;
  for (const auto& c : t.codes) s += std::ldexp(1.0, -static_cast<int>(c.size()));
  return s;
}

EmbeddingModel random_model(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back(Sentence(1 + rng.below(5), "t" + std::to_string(i)));
  }
  EmbeddingModel m = init_model(build_vocab(c), dim, seed);
  for (double& x : m.input) x = rng.uniform(-1, 1);
  for (double& x : m.inner) x = rng.uniform(-1, 1);
  return m;
}

Corpus two_clusters(std::uint64_t seed) {
  Rng rng(seed);
  Corpus c;
  for (int s = 0; s < 400; ++s) {
    const char prefix = s % 2 ? 'p' : 'q';
    Sentence sent;
    for (int i = 0; i < 8; ++i) sent.push_back(std::string(1, prefix) + std::to_string(rng.below(6)));
    c.push_back(sent);
  }
  return c;
}

}  // namespace

TEST_CASE("build_vocab") {
  const Corpus c{{"a", "b"}, {"a"}};
  const Vocabulary v = build_vocab(c);
  CHECK(v.tokens == std::vector<std::string>{"a", "b"});
  CHECK(v.counts == std::vector<std::uint64_t>{2, 1});
  CHECK(build_vocab(c, 2).tokens == std::vector<std::string>{"a"});
  CHECK(build_vocab({{"c", "b", "a", "a"}}).tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS_AS(build_vocab(c, 3), EmptyVocab);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.index.at(v.tokens[i]) == i);
}

TEST_CASE("huffman examples") {
  const std::vector<std::uint64_t> f{4, 2, 1, 1};
  const HuffmanTree t = build_huffman(f);
  CHECK(t.codes[0].size() == 1);
  CHECK(t.codes[1].size() == 2);
  CHECK(t.codes[2].size() == 3);
  CHECK(t.codes[3].size() == 3);
  std::map<std::vector<std::uint64_t>, std::uint64_t> memo;
  CHECK(brute_force_optimum(f, memo) == 14);
  CHECK(weighted_code_length(t, f) == 14);
  CHECK(t.inner_count == 3);

  const std::vector<std::uint64_t> one{5};
  CHECK(build_huffman(one).codes[0].empty());
  CHECK(build_huffman(one).inner_count == 0);
  const std::vector<std::uint64_t> two{5, 5};
  const HuffmanTree t2 = build_huffman(two);
  CHECK(t2.inner_count == 1);
  CHECK(t2.codes[0].size() == 1);
  CHECK(t2.codes[1].size() == 1);
  CHECK(t2.codes[0][0] != t2.codes[1][0]);
}

TEST_CASE("huffman optimality, kraft equality and prefix freedom") {
  std::map<std::vector<std::uint64_t>, std::uint64_t> memo;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(8);
    std::vector<std::uint64_t> f(n);
    for (auto& x : f) x = 1 + rng.below(20);
    const HuffmanTree t = build_huffman(f);
    CHECK(weighted_code_length(t, f) == brute_force_optimum(f, memo));
    if (n > 1) CHECK(kraft_sum(t) == 1.0);
    CHECK(prefix_free(t));
    for (const auto& p : t.points) {
      if (!p.empty()) CHECK(p.front() == t.inner_count - 1);
    }
  }
}

TEST_CASE("context_pairs") {
  using P = std::pair<std::string, std::string>;
  CHECK(context_pairs({"A", "B", "C"}, 2) ==
        std::vector<P>{{"A", "B"}, {"A", "C"}, {"B", "A"}, {"B", "C"}, {"C", "A"}, {"C", "B"}});
  CHECK(context_pairs({"A"}, 3).empty());
  CHECK(context_pairs({"A", "B", "C", "D"}, 1).size() == 6);
  for (std::size_t n = 0; n < 12; ++n) {
    for (std::size_t c = 1; c < 6; ++c) CHECK(context_pair_count(n, c) == context_pairs(Sentence(n, "x"), c).size());
  }
}

TEST_CASE("hierarchical softmax values") {
  EmbeddingModel m = init_model(build_vocab({{"a", "b"}}), 4, 1);
  std::fill(m.input.begin(), m.input.end(), 0.0);
  CHECK(hs_loss_and_grad(m, "a", "b").loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hs_loss_and_grad(m, "a", "zz"), UnknownToken);

  const EmbeddingModel r = random_model(2, 5, 3);
  CHECK(hs_probability(r, 0, 0) + hs_probability(r, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hierarchical softmax normalizes") {
  for (std::size_t n : {2u, 7u, 100u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EmbeddingModel m = random_model(n, 8, seed);
      for (std::size_t u = 0; u < n; u += std::max<std::size_t>(1, n / 7)) {
        double s = 0;
        for (std::size_t w = 0; w < n; ++w) s += hs_probability(m, u, w);
        CHECK(std::abs(s - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("hierarchical softmax gradient matches central differences") {
  const double eps = 1e-4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EmbeddingModel m = random_model(9, 6, seed);
    const std::string center = m.vocab.tokens[seed % 9], target = m.vocab.tokens[(seed * 5 + 2) % 9];
    const HsGrad g = hs_loss_and_grad(m, center, target);
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8}); };
    const std::size_t c = *m.vocab.find(center);
    for (std::size_t k = 0; k < m.dim; ++k) {
      double& x = m.input[c * m.dim + k];
      const double x0 = x;
      x = x0 + eps;
      const double up = hs_loss_and_grad(m, center, target).loss;
      x = x0 - eps;
      const double down = hs_loss_and_grad(m, center, target).loss;
      x = x0;
      CHECK(rel(g.center_grad[k], (up - down) / (2 * eps)) < 1e-4);
    }
    for (std::size_t l = 0; l < g.inner_nodes.size(); ++l) {
      for (std::size_t k = 0; k < m.dim; ++k) {
        double& x = m.inner[g.inner_nodes[l] * m.dim + k];
        const double x0 = x;
        x = x0 + eps;
        const double up = hs_loss_and_grad(m, center, target).loss;
        x = x0 - eps;
        const double down = hs_loss_and_grad(m, center, target).loss;
        x = x0;
        CHECK(rel(g.inner_grads[l][k], (up - down) / (2 * eps)) < 1e-4);
      }
    }
  }
}

TEST_CASE("huffman paths are logarithmic on trace-like frequencies") {
  Rng rng(5);
  Corpus c;
  for (int s = 0; s < 300; ++s) {
    Sentence sent;
    const std::size_t len = 3 + rng.below(10);
    for (std::size_t i = 0; i < len; ++i) sent.push_back("g.n" + std::to_string(rng.below(1 + rng.below(80))));
    c.push_back(sent);
  }
  const Vocabulary v = build_vocab(c);
  const HuffmanTree t = build_huffman(v);
  const auto bound = 2 * static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(v.size()))));
  for (const auto& code : t.codes) CHECK(code.size() <= bound);
}

TEST_CASE("training") {
  const Corpus corpus = two_clusters(1);
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 3;
  cfg.window = 3;
  cfg.seed = 7;

  SUBCASE("loss decreases and pairs are accounted") {
    const EmbeddingModel start = init_model(build_vocab(corpus), cfg.dim, cfg.seed);
    TrainStats stats;
    const EmbeddingModel m = train_skipgram(corpus, cfg, &stats);
    CHECK(corpus_loss(m, corpus, cfg.window) < corpus_loss(start, corpus, cfg.window));
    std::size_t expected = 0;
    for (const Sentence& s : corpus) expected += context_pairs(s, cfg.window).size();
    REQUIRE(stats.pairs_per_epoch.size() == 3);
    for (std::size_t p : stats.pairs_per_epoch) CHECK(p == expected);
    CHECK(stats.epoch_loss.back() < stats.epoch_loss.front());
  }
  SUBCASE("clusters separate") {
    const EmbeddingModel m = train_skipgram(corpus, cfg);
    double intra = 0, inter = 0;
    int ni = 0, nx = 0;
    for (std::size_t a = 0; a < m.vocab.size(); ++a) {
      for (std::size_t b = a + 1; b < m.vocab.size(); ++b) {
        const double c = cosine(m.input_row(a), m.input_row(b));
        if (m.vocab.tokens[a][0] == m.vocab.tokens[b][0]) {
          intra += c;
          ++ni;
        } else {
          inter += c;
          ++nx;
        }
      }
    }
    CHECK(intra / ni - inter / nx > 0.2);
  }
  SUBCASE("single worker is bit deterministic") {
    CHECK(train_skipgram(corpus, cfg).input == train_skipgram(corpus, cfg).input);
  }
  SUBCASE("hogwild workers train") {
    SkipGramConfig par = cfg;
    par.workers = 3;
    const EmbeddingModel m = train_skipgram(corpus, par);
    CHECK(std::all_of(m.input.begin(), m.input.end(), [](double x) { return std::isfinite(x); }));
    CHECK(corpus_loss(m, corpus, cfg.window) < corpus_loss(init_model(build_vocab(corpus), 16, 7), corpus, 3));
  }
  SUBCASE("invalid config") {
    SkipGramConfig bad = cfg;
    bad.window = 0;
    CHECK_THROWS_AS(train_skipgram(corpus, bad), ValidationError);
  }
}

TEST_CASE("incremental update") {
  const Corpus base{{"a", "b", "c"}, {"b", "c", "d"}, {"a", "d"}};
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 20;
  cfg.window = 2;
  const EmbeddingModel m = train_skipgram(base, cfg);

  SUBCASE("known tokens keep the vocabulary") {
    const EmbeddingModel u = update_model(m, {{"a", "b"}}, cfg);
    CHECK(u.vocab.tokens == m.vocab.tokens);
  }
  SUBCASE("new token extends the vocabulary and keeps old rows") {
    const EmbeddingModel x = extend_model(m, {{"a", "z"}}, 3);
    CHECK(x.vocab.size() == m.vocab.size() + 1);
    CHECK(std::equal(m.input.begin(), m.input.end(), x.input.begin()));
    CHECK(std::all_of(x.inner.begin(), x.inner.end(), [](double v) { return v == 0.0; }));
    CHECK(x.tree.inner_count == x.vocab.size() - 1);
  }
  SUBCASE("update touches only the changed region") {
    const Corpus region{{"a", "z", "b"}, {"z", "b"}};
    const EmbeddingModel x = extend_model(m, region, cfg.seed);
    const EmbeddingModel u = update_model(m, region, cfg);
    CHECK(corpus_loss(u, region, 2) < corpus_loss(x, region, 2));
    for (const std::string tok : {"c", "d"}) {
      const std::size_t i = *m.vocab.find(tok);
      CHECK(std::equal(m.input_row(i).begin(), m.input_row(i).end(), u.input_row(*u.vocab.find(tok)).begin()));
    }
  }
}

TEST_CASE("vector files") {
  EmbeddingModel m = init_model(build_vocab({{"x", "y", "x"}}), 3, 2);
  std::stringstream ss;
  save_vectors(ss, m);
  const std::string text = ss.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.rfind("2 3\n", 0) == 0);
  const VectorTable t = load_vectors(ss);
  REQUIRE(t.size() == 2);
  CHECK(t.tokens() == m.vocab.tokens);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(t.row(i)[k] - m.input_row(i)[k]) <= 1e-6);
  }

  std::istringstream short_body("3 2\na 0.1 0.2\nb 0.3 0.4\n");
  try {
    load_vectors(short_body);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 4);
  }
  std::istringstream bad_row("2 2\na 0.1 0.2\nb 0.3\n");
  try {
    load_vectors(bad_row);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_number("1 2\na 0.1 zz\n");
  CHECK_THROWS_AS(load_vectors(bad_number), FormatError);
}
