#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "tracenet/errors.hpp"
#include "tracenet/forge.hpp"
#include "tracenet/random.hpp"

using namespace tracenet;

namespace {

Block A(const std::string& id, const std::string& label) { return Block::act(id, label); }

BlockTree framed(Block middle) {
  return BlockTree{"t", normalize(Block::seq({A("s", "start"), std::move(middle), A("e", "end")}))};
}

Relation rel(const BehaviorProfile& p, const std::string& a, const std::string& b) {
  return p.at(static_cast<std::size_t>(p.find(a)), static_cast<std::size_t>(p.find(b)));
}

// Relation by brute force over all position pairs of label sequences.
Relation brute_relation(const std::vector<std::vector<std::string>>& runs, const std::string& a,
                        const std::string& b) {
  bool ab = false, ba = false, co = false, rep = false;
  for (const auto& t : runs) {
    std::vector<std::size_t> pa, pb;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == a) pa.push_back(i);
      if (t[i] == b) pb.push_back(i);
    }
    if (a == b) {
      rep = rep || pa.size() > 1;
      continue;
    }
    if (pa.empty() || pb.empty()) continue;
    co = true;
    for (std::size_t x : pa) {
      for (std::size_t y : pb) {
        if (x < y) ab = true;
        if (y < x) ba = true;
      }
    }
  }
  if (a == b) return rep ? Relation::Interleaving : Relation::Self;
  if (!co) return Relation::Exclusive;
  if (ab && ba) return Relation::Interleaving;
  return ab ? Relation::StrictOrder : Relation::ReverseOrder;
}

std::map<std::string, std::string> labels_of(const BlockTree& t) {
  std::vector<const Block*> acts;
  collect_activities(t.root, acts);
  std::map<std::string, std::string> m;
  for (const Block* a : acts) m[a->node_id] = a->label;
  return m;
}

GenConfig small_gen(std::uint64_t seed) {
  GenConfig c;
  c.max_activities = 8;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("gen_graph with depth one is a flat sequence") {
  GenConfig c;
  c.max_depth = 1;
  for (std::uint64_t s = 0; s < 20; ++s) {
    c.seed = s;
    const BlockTree t = gen_graph(c);
    REQUIRE(t.root.type == BlockType::Seq);
    for (const Block& b : t.root.children) CHECK(b.type == BlockType::Act);
  }
}

TEST_CASE("gen_graph is deterministic and respects its budget") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const GenConfig c = small_gen(s);
    const BlockTree t = gen_graph(c);
    CHECK(t == gen_graph(c));
    CHECK(count_activities(t.root) <= c.max_activities);
    CHECK_NOTHROW(validate(t));
    std::vector<const Block*> acts;
    collect_activities(t.root, acts);
    std::set<std::string> labels;
    for (const Block* a : acts) labels.insert(a->label);
    CHECK(labels.size() == acts.size());
  }
}

TEST_CASE("gen_graph pattern frequencies follow the weights") {
  GenStats stats;
  GenConfig c;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    c.seed = s;
    gen_graph(c, "p", &stats);
  }
  REQUIRE(stats.total() > 500);
  for (std::size_t k = 0; k < kPatternCount; ++k) {
    const double freq = static_cast<double>(stats.draws[k]) / static_cast<double>(stats.total());
    INFO("pattern ", k, " freq ", freq);
    CHECK(std::abs(freq - c.weights[k]) < 0.03);
  }
}

TEST_CASE("gen_graph reports exhausted vocabularies") {
  GenConfig c;
  c.vocab = LabelVocab{{"do"}, {"x", "y"}};
  CHECK_THROWS_AS(gen_graph(c), VocabExhausted);
  c.weights = {0.5, 0.5, 0.0, 0.0, 0.1};
  CHECK_THROWS_AS(gen_graph(c), ValidationError);
}

TEST_CASE("mutate with zero ops is the identity") {
  const BlockTree t = gen_graph(small_gen(3));
  const MutationResult r = mutate(t, 0, 9);
  CHECK(r.tree == t);
  CHECK(r.applied.empty());
  CHECK_FALSE(r.exhausted);
}

TEST_CASE("mutate swap reverses a two-step sequence") {
  const BlockTree t{"t", Block::seq({A("a", "boil water"), A("b", "add pasta")})};
  bool seen = false;
  for (std::uint64_t s = 0; s < 50 && !seen; ++s) {
    const MutationResult r = mutate(t, 1, s);
    REQUIRE(r.applied.size() == 1);
    if (r.applied[0] != MutationOp::Swap) continue;
    seen = true;
    CHECK(r.tree.root == Block::seq({A("b", "add pasta"), A("a", "boil water")}));
  }
  CHECK(seen);
}

TEST_CASE("mutated trees stay valid") {
  std::map<MutationOp, int> ops;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const BlockTree t = gen_graph(small_gen(s));
    const MutationResult r = mutate(t, 1 + s % 5, mix_seed(s, 1));
    CHECK_NOTHROW(validate(r.tree));
    CHECK(count_activities(r.tree.root) >= 2);
    for (MutationOp op : r.applied) ++ops[op];
  }
  CHECK(ops.size() == 4);
}

TEST_CASE("relabel never reuses a label in the tree") {
  const BlockTree t{"t", Block::seq({A("a", "x y"), A("b", "x z")})};
  const LabelVocab tight{{"x"}, {"y", "z"}};
  for (std::uint64_t s = 0; s < 30; ++s) {
    const MutationResult r = mutate(t, 1, s, tight);
    REQUIRE(r.applied.size() == 1);
    CHECK(r.applied[0] != MutationOp::Relabel);
  }
}

TEST_CASE("similarity decreases with the number of mutations") {
  const TraceCaps caps{};
  std::vector<double> mean(6, 0.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const BlockTree t = gen_graph(small_gen(s));
    const BehaviorProfile p = behavior_profile(t, caps);
    for (std::size_t n = 0; n < mean.size(); ++n) {
      mean[n] += bp_similarity(p, behavior_profile(mutate(t, n, mix_seed(s, 7)).tree, caps)).value() / 100.0;
    }
  }
  CHECK(mean[0] == doctest::Approx(1.0));
  for (std::size_t n = 1; n < mean.size(); ++n) {
    INFO("n_ops ", n, " mean ", mean[n]);
    CHECK(mean[n] < mean[n - 1]);
  }
}

TEST_CASE("generate_text follows the templates") {
  const BlockTree pasta{"t", Block::seq({A("a", "boil water"), A("b", "add pasta")})};
  CHECK(generate_text(pasta, 0).sentences == std::vector<std::string>{"First, boil water.", "Then, add pasta."});
  CHECK(generate_text(pasta, 1).sentences[1] == "Next, add pasta.");
  CHECK(generate_text(pasta, 2).sentences[1] == "After that, add pasta.");

  const ProcessText x = generate_text(framed(Block::xor_of({A("a", "pay cash"), A("b", "pay card")})), 0);
  REQUIRE(x.sentences.size() == 3);
  CHECK(x.sentences[1] == "One of the following is performed: either pay cash, or pay card.");
  CHECK(generate_text(framed(Block::and_of({A("a", "p"), A("b", "q")})), 0).sentences[1] ==
        "The following are done in parallel: p; meanwhile, q.");
  CHECK(generate_text(framed(Block::or_of({A("a", "p"), A("b", "q")})), 0).sentences[1] ==
        "Optionally, one or more of the following happen: p; q.");
  CHECK(generate_text(framed(Block::loop(A("a", "p"))), 0).sentences[1] == "The following may repeat: p.");
}

TEST_CASE("generate_text names every activity in exactly one sentence") {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const BlockTree t = gen_graph(small_gen(s));
    const ProcessText text = generate_text(t, s);
    CHECK(text.sentences == generate_text(t, s).sentences);
    std::vector<const Block*> acts;
    collect_activities(t.root, acts);
    for (const Block* a : acts) {
      int hits = 0;
      for (const auto& sentence : text.sentences) hits += sentence.find(a->label) != std::string::npos;
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("behavior profiles of the basic patterns") {
  const TraceCaps caps{};
  const auto seq = behavior_profile(BlockTree{"t", Block::seq({A("a", "a"), A("b", "b")})}, caps);
  CHECK(rel(seq, "a", "b") == Relation::StrictOrder);
  CHECK(rel(seq, "b", "a") == Relation::ReverseOrder);
  CHECK(rel(seq, "a", "a") == Relation::Self);
  const auto x = behavior_profile(framed(Block::xor_of({A("a", "a"), A("b", "b")})), caps);
  CHECK(rel(x, "a", "b") == Relation::Exclusive);
  CHECK(rel(x, "start", "b") == Relation::StrictOrder);
  const auto par = behavior_profile(framed(Block::and_of({A("a", "a"), A("b", "b")})), caps);
  CHECK(rel(par, "a", "b") == Relation::Interleaving);
  const auto loop = behavior_profile(framed(Block::loop(A("a", "a"))), caps);
  CHECK(rel(loop, "a", "a") == Relation::Interleaving);
}

TEST_CASE("behavior profile agrees with a brute-force oracle") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const BlockTree t = gen_graph(small_gen(s));
    const TraceSet ts = enumerate_traces(t, TraceCaps{});
    const auto names = labels_of(t);
    std::vector<std::vector<std::string>> runs;
    for (const Trace& tr : ts.traces) {
      std::vector<std::string> r;
      for (const auto& tok : tr.tokens) {
        if (auto it = names.find(tok); it != names.end()) r.push_back(it->second);
      }
      runs.push_back(std::move(r));
    }
    const BehaviorProfile p = profile_from_traces(ts.traces, names);
    for (const auto& a : p.labels) {
      for (const auto& b : p.labels) CHECK(rel(p, a, b) == brute_relation(runs, a, b));
    }
    // Antisymmetry of the order relations.
    for (const auto& a : p.labels) {
      for (const auto& b : p.labels) {
        if (rel(p, a, b) == Relation::StrictOrder) CHECK(rel(p, b, a) == Relation::ReverseOrder);
        if (rel(p, a, b) == Relation::Exclusive) CHECK(rel(p, b, a) == Relation::Exclusive);
      }
    }
    // Order and duplication of traces do not matter.
    std::vector<Trace> shuffled = ts.traces;
    Rng rng(s);
    rng.shuffle(shuffled);
    shuffled.push_back(shuffled.front());
    CHECK(profile_from_traces(shuffled, names) == p);
  }
}

TEST_CASE("graph profiles from token-game runs match tree profiles") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    GenConfig c = small_gen(s);
    c.weights = {0.45, 0.25, 0.2, 0.1, 0.0};
    const BlockTree t = gen_graph(c);
    const ProcessGraph g = flatten(t);
    const auto runs = all_token_game_runs(g, 200);
    const BehaviorProfile from_game =
        profile_from_traces(std::vector<Trace>(runs.begin(), runs.end()), labels_of(t));
    CHECK(from_game == behavior_profile(t, TraceCaps{}));
  }
}

TEST_CASE("bp_similarity examples and properties") {
  const TraceCaps caps{};
  const auto ab = behavior_profile(BlockTree{"t", Block::seq({A("a", "a"), A("b", "b")})}, caps);
  const auto ba = behavior_profile(BlockTree{"t", Block::seq({A("b", "b"), A("a", "a")})}, caps);
  const auto cd = behavior_profile(BlockTree{"t", Block::seq({A("c", "c"), A("d", "d")})}, caps);
  CHECK(bp_similarity(ab, ab).value() == 1.0);
  CHECK(bp_similarity(ab, ba).value() == 0.0);
  CHECK(bp_similarity(ab, cd).value() == 0.0);
  CHECK(bp_similarity(BehaviorProfile{}, BehaviorProfile{}).value() == 1.0);
  CHECK(bp_similarity(ab, BehaviorProfile{}).value() == 0.0);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const BlockTree t = gen_graph(small_gen(s));
    const auto p = behavior_profile(t, caps);
    const auto q = behavior_profile(mutate(t, 2, s).tree, caps);
    const double pq = bp_similarity(p, q).value();
    CHECK(pq == bp_similarity(q, p).value());
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    CHECK((pq == 1.0) == (p.labels == q.labels && [&] {
            for (std::size_t a = 0; a < p.labels.size(); ++a)
              for (std::size_t b = 0; b < p.labels.size(); ++b)
                if (a != b && p.at(a, b) != q.at(a, b)) return false;
            return true;
          }()));
  }
}

TEST_CASE("build_dataset on one unmutated tree") {
  DatasetConfig c;
  c.variants = 0;
  const Dataset d = build_dataset({gen_graph(small_gen(1))}, c);
  REQUIRE(d.pairs.size() == 1);
  CHECK(d.pairs[0].gold == 1.0);
  CHECK(d.pairs[0].graph == d.pairs[0].text);
  CHECK(d.pairs[0].split == Split::Train);
  CHECK(d.graphs[0].id == "p0");
  CHECK_THROWS_AS(build_dataset({}, c), EmptyDataset);
}

TEST_CASE("build_dataset accounting, splits and label spread") {
  std::vector<BlockTree> bases;
  for (std::uint64_t s = 0; s < 30; ++s) bases.push_back(gen_graph(small_gen(s)));
  DatasetConfig c;
  c.seed = 5;
  const Dataset d = build_dataset(bases, c);
  CHECK(d.graphs.size() == 30 * 4);
  // Per family: 4 self pairs + 6 member pairs x 2; per base one cross pair x 2.
  CHECK(d.pairs.size() == 30 * (4 + 12) + 30 * 2);
  std::map<std::pair<std::size_t, std::size_t>, int> per_source;
  std::size_t test = 0;
  double lo = 1.0, hi = 0.0;
  for (const LabeledPair& p : d.pairs) {
    ++per_source[{std::min(p.provenance.first, p.provenance.second), std::max(p.provenance.first, p.provenance.second)}];
    CHECK(d.family[p.graph] < 30);
    // Graph and text always share a split.
    const bool gt = std::any_of(d.pairs.begin(), d.pairs.end(), [&](const LabeledPair& q) {
      return q.graph == p.text && q.text == p.text && q.split == p.split;
    });
    CHECK(gt);
    if (p.graph == p.text) CHECK(p.gold == 1.0);
    test += p.split == Split::Test;
    lo = std::min(lo, p.gold);
    hi = std::max(hi, p.gold);
  }
  for (const auto& [src, n] : per_source) CHECK(n == (src.first == src.second ? 1 : 2));
  CHECK(lo < 0.2);
  CHECK(hi == 1.0);
  const double frac = static_cast<double>(test) / static_cast<double>(d.pairs.size());
  CHECK(frac == doctest::Approx(0.2).epsilon(0.1));
  const auto h = gold_histogram(d.pairs);
  std::size_t sum = 0;
  for (auto n : h) sum += n;
  CHECK(sum == d.pairs.size());

  std::ostringstream a, b;
  write_dataset_jsonl(a, d);
  write_dataset_jsonl(b, build_dataset(bases, c));
  CHECK(a.str() == b.str());
}

TEST_CASE("dataset jsonl round trip") {
  DatasetConfig c;
  const Dataset d = build_dataset({gen_graph(small_gen(1)), gen_graph(small_gen(2))}, c);
  std::stringstream ss;
  write_dataset_jsonl(ss, d);
  const auto rows = read_dataset_jsonl(ss);
  REQUIRE(rows.size() == d.pairs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].graph == d.graphs[d.pairs[i].graph]);
    CHECK(rows[i].text.sentences == d.texts[d.pairs[i].text].sentences);
    CHECK(rows[i].gold == d.pairs[i].gold);
    CHECK(rows[i].split == d.pairs[i].split);
    CHECK(rows[i].provenance == d.pairs[i].provenance);
  }
  std::istringstream bad("\n{\"graph\": 1}\n");
  try {
    read_dataset_jsonl(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
}
