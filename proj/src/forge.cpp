#include "tracenet/forge.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>

#include <json.hpp>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

using nlohmann::json;

const LabelVocab& default_label_vocab() {
  static const LabelVocab vocab{
      {"check", "approve", "send", "receive", "prepare", "review", "register", "archive", "sign", "validate",
       "update", "reject", "schedule", "notify", "pack", "ship", "inspect", "record", "calculate", "confirm",
       "submit", "assign", "print", "close"},
      {"order", "invoice", "request", "contract", "payment", "report", "claim", "delivery", "customer", "form",
       "application", "document", "shipment", "account", "quote", "ticket", "budget", "refund", "receipt", "offer",
       "complaint", "license", "schedule", "goods"}};
  return vocab;
}

void validate(const GenConfig& c) {
  if (c.max_depth < 1) throw ValidationError("max_depth", "depth must be at least 1");
  if (c.branch_min < 2 || c.branch_max < c.branch_min) throw ValidationError("branch_factor", "need 2 <= min <= max");
  if (c.max_activities < 3) throw ValidationError("max_activities", "need room for at least 3 activities");
  if (!(c.leaf_prob >= 0.0 && c.leaf_prob <= 1.0)) throw ValidationError("leaf_prob", "must lie in [0, 1]");
  double sum = 0.0;
  for (double w : c.weights) {
    if (!(w >= 0.0)) throw ValidationError("weights", "weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("weights", "weights must sum to 1");
  if (c.vocab.capacity() == 0) throw ValidationError("vocab", "empty activity vocabulary");
}

std::size_t GenStats::total() const { return std::accumulate(draws.begin(), draws.end(), std::size_t{0}); }

namespace {

class Generator {
 public:
  Generator(const GenConfig& c, GenStats* stats) : c_(c), rng_(c.seed), left_(c.max_activities), stats_(stats) {}

  Block root() {
    std::vector<Block> items;
    items.push_back(act());
    const std::size_t middle = std::min<std::size_t>(1 + rng_.below(c_.branch_max), c_.max_activities - 2);
    for (std::size_t k = 0; k < middle; ++k) items.push_back(block(2, 1 + (middle - 1 - k)));
    items.push_back(act());
    return Block::seq(std::move(items));
  }

 private:
  Block act() {
    const std::size_t cap = c_.vocab.capacity();
    if (used_.size() >= cap) throw VocabExhausted("all " + std::to_string(cap) + " activity labels are in use");
    std::size_t pick = rng_.below(cap);
    while (used_.count(pick)) pick = rng_.below(cap);
    used_.insert(pick);
    --left_;
    const std::size_t no = c_.vocab.objects.size();
    return Block::act("a" + std::to_string(next_id_++), c_.vocab.verbs[pick / no] + " " + c_.vocab.objects[pick % no]);
  }

  Pattern draw() {
    double u = rng_.uniform();
    std::size_t k = 0;
    while (k + 1 < kPatternCount && u >= c_.weights[k]) u -= c_.weights[k++];
    if (stats_) ++stats_->draws[k];
    return static_cast<Pattern>(k);
  }

  // `reserve` activities must stay available for later siblings.
  Block block(std::size_t depth, std::size_t reserve) {
    const std::size_t avail = left_ - reserve;
    if (depth > c_.max_depth || avail < 2 || rng_.uniform() < c_.leaf_prob) return act();
    const Pattern p = draw();
    if (p == Pattern::Loop) return Block::loop(block(depth + 1, reserve));
    std::size_t width = c_.branch_min + rng_.below(c_.branch_max - c_.branch_min + 1);
    width = std::min(width, avail);
    std::vector<Block> children;
    for (std::size_t k = 0; k < width; ++k) children.push_back(block(depth + 1, reserve + (width - 1 - k)));
    switch (p) {
      case Pattern::Seq: return Block::seq(std::move(children));
      case Pattern::Xor: return Block::xor_of(std::move(children));
      case Pattern::And: return Block::and_of(std::move(children));
      default: return Block::or_of(std::move(children));
    }
  }

  const GenConfig& c_;
  Rng rng_;
  std::size_t left_;
  std::size_t next_id_ = 1;
  std::set<std::size_t> used_;
  GenStats* stats_;
};

}  // namespace

BlockTree gen_graph(const GenConfig& config, const std::string& id, GenStats* stats) {
  validate(config);
  Generator g(config, stats);
  BlockTree tree{id, normalize(g.root())};
  validate(tree);
  return tree;
}

// ---- mutation ----------------------------------------------------------------------

namespace {

using Path = std::vector<std::size_t>;

struct Move {
  Path path;  // target block (Swap/Delete: the parent Seq)
  std::size_t i = 0, j = 0;
  BlockType kind = BlockType::Xor;
};

Block& at(Block& root, const Path& path) {
  Block* b = &root;
  for (std::size_t k : path) b = &b->children[k];
  return *b;
}

void collect_moves(const Block& b, Path& path, std::array<std::vector<Move>, 4>& out) {
  if (b.type == BlockType::Act) {
    out[3].push_back(Move{path});
    return;
  }
  if (b.type == BlockType::Seq) {
    for (std::size_t i = 0; i < b.children.size(); ++i) {
      for (std::size_t j = i + 1; j < b.children.size(); ++j) out[0].push_back(Move{path, i, j});
      if (b.children[i].type == BlockType::Act) out[2].push_back(Move{path, i});
    }
  }
  if (b.is_gateway_block()) {
    for (BlockType k : {BlockType::Xor, BlockType::And, BlockType::Or}) {
      if (k != b.type) out[1].push_back(Move{path, 0, 0, k});
    }
  }
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    path.push_back(i);
    collect_moves(b.children[i], path, out);
    path.pop_back();
  }
}

std::optional<BlockTree> apply(const BlockTree& tree, MutationOp op, const Move& m, Rng& rng, const LabelVocab& vocab) {
  BlockTree t = tree;
  Block& target = at(t.root, m.path);
  switch (op) {
    case MutationOp::Swap: std::swap(target.children[m.i], target.children[m.j]); break;
    case MutationOp::ChangeKind: target.type = m.kind; break;
    case MutationOp::Delete: target.children.erase(target.children.begin() + static_cast<std::ptrdiff_t>(m.i)); break;
    case MutationOp::Relabel: {
      std::vector<const Block*> acts;
      collect_activities(tree.root, acts);
      std::set<std::string> taken;
      for (const Block* a : acts) taken.insert(a->label);
      std::vector<std::string> fresh;
      for (const auto& v : vocab.verbs) {
        for (const auto& o : vocab.objects) {
          std::string l = v + " " + o;
          if (!taken.count(l)) fresh.push_back(std::move(l));
        }
      }
      if (fresh.empty()) return std::nullopt;
      target.label = fresh[rng.below(fresh.size())];
      break;
    }
  }
  t.root = normalize(std::move(t.root));
  if (count_activities(t.root) < 2) return std::nullopt;
  try {
    validate(t);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  return t;
}

}  // namespace

MutationResult mutate(const BlockTree& tree, std::size_t n_ops, std::uint64_t seed, const LabelVocab& vocab) {
  validate(tree);
  MutationResult r{tree, {}, false};
  Rng rng(seed);
  for (std::size_t step = 0; step < n_ops; ++step) {
    std::array<std::vector<Move>, 4> moves;
    Path path;
    collect_moves(r.tree.root, path, moves);
    bool done = false;
    while (!done) {
      std::vector<std::size_t> live;
      for (std::size_t k = 0; k < moves.size(); ++k) {
        if (!moves[k].empty()) live.push_back(k);
      }
      if (live.empty()) break;
      const std::size_t k = live[rng.below(live.size())];
      const std::size_t pick = rng.below(moves[k].size());
      const auto op = static_cast<MutationOp>(k);
      if (auto t = apply(r.tree, op, moves[k][pick], rng, vocab)) {
        r.tree = std::move(*t);
        r.applied.push_back(op);
        done = true;
      } else {
        moves[k].erase(moves[k].begin() + static_cast<std::ptrdiff_t>(pick));
      }
    }
    if (!done) {
      r.exhausted = true;
      break;
    }
  }
  return r;
}

// ---- text --------------------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string phrase(const Block& b);

std::vector<std::string> phrases(const Block& b) {
  std::vector<std::string> out;
  for (const Block& c : b.children) out.push_back(phrase(c));
  return out;
}

// Inline rendering for nested blocks.
std::string phrase(const Block& b) {
  switch (b.type) {
    case BlockType::Act: return b.label;
    case BlockType::Seq: return join(phrases(b), ", then ");
    case BlockType::Xor: return "either " + join(phrases(b), " or ");
    case BlockType::And: return join(phrases(b), " alongside ");
    case BlockType::Or: return "one or more of " + join(phrases(b), ", ");
    case BlockType::Loop: return "repeatedly " + phrase(b.body());
  }
  return {};
}

std::string sentence(const Block& b) {
  switch (b.type) {
    case BlockType::Xor: return "One of the following is performed: either " + join(phrases(b), ", or ") + ".";
    case BlockType::And: return "The following are done in parallel: " + join(phrases(b), "; meanwhile, ") + ".";
    case BlockType::Or: return "Optionally, one or more of the following happen: " + join(phrases(b), "; ") + ".";
    case BlockType::Loop: return "The following may repeat: " + phrase(b.body()) + ".";
    default: return phrase(b) + ".";
  }
}

}  // namespace

ProcessText generate_text(const BlockTree& tree, std::uint64_t seed) {
  static const std::array<const char*, 3> kConnectives{"Then", "Next", "After that"};
  std::vector<const Block*> items;
  if (tree.root.type == BlockType::Seq) {
    for (const Block& c : tree.root.children) items.push_back(&c);
  } else {
    items.push_back(&tree.root);
  }
  ProcessText text;
  std::size_t i = 0;  // sentence index
  for (const Block* b : items) {
    if (b->type == BlockType::Act) {
      if (i == 0) {
        text.sentences.push_back("First, " + b->label + ".");
      } else {
        text.sentences.push_back(std::string(kConnectives[(seed % 3 + i - 1) % 3]) + ", " + b->label + ".");
      }
    } else {
      text.sentences.push_back(sentence(*b));
    }
    ++i;
  }
  return text;
}

// ---- behaviour profiles ------------------------------------------------------------

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::StrictOrder: return "strict";
    case Relation::ReverseOrder: return "reverse";
    case Relation::Exclusive: return "exclusive";
    case Relation::Interleaving: return "interleaving";
    case Relation::Self: return "self";
  }
  return "self";
}

std::ptrdiff_t BehaviorProfile::find(const std::string& label) const {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  return it != labels.end() && *it == label ? it - labels.begin() : -1;
}

BehaviorProfile profile_from_traces(const std::vector<Trace>& traces,
                                    const std::map<std::string, std::string>& label_of) {
  BehaviorProfile p;
  for (const auto& [token, label] : label_of) p.labels.push_back(label);
  std::sort(p.labels.begin(), p.labels.end());
  p.labels.erase(std::unique(p.labels.begin(), p.labels.end()), p.labels.end());
  const std::size_t n = p.labels.size();
  std::map<std::string, std::size_t> index_of;
  for (const auto& [token, label] : label_of) index_of[token] = static_cast<std::size_t>(p.find(label));

  std::vector<char> before(n * n, 0), together(n * n, 0), repeats(n, 0);
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> first(n), last(n), seen(n);
  for (const Trace& t : traces) {
    std::fill(first.begin(), first.end(), kAbsent);
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<std::size_t> present;
    std::size_t pos = 0;
    for (const std::string& tok : t.tokens) {
      const auto it = index_of.find(tok);
      if (it == index_of.end()) continue;
      const std::size_t a = it->second;
      if (first[a] == kAbsent) {
        first[a] = pos;
        present.push_back(a);
      }
      last[a] = pos;
      if (++seen[a] > 1) repeats[a] = 1;
      ++pos;
    }
    for (std::size_t a : present) {
      for (std::size_t b : present) {
        if (a == b) continue;
        together[a * n + b] = 1;
        if (first[a] < last[b]) before[a * n + b] = 1;
      }
    }
  }
  p.relation.assign(n * n, Relation::Self);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      Relation& r = p.relation[a * n + b];
      if (a == b) {
        r = repeats[a] ? Relation::Interleaving : Relation::Self;
      } else if (!together[a * n + b]) {
        r = Relation::Exclusive;
      } else if (before[a * n + b] && before[b * n + a]) {
        r = Relation::Interleaving;
      } else {
        r = before[a * n + b] ? Relation::StrictOrder : Relation::ReverseOrder;
      }
    }
  }
  return p;
}

BehaviorProfile behavior_profile(const BlockTree& tree, const TraceCaps& caps) {
  std::vector<const Block*> acts;
  collect_activities(tree.root, acts);
  std::map<std::string, std::string> label_of;
  for (const Block* a : acts) label_of[a->node_id] = a->label;
  return profile_from_traces(enumerate_traces(tree, caps).traces, label_of);
}

BehaviorProfile behavior_profile(const ProcessGraph& graph, const TraceCaps& caps) {
  std::map<std::string, std::string> label_of;
  for (const Node& n : graph.nodes()) {
    if (n.is_activity()) label_of[n.id] = n.label;
  }
  return profile_from_traces(sample_traces(graph, caps).traces, label_of);
}

ConsistencyScore bp_similarity(const BehaviorProfile& p, const BehaviorProfile& q) {
  std::vector<std::string> all;
  std::set_union(p.labels.begin(), p.labels.end(), q.labels.begin(), q.labels.end(), std::back_inserter(all));
  if (all.empty()) return ConsistencyScore(1.0);
  std::vector<std::ptrdiff_t> ip, iq;
  for (const auto& l : all) {
    ip.push_back(p.find(l));
    iq.push_back(q.find(l));
  }
  auto match = [&](std::size_t a, std::size_t b) {
    if (ip[a] < 0 || ip[b] < 0 || iq[a] < 0 || iq[b] < 0) return false;
    return p.at(static_cast<std::size_t>(ip[a]), static_cast<std::size_t>(ip[b])) ==
           q.at(static_cast<std::size_t>(iq[a]), static_cast<std::size_t>(iq[b]));
  };
  if (all.size() == 1) return ConsistencyScore(match(0, 0) ? 1.0 : 0.0);
  std::size_t matched = 0, total = 0;
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      ++total;
      if (match(a, b)) ++matched;
    }
  }
  return ConsistencyScore(static_cast<double>(matched) / static_cast<double>(total));
}

// ---- datasets ----------------------------------------------------------------------

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

namespace {

constexpr std::uint64_t kTextSalt = 0x74657874;
constexpr std::uint64_t kSplitSalt = 0x73706c6974;
constexpr std::uint64_t kCrossSalt = 0x63726f7373;
constexpr std::uint64_t kOrderSalt = 0x6f72646572;
constexpr std::uint64_t kTraceSalt = 0x7472616365;

}  // namespace

Dataset build_dataset(const std::vector<BlockTree>& bases, const DatasetConfig& config) {
  if (bases.empty()) throw EmptyDataset("build_dataset needs at least one tree");
  if (config.variants > 0 && config.n_ops.empty()) throw ValidationError("n_ops", "variants need mutation counts");
  if (!(config.test_fraction >= 0.0 && config.test_fraction < 1.0)) {
    throw ValidationError("test_fraction", "must lie in [0, 1)");
  }
  Dataset d;
  d.base_count = bases.size();
  const std::size_t per = config.variants + 1;
  for (std::size_t f = 0; f < bases.size(); ++f) {
    const std::size_t g0 = f * per;
    BlockTree base = bases[f];
    base.id = "p" + std::to_string(g0);
    d.graphs.push_back(base);
    d.family.push_back(f);
    for (std::size_t v = 0; v < config.variants; ++v) {
      BlockTree m = mutate(base, config.n_ops[v % config.n_ops.size()], mix_seed(config.seed, g0 + v + 1)).tree;
      m.id = "p" + std::to_string(g0 + v + 1);
      d.graphs.push_back(std::move(m));
      d.family.push_back(f);
    }
  }
  std::vector<BehaviorProfile> profiles;
  for (std::size_t g = 0; g < d.graphs.size(); ++g) {
    d.texts.push_back(generate_text(d.graphs[g], mix_seed(mix_seed(config.seed, kTextSalt), g)));
    TraceCaps caps = config.caps;
    caps.seed = mix_seed(mix_seed(config.caps.seed, kTraceSalt), g);
    profiles.push_back(behavior_profile(d.graphs[g], caps));
  }

  const std::size_t families = bases.size();
  std::vector<std::size_t> order(families);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(mix_seed(config.seed, kSplitSalt));
  split_rng.shuffle(order);
  std::size_t n_test = 0;
  if (families >= 2 && config.test_fraction > 0.0) {
    n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(config.test_fraction * families)), 1,
                                     families - 1);
  }
  std::vector<Split> family_split(families, Split::Train);
  for (std::size_t k = 0; k < n_test; ++k) family_split[order[k]] = Split::Test;

  auto emit = [&](std::size_t i, std::size_t j) {
    const double gold = bp_similarity(profiles[i], profiles[j]).value();
    const Split s = family_split[d.family[i]];
    d.pairs.push_back(LabeledPair{i, j, gold, s, {i, j}});
    if (i != j) d.pairs.push_back(LabeledPair{j, i, gold, s, {i, j}});
  };
  for (std::size_t f = 0; f < families; ++f) {
    for (std::size_t a = f * per; a < (f + 1) * per; ++a) {
      for (std::size_t b = a; b < (f + 1) * per; ++b) emit(a, b);
    }
  }
  Rng cross_rng(mix_seed(config.seed, kCrossSalt));
  for (std::size_t f = 0; f < families; ++f) {
    std::vector<std::size_t> others;
    for (std::size_t h = 0; h < families; ++h) {
      if (h != f && family_split[h] == family_split[f]) others.push_back(h);
    }
    cross_rng.shuffle(others);
    for (std::size_t k = 0; k < std::min(config.cross_pairs, others.size()); ++k) {
      const std::size_t i = f * per + cross_rng.below(per);
      const std::size_t j = others[k] * per + cross_rng.below(per);
      emit(i, j);
    }
  }
  Rng order_rng(mix_seed(config.seed, kOrderSalt));
  order_rng.shuffle(d.pairs);
  return d;
}

std::vector<std::size_t> gold_histogram(const std::vector<LabeledPair>& pairs, std::size_t bins) {
  if (bins == 0) throw ValidationError("bins", "need at least one bin");
  std::vector<std::size_t> h(bins, 0);
  for (const LabeledPair& p : pairs) {
    const auto b = static_cast<std::size_t>(p.gold * static_cast<double>(bins));
    ++h[std::min(b, bins - 1)];
  }
  return h;
}

void write_dataset_jsonl(std::ostream& out, const Dataset& d) {
  for (const LabeledPair& p : d.pairs) {
    json row{{"graph", tree_to_json(d.graphs[p.graph])},
             {"text", d.texts[p.text].sentences},
             {"gold", p.gold},
             {"split", std::string(to_string(p.split))},
             {"provenance", {p.provenance.first, p.provenance.second}}};
    out << row.dump() << '\n';
  }
}

std::vector<DatasetRow> read_dataset_jsonl(std::istream& in) {
  std::vector<DatasetRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      DatasetRow r;
      r.graph = tree_from_json(j.at("graph"));
      r.text.sentences = j.at("text").get<std::vector<std::string>>();
      r.gold = j.at("gold").get<double>();
      const std::string split = j.at("split").get<std::string>();
      if (split != "train" && split != "test") throw FormatError(lineno, "split must be train or test");
      r.split = split == "train" ? Split::Train : Split::Test;
      const auto prov = j.at("provenance").get<std::vector<std::size_t>>();
      if (prov.size() != 2) throw FormatError(lineno, "provenance must hold two indices");
      r.provenance = {prov[0], prov[1]};
      ConsistencyScore check(r.gold);
      (void)check;
      rows.push_back(std::move(r));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(lineno, e.what());
    }
  }
  return rows;
}

}  // namespace tracenet
