#include "tracenet/traces.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

namespace {

using Dist = std::vector<long double>;  // Dist[L] = number of traces of length L
using Tokens = std::vector<std::string>;

Dist convolve(const Dist& a, const Dist& b) {
  if (a.empty() || b.empty()) return {};
  Dist out(a.size() + b.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0L) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Dist shifted(const Dist& d, std::size_t by) {
  Dist out(by, 0.0L);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

void add_into(Dist& acc, const Dist& d) {
  if (acc.size() < d.size()) acc.resize(d.size(), 0.0L);
  for (std::size_t i = 0; i < d.size(); ++i) acc[i] += d[i];
}

long double at(const Dist& d, std::size_t i) { return i < d.size() ? d[i] : 0.0L; }

long double factorial(std::size_t n) {
  long double f = 1.0L;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<long double>(i);
  return f;
}

// Exponential generating function view: egf[L] = count[L] / L!.
Dist to_egf(const Dist& d) {
  Dist e(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) e[i] = d[i] / factorial(i);
  return e;
}

// Counts are integers; rounding removes the error of the factorial divisions.
Dist from_egf(const Dist& e) {
  Dist d(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) d[i] = std::round(e[i] * factorial(i));
  return d;
}

// Block annotated with its gateway ids (same pre-order numbering as flatten)
// and its trace-length distribution.
struct Ann {
  const Block* block = nullptr;
  std::string split;
  std::string join;
  std::vector<Ann> kids;
  Dist dist;
};

Dist interleave_dist(const std::vector<const Ann*>& parts) {
  Dist egf{1.0L};
  for (const Ann* p : parts) egf = convolve(egf, to_egf(p->dist));
  return from_egf(egf);
}

Ann annotate(const Block& b, std::size_t& ordinal) {
  Ann a;
  a.block = &b;
  if (b.type != BlockType::Act && b.type != BlockType::Seq) {
    const std::size_t k = ++ordinal;
    a.split = gateway_split_id(k);
    a.join = gateway_join_id(k);
  }
  for (const Block& c : b.children) a.kids.push_back(annotate(c, ordinal));
  switch (b.type) {
    case BlockType::Act:
      a.dist = {0.0L, 1.0L};
      break;
    case BlockType::Seq:
      a.dist = {1.0L};
      for (const Ann& k : a.kids) a.dist = convolve(a.dist, k.dist);
      break;
    case BlockType::Xor:
      for (const Ann& k : a.kids) add_into(a.dist, k.dist);
      a.dist = shifted(a.dist, 2);
      break;
    case BlockType::And: {
      std::vector<const Ann*> parts;
      for (const Ann& k : a.kids) parts.push_back(&k);
      a.dist = shifted(interleave_dist(parts), 2);
      break;
    }
    case BlockType::Or: {
      const std::size_t n = a.kids.size();
      for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        std::vector<const Ann*> parts;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1ULL << i)) parts.push_back(&a.kids[i]);
        }
        add_into(a.dist, interleave_dist(parts));
      }
      a.dist = shifted(a.dist, 2);
      break;
    }
    case BlockType::Loop: {
      const Dist iteration = shifted(a.kids.front().dist, 2);
      Dist reps{1.0L};
      for (int k = 0; k <= b.max_unroll; ++k) {
        add_into(a.dist, reps);
        reps = convolve(reps, iteration);
      }
      a.dist = shifted(a.dist, 2);
      break;
    }
  }
  return a;
}

long double total(const Dist& d) {
  long double s = 0.0L;
  for (long double x : d) s += x;
  return s;
}

// ---- exhaustive enumeration ------------------------------------------------------

void interleave_all(const std::vector<const Tokens*>& parts, std::vector<std::size_t>& pos,
                    Tokens& cur, std::vector<Tokens>& out) {
  bool done = true;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (pos[i] == parts[i]->size()) continue;
    done = false;
    cur.push_back((*parts[i])[pos[i]]);
    ++pos[i];
    interleave_all(parts, pos, cur, out);
    --pos[i];
    cur.pop_back();
  }
  if (done) out.push_back(cur);
}

std::vector<Tokens> enumerate(const Ann& a);

// Cartesian choice of one trace per part, then every order-preserving shuffle.
void enumerate_interleavings(const std::vector<const Ann*>& parts, const Ann& owner,
                             std::vector<Tokens>& out) {
  std::vector<std::vector<Tokens>> sets;
  for (const Ann* p : parts) sets.push_back(enumerate(*p));
  std::vector<std::size_t> pick(parts.size(), 0);
  while (true) {
    std::vector<const Tokens*> chosen;
    for (std::size_t i = 0; i < parts.size(); ++i) chosen.push_back(&sets[i][pick[i]]);
    std::vector<std::size_t> pos(parts.size(), 0);
    Tokens cur{owner.split};
    std::vector<Tokens> shuffles;
    interleave_all(chosen, pos, cur, shuffles);
    for (Tokens& t : shuffles) {
      t.push_back(owner.join);
      out.push_back(std::move(t));
    }
    std::size_t i = 0;
    while (i < parts.size() && ++pick[i] == sets[i].size()) pick[i++] = 0;
    if (i == parts.size()) break;
  }
}

std::vector<Tokens> enumerate(const Ann& a) {
  const Block& b = *a.block;
  std::vector<Tokens> out;
  switch (b.type) {
    case BlockType::Act:
      out.push_back({b.node_id});
      break;
    case BlockType::Seq: {
      out.push_back({});
      for (const Ann& k : a.kids) {
        const std::vector<Tokens> tails = enumerate(k);
        std::vector<Tokens> next;
        next.reserve(out.size() * tails.size());
        for (const Tokens& head : out) {
          for (const Tokens& tail : tails) {
            Tokens t = head;
            t.insert(t.end(), tail.begin(), tail.end());
            next.push_back(std::move(t));
          }
        }
        out = std::move(next);
      }
      break;
    }
    case BlockType::Xor:
      for (const Ann& k : a.kids) {
        for (Tokens& t : enumerate(k)) {
          Tokens w{a.split};
          w.insert(w.end(), t.begin(), t.end());
          w.push_back(a.join);
          out.push_back(std::move(w));
        }
      }
      break;
    case BlockType::And: {
      std::vector<const Ann*> parts;
      for (const Ann& k : a.kids) parts.push_back(&k);
      enumerate_interleavings(parts, a, out);
      break;
    }
    case BlockType::Or: {
      const std::size_t n = a.kids.size();
      for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        std::vector<const Ann*> parts;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1ULL << i)) parts.push_back(&a.kids[i]);
        }
        enumerate_interleavings(parts, a, out);
      }
      break;
    }
    case BlockType::Loop: {
      const std::vector<Tokens> body = enumerate(a.kids.front());
      std::vector<Tokens> reps{{a.join, a.split}};
      for (int k = 0; k <= b.max_unroll; ++k) {
        out.insert(out.end(), reps.begin(), reps.end());
        if (k == b.max_unroll) break;
        std::vector<Tokens> next;
        for (const Tokens& r : reps) {
          for (const Tokens& t : body) {
            Tokens x = r;
            x.insert(x.end(), t.begin(), t.end());
            x.push_back(a.join);
            x.push_back(a.split);
            next.push_back(std::move(x));
          }
        }
        reps = std::move(next);
      }
      break;
    }
  }
  return out;
}

// ---- uniform sampling by counting ---------------------------------------------------

std::size_t pick_weighted(const std::vector<long double>& w, Rng& rng) {
  long double sum = 0.0L;
  for (long double x : w) sum += x;
  long double r = static_cast<long double>(rng.uniform()) * sum;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0L) continue;
    if (r < w[i]) return i;
    r -= w[i];
  }
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0.0L) return i;
  }
  return 0;
}

void sample_exact(const Ann& a, std::size_t len, Rng& rng, Tokens& out);

// Splits `len` over `dists` in proportion to the number of completions, using
// suffix convolutions. With `egf` the weights are exponential (interleaving).
std::vector<std::size_t> split_lengths(const std::vector<Dist>& dists, std::size_t len, Rng& rng) {
  const std::size_t n = dists.size();
  std::vector<Dist> suffix(n + 1);
  suffix[n] = {1.0L};
  for (std::size_t i = n; i-- > 0;) suffix[i] = convolve(dists[i], suffix[i + 1]);
  std::vector<std::size_t> lens(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<long double> w(std::min(len, dists[i].size() - 1) + 1, 0.0L);
    for (std::size_t l = 0; l < w.size(); ++l) w[l] = dists[i][l] * at(suffix[i + 1], len - l);
    lens[i] = pick_weighted(w, rng);
    len -= lens[i];
  }
  return lens;
}

void sample_interleaving(const std::vector<const Ann*>& parts, std::size_t len, Rng& rng,
                         Tokens& out) {
  std::vector<Dist> egfs;
  for (const Ann* p : parts) egfs.push_back(to_egf(p->dist));
  const std::vector<std::size_t> lens = split_lengths(egfs, len, rng);
  std::vector<Tokens> pieces(parts.size());
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    sample_exact(*parts[i], lens[i], rng, pieces[i]);
    owner.insert(owner.end(), lens[i], i);
  }
  rng.shuffle(owner);
  std::vector<std::size_t> pos(parts.size(), 0);
  for (std::size_t i : owner) out.push_back(pieces[i][pos[i]++]);
}

void sample_exact(const Ann& a, std::size_t len, Rng& rng, Tokens& out) {
  const Block& b = *a.block;
  switch (b.type) {
    case BlockType::Act:
      out.push_back(b.node_id);
      return;
    case BlockType::Seq: {
      std::vector<Dist> dists;
      for (const Ann& k : a.kids) dists.push_back(k.dist);
      const std::vector<std::size_t> lens = split_lengths(dists, len, rng);
      for (std::size_t i = 0; i < a.kids.size(); ++i) sample_exact(a.kids[i], lens[i], rng, out);
      return;
    }
    case BlockType::Xor: {
      std::vector<long double> w;
      for (const Ann& k : a.kids) w.push_back(at(k.dist, len - 2));
      out.push_back(a.split);
      sample_exact(a.kids[pick_weighted(w, rng)], len - 2, rng, out);
      out.push_back(a.join);
      return;
    }
    case BlockType::And: {
      std::vector<const Ann*> parts;
      for (const Ann& k : a.kids) parts.push_back(&k);
      out.push_back(a.split);
      sample_interleaving(parts, len - 2, rng, out);
      out.push_back(a.join);
      return;
    }
    case BlockType::Or: {
      const std::size_t n = a.kids.size();
      std::vector<long double> w;
      for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        std::vector<const Ann*> parts;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1ULL << i)) parts.push_back(&a.kids[i]);
        }
        w.push_back(at(interleave_dist(parts), len - 2));
      }
      const std::uint64_t mask = pick_weighted(w, rng) + 1;
      std::vector<const Ann*> parts;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1ULL << i)) parts.push_back(&a.kids[i]);
      }
      out.push_back(a.split);
      sample_interleaving(parts, len - 2, rng, out);
      out.push_back(a.join);
      return;
    }
    case BlockType::Loop: {
      const Dist iteration = shifted(a.kids.front().dist, 2);
      std::vector<long double> w;
      Dist reps{1.0L};
      for (int k = 0; k <= b.max_unroll; ++k) {
        w.push_back(at(reps, len - 2));
        reps = convolve(reps, iteration);
      }
      const std::size_t k = pick_weighted(w, rng);
      out.push_back(a.join);
      out.push_back(a.split);
      const std::vector<std::size_t> lens =
          split_lengths(std::vector<Dist>(k, iteration), len - 2, rng);
      for (std::size_t l : lens) {
        sample_exact(a.kids.front(), l - 2, rng, out);
        out.push_back(a.join);
        out.push_back(a.split);
      }
      return;
    }
  }
}

Tokens sample_uniform(const Ann& root, Rng& rng) {
  std::vector<long double> w(root.dist.begin(), root.dist.end());
  Tokens out;
  sample_exact(root, pick_weighted(w, rng), rng, out);
  return out;
}

// Above this many traces the space is not materialized.
constexpr long double kMaterializeLimit = 200000.0L;

}  // namespace

long double count_traces(const BlockTree& tree) {
  validate(tree);
  std::size_t ordinal = 0;
  return total(annotate(tree.root, ordinal).dist);
}

TraceSet enumerate_traces(const BlockTree& tree, const TraceCaps& caps) {
  if (caps.max_traces < 1) throw CapTooSmall("max_traces must be at least 1");
  validate(tree);
  std::size_t ordinal = 0;
  const Ann root = annotate(tree.root, ordinal);
  const long double space = total(root.dist);

  TraceSet result;
  std::set<Tokens> seen;
  if (space <= kMaterializeLimit) {
    std::vector<Tokens> all;
    for (Tokens& t : enumerate(root)) {
      if (seen.insert(t).second) all.push_back(std::move(t));
    }
    if (all.size() <= caps.max_traces) {
      for (Tokens& t : all) result.traces.push_back(Trace{std::move(t)});
      return result;
    }
    // Reservoir sampling over the enumeration stream.
    Rng rng(caps.seed);
    std::vector<Tokens> reservoir(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(caps.max_traces));
    for (std::size_t i = caps.max_traces; i < all.size(); ++i) {
      const std::uint64_t j = rng.below(i + 1);
      if (j < caps.max_traces) reservoir[j] = std::move(all[i]);
    }
    for (Tokens& t : reservoir) result.traces.push_back(Trace{std::move(t)});
    result.truncated = true;
    return result;
  }

  // Space too large to materialize: draw uniformly by counting, keep distinct.
  Rng rng(caps.seed);
  const std::size_t attempts = 100 * caps.max_traces;
  for (std::size_t i = 0; i < attempts && result.traces.size() < caps.max_traces; ++i) {
    Tokens t = sample_uniform(root, rng);
    if (seen.insert(t).second) result.traces.push_back(Trace{std::move(t)});
  }
  result.truncated = true;
  return result;
}

// ---- token game ---------------------------------------------------------------------

namespace {

class TokenGame {
 public:
  explicit TokenGame(const ProcessGraph& g) : g_(g), or_upstream_(g.size()) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Node& n = g.node(j);
      if (!(n.is_gateway() && n.gateway_kind == GatewayKind::Or && n.gateway_role == GatewayRole::Join)) {
        continue;
      }
      for (std::size_t e : g.in_edges(j)) {
        std::vector<char> up(g.size(), 0);
        std::vector<std::size_t> stack{g.source(e)};
        up[g.source(e)] = 1;
        while (!stack.empty()) {
          const std::size_t v = stack.back();
          stack.pop_back();
          for (std::size_t f : g.in_edges(v)) {
            const std::size_t u = g.source(f);
            if (u != j && !up[u]) {
              up[u] = 1;
              stack.push_back(u);
            }
          }
        }
        or_upstream_[j].push_back(std::move(up));
      }
    }
  }

  using Marking = std::vector<int>;

  bool enabled(std::size_t i, const Marking& m) const {
    const auto& ins = g_.in_edges(i);
    if (ins.empty()) return false;
    const Node& n = g_.node(i);
    if (n.is_gateway() && n.gateway_role == GatewayRole::Join && n.gateway_kind == GatewayKind::And) {
      return std::all_of(ins.begin(), ins.end(), [&](std::size_t e) { return m[e] > 0; });
    }
    const bool any = std::any_of(ins.begin(), ins.end(), [&](std::size_t e) { return m[e] > 0; });
    if (!any) return false;
    if (n.is_gateway() && n.gateway_role == GatewayRole::Join && n.gateway_kind == GatewayKind::Or) {
      // Wait while a token elsewhere can still reach an empty input.
      for (std::size_t k = 0; k < ins.size(); ++k) {
        if (m[ins[k]] > 0) continue;
        const auto& up = or_upstream_[i][k];
        for (std::size_t f = 0; f < m.size(); ++f) {
          if (m[f] > 0 && g_.target(f) != i && up[g_.target(f)]) return false;
        }
      }
    }
    return true;
  }

  // Number of distinct output choices when firing node i.
  std::uint64_t choices(std::size_t i) const {
    const Node& n = g_.node(i);
    const std::size_t k = g_.out_edges(i).size();
    if (n.is_gateway() && n.gateway_role == GatewayRole::Split && k > 0) {
      if (n.gateway_kind == GatewayKind::Xor) return k;
      if (n.gateway_kind == GatewayKind::Or) return (1ULL << k) - 1;
    }
    return 1;
  }

  std::uint64_t random_choice(std::size_t i, Rng& rng) const { return rng.below(choices(i)); }

  void fire(std::size_t i, std::uint64_t choice, Marking& m) const {
    const Node& n = g_.node(i);
    const auto& ins = g_.in_edges(i);
    const bool join = n.is_gateway() && n.gateway_role == GatewayRole::Join;
    if (join && n.gateway_kind != GatewayKind::Xor) {
      for (std::size_t e : ins) {
        if (m[e] > 0) --m[e];
      }
    } else {
      for (std::size_t e : ins) {
        if (m[e] > 0) {
          --m[e];
          break;
        }
      }
    }
    const auto& outs = g_.out_edges(i);
    if (n.is_gateway() && n.gateway_role == GatewayRole::Split && !outs.empty()) {
      if (n.gateway_kind == GatewayKind::Xor) {
        ++m[outs[choice]];
        return;
      }
      if (n.gateway_kind == GatewayKind::Or) {
        const std::uint64_t mask = choice + 1;
        for (std::size_t k = 0; k < outs.size(); ++k) {
          if (mask & (1ULL << k)) ++m[outs[k]];
        }
        return;
      }
    }
    for (std::size_t e : outs) ++m[e];
  }

  std::string describe(const Marking& m) const {
    std::string s;
    for (std::size_t e = 0; e < m.size(); ++e) {
      if (m[e] == 0) continue;
      if (!s.empty()) s += ", ";
      s += g_.node(g_.source(e)).id + "->" + g_.node(g_.target(e)).id;
      if (m[e] > 1) s += " x" + std::to_string(m[e]);
    }
    return s;
  }

  static bool empty(const Marking& m) {
    return std::all_of(m.begin(), m.end(), [](int x) { return x == 0; });
  }

  const ProcessGraph& graph() const { return g_; }

 private:
  const ProcessGraph& g_;
  // For each OR join: per input edge, nodes from which that input is reachable
  // without passing through the join.
  std::vector<std::vector<std::vector<char>>> or_upstream_;
};

void check_completion(const TokenGame& game, const TokenGame::Marking& m) {
  if (!TokenGame::empty(m)) {
    throw ImproperTermination("exit fired with tokens still in flight: " + game.describe(m));
  }
}

std::vector<std::size_t> enabled_nodes(const TokenGame& game, const TokenGame::Marking& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < game.graph().size(); ++i) {
    if (game.enabled(i, m)) out.push_back(i);
  }
  return out;
}

std::optional<Trace> run_once(const TokenGame& game, std::size_t max_len, Rng& rng) {
  const ProcessGraph& g = game.graph();
  TokenGame::Marking m(g.edges().size(), 0);
  Trace t;
  std::size_t node = g.entry_index();
  while (true) {
    game.fire(node, game.random_choice(node, rng), m);
    t.tokens.push_back(g.node(node).id);
    if (t.tokens.size() > max_len) return std::nullopt;
    if (node == g.exit_index()) {
      check_completion(game, m);
      return t;
    }
    const std::vector<std::size_t> en = enabled_nodes(game, m);
    if (en.empty()) throw DeadlockError(game.describe(m), "token game deadlocked");
    node = en[rng.below(en.size())];
  }
}

void explore(const TokenGame& game, std::size_t node, std::uint64_t choice, TokenGame::Marking m,
             Trace& t, std::size_t max_len, std::size_t max_runs, std::set<Trace>& runs) {
  const ProcessGraph& g = game.graph();
  game.fire(node, choice, m);
  t.tokens.push_back(g.node(node).id);
  if (node == g.exit_index()) {
    check_completion(game, m);
    runs.insert(t);
    if (runs.size() > max_runs) throw CapTooSmall("more than max_runs token-game runs");
  } else if (t.tokens.size() < max_len) {
    const std::vector<std::size_t> en = enabled_nodes(game, m);
    if (en.empty()) throw DeadlockError(game.describe(m), "token game deadlocked");
    for (std::size_t next : en) {
      for (std::uint64_t c = 0; c < game.choices(next); ++c) {
        explore(game, next, c, m, t, max_len, max_runs, runs);
      }
    }
  }
  t.tokens.pop_back();
}

}  // namespace

TraceSet sample_traces(const ProcessGraph& graph, const TraceCaps& caps) {
  if (caps.max_traces < 1) throw CapTooSmall("max_traces must be at least 1");
  const TokenGame game(graph);
  Rng rng(caps.seed);
  TraceSet out;
  const std::size_t attempts = 10 * caps.max_traces;
  for (std::size_t i = 0; i < attempts && out.traces.size() < caps.max_traces; ++i) {
    if (auto t = run_once(game, caps.max_len, rng)) out.traces.push_back(std::move(*t));
  }
  return out;
}

std::set<Trace> all_token_game_runs(const ProcessGraph& graph, std::size_t max_len,
                                    std::size_t max_runs) {
  const TokenGame game(graph);
  std::set<Trace> runs;
  Trace t;
  const TokenGame::Marking m(graph.edges().size(), 0);
  for (std::uint64_t c = 0; c < game.choices(graph.entry_index()); ++c) {
    explore(game, graph.entry_index(), c, m, t, max_len, max_runs, runs);
  }
  return runs;
}

TraceSet structural_walks(const ProcessGraph& graph, std::size_t n_walks, std::size_t walk_len,
                          std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> adj(graph.size());
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    adj[graph.source(e)].push_back(graph.target(e));
    adj[graph.target(e)].push_back(graph.source(e));
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  Rng rng(seed);
  TraceSet out;
  out.traces.reserve(n_walks * graph.size());
  for (std::size_t r = 0; r < n_walks; ++r) {
    for (std::size_t start = 0; start < graph.size(); ++start) {
      Trace t;
      std::size_t cur = start;
      t.tokens.push_back(graph.node(cur).id);
      while (t.tokens.size() < walk_len && !adj[cur].empty()) {
        cur = adj[cur][rng.below(adj[cur].size())];
        t.tokens.push_back(graph.node(cur).id);
      }
      out.traces.push_back(std::move(t));
    }
  }
  return out;
}

bool keeps(ProjectionMode mode, const Node& node) {
  switch (mode) {
    case ProjectionMode::ActivitiesOnly: return node.is_activity();
    case ProjectionMode::GatewaysOnly: return node.is_gateway();
    case ProjectionMode::All: return true;
  }
  return true;
}

Trace project_trace(const Trace& trace, const ProcessGraph& graph, ProjectionMode mode) {
  Trace out;
  for (const std::string& tok : trace.tokens) {
    const auto i = graph.find(tok);
    if (!i) throw UnknownToken(tok);
    if (keeps(mode, graph.node(*i))) out.tokens.push_back(tok);
  }
  return out;
}

// ---- corpus files ------------------------------------------------------------------

std::string qualified_token(const std::string& graph_id, const std::string& node_id) {
  return graph_id + "." + node_id;
}

void append_traces(Corpus& corpus, const std::string& graph_id, const TraceSet& traces) {
  for (const Trace& t : traces.traces) {
    Sentence s;
    s.reserve(t.tokens.size());
    for (const std::string& tok : t.tokens) s.push_back(qualified_token(graph_id, tok));
    corpus.push_back(std::move(s));
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  out << kCorpusHeader << '\n';
  for (const Sentence& s : corpus) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << s[i];
    }
    out << '\n';
  }
}

Corpus read_corpus(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCorpusHeader) {
    throw FormatError(1, std::string("expected header '") + kCorpusHeader + "'");
  }
  Corpus corpus;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    Sentence s;
    std::string tok;
    while (ss >> tok) {
      if (tok.find('.') == std::string::npos) {
        throw FormatError(lineno, "token '" + tok + "' is not <graph_id>.<node_id>");
      }
      s.push_back(tok);
    }
    if (!s.empty()) corpus.push_back(std::move(s));
  }
  return corpus;
}

Corpus read_plain_text(std::istream& in) {
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    Sentence s;
    std::string tok;
    while (ss >> tok) s.push_back(tok);
    if (!s.empty()) corpus.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace tracenet
