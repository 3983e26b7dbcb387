#include "tracenet/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include "tracenet/errors.hpp"

namespace tracenet {

using nlohmann::json;

std::string_view to_string(GatewayKind kind) {
  switch (kind) {
    case GatewayKind::Xor: return "xor";
    case GatewayKind::And: return "and";
    case GatewayKind::Or: return "or";
  }
  return "?";
}

std::string_view to_string(GatewayRole role) {
  return role == GatewayRole::Split ? "split" : "join";
}

std::string_view to_string(BlockType type) {
  switch (type) {
    case BlockType::Act: return "act";
    case BlockType::Seq: return "seq";
    case BlockType::Xor: return "xor";
    case BlockType::And: return "and";
    case BlockType::Or: return "or";
    case BlockType::Loop: return "loop";
  }
  return "?";
}

Node Node::activity(std::string id, std::string label) {
  Node n;
  n.id = std::move(id);
  n.kind = NodeKind::Activity;
  n.label = std::move(label);
  return n;
}

Node Node::gateway(std::string id, GatewayKind kind, GatewayRole role) {
  Node n;
  n.id = std::move(id);
  n.kind = NodeKind::Gateway;
  n.gateway_kind = kind;
  n.gateway_role = role;
  return n;
}

bool is_valid_node_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
  });
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ProcessGraph::ProcessGraph(std::string id, std::vector<Node> nodes, std::vector<Edge> edges,
                           std::string entry, std::string exit)
    : id_(std::move(id)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (id_.empty() || std::any_of(id_.begin(), id_.end(),
                                 [](unsigned char c) { return std::isspace(c) || c == '.'; })) {
    throw ValidationError(id_, "graph id must be non-empty without whitespace or '.'");
  }
  if (nodes_.empty()) throw ValidationError(id_, "graph has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!is_valid_node_id(n.id)) throw ValidationError(n.id, "node id must match [A-Za-z0-9_]+");
    if (!index_.emplace(n.id, i).second) throw ValidationError(n.id, "duplicate node id");
    if (n.is_activity() && blank(n.label)) {
      throw ValidationError(n.id, "activity needs a non-empty label");
    }
    if (n.is_gateway() && !n.label.empty()) {
      throw ValidationError(n.id, "gateway must not carry a label");
    }
  }
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges_) {
    auto a = index_.find(from);
    if (a == index_.end()) throw ValidationError(from, "edge references unknown node");
    auto b = index_.find(to);
    if (b == index_.end()) throw ValidationError(to, "edge references unknown node");
    if (a->second == b->second) throw ValidationError(from + "->" + to, "self loop");
    if (!seen.emplace(a->second, b->second).second) {
      throw ValidationError(from + "->" + to, "duplicate edge");
    }
    const std::size_t e = edge_ends_.size();
    edge_ends_.emplace_back(a->second, b->second);
    out_[a->second].push_back(e);
    in_[b->second].push_back(e);
  }
  auto en = index_.find(entry);
  if (en == index_.end()) throw ValidationError(entry, "entry is not a node");
  auto ex = index_.find(exit);
  if (ex == index_.end()) throw ValidationError(exit, "exit is not a node");
  entry_ = en->second;
  exit_ = ex->second;
  if (!in_[entry_].empty()) throw ValidationError(entry, "entry has incoming edges");
  if (!out_[exit_].empty()) throw ValidationError(exit, "exit has outgoing edges");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i != entry_ && in_[i].empty()) {
      throw ValidationError(nodes_[i].id, "multiple entries: node has no incoming edges");
    }
    if (i != exit_ && out_[i].empty()) {
      throw ValidationError(nodes_[i].id, "multiple exits: node has no outgoing edges");
    }
  }

  std::vector<char> fwd(nodes_.size(), 0);
  for (std::size_t i : reachable_from_entry()) fwd[i] = 1;
  std::vector<char> back(nodes_.size(), 0);
  std::deque<std::size_t> queue{exit_};
  back[exit_] = 1;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : in_[v]) {
      const std::size_t u = edge_ends_[e].first;
      if (!back[u]) {
        back[u] = 1;
        queue.push_back(u);
      }
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!fwd[i]) throw ValidationError(nodes_[i].id, "unreachable node");
    if (!back[i]) throw ValidationError(nodes_[i].id, "node cannot reach the exit");
  }
}

std::optional<std::size_t> ProcessGraph::find(std::string_view node_id) const {
  auto it = index_.find(std::string(node_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ProcessGraph::reachable_from_entry() const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> order{entry_};
  seen[entry_] = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t e : out_[order[k]]) {
      const std::size_t w = edge_ends_[e].second;
      if (!seen[w]) {
        seen[w] = 1;
        order.push_back(w);
      }
    }
  }
  return order;
}

// ---- flat JSON ---------------------------------------------------------------

namespace {

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

GatewayKind parse_gateway_kind(const std::string& s) {
  if (s == "xor") return GatewayKind::Xor;
  if (s == "and") return GatewayKind::And;
  if (s == "or") return GatewayKind::Or;
  throw SchemaError("unknown gateway_kind '" + s + "'");
}

json parse_json(std::string_view document) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ProcessGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("graph document must be an object");
  std::string id = require_string(doc, "id");
  std::string entry = require_string(doc, "entry");
  std::string exit = require_string(doc, "exit");
  const json& jnodes = require(doc, "nodes");
  if (!jnodes.is_array()) throw SchemaError("'nodes' must be an array");
  std::vector<Node> nodes;
  nodes.reserve(jnodes.size());
  for (const json& jn : jnodes) {
    if (!jn.is_object()) throw SchemaError("node must be an object");
    const std::string nid = require_string(jn, "id");
    const std::string kind = require_string(jn, "kind");
    if (kind == "activity") {
      if (jn.contains("gateway_kind") || jn.contains("gateway_role")) {
        throw ValidationError(nid, "activity must not carry gateway fields");
      }
      nodes.push_back(Node::activity(nid, require_string(jn, "label")));
    } else if (kind == "gateway") {
      if (jn.contains("label")) throw ValidationError(nid, "gateway must not carry a label");
      const std::string role = require_string(jn, "gateway_role");
      GatewayRole r;
      if (role == "split") {
        r = GatewayRole::Split;
      } else if (role == "join") {
        r = GatewayRole::Join;
      } else {
        throw SchemaError("unknown gateway_role '" + role + "'");
      }
      nodes.push_back(Node::gateway(nid, parse_gateway_kind(require_string(jn, "gateway_kind")), r));
    } else {
      throw SchemaError("unknown node kind '" + kind + "'");
    }
  }
  const json& jedges = require(doc, "edges");
  if (!jedges.is_array()) throw SchemaError("'edges' must be an array");
  std::vector<Edge> edges;
  edges.reserve(jedges.size());
  for (const json& je : jedges) {
    if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string()) {
      throw SchemaError("edge must be a [from, to] pair of strings");
    }
    edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
  }
  return ProcessGraph(std::move(id), std::move(nodes), std::move(edges), std::move(entry),
                      std::move(exit));
}

ProcessGraph parse_graph(std::string_view document) { return graph_from_json(parse_json(document)); }

json graph_to_json(const ProcessGraph& graph) {
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    json jn = {{"id", n.id}};
    if (n.is_activity()) {
      jn["kind"] = "activity";
      jn["label"] = n.label;
    } else {
      jn["kind"] = "gateway";
      jn["gateway_kind"] = std::string(to_string(n.gateway_kind));
      jn["gateway_role"] = std::string(to_string(n.gateway_role));
    }
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back(json::array({a, b}));
  return json{{"id", graph.id()},
              {"entry", graph.entry()},
              {"exit", graph.exit()},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
}

std::string serialize_graph(const ProcessGraph& graph) { return graph_to_json(graph).dump(); }

// ---- block trees --------------------------------------------------------------

Block Block::act(std::string node_id, std::string label) {
  Block b;
  b.type = BlockType::Act;
  b.node_id = std::move(node_id);
  b.label = std::move(label);
  return b;
}

namespace {

Block composite(BlockType type, std::vector<Block> children) {
  Block b;
  b.type = type;
  b.children = std::move(children);
  return b;
}

}  // namespace

Block Block::seq(std::vector<Block> children) { return composite(BlockType::Seq, std::move(children)); }
Block Block::xor_of(std::vector<Block> branches) {
  return composite(BlockType::Xor, std::move(branches));
}
Block Block::and_of(std::vector<Block> branches) {
  return composite(BlockType::And, std::move(branches));
}
Block Block::or_of(std::vector<Block> branches) {
  return composite(BlockType::Or, std::move(branches));
}
Block Block::loop(Block body, int max_unroll) {
  Block b = composite(BlockType::Loop, {});
  b.children.push_back(std::move(body));
  b.max_unroll = max_unroll;
  return b;
}

namespace {

void validate_block(const Block& b, std::unordered_set<std::string>& ids) {
  switch (b.type) {
    case BlockType::Act:
      if (!is_valid_node_id(b.node_id)) {
        throw ValidationError(b.node_id, "activity node_id must match [A-Za-z0-9_]+");
      }
      if (blank(b.label)) throw ValidationError(b.node_id, "activity needs a non-empty label");
      if (!b.children.empty()) throw ValidationError(b.node_id, "activity has children");
      if (!ids.insert(b.node_id).second) throw ValidationError(b.node_id, "duplicate node_id");
      return;
    case BlockType::Seq:
      if (b.children.size() < 2) throw ValidationError("seq", "seq needs at least 2 children");
      break;
    case BlockType::Xor:
    case BlockType::And:
    case BlockType::Or:
      if (b.children.size() < 2) {
        throw ValidationError(std::string(to_string(b.type)), "gateway block needs at least 2 branches");
      }
      break;
    case BlockType::Loop:
      if (b.children.size() != 1) throw ValidationError("loop", "loop needs exactly one body");
      if (b.max_unroll < 1) throw ValidationError("loop", "max_unroll must be positive");
      break;
  }
  for (const Block& c : b.children) validate_block(c, ids);
}

// Walks to the first (or last) block executed at the boundary of `b`.
const Block& boundary(const Block& b, bool front) {
  const Block* cur = &b;
  while (cur->type == BlockType::Seq) cur = front ? &cur->children.front() : &cur->children.back();
  return *cur;
}

}  // namespace

void validate(const BlockTree& tree) {
  std::unordered_set<std::string> ids;
  validate_block(tree.root, ids);
  if (boundary(tree.root, true).type == BlockType::Loop) {
    throw ValidationError(tree.id, "process must not start with a loop");
  }
  if (boundary(tree.root, false).type == BlockType::Loop) {
    throw ValidationError(tree.id, "process must not end with a loop");
  }
}

Block normalize(Block block) {
  for (Block& c : block.children) c = normalize(std::move(c));
  if (block.type != BlockType::Seq) return block;
  std::vector<Block> flat;
  for (Block& c : block.children) {
    if (c.type == BlockType::Seq) {
      for (Block& g : c.children) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.size() == 1) return std::move(flat.front());
  block.children = std::move(flat);
  return block;
}

std::string canonical_form(const Block& block) {
  if (block.type == BlockType::Act) return "act(" + block.node_id + ":" + block.label + ")";
  std::vector<std::string> parts;
  parts.reserve(block.children.size());
  for (const Block& c : block.children) parts.push_back(canonical_form(c));
  if (block.is_gateway_block()) std::sort(parts.begin(), parts.end());
  std::string out(to_string(block.type));
  if (block.type == BlockType::Loop) out += std::to_string(block.max_unroll);
  out += "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  return out + ")";
}

bool equivalent(const Block& a, const Block& b) { return canonical_form(a) == canonical_form(b); }

std::size_t count_activities(const Block& block) {
  if (block.type == BlockType::Act) return 1;
  std::size_t n = 0;
  for (const Block& c : block.children) n += count_activities(c);
  return n;
}

void collect_activities(const Block& block, std::vector<const Block*>& out) {
  if (block.type == BlockType::Act) {
    out.push_back(&block);
    return;
  }
  for (const Block& c : block.children) collect_activities(c, out);
}

// ---- block-tree JSON --------------------------------------------------------------

json block_to_json(const Block& b) {
  json j = {{"type", std::string(to_string(b.type))}};
  switch (b.type) {
    case BlockType::Act:
      j["label"] = b.label;
      j["node_id"] = b.node_id;
      break;
    case BlockType::Seq: {
      json arr = json::array();
      for (const Block& c : b.children) arr.push_back(block_to_json(c));
      j["children"] = std::move(arr);
      break;
    }
    case BlockType::Xor:
    case BlockType::And:
    case BlockType::Or: {
      json arr = json::array();
      for (const Block& c : b.children) arr.push_back(block_to_json(c));
      j["branches"] = std::move(arr);
      break;
    }
    case BlockType::Loop:
      j["body"] = block_to_json(b.body());
      j["max_unroll"] = b.max_unroll;
      break;
  }
  return j;
}

json tree_to_json(const BlockTree& tree) { return json{{"id", tree.id}, {"root", block_to_json(tree.root)}}; }

std::string serialize_tree(const BlockTree& tree) { return tree_to_json(tree).dump(); }

namespace {

Block block_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("block must be an object");
  const std::string type = require_string(j, "type");
  auto list = [&](const char* key) {
    const json& arr = require(j, key);
    if (!arr.is_array()) throw SchemaError(std::string("'") + key + "' must be an array");
    std::vector<Block> out;
    for (const json& c : arr) out.push_back(block_from_json(c));
    return out;
  };
  if (type == "act") return Block::act(require_string(j, "node_id"), require_string(j, "label"));
  if (type == "seq") return Block::seq(list("children"));
  if (type == "xor") return Block::xor_of(list("branches"));
  if (type == "and") return Block::and_of(list("branches"));
  if (type == "or") return Block::or_of(list("branches"));
  if (type == "loop") {
    int m = kDefaultMaxUnroll;
    if (auto it = j.find("max_unroll"); it != j.end()) {
      if (!it->is_number_integer()) throw SchemaError("'max_unroll' must be an integer");
      m = it->get<int>();
    }
    return Block::loop(block_from_json(require(j, "body")), m);
  }
  throw SchemaError("unknown block type '" + type + "'");
}

}  // namespace

BlockTree tree_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("tree document must be an object");
  BlockTree tree{require_string(doc, "id"), block_from_json(require(doc, "root"))};
  validate(tree);
  return tree;
}

BlockTree parse_tree(std::string_view document) { return tree_from_json(parse_json(document)); }

// ---- flatten ------------------------------------------------------------------------

std::string gateway_split_id(std::size_t ordinal) { return "g" + std::to_string(ordinal) + "s"; }
std::string gateway_join_id(std::size_t ordinal) { return "g" + std::to_string(ordinal) + "j"; }

namespace {

GatewayKind gateway_kind_of(BlockType t) {
  switch (t) {
    case BlockType::Xor: return GatewayKind::Xor;
    case BlockType::And: return GatewayKind::And;
    default: return GatewayKind::Or;
  }
}

struct Flattener {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::size_t ordinal = 0;

  // Returns the (entry id, exit id) of the emitted fragment.
  std::pair<std::string, std::string> emit(const Block& b) {
    switch (b.type) {
      case BlockType::Act:
        nodes.push_back(Node::activity(b.node_id, b.label));
        return {b.node_id, b.node_id};
      case BlockType::Seq: {
        std::pair<std::string, std::string> span;
        for (std::size_t i = 0; i < b.children.size(); ++i) {
          auto part = emit(b.children[i]);
          if (i == 0) {
            span.first = part.first;
          } else {
            edges.emplace_back(span.second, part.first);
          }
          span.second = part.second;
        }
        return span;
      }
      case BlockType::Xor:
      case BlockType::And:
      case BlockType::Or: {
        const std::size_t k = ++ordinal;
        const std::string split = gateway_split_id(k);
        const std::string join = gateway_join_id(k);
        const GatewayKind kind = gateway_kind_of(b.type);
        nodes.push_back(Node::gateway(split, kind, GatewayRole::Split));
        for (const Block& branch : b.children) {
          auto part = emit(branch);
          edges.emplace_back(split, part.first);
          edges.emplace_back(part.second, join);
        }
        nodes.push_back(Node::gateway(join, kind, GatewayRole::Join));
        return {split, join};
      }
      case BlockType::Loop: {
        const std::size_t k = ++ordinal;
        const std::string head = gateway_join_id(k);
        const std::string test = gateway_split_id(k);
        nodes.push_back(Node::gateway(head, GatewayKind::Xor, GatewayRole::Join));
        nodes.push_back(Node::gateway(test, GatewayKind::Xor, GatewayRole::Split));
        edges.emplace_back(head, test);
        auto part = emit(b.body());
        edges.emplace_back(test, part.first);
        edges.emplace_back(part.second, head);
        return {head, test};
      }
    }
    return {};
  }
};

}  // namespace

ProcessGraph flatten(const BlockTree& tree, const std::string& graph_id) {
  validate(tree);
  Flattener f;
  auto [entry, exit] = f.emit(tree.root);
  return ProcessGraph(graph_id, std::move(f.nodes), std::move(f.edges), std::move(entry),
                      std::move(exit));
}

// ---- decompose ------------------------------------------------------------------------

namespace {

struct Work {
  bool alive = true;
  bool is_block = false;
  Block block;
  GatewayKind kind = GatewayKind::Xor;
  GatewayRole role = GatewayRole::Split;
  std::vector<std::size_t> out;
  std::vector<std::size_t> in;
};

class Reducer {
 public:
  explicit Reducer(const ProcessGraph& g) {
    w_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Node& n = g.node(i);
      if (n.is_activity()) {
        w_[i].is_block = true;
        w_[i].block = Block::act(n.id, n.label);
      } else {
        w_[i].kind = n.gateway_kind;
        w_[i].role = n.gateway_role;
      }
    }
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      w_[g.source(e)].out.push_back(g.target(e));
      w_[g.target(e)].in.push_back(g.source(e));
    }
  }

  void run() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!w_[i].alive) continue;
        if (try_seq(i) || try_gateway(i) || try_loop(i)) changed = true;
      }
    }
  }

  std::size_t alive_count() const {
    return static_cast<std::size_t>(
        std::count_if(w_.begin(), w_.end(), [](const Work& x) { return x.alive; }));
  }

  std::optional<Block> result() const {
    if (alive_count() != 1) return std::nullopt;
    for (const Work& x : w_) {
      if (x.alive && x.is_block) return x.block;
    }
    return std::nullopt;
  }

 private:
  static void replace(std::vector<std::size_t>& v, std::size_t from, std::size_t to) {
    std::replace(v.begin(), v.end(), from, to);
  }

  static Block seq_concat(Block a, Block b) {
    std::vector<Block> kids;
    auto take = [&](Block&& x) {
      if (x.type == BlockType::Seq) {
        for (Block& c : x.children) kids.push_back(std::move(c));
      } else {
        kids.push_back(std::move(x));
      }
    };
    take(std::move(a));
    take(std::move(b));
    return Block::seq(std::move(kids));
  }

  bool try_seq(std::size_t x) {
    Work& a = w_[x];
    if (!a.is_block || a.out.size() != 1) return false;
    const std::size_t y = a.out.front();
    Work& b = w_[y];
    if (y == x || !b.is_block || b.in.size() != 1) return false;
    a.block = seq_concat(std::move(a.block), std::move(b.block));
    a.out = std::move(b.out);
    for (std::size_t z : a.out) replace(w_[z].in, y, x);
    b.alive = false;
    return true;
  }

  bool try_gateway(std::size_t s) {
    Work& split = w_[s];
    if (split.is_block || split.role != GatewayRole::Split || split.out.size() < 2) return false;
    std::optional<std::size_t> join;
    for (std::size_t b : split.out) {
      const Work& br = w_[b];
      if (!br.is_block || br.in.size() != 1 || br.out.size() != 1) return false;
      if (join && *join != br.out.front()) return false;
      join = br.out.front();
    }
    Work& j = w_[*join];
    if (j.is_block || j.role != GatewayRole::Join || j.kind != split.kind) return false;
    if (j.in.size() != split.out.size()) return false;
    std::vector<Block> branches;
    for (std::size_t b : split.out) {
      branches.push_back(std::move(w_[b].block));
      w_[b].alive = false;
    }
    const BlockType type = split.kind == GatewayKind::Xor   ? BlockType::Xor
                           : split.kind == GatewayKind::And ? BlockType::And
                                                            : BlockType::Or;
    split.is_block = true;
    split.block = composite(type, std::move(branches));
    split.out = std::move(j.out);
    for (std::size_t z : split.out) replace(w_[z].in, *join, s);
    j.alive = false;
    return true;
  }

  bool try_loop(std::size_t h) {
    Work& head = w_[h];
    if (head.is_block || head.role != GatewayRole::Join || head.kind != GatewayKind::Xor) return false;
    if (head.in.size() != 2 || head.out.size() != 1) return false;
    const std::size_t t = head.out.front();
    Work& test = w_[t];
    if (test.is_block || test.role != GatewayRole::Split || test.kind != GatewayKind::Xor) return false;
    if (test.in.size() != 1 || test.out.size() != 2) return false;
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t b = test.out[k];
      const Work& body = w_[b];
      if (!body.is_block || body.in.size() != 1 || body.out.size() != 1 || body.out.front() != h) {
        continue;
      }
      const std::size_t next = test.out[1 - k];
      const std::size_t prev = head.in[0] == b ? head.in[1] : head.in[0];
      if (prev == b || next == b) return false;
      head.is_block = true;
      head.block = Block::loop(std::move(w_[b].block));
      head.in = {prev};
      head.out = {next};
      replace(w_[next].in, t, h);
      w_[b].alive = false;
      test.alive = false;
      return true;
    }
    return false;
  }

  std::vector<Work> w_;
};

}  // namespace

std::variant<BlockTree, Unstructured> decompose(const ProcessGraph& graph) {
  Reducer r(graph);
  r.run();
  if (auto block = r.result()) return BlockTree{graph.id(), std::move(*block)};
  return Unstructured{r.alive_count()};
}

// ---- text & score -------------------------------------------------------------------------

void validate(const ProcessText& text) {
  if (text.sentences.empty()) throw ValidationError("text", "process text needs at least one sentence");
  for (std::size_t i = 0; i < text.sentences.size(); ++i) {
    if (blank(text.sentences[i])) {
      throw ValidationError("sentence " + std::to_string(i), "empty sentence");
    }
  }
}

ConsistencyScore::ConsistencyScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::to_string(value), "consistency score outside [0, 1]");
  }
}

}  // namespace tracenet
