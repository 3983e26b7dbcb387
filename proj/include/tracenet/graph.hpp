#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tracenet {

enum class NodeKind { Activity, Gateway };
enum class GatewayKind { Xor, And, Or };
enum class GatewayRole { Split, Join };

std::string_view to_string(GatewayKind kind);
std::string_view to_string(GatewayRole role);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Activity;
  std::string label;  // activities only
  GatewayKind gateway_kind = GatewayKind::Xor;
  GatewayRole gateway_role = GatewayRole::Split;

  static Node activity(std::string id, std::string label);
  static Node gateway(std::string id, GatewayKind kind, GatewayRole role);

  bool is_activity() const { return kind == NodeKind::Activity; }
  bool is_gateway() const { return kind == NodeKind::Gateway; }

  bool operator==(const Node&) const = default;
};

using Edge = std::pair<std::string, std::string>;

bool is_valid_node_id(std::string_view id);

// A labeled process graph. Construction validates every structural invariant
// and throws ValidationError naming the offending node or edge; an instance is
// therefore always valid and immutable.
class ProcessGraph {
 public:
  ProcessGraph(std::string id, std::vector<Node> nodes, std::vector<Edge> edges,
               std::string entry, std::string exit);

  const std::string& id() const { return id_; }
  std::span<const Node> nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& entry() const { return nodes_[entry_].id; }
  const std::string& exit() const { return nodes_[exit_].id; }
  std::size_t entry_index() const { return entry_; }
  std::size_t exit_index() const { return exit_; }
  std::size_t size() const { return nodes_.size(); }

  std::optional<std::size_t> find(std::string_view node_id) const;
  const Node& node(std::size_t i) const { return nodes_[i]; }

  // Edge-index views: edge e runs from source(e) to target(e).
  std::size_t source(std::size_t e) const { return edge_ends_[e].first; }
  std::size_t target(std::size_t e) const { return edge_ends_[e].second; }
  const std::vector<std::size_t>& out_edges(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& in_edges(std::size_t i) const { return in_[i]; }

  // Nodes reachable from the entry, in BFS order.
  std::vector<std::size_t> reachable_from_entry() const;

 private:
  std::string id_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> edge_ends_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t entry_ = 0;
  std::size_t exit_ = 0;
};

ProcessGraph parse_graph(std::string_view document);
ProcessGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const ProcessGraph& graph);
std::string serialize_graph(const ProcessGraph& graph);

// ---- Block trees -----------------------------------------------------------

enum class BlockType { Act, Seq, Xor, And, Or, Loop };

inline constexpr int kDefaultMaxUnroll = 2;

std::string_view to_string(BlockType type);

// One node of a block tree. `children` holds Seq children, Xor/And/Or
// branches, or the single Loop body.
struct Block {
  BlockType type = BlockType::Act;
  std::string label;    // Act
  std::string node_id;  // Act
  std::vector<Block> children;
  int max_unroll = kDefaultMaxUnroll;  // Loop

  static Block act(std::string node_id, std::string label);
  static Block seq(std::vector<Block> children);
  static Block xor_of(std::vector<Block> branches);
  static Block and_of(std::vector<Block> branches);
  static Block or_of(std::vector<Block> branches);
  static Block loop(Block body, int max_unroll = kDefaultMaxUnroll);

  bool is_gateway_block() const {
    return type == BlockType::Xor || type == BlockType::And || type == BlockType::Or;
  }
  const Block& body() const { return children.front(); }

  bool operator==(const Block&) const = default;
};

struct BlockTree {
  std::string id;
  Block root;

  bool operator==(const BlockTree&) const = default;
};

// Throws ValidationError. Besides the per-block invariants this rejects a
// Loop at the very start or end of the process: its head would carry the
// back-edge, and the flat form requires an entry of in-degree 0 (and an exit
// of out-degree 0).
void validate(const BlockTree& tree);

// Collapses single-child Seq blocks and splices Seq-in-Seq. Decompose always
// yields this canonical form.
Block normalize(Block block);

// Structural equality with Xor/And/Or branch order ignored.
bool equivalent(const Block& a, const Block& b);
std::string canonical_form(const Block& block);

std::size_t count_activities(const Block& block);
void collect_activities(const Block& block, std::vector<const Block*>& out);

BlockTree parse_tree(std::string_view document);
BlockTree tree_from_json(const nlohmann::json& doc);
nlohmann::json tree_to_json(const BlockTree& tree);
nlohmann::json block_to_json(const Block& block);
std::string serialize_tree(const BlockTree& tree);

// Gateway node ids assigned by flatten: composite blocks (Xor/And/Or/Loop)
// are numbered 1.. in pre-order. Loops use the join id for their head and the
// split id for their exit test.
std::string gateway_split_id(std::size_t ordinal);
std::string gateway_join_id(std::size_t ordinal);

ProcessGraph flatten(const BlockTree& tree, const std::string& graph_id);
inline ProcessGraph flatten(const BlockTree& tree) { return flatten(tree, tree.id); }

struct Unstructured {
  std::size_t remnant_size = 0;
};

// Iterative pattern reduction. A recovered Loop gets kDefaultMaxUnroll since
// the flat form carries no unroll bound.
std::variant<BlockTree, Unstructured> decompose(const ProcessGraph& graph);

// ---- Process text and scores -----------------------------------------------

struct ProcessText {
  std::vector<std::string> sentences;
};

void validate(const ProcessText& text);

// Throws ValidationError for values outside [0, 1] (and NaN).
class ConsistencyScore {
 public:
  ConsistencyScore() = default;
  explicit ConsistencyScore(double value);
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

}  // namespace tracenet
