#include <doctest.h>

#include <deque>
#include <set>

#include "../support/random_tree.hpp"
#include "tracenet/errors.hpp"
#include "tracenet/graph.hpp"

using namespace tracenet;

namespace {

const char* kXorFig = R"({
  "id": "fig3b", "entry": "g1", "exit": "g2",
  "nodes": [
    {"id": "g1", "kind": "gateway", "gateway_kind": "xor", "gateway_role": "split"},
    {"id": "D", "kind": "activity", "label": "do d"},
    {"id": "E", "kind": "activity", "label": "do e"},
    {"id": "F", "kind": "activity", "label": "do f"},
    {"id": "g2", "kind": "gateway", "gateway_kind": "xor", "gateway_role": "join"}
  ],
  "edges": [["g1","D"],["g1","E"],["g1","F"],["D","g2"],["E","g2"],["F","g2"]]
})";

ProcessGraph chain(const std::vector<std::string>& ids) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    nodes.push_back(Node::activity(ids[i], "do " + ids[i]));
    if (i) edges.emplace_back(ids[i - 1], ids[i]);
  }
  return ProcessGraph("g", nodes, edges, ids.front(), ids.back());
}

}  // namespace

TEST_CASE("parse_graph minimal sequence") {
  const auto g = parse_graph(R"({"id":"m","entry":"A","exit":"B",
    "nodes":[{"id":"A","kind":"activity","label":"a"},{"id":"B","kind":"activity","label":"b"}],
    "edges":[["A","B"]]})");
  CHECK(g.entry() == "A");
  CHECK(g.exit() == "B");
  CHECK(g.size() == 2);
}

TEST_CASE("parse_graph names a dangling edge target") {
  try {
    parse_graph(R"({"id":"m","entry":"A","exit":"B",
      "nodes":[{"id":"A","kind":"activity","label":"a"},{"id":"B","kind":"activity","label":"b"}],
      "edges":[["A","B"],["A","Z"]]})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.subject() == "Z");
  }
}

TEST_CASE("parse_graph xor figure") {
  const auto g = parse_graph(kXorFig);
  CHECK(g.size() == 5);
  CHECK(g.edges().size() == 6);
  CHECK(g.node(*g.find("g1")).gateway_kind == GatewayKind::Xor);
}

TEST_CASE("parse_graph schema errors") {
  CHECK_THROWS_AS(parse_graph("{not json"), SchemaError);
  CHECK_THROWS_AS(parse_graph(R"({"id":"m","entry":"A","exit":"A","nodes":[{"id":"A","kind":"robot"}],"edges":[]})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_graph(R"({"id":"m","entry":"A","nodes":[],"edges":[]})"), SchemaError);
}

TEST_CASE("validation rejects structural defects") {
  SUBCASE("activity without label") {
    CHECK_THROWS_AS(ProcessGraph("g", {Node::activity("a", "  ")}, {}, "a", "a"), ValidationError);
  }
  SUBCASE("bad node id") {
    CHECK_THROWS_AS(ProcessGraph("g", {Node::activity("a-1", "x")}, {}, "a-1", "a-1"), ValidationError);
  }
  SUBCASE("duplicate node") {
    CHECK_THROWS_AS(ProcessGraph("g", {Node::activity("a", "x"), Node::activity("a", "y")}, {}, "a", "a"),
                    ValidationError);
  }
  SUBCASE("multiple entries") {
    std::vector<Node> n{Node::activity("a", "x"), Node::activity("b", "y"), Node::activity("c", "z")};
    try {
      ProcessGraph("g", n, {{"a", "c"}, {"b", "c"}}, "a", "c");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.subject() == "b");
    }
  }
  SUBCASE("unreachable cycle") {
    std::vector<Node> n{Node::activity("a", "x"), Node::activity("b", "y"), Node::activity("c", "z"),
                        Node::activity("d", "w")};
    CHECK_THROWS_AS(ProcessGraph("g", n, {{"a", "b"}, {"c", "d"}, {"d", "c"}}, "a", "b"), ValidationError);
  }
  SUBCASE("entry with incoming edge") {
    std::vector<Node> n{Node::activity("a", "x"), Node::activity("b", "y")};
    CHECK_THROWS_AS(ProcessGraph("g", n, {{"a", "b"}, {"b", "a"}}, "a", "b"), ValidationError);
  }
}

TEST_CASE("flatten simple patterns") {
  const auto seq = flatten(BlockTree{"s", Block::seq({Block::act("a", "x"), Block::act("b", "y")})});
  CHECK(seq.size() == 2);
  CHECK(seq.edges().size() == 1);
  CHECK(seq.edges()[0] == Edge{"a", "b"});

  const auto par = flatten(
      BlockTree{"p", Block::and_of({Block::act("g", "x"), Block::act("h", "y"), Block::act("i", "z")})});
  CHECK(par.size() == 5);
  CHECK(par.entry() == gateway_split_id(1));
  CHECK(par.exit() == gateway_join_id(1));
  CHECK(par.node(par.entry_index()).gateway_kind == GatewayKind::And);
  CHECK(par.edges().size() == 6);
}

TEST_CASE("decompose recovers patterns") {
  SUBCASE("chain") {
    const auto r = decompose(chain({"a", "b", "c"}));
    REQUIRE(std::holds_alternative<BlockTree>(r));
    CHECK(std::get<BlockTree>(r).root ==
          Block::seq({Block::act("a", "do a"), Block::act("b", "do b"), Block::act("c", "do c")}));
  }
  SUBCASE("or figure") {
    std::vector<Node> n{Node::gateway("s", GatewayKind::Or, GatewayRole::Split), Node::activity("J", "j"),
                        Node::activity("K", "k"), Node::gateway("t", GatewayKind::Or, GatewayRole::Join)};
    const auto r = decompose(ProcessGraph("o", n, {{"s", "J"}, {"s", "K"}, {"J", "t"}, {"K", "t"}}, "s", "t"));
    REQUIRE(std::holds_alternative<BlockTree>(r));
    CHECK(equivalent(std::get<BlockTree>(r).root, Block::or_of({Block::act("J", "j"), Block::act("K", "k")})));
  }
  SUBCASE("xor split closed by and join") {
    std::vector<Node> n{Node::gateway("s", GatewayKind::Xor, GatewayRole::Split), Node::activity("a", "x"),
                        Node::activity("b", "y"), Node::gateway("t", GatewayKind::And, GatewayRole::Join)};
    const auto r = decompose(ProcessGraph("m", n, {{"s", "a"}, {"s", "b"}, {"a", "t"}, {"b", "t"}}, "s", "t"));
    REQUIRE(std::holds_alternative<Unstructured>(r));
    CHECK(std::get<Unstructured>(r).remnant_size == 4);
  }
  SUBCASE("loop") {
    const BlockTree t{"l", Block::seq({Block::act("a", "x"), Block::loop(Block::act("b", "y")),
                                       Block::act("c", "z")})};
    const auto r = decompose(flatten(t));
    REQUIRE(std::holds_alternative<BlockTree>(r));
    CHECK(equivalent(std::get<BlockTree>(r).root, t.root));
  }
}

TEST_CASE("flatten then decompose is the identity on random trees") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    testing_support::TreeSampler s(seed);
    const BlockTree t = s.tree(3 + static_cast<int>(seed % 10), 4);
    const auto r = decompose(flatten(t));
    REQUIRE_MESSAGE(std::holds_alternative<BlockTree>(r), canonical_form(t.root));
    CHECK_MESSAGE(equivalent(std::get<BlockTree>(r).root, t.root), canonical_form(t.root));
  }
}

TEST_CASE("serialize then parse is a bit-exact round trip") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    testing_support::TreeSampler s(seed);
    const ProcessGraph g = flatten(s.tree(6));
    const std::string doc = serialize_graph(g);
    const ProcessGraph back = parse_graph(doc);
    CHECK(serialize_graph(back) == doc);
    CHECK(std::equal(g.nodes().begin(), g.nodes().end(), back.nodes().begin(), back.nodes().end()));
    CHECK(g.edges() == back.edges());

    const BlockTree t = s.tree(6);
    CHECK(parse_tree(serialize_tree(t)) == t);
  }
}

TEST_CASE("every node of a valid graph is reachable from entry and reaches exit") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    testing_support::TreeSampler s(seed + 100);
    const ProcessGraph g = flatten(s.tree(7));
    CHECK(g.reachable_from_entry().size() == g.size());
    std::vector<char> seen(g.size(), 0);
    std::deque<std::size_t> q{g.exit_index()};
    seen[g.exit_index()] = 1;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      for (std::size_t e : g.in_edges(v)) {
        if (!seen[g.source(e)]) {
          seen[g.source(e)] = 1;
          q.push_back(g.source(e));
        }
      }
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(g.size()));
  }
}

TEST_CASE("block tree validation") {
  CHECK_THROWS_AS(validate(BlockTree{"t", Block{BlockType::Seq, "", "", {Block::act("a", "x")}, 2}}),
                  ValidationError);
  CHECK_THROWS_AS(validate(BlockTree{"t", Block::xor_of({Block::act("a", "x"), Block::act("a", "y")})}),
                  ValidationError);
  CHECK_THROWS_AS(validate(BlockTree{"t", Block::seq({Block::loop(Block::act("a", "x")), Block::act("b", "y")})}),
                  ValidationError);
  CHECK_THROWS_AS(validate(BlockTree{"t", Block::seq({Block::act("b", "y"), Block::loop(Block::act("a", "x"), 0),
                                                      Block::act("c", "z")})}),
                  ValidationError);
}

TEST_CASE("process text and scores") {
  CHECK_THROWS_AS(validate(ProcessText{}), ValidationError);
  CHECK_THROWS_AS(validate(ProcessText{{"ok.", "   "}}), ValidationError);
  CHECK_NOTHROW(validate(ProcessText{{"First, do it."}}));
  CHECK(ConsistencyScore(0.25).value() == 0.25);
  CHECK_THROWS_AS(ConsistencyScore(1.5), ValidationError);
  CHECK_THROWS_AS(ConsistencyScore(-0.1), ValidationError);
}
