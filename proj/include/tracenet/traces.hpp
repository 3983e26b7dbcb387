#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "tracenet/graph.hpp"

namespace tracenet {

// A process graph trace: a complete node path, gateways included.
struct Trace {
  std::vector<std::string> tokens;

  auto operator<=>(const Trace&) const = default;
  bool operator==(const Trace&) const = default;
};

struct TraceSet {
  std::vector<Trace> traces;
  bool truncated = false;  // the cap was hit and the set is a uniform sample
};

struct TraceCaps {
  std::size_t max_traces = 1000;
  std::size_t max_len = 200;
  std::uint64_t seed = 0;
};

// Size of the full trace space of `tree` (before any cap). Long double keeps
// the count finite for the interleaving blow-ups of wide And/Or blocks.
long double count_traces(const BlockTree& tree);

// Exhaustive PGT enumeration under the pattern semantics. Above
// caps.max_traces the result is a uniform sample of distinct traces from the
// same space and `truncated` is set.
TraceSet enumerate_traces(const BlockTree& tree, const TraceCaps& caps);

// Seeded token-game simulation; works on unstructured graphs. Throws
// DeadlockError / ImproperTermination when a run gets stuck or the exit fires
// with tokens still in flight.
TraceSet sample_traces(const ProcessGraph& graph, const TraceCaps& caps);

// Every terminating token-game run of length <= max_len, found by exhaustive
// search over firing order and split choices. Throws CapTooSmall when more
// than max_runs distinct runs exist. Same firing rules as sample_traces.
std::set<Trace> all_token_game_runs(const ProcessGraph& graph, std::size_t max_len,
                                    std::size_t max_runs = 100000);

// DeepWalk-style corpus: n_walks uniform random walks per node over the
// undirected adjacency; gateway semantics are ignored.
TraceSet structural_walks(const ProcessGraph& graph, std::size_t n_walks, std::size_t walk_len,
                          std::uint64_t seed);

enum class ProjectionMode { ActivitiesOnly, GatewaysOnly, All };

bool keeps(ProjectionMode mode, const Node& node);

// Throws UnknownToken for tokens that are not nodes of `graph`.
Trace project_trace(const Trace& trace, const ProcessGraph& graph, ProjectionMode mode);

// ---- corpus files -------------------------------------------------------------

using Sentence = std::vector<std::string>;
using Corpus = std::vector<Sentence>;

inline constexpr const char* kCorpusHeader = "#tracewalk-corpus v1";

std::string qualified_token(const std::string& graph_id, const std::string& node_id);

// Appends every trace of `traces` with tokens qualified as <graph_id>.<node_id>.
void append_traces(Corpus& corpus, const std::string& graph_id, const TraceSet& traces);

void write_corpus(std::ostream& out, const Corpus& corpus);
// Requires the header line; throws FormatError otherwise.
Corpus read_corpus(std::istream& in);
// Whitespace-tokenized plain text, one sentence per non-empty line.
Corpus read_plain_text(std::istream& in);

}  // namespace tracenet
