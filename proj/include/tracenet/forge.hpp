#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracenet/graph.hpp"
#include "tracenet/traces.hpp"

namespace tracenet {

// ---- generation --------------------------------------------------------------------

struct LabelVocab {
  std::vector<std::string> verbs;
  std::vector<std::string> objects;

  std::size_t capacity() const { return verbs.size() * objects.size(); }
};

const LabelVocab& default_label_vocab();

// Pattern kinds a generator draw can pick, in weight order.
enum class Pattern { Seq, Xor, And, Or, Loop };
inline constexpr std::size_t kPatternCount = 5;

struct GenConfig {
  std::size_t max_depth = 4;
  std::size_t branch_min = 2;
  std::size_t branch_max = 3;
  std::array<double, kPatternCount> weights{0.4, 0.25, 0.2, 0.1, 0.05};
  double leaf_prob = 0.4;          // chance a non-root position is a plain activity
  std::size_t max_activities = 10;
  LabelVocab vocab = default_label_vocab();
  std::uint64_t seed = 0;
};

void validate(const GenConfig& config);

// Counts of pattern draws, for frequency checks.
struct GenStats {
  std::array<std::size_t, kPatternCount> draws{};
  std::size_t total() const;
};

// The root is a Seq framed by two activities, so a Loop never sits on the
// process boundary. Node ids are a1, a2, ... in creation order. The result is
// normalized. Throws VocabExhausted when unique labels run out.
BlockTree gen_graph(const GenConfig& config, const std::string& id = "p0", GenStats* stats = nullptr);

// ---- mutation ----------------------------------------------------------------------

enum class MutationOp { Swap, ChangeKind, Delete, Relabel };

struct MutationResult {
  BlockTree tree;
  std::vector<MutationOp> applied;
  bool exhausted = false;  // some op found no valid candidate; tree left as is from then on
};

// Each op picks an operator type uniformly among those with candidates, then a
// candidate; candidates whose result fails validation are discarded.
MutationResult mutate(const BlockTree& tree, std::size_t n_ops, std::uint64_t seed,
                      const LabelVocab& vocab = default_label_vocab());

// ---- text --------------------------------------------------------------------------

// Seq steps get one sentence each; a gateway or loop gets one sentence with
// its branches rendered inline. The very first activity sentence opens with
// "First,"; later ones use {Then, Next, After that}[(seed + i - 1) % 3].
ProcessText generate_text(const BlockTree& tree, std::uint64_t seed);

// ---- behaviour profiles ------------------------------------------------------------

enum class Relation : std::uint8_t { StrictOrder, ReverseOrder, Exclusive, Interleaving, Self };

std::string_view to_string(Relation r);

struct BehaviorProfile {
  std::vector<std::string> labels;  // sorted, distinct
  std::vector<Relation> relation;   // labels.size()^2, row-major

  Relation at(std::size_t a, std::size_t b) const { return relation[a * labels.size() + b]; }
  std::ptrdiff_t find(const std::string& label) const;
  bool operator==(const BehaviorProfile&) const = default;
};

// `label_of` maps trace tokens to activity labels; other tokens are skipped.
BehaviorProfile profile_from_traces(const std::vector<Trace>& traces,
                                    const std::map<std::string, std::string>& label_of);
BehaviorProfile behavior_profile(const BlockTree& tree, const TraceCaps& caps);
BehaviorProfile behavior_profile(const ProcessGraph& graph, const TraceCaps& caps);

// Share of matching relations over unordered distinct label pairs of the label
// union; pairs touching a label absent from either profile mismatch. A union
// of one label compares the diagonal; two empty profiles give 1.0.
ConsistencyScore bp_similarity(const BehaviorProfile& p, const BehaviorProfile& q);

// ---- datasets ----------------------------------------------------------------------

enum class Split { Train, Test };
std::string_view to_string(Split s);

struct DatasetConfig {
  std::size_t variants = 3;                 // mutants per base tree
  std::vector<std::size_t> n_ops{1, 2, 4};  // variant v uses n_ops[v % size]
  std::size_t cross_pairs = 1;              // random other families paired with each base
  double test_fraction = 0.2;
  TraceCaps caps{};
  std::uint64_t seed = 0;
};

struct LabeledPair {
  std::size_t graph = 0;  // index into Dataset::graphs
  std::size_t text = 0;   // index of the graph whose text is used
  double gold = 0.0;
  Split split = Split::Train;
  std::pair<std::size_t, std::size_t> provenance;  // (i, j) source graphs
};

struct Dataset {
  std::vector<BlockTree> graphs;  // family-major: base, then its variants
  std::vector<ProcessText> texts;
  std::vector<std::size_t> family;
  std::vector<LabeledPair> pairs;
  std::size_t base_count = 0;
};

// Graph ids are rewritten to p<index>. Within a family every member is paired
// with itself once and with every other member in both directions; each base
// additionally meets `cross_pairs` random families of the same split. The
// split is drawn per family so no text crosses it. Pair order is shuffled.
Dataset build_dataset(const std::vector<BlockTree>& bases, const DatasetConfig& config);

// Equal-width bins on [0, 1]; the last bin is closed.
std::vector<std::size_t> gold_histogram(const std::vector<LabeledPair>& pairs, std::size_t bins = 10);

struct DatasetRow {
  BlockTree graph;
  ProcessText text;
  double gold = 0.0;
  Split split = Split::Train;
  std::pair<std::size_t, std::size_t> provenance;
};

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset);
// Throws FormatError with the 1-based line number.
std::vector<DatasetRow> read_dataset_jsonl(std::istream& in);

}  // namespace tracenet
