#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mrsqm/common.hpp"
#include "mrsqm/symbolic.hpp"

namespace mrsqm {

// Document frequencies of one subword: per_class[k] counts the distinct
// sequences of class k containing it; class_sizes[k] is the number of
// sequences of class k.
struct ClassCounts {
  std::vector<std::int64_t> per_class;
  std::vector<std::int64_t> class_sizes;
};

// Chi-square statistic of observed vs class-prior-expected frequencies:
// with T = sum O_k and E_k = T * N_k / N, returns sum (O_k - E_k)^2 / E_k
// (0 when T = 0).
double chi2_score(const ClassCounts& counts);

// Upper bound on the score of anything with componentwise smaller counts:
// max over k of the score of (0, ..., O_k, ..., 0).
double chi2_bound(const ClassCounts& counts);

enum class SelectionStrategy { Random, Supervised, RandomChi2, SupervisedRandom };

std::string strategy_name(SelectionStrategy s);
SelectionStrategy strategy_from_name(const std::string& name);

// Selected subwords of one representation, in the strategy's output order.
// scores and doc_counts are parallel to subwords and empty for plain random
// selection.
struct FeatureSet {
  std::vector<std::string> subwords;
  SelectionStrategy strategy = SelectionStrategy::Random;
  std::vector<double> scores;
  std::vector<std::vector<std::int64_t>> doc_counts;
};

// Prefix trie over the subwords of the symbolic words. Nodes are produced on
// demand from their parent's inverted index; a node's per-class counts are
// distinct-sequence (document) frequencies, so they can only shrink along an
// edge.
class SubwordTrie {
public:
  struct Location {
    std::uint32_t seq;
    std::uint32_t word;
    std::uint32_t pos; // index of the subword's last symbol within the word
  };

  struct Node {
    std::string subword;
    std::vector<Location> locations;
    std::vector<std::int64_t> class_counts;
    std::int64_t total_docs = 0;
  };

  SubwordTrie(const std::vector<SymbolicSequence>& sequences,
              const std::vector<int>& labels, int num_classes);

  // One node per distinct symbol, each holding every position it occurs at.
  std::vector<Node> roots() const;

  // Extends the node's occurrences by one symbol within word boundaries.
  std::vector<Node> children(const Node& node) const;

private:
  void finalize(Node& node) const;

  const std::vector<SymbolicSequence>* sequences_;
  const std::vector<int>* labels_;
  int num_classes_;
};

struct MiningStats {
  std::size_t nodes_visited = 0;
  std::size_t nodes_expanded = 0;
  std::size_t nodes_pruned = 0;
};

// Full trie expansion with no pruning, for property checks. The visitor
// receives each node, its parent (null at the roots), and the smallest
// chi2_bound among its proper ancestors (+inf at the roots).
void walk_trie(const std::vector<SymbolicSequence>& sequences,
               const std::vector<int>& labels, int num_classes,
               const std::function<void(const SubwordTrie::Node& node,
                                        const SubwordTrie::Node* parent,
                                        double min_ancestor_bound)>& visit);

// Branch-and-bound search for the subwords with the top `budget` Chi-square
// scores. The returned score multiset equals the top of an exhaustive
// enumeration (subwords of document frequency < 2 excluded). Ties at the
// cut are broken lexicographically.
FeatureSet select_supervised(const std::vector<SymbolicSequence>& sequences,
                             const std::vector<int>& labels, int num_classes,
                             std::size_t budget, MiningStats* stats = nullptr);

// Uniformly samples (sequence, word, start, length) occurrences and keeps
// distinct subwords until the budget or the attempt cap (50x budget) is hit.
FeatureSet select_random(const std::vector<SymbolicSequence>& sequences,
                         std::size_t budget, int max_subword_len, Rng& rng);

// Random candidate pool (4x budget), then the top `budget` by Chi-square.
FeatureSet select_rs(const std::vector<SymbolicSequence>& sequences,
                     const std::vector<int>& labels, int num_classes,
                     std::size_t budget, int max_subword_len, Rng& rng);

// Supervised candidates (4x budget), then a uniform sample of `budget`.
FeatureSet select_sr(const std::vector<SymbolicSequence>& sequences,
                     const std::vector<int>& labels, int num_classes,
                     std::size_t budget, Rng& rng);

FeatureSet select_features(SelectionStrategy strategy,
                           const std::vector<SymbolicSequence>& sequences,
                           const std::vector<int>& labels, int num_classes,
                           std::size_t budget, int max_subword_len, Rng& rng);

// Substring search for a fixed pattern set within symbolic words.
class SubwordMatcher {
public:
  explicit SubwordMatcher(const std::vector<std::string>& patterns);

  std::size_t num_patterns() const { return num_patterns_; }

  // Distinct pattern ids occurring in any word of the sequence, ascending.
  std::vector<std::uint32_t> matches(const SymbolicSequence& sequence) const;

  // Per-pattern, per-class document frequencies.
  std::vector<std::vector<std::int64_t>>
  document_counts(const std::vector<SymbolicSequence>& sequences,
                  const std::vector<int>& labels, int num_classes) const;

private:
  struct TrieNode {
    int child[26];
    int pattern = -1;
  };
  std::vector<TrieNode> nodes_;
  std::size_t num_patterns_ = 0;
};

// Diagnostics dump: subword, per-class counts, score, tab-separated.
std::string format_feature_set(const FeatureSet& features);

} // namespace mrsqm
