#include "mrsqm/mining.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace mrsqm {

namespace {

constexpr std::int64_t kMinDocFreq = 2; // features below this are statistically vacuous

void validate_counts(const ClassCounts& counts) {
  if (counts.per_class.size() != counts.class_sizes.size())
    throw std::invalid_argument("class count/size vectors differ in length");
  if (counts.per_class.empty()) throw std::invalid_argument("no classes");
  for (std::size_t k = 0; k < counts.per_class.size(); ++k) {
    if (counts.class_sizes[k] <= 0)
      throw std::invalid_argument("class sizes must be positive");
    if (counts.per_class[k] < 0 || counts.per_class[k] > counts.class_sizes[k])
      throw std::invalid_argument("observed frequency exceeds class size");
  }
}

double chi2_raw(std::span<const std::int64_t> observed,
                std::span<const std::int64_t> sizes, double total_sequences) {
  std::int64_t total = 0;
  for (std::int64_t o : observed) total += o;
  if (total == 0) return 0.0;
  double score = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected =
        static_cast<double>(total) * static_cast<double>(sizes[k]) / total_sequences;
    if (expected <= 0.0) continue; // empty class: observed is necessarily 0 too
    const double diff = static_cast<double>(observed[k]) - expected;
    score += diff * diff / expected;
  }
  return score;
}

double chi2_bound_raw(std::span<const std::int64_t> observed,
                      std::span<const std::int64_t> sizes, double total_sequences,
                      std::vector<std::int64_t>& scratch) {
  scratch.assign(observed.size(), 0);
  double best = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    scratch[k] = observed[k];
    best = std::max(best, chi2_raw(scratch, sizes, total_sequences));
    scratch[k] = 0;
  }
  return best;
}

std::vector<std::int64_t> count_class_sizes(const std::vector<int>& labels,
                                            int num_classes) {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("label out of range");
    ++sizes[static_cast<std::size_t>(y)];
  }
  return sizes;
}

void require_multiclass(const std::vector<std::int64_t>& sizes) {
  int present = 0;
  for (std::int64_t n : sizes)
    if (n > 0) ++present;
  if (present < 2)
    throw std::invalid_argument("supervised selection needs at least 2 classes");
}

struct Candidate {
  double score;
  std::string subword;
  std::vector<std::int64_t> counts;
};

// score descending, then lexicographic (a prefix sorts before its extension)
bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.subword < b.subword;
}

} // namespace

double chi2_score(const ClassCounts& counts) {
  validate_counts(counts);
  std::int64_t n = 0;
  for (std::int64_t s : counts.class_sizes) n += s;
  return chi2_raw(counts.per_class, counts.class_sizes, static_cast<double>(n));
}

double chi2_bound(const ClassCounts& counts) {
  validate_counts(counts);
  std::int64_t n = 0;
  for (std::int64_t s : counts.class_sizes) n += s;
  std::vector<std::int64_t> scratch;
  return chi2_bound_raw(counts.per_class, counts.class_sizes, static_cast<double>(n),
                        scratch);
}

std::string strategy_name(SelectionStrategy s) {
  switch (s) {
  case SelectionStrategy::Random: return "r";
  case SelectionStrategy::Supervised: return "s";
  case SelectionStrategy::RandomChi2: return "rs";
  case SelectionStrategy::SupervisedRandom: return "sr";
  }
  return "?";
}

SelectionStrategy strategy_from_name(const std::string& name) {
  if (name == "r") return SelectionStrategy::Random;
  if (name == "s") return SelectionStrategy::Supervised;
  if (name == "rs") return SelectionStrategy::RandomChi2;
  if (name == "sr") return SelectionStrategy::SupervisedRandom;
  throw std::invalid_argument("unknown selection strategy '" + name + "'");
}

SubwordTrie::SubwordTrie(const std::vector<SymbolicSequence>& sequences,
                         const std::vector<int>& labels, int num_classes)
    : sequences_(&sequences), labels_(&labels), num_classes_(num_classes) {
  if (sequences.size() != labels.size())
    throw std::invalid_argument("sequence/label count mismatch");
}

void SubwordTrie::finalize(Node& node) const {
  node.class_counts.assign(static_cast<std::size_t>(num_classes_), 0);
  node.total_docs = 0;
  std::uint32_t last_seq = std::numeric_limits<std::uint32_t>::max();
  for (const Location& loc : node.locations) {
    if (loc.seq != last_seq) {
      last_seq = loc.seq;
      ++node.class_counts[static_cast<std::size_t>((*labels_)[loc.seq])];
      ++node.total_docs;
    }
  }
}

std::vector<SubwordTrie::Node> SubwordTrie::roots() const {
  std::vector<std::vector<Location>> buckets(26);
  for (std::uint32_t s = 0; s < sequences_->size(); ++s) {
    const SymbolicSequence& seq = (*sequences_)[s];
    for (std::uint32_t w = 0; w < seq.size(); ++w) {
      const std::string& word = seq[w];
      for (std::uint32_t p = 0; p < word.size(); ++p) {
        if (word[p] < 'a' || word[p] > 'z')
          throw std::invalid_argument("symbolic word contains a symbol outside a..z");
        buckets[static_cast<std::size_t>(word[p] - 'a')].push_back({s, w, p});
      }
    }
  }
  std::vector<Node> nodes;
  for (int c = 0; c < 26; ++c) {
    if (buckets[static_cast<std::size_t>(c)].empty()) continue;
    Node node;
    node.subword = std::string(1, static_cast<char>('a' + c));
    node.locations = std::move(buckets[static_cast<std::size_t>(c)]);
    finalize(node);
    nodes.push_back(std::move(node));
  }
  return nodes;
}

std::vector<SubwordTrie::Node> SubwordTrie::children(const Node& node) const {
  std::vector<std::vector<Location>> buckets(26);
  for (const Location& loc : node.locations) {
    const std::string& word = (*sequences_)[loc.seq][loc.word];
    const std::uint32_t next = loc.pos + 1;
    if (next < word.size())
      buckets[static_cast<std::size_t>(word[next] - 'a')].push_back(
          {loc.seq, loc.word, next});
  }
  std::vector<Node> nodes;
  for (int c = 0; c < 26; ++c) {
    if (buckets[static_cast<std::size_t>(c)].empty()) continue;
    Node child;
    child.subword = node.subword + static_cast<char>('a' + c);
    child.locations = std::move(buckets[static_cast<std::size_t>(c)]);
    finalize(child);
    nodes.push_back(std::move(child));
  }
  return nodes;
}

void walk_trie(const std::vector<SymbolicSequence>& sequences,
               const std::vector<int>& labels, int num_classes,
               const std::function<void(const SubwordTrie::Node&, const SubwordTrie::Node*,
                                        double)>& visit) {
  SubwordTrie trie(sequences, labels, num_classes);
  const std::vector<std::int64_t> sizes = count_class_sizes(labels, num_classes);
  double n = 0;
  for (std::int64_t s : sizes) n += static_cast<double>(s);
  std::vector<std::int64_t> scratch;

  // depth-first; recursion depth is bounded by the word length
  auto descend = [&](auto&& self, const SubwordTrie::Node& node,
                     const SubwordTrie::Node* parent, double min_bound) -> void {
    visit(node, parent, min_bound);
    const double bound = chi2_bound_raw(node.class_counts, sizes, n, scratch);
    const double child_min = std::min(min_bound, bound);
    for (const SubwordTrie::Node& child : trie.children(node))
      self(self, child, &node, child_min);
  };
  for (const SubwordTrie::Node& root : trie.roots())
    descend(descend, root, nullptr, std::numeric_limits<double>::infinity());
}

FeatureSet select_supervised(const std::vector<SymbolicSequence>& sequences,
                             const std::vector<int>& labels, int num_classes,
                             std::size_t budget, MiningStats* stats) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (sequences.empty()) throw std::invalid_argument("no sequences");
  const std::vector<std::int64_t> sizes = count_class_sizes(labels, num_classes);
  require_multiclass(sizes);
  double n = 0;
  for (std::int64_t s : sizes) n += static_cast<double>(s);

  SubwordTrie trie(sequences, labels, num_classes);
  MiningStats local;
  MiningStats& st = stats ? *stats : local;

  std::vector<Candidate> admitted;
  // k-th best admitted score so far; the admission threshold of Algorithm-
  // style branch and bound never exceeds the final k-th best overall score,
  // so no optimal feature is missed.
  std::priority_queue<double, std::vector<double>, std::greater<>> top_scores;
  double threshold = 0.0;

  std::vector<SubwordTrie::Node> stack = trie.roots();
  std::reverse(stack.begin(), stack.end());
  std::vector<std::int64_t> scratch;

  while (!stack.empty()) {
    SubwordTrie::Node node = std::move(stack.back());
    stack.pop_back();
    ++st.nodes_visited;

    const bool supported = node.total_docs >= kMinDocFreq;
    if (supported) {
      const double score = chi2_raw(node.class_counts, sizes, n);
      if (score >= threshold) {
        admitted.push_back({score, node.subword, node.class_counts});
        top_scores.push(score);
        if (top_scores.size() > budget) top_scores.pop();
        if (top_scores.size() == budget) threshold = top_scores.top();
      }
    }

    // descendants of an unsupported node stay unsupported, and anything
    // below a beaten bound cannot reach the current top k
    const double bound = chi2_bound_raw(node.class_counts, sizes, n, scratch);
    if (supported && bound >= threshold) {
      ++st.nodes_expanded;
      std::vector<SubwordTrie::Node> children = trie.children(node);
      for (auto it = children.rbegin(); it != children.rend(); ++it)
        stack.push_back(std::move(*it));
    } else {
      ++st.nodes_pruned;
    }
  }

  std::sort(admitted.begin(), admitted.end(), candidate_before);
  if (admitted.size() > budget) admitted.resize(budget);

  FeatureSet out;
  out.strategy = SelectionStrategy::Supervised;
  for (Candidate& c : admitted) {
    out.subwords.push_back(std::move(c.subword));
    out.scores.push_back(c.score);
    out.doc_counts.push_back(std::move(c.counts));
  }
  return out;
}

FeatureSet select_random(const std::vector<SymbolicSequence>& sequences,
                         std::size_t budget, int max_subword_len, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (sequences.empty()) throw std::invalid_argument("no sequences");
  if (max_subword_len < 1) throw std::invalid_argument("max subword length must be >= 1");

  FeatureSet out;
  out.strategy = SelectionStrategy::Random;
  std::unordered_set<std::string> seen;
  const std::size_t max_attempts = 50 * budget;

  for (std::size_t attempt = 0;
       attempt < max_attempts && out.subwords.size() < budget; ++attempt) {
    const SymbolicSequence& seq = sequences[rng.uniform_index(sequences.size())];
    if (seq.empty()) continue;
    const std::string& word = seq[rng.uniform_index(seq.size())];
    if (word.empty()) continue;
    const std::size_t start = rng.uniform_index(word.size());
    const std::size_t longest =
        std::min<std::size_t>(static_cast<std::size_t>(max_subword_len),
                              word.size() - start);
    const std::size_t len = 1 + rng.uniform_index(longest);
    std::string sub = word.substr(start, len);
    if (seen.insert(sub).second) out.subwords.push_back(std::move(sub));
  }
  return out;
}

FeatureSet select_rs(const std::vector<SymbolicSequence>& sequences,
                     const std::vector<int>& labels, int num_classes,
                     std::size_t budget, int max_subword_len, Rng& rng) {
  const std::vector<std::int64_t> sizes = count_class_sizes(labels, num_classes);
  require_multiclass(sizes);
  double n = 0;
  for (std::int64_t s : sizes) n += static_cast<double>(s);

  FeatureSet pool = select_random(sequences, budget * 4, max_subword_len, rng);
  const SubwordMatcher matcher(pool.subwords);
  std::vector<std::vector<std::int64_t>> counts =
      matcher.document_counts(sequences, labels, num_classes);

  std::vector<Candidate> ranked;
  ranked.reserve(pool.subwords.size());
  for (std::size_t i = 0; i < pool.subwords.size(); ++i)
    ranked.push_back({chi2_raw(counts[i], sizes, n), std::move(pool.subwords[i]),
                      std::move(counts[i])});
  std::sort(ranked.begin(), ranked.end(), candidate_before);
  if (ranked.size() > budget) ranked.resize(budget);

  FeatureSet out;
  out.strategy = SelectionStrategy::RandomChi2;
  for (Candidate& c : ranked) {
    out.subwords.push_back(std::move(c.subword));
    out.scores.push_back(c.score);
    out.doc_counts.push_back(std::move(c.counts));
  }
  return out;
}

FeatureSet select_sr(const std::vector<SymbolicSequence>& sequences,
                     const std::vector<int>& labels, int num_classes,
                     std::size_t budget, Rng& rng) {
  FeatureSet pool = select_supervised(sequences, labels, num_classes, budget * 4);
  if (pool.subwords.size() <= budget) {
    pool.strategy = SelectionStrategy::SupervisedRandom;
    return pool;
  }

  // partial Fisher-Yates, then restore the supervised ranking order
  std::vector<std::size_t> index(pool.subwords.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  for (std::size_t i = 0; i < budget; ++i) {
    const std::size_t j = i + rng.uniform_index(index.size() - i);
    std::swap(index[i], index[j]);
  }
  index.resize(budget);
  std::sort(index.begin(), index.end());

  FeatureSet out;
  out.strategy = SelectionStrategy::SupervisedRandom;
  for (std::size_t i : index) {
    out.subwords.push_back(std::move(pool.subwords[i]));
    out.scores.push_back(pool.scores[i]);
    out.doc_counts.push_back(std::move(pool.doc_counts[i]));
  }
  return out;
}

FeatureSet select_features(SelectionStrategy strategy,
                           const std::vector<SymbolicSequence>& sequences,
                           const std::vector<int>& labels, int num_classes,
                           std::size_t budget, int max_subword_len, Rng& rng) {
  switch (strategy) {
  case SelectionStrategy::Random:
    return select_random(sequences, budget, max_subword_len, rng);
  case SelectionStrategy::Supervised:
    return select_supervised(sequences, labels, num_classes, budget);
  case SelectionStrategy::RandomChi2:
    return select_rs(sequences, labels, num_classes, budget, max_subword_len, rng);
  case SelectionStrategy::SupervisedRandom:
    return select_sr(sequences, labels, num_classes, budget, rng);
  }
  throw std::invalid_argument("unknown selection strategy");
}

SubwordMatcher::SubwordMatcher(const std::vector<std::string>& patterns)
    : num_patterns_(patterns.size()) {
  nodes_.emplace_back();
  std::fill(std::begin(nodes_[0].child), std::end(nodes_[0].child), -1);
  for (std::size_t id = 0; id < patterns.size(); ++id) {
    const std::string& pat = patterns[id];
    if (pat.empty()) throw std::invalid_argument("empty pattern");
    int cur = 0;
    for (char ch : pat) {
      if (ch < 'a' || ch > 'z') throw std::invalid_argument("pattern symbol out of range");
      int next = nodes_[static_cast<std::size_t>(cur)].child[ch - 'a'];
      if (next < 0) {
        next = static_cast<int>(nodes_.size());
        nodes_[static_cast<std::size_t>(cur)].child[ch - 'a'] = next;
        nodes_.emplace_back(); // may reallocate; no references held across it
        std::fill(std::begin(nodes_.back().child), std::end(nodes_.back().child), -1);
      }
      cur = next;
    }
    nodes_[static_cast<std::size_t>(cur)].pattern = static_cast<int>(id);
  }
}

std::vector<std::uint32_t> SubwordMatcher::matches(const SymbolicSequence& sequence) const {
  std::vector<std::uint32_t> found;
  std::vector<std::uint8_t> seen(num_patterns_, 0);
  for (const std::string& word : sequence) {
    for (std::size_t start = 0; start < word.size(); ++start) {
      int cur = 0;
      for (std::size_t i = start; i < word.size(); ++i) {
        cur = nodes_[static_cast<std::size_t>(cur)].child[word[i] - 'a'];
        if (cur < 0) break;
        const int pat = nodes_[static_cast<std::size_t>(cur)].pattern;
        if (pat >= 0 && !seen[static_cast<std::size_t>(pat)]) {
          seen[static_cast<std::size_t>(pat)] = 1;
          found.push_back(static_cast<std::uint32_t>(pat));
        }
      }
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

std::vector<std::vector<std::int64_t>>
SubwordMatcher::document_counts(const std::vector<SymbolicSequence>& sequences,
                                const std::vector<int>& labels, int num_classes) const {
  if (sequences.size() != labels.size())
    throw std::invalid_argument("sequence/label count mismatch");
  std::vector<std::vector<std::int64_t>> counts(
      num_patterns_, std::vector<std::int64_t>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t s = 0; s < sequences.size(); ++s)
    for (std::uint32_t pat : matches(sequences[s]))
      ++counts[pat][static_cast<std::size_t>(labels[s])];
  return counts;
}

std::string format_feature_set(const FeatureSet& features) {
  std::ostringstream out;
  for (std::size_t i = 0; i < features.subwords.size(); ++i) {
    out << features.subwords[i];
    if (i < features.doc_counts.size())
      for (std::int64_t c : features.doc_counts[i]) out << '\t' << c;
    if (i < features.scores.size()) out << '\t' << features.scores[i];
    out << '\n';
  }
  return out.str();
}

} // namespace mrsqm
