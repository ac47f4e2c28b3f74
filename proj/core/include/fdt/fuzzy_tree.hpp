#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fdt/score_model.hpp"

namespace fdt {

/// Fusion operator applied to the scores of a node's detector subset.
/// max realizes fuzzy OR (Godel t-conorm), min fuzzy AND (Godel t-norm).
/// The enum order is the canonical tie-break order.
enum class EnsembleOperator : std::uint8_t { mean = 0, min = 1, max = 2, median = 3 };

std::string to_string(EnsembleOperator op);
EnsembleOperator parse_operator(const std::string& token);

/// One internal node's fuzzy predicate: detector subset, fusion operator,
/// decision threshold. Detector indices are strictly increasing.
struct NodeConfig {
  std::vector<std::uint32_t> detectors;
  EnsembleOperator op = EnsembleOperator::mean;
  double threshold = 0.5;

  bool operator==(const NodeConfig&) const = default;
};

/// Total order used to break gain ties: smaller subset first, then
/// lexicographically smaller index list, then operator order
/// mean < min < max < median, then smaller threshold.
bool canonical_config_less(const NodeConfig& a, const NodeConfig& b);

struct Hyperparams {
  std::uint32_t max_split_models = 3;  // s: largest detector subset per node
  std::uint32_t min_samples = 0;       // m: both children must exceed this
  std::uint32_t max_depth = 4;         // d: internal nodes on any path
  std::uint32_t thr_grid_size = 10;    // g: thresholds k/(g+1), k=1..g

  void validate() const;
};

/// How Accuracy_split labels the two children: by each child's own training
/// majority (default) or fixed left=real / right=fake.
enum class SplitLabeling : std::uint8_t { majority = 0, fixed = 1 };

std::string to_string(SplitLabeling labeling);
SplitLabeling parse_split_labeling(const std::string& token);

struct LeafNode {
  Label label = Label::fake;
  std::uint64_t n_real = 0;
  std::uint64_t n_fake = 0;
};

struct TreeNode;

struct InternalNode {
  NodeConfig config;
  double gain = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
};

struct TreeNode {
  std::variant<InternalNode, LeafNode> value;

  bool is_leaf() const { return std::holds_alternative<LeafNode>(value); }
  const LeafNode& leaf() const { return std::get<LeafNode>(value); }
  const InternalNode& internal() const { return std::get<InternalNode>(value); }
};

struct FuzzyTree {
  std::vector<std::string> detector_names;
  Hyperparams hyperparams;
  SplitLabeling split_labeling = SplitLabeling::majority;
  std::unique_ptr<TreeNode> root;

  std::size_t depth() const;       // internal nodes on the longest path
  std::size_t node_count() const;  // internal + leaf
  std::size_t leaf_count() const;
};

/// mean / min / max / median of a non-empty value list. Even-length median
/// is the mean of the two middle order statistics.
double apply_operator(EnsembleOperator op, std::span<const double> values);

/// The node's local prediction: operator applied to the subset's scores.
double local_prediction(const NodeConfig& config, std::span<const double> features);

/// max(n_real, n_fake) / n.
double majority_accuracy(std::span<const Label> labels);

/// Majority label with the fixed tie rule: ties go to fake.
Label majority_label(std::uint64_t n_real, std::uint64_t n_fake);

struct SplitEval {
  double gain = 0.0;
  std::vector<std::uint32_t> left;   // record indices with prediction <= tau
  std::vector<std::uint32_t> right;  // record indices with prediction > tau
};

/// Evaluates one candidate on the given record subset. Samples scoring
/// exactly tau go left (real-ward); the comparison has no epsilon.
SplitEval evaluate_split(const NodeConfig& config, const ScoreMatrix& matrix,
                         std::span<const std::uint32_t> rows,
                         SplitLabeling labeling = SplitLabeling::majority);

struct SplitChoice {
  NodeConfig config;
  double gain = 0.0;
};

/// Exhaustive search over every non-empty subset of size 1..s, every
/// operator and every grid threshold. Returns the gain-maximizing candidate
/// among those with gain > 0 and both children strictly larger than
/// min_samples; ties fall to canonical_config_less. Returns nullopt when no
/// candidate qualifies. With threads > 1 the candidate set is partitioned
/// and reduced under the same total order, so the result is identical to
/// the sequential one.
std::optional<SplitChoice> best_split(const ScoreMatrix& matrix,
                                      std::span<const std::uint32_t> rows, const Hyperparams& hp,
                                      SplitLabeling labeling = SplitLabeling::majority,
                                      unsigned threads = 1,
                                      std::uint64_t* candidates_evaluated = nullptr);

struct TrainStats {
  // One entry per node where the split search ran (all nodes above max
  // depth), in growth order.
  std::vector<std::uint64_t> candidates_per_node;
};

/// Greedy recursive induction. Deterministic for fixed input; record order
/// does not matter.
FuzzyTree grow(const ScoreMatrix& matrix, const Hyperparams& hp,
               SplitLabeling labeling = SplitLabeling::majority, unsigned threads = 1,
               TrainStats* stats = nullptr);

enum class Branch : std::uint8_t { left = 0, right = 1 };

struct Prediction {
  Label label = Label::fake;
  std::vector<std::pair<NodeConfig, Branch>> path;  // root to leaf
};

/// Traverses from the root: right (fake-ward) when the local prediction
/// exceeds the threshold, left otherwise.
Prediction predict(const FuzzyTree& tree, std::span<const double> features);

struct FuzzyRule {
  std::vector<std::string> conditions;  // one clause per internal node on the path
  Label conclusion = Label::fake;
  std::vector<std::pair<NodeConfig, Branch>> path;
};

/// One rule per leaf, in left-to-right leaf order. max renders as OR-joined
/// "suggests fake" clauses, min as AND-joined, mean/median as a threshold
/// on the fused opinion; left branches negate the clause.
std::vector<FuzzyRule> extract_rules(const FuzzyTree& tree);

/// Numeric replay of a rule's path; a sample matches exactly one rule.
bool rule_matches(const FuzzyRule& rule, std::span<const double> features);

std::string rule_text(const FuzzyRule& rule);

/// JSON tree document, version 1. Detector references serialize by name.
std::string serialize(const FuzzyTree& tree);
FuzzyTree deserialize(const std::string& document);

}  // namespace fdt
