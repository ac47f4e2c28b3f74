#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdt/fuzzy_tree.hpp"
#include "fdt/score_model.hpp"

namespace fdt {

struct Candidate {
  NodeConfig config;
  double gain = 0.0;
  std::uint64_t left_count = 0;
  std::uint64_t right_count = 0;
};

/// Every (subset, operator, threshold) candidate, sorted by gain descending
/// with ties in canonical config order. Covers exactly
/// sum_{k=1..min(s,M)} C(M,k) * 4 * g entries.
struct CandidateReport {
  std::vector<Candidate> candidates;
};

/// Brute-force enumeration of the full candidate space with its own plain
/// recomputation of the local prediction and the gain; shares no scoring
/// code with the trainer. Slow on purpose; it is the reference.
CandidateReport enumerate_all(const ScoreMatrix& matrix, std::span<const std::uint32_t> rows,
                              const Hyperparams& hp,
                              SplitLabeling labeling = SplitLabeling::majority);

/// First candidate in report order with gain > 0 and both children strictly
/// larger than min_samples; nullopt when none qualifies. This is the value
/// best_split must reproduce.
std::optional<Candidate> top_qualifying(const CandidateReport& report, const Hyperparams& hp);

/// CSV dump: subset,operator,threshold,gain,left_count,right_count.
/// Subsets render as detector names joined by '+'.
std::string report_to_csv(const CandidateReport& report, const std::vector<std::string>& names);

struct CertificationIssue {
  std::string node_path;  // "root", "root.left.right", ...
  std::string message;
};

struct CertificationVerdict {
  bool passed = false;
  std::vector<CertificationIssue> issues;
};

/// Replays the training partition top-down: at every internal node the
/// stored config must equal the oracle's top qualifying candidate and the
/// stored gain must match it exactly; leaves must carry the replayed counts
/// and the majority label. Any mismatch is reported with its node path.
CertificationVerdict certify_tree(const FuzzyTree& tree, const ScoreMatrix& matrix,
                                  const Hyperparams& hp, SplitLabeling labeling);

/// Convenience overload using the tree's stored hyperparameters.
CertificationVerdict certify_tree(const FuzzyTree& tree, const ScoreMatrix& matrix);

}  // namespace fdt
