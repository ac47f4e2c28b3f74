#include "fdt/split_oracle.hpp"

#include <algorithm>
#include <sstream>

namespace fdt {

namespace {

// Plain loop-and-sort recomputation of the four operators, kept separate
// from the trainer's path on purpose.
double naive_combine(EnsembleOperator op, const std::vector<double>& values) {
  switch (op) {
    case EnsembleOperator::mean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
    case EnsembleOperator::min: {
      double best = values[0];
      for (double v : values) {
        if (v < best) best = v;
      }
      return best;
    }
    case EnsembleOperator::max: {
      double best = values[0];
      for (double v : values) {
        if (v > best) best = v;
      }
      return best;
    }
    case EnsembleOperator::median: {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      if (n % 2 == 1) return sorted[n / 2];
      return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    }
  }
  throw Error("invalid operator value");
}

double naive_local_prediction(const std::vector<std::uint32_t>& subset, EnsembleOperator op,
                              const std::vector<double>& scores) {
  std::vector<double> values;
  values.reserve(subset.size());
  for (std::uint32_t d : subset) values.push_back(scores[d]);
  return naive_combine(op, values);
}

// The oracle's own copy of the canonical order: subset size, then the index
// list lexicographically, then mean < min < max < median, then threshold.
bool config_before(const NodeConfig& a, const NodeConfig& b) {
  if (a.detectors.size() != b.detectors.size()) return a.detectors.size() < b.detectors.size();
  for (std::size_t i = 0; i < a.detectors.size(); ++i) {
    if (a.detectors[i] != b.detectors[i]) return a.detectors[i] < b.detectors[i];
  }
  if (a.op != b.op) return static_cast<int>(a.op) < static_cast<int>(b.op);
  return a.threshold < b.threshold;
}

void subsets_of_size(std::uint32_t m, std::uint32_t size, std::uint32_t next,
                     std::vector<std::uint32_t>& current,
                     std::vector<std::vector<std::uint32_t>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::uint32_t d = next; d < m; ++d) {
    current.push_back(d);
    subsets_of_size(m, size, d + 1, current, out);
    current.pop_back();
  }
}

struct ReplayFrame {
  const TreeNode* node;
  std::string path;
  std::vector<std::uint32_t> rows;
};

}  // namespace

CandidateReport enumerate_all(const ScoreMatrix& matrix, std::span<const std::uint32_t> rows,
                              const Hyperparams& hp, SplitLabeling labeling) {
  hp.validate();
  if (rows.empty()) throw Error("enumerate_all requires a non-empty sample set");
  const auto m = static_cast<std::uint32_t>(matrix.detector_count());
  if (m == 0) throw Error("enumerate_all requires at least one detector");

  std::uint64_t n_real = 0;
  for (std::uint32_t i : rows) {
    if (matrix.records()[i].label == Label::real) ++n_real;
  }
  const std::uint64_t n_fake = rows.size() - n_real;
  const double majority_acc = static_cast<double>(std::max(n_real, n_fake)) /
                              static_cast<double>(rows.size());

  std::vector<std::vector<std::uint32_t>> subsets;
  std::vector<std::uint32_t> current;
  for (std::uint32_t k = 1; k <= std::min(hp.max_split_models, m); ++k) {
    subsets_of_size(m, k, 0, current, subsets);
  }

  constexpr EnsembleOperator ops[] = {EnsembleOperator::mean, EnsembleOperator::min,
                                      EnsembleOperator::max, EnsembleOperator::median};

  CandidateReport report;
  report.candidates.reserve(subsets.size() * 4 * hp.thr_grid_size);
  std::vector<double> predictions(rows.size());
  for (const auto& subset : subsets) {
    for (EnsembleOperator op : ops) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        predictions[i] = naive_local_prediction(subset, op, matrix.records()[rows[i]].scores);
      }
      for (std::uint32_t k = 1; k <= hp.thr_grid_size; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(hp.thr_grid_size + 1);
        std::uint64_t lr = 0, lf = 0, rr = 0, rf = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const bool fake = matrix.records()[rows[i]].label == Label::fake;
          if (predictions[i] > tau) {
            (fake ? rf : rr) += 1;
          } else {
            (fake ? lf : lr) += 1;
          }
        }
        const std::uint64_t correct = labeling == SplitLabeling::majority
                                          ? std::max(lr, lf) + std::max(rr, rf)
                                          : lr + rf;
        Candidate candidate;
        candidate.config = NodeConfig{subset, op, tau};
        candidate.gain = static_cast<double>(correct) / static_cast<double>(rows.size()) -
                         majority_acc;
        candidate.left_count = lr + lf;
        candidate.right_count = rr + rf;
        report.candidates.push_back(std::move(candidate));
      }
    }
  }

  std::stable_sort(report.candidates.begin(), report.candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.gain != b.gain) return a.gain > b.gain;
                     return config_before(a.config, b.config);
                   });
  return report;
}

std::optional<Candidate> top_qualifying(const CandidateReport& report, const Hyperparams& hp) {
  for (const Candidate& candidate : report.candidates) {
    if (candidate.gain > 0.0 && candidate.left_count > hp.min_samples &&
        candidate.right_count > hp.min_samples) {
      return candidate;
    }
  }
  return std::nullopt;
}

std::string report_to_csv(const CandidateReport& report, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "subset,operator,threshold,gain,left_count,right_count\n";
  for (const Candidate& candidate : report.candidates) {
    std::string subset;
    for (std::size_t j = 0; j < candidate.config.detectors.size(); ++j) {
      if (j > 0) subset += '+';
      const std::uint32_t d = candidate.config.detectors[j];
      subset += d < names.size() ? names[d] : "det" + std::to_string(d);
    }
    out << subset << ',' << to_string(candidate.config.op) << ','
        << double_to_string(candidate.config.threshold) << ',' << double_to_string(candidate.gain)
        << ',' << candidate.left_count << ',' << candidate.right_count << '\n';
  }
  return out.str();
}

CertificationVerdict certify_tree(const FuzzyTree& tree, const ScoreMatrix& matrix,
                                  const Hyperparams& hp, SplitLabeling labeling) {
  if (tree.detector_names != matrix.detector_names()) {
    throw Error("tree registry does not match the score matrix registry");
  }
  if (!tree.root) throw Error("tree has no root");

  CertificationVerdict verdict;
  std::vector<ReplayFrame> stack;
  std::vector<std::uint32_t> all(matrix.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  stack.push_back({tree.root.get(), "root", std::move(all)});

  while (!stack.empty()) {
    ReplayFrame frame = std::move(stack.back());
    stack.pop_back();

    if (frame.node->is_leaf()) {
      const LeafNode& leaf = frame.node->leaf();
      std::uint64_t n_real = 0;
      for (std::uint32_t i : frame.rows) {
        if (matrix.records()[i].label == Label::real) ++n_real;
      }
      const std::uint64_t n_fake = frame.rows.size() - n_real;
      if (leaf.n_real != n_real || leaf.n_fake != n_fake) {
        verdict.issues.push_back(
            {frame.path, "leaf counts (" + std::to_string(leaf.n_real) + "," +
                             std::to_string(leaf.n_fake) + ") differ from replayed (" +
                             std::to_string(n_real) + "," + std::to_string(n_fake) + ")"});
      } else if (leaf.label != majority_label(n_real, n_fake)) {
        verdict.issues.push_back({frame.path, "leaf label is not the replayed majority"});
      }
      continue;
    }

    const InternalNode& node = frame.node->internal();
    if (frame.rows.empty()) {
      verdict.issues.push_back({frame.path, "internal node received no training samples"});
      continue;
    }
    const CandidateReport report = enumerate_all(matrix, frame.rows, hp, labeling);
    const auto top = top_qualifying(report, hp);
    if (!top) {
      verdict.issues.push_back({frame.path, "no qualifying split exists but node is internal"});
    } else if (!(top->config == node.config)) {
      verdict.issues.push_back(
          {frame.path, "stored config is not the oracle optimum (expected " +
                           to_string(top->config.op) + " at " +
                           double_to_string(top->config.threshold) + ")"});
    } else if (top->gain != node.gain) {
      verdict.issues.push_back({frame.path, "stored gain " + double_to_string(node.gain) +
                                                " differs from oracle gain " +
                                                double_to_string(top->gain)});
    }

    // Replay the recorded partition with the oracle's own predicate.
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t i : frame.rows) {
      const double p = naive_local_prediction(node.config.detectors, node.config.op,
                                              matrix.records()[i].scores);
      (p > node.config.threshold ? right : left).push_back(i);
    }
    stack.push_back({node.right.get(), frame.path + ".right", std::move(right)});
    stack.push_back({node.left.get(), frame.path + ".left", std::move(left)});
  }

  verdict.passed = verdict.issues.empty();
  return verdict;
}

CertificationVerdict certify_tree(const FuzzyTree& tree, const ScoreMatrix& matrix) {
  return certify_tree(tree, matrix, tree.hyperparams, tree.split_labeling);
}

}  // namespace fdt
