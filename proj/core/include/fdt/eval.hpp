#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdt/baselines.hpp"
#include "fdt/fuzzy_tree.hpp"
#include "fdt/score_model.hpp"

namespace fdt {

/// Anything that turns a score vector into a label. Implementations expose
/// the registry they expect so evaluation can reject mismatched matrices.
class LabelPredictor {
public:
  virtual ~LabelPredictor() = default;
  virtual const std::vector<std::string>& detector_names() const = 0;
  virtual Label predict_label(std::span<const double> scores) const = 0;
};

class TreePredictor final : public LabelPredictor {
public:
  explicit TreePredictor(const FuzzyTree& tree) : tree_(&tree) {}
  const std::vector<std::string>& detector_names() const override {
    return tree_->detector_names;
  }
  Label predict_label(std::span<const double> scores) const override {
    return predict(*tree_, scores).label;
  }

private:
  const FuzzyTree* tree_;
};

class MajorityVotePredictor final : public LabelPredictor {
public:
  explicit MajorityVotePredictor(std::vector<std::string> names) : names_(std::move(names)) {}
  const std::vector<std::string>& detector_names() const override { return names_; }
  Label predict_label(std::span<const double> scores) const override {
    return majority_vote(scores);
  }

private:
  std::vector<std::string> names_;
};

class LogisticPredictor final : public LabelPredictor {
public:
  LogisticPredictor(LogisticModel model, std::vector<std::string> names)
      : model_(std::move(model)), names_(std::move(names)) {}
  const std::vector<std::string>& detector_names() const override { return names_; }
  Label predict_label(std::span<const double> scores) const override {
    return predict_logistic(model_, scores).label;
  }

private:
  LogisticModel model_;
  std::vector<std::string> names_;
};

/// One detector on its own, binarized at 0.5.
class SingleDetectorPredictor final : public LabelPredictor {
public:
  SingleDetectorPredictor(std::vector<std::string> names, std::size_t index)
      : names_(std::move(names)), index_(index) {}
  const std::vector<std::string>& detector_names() const override { return names_; }
  Label predict_label(std::span<const double> scores) const override {
    return scores[index_] > 0.5 ? Label::fake : Label::real;
  }

private:
  std::vector<std::string> names_;
  std::size_t index_;
};

struct BenchmarkAccuracy {
  std::string benchmark;
  double accuracy = 0.0;
  std::uint64_t sample_count = 0;
};

struct EvalReport {
  std::vector<BenchmarkAccuracy> per_benchmark;  // first-appearance order
  double overall = 0.0;   // sample-weighted across benchmarks
  double avg = 0.0;       // unweighted mean of per-benchmark accuracies
  double stddev = 0.0;    // population std across benchmarks
  std::optional<double> robustness;  // mean accuracy over perturbed matrices
};

/// Fraction of records the predictor labels correctly.
double accuracy_on(const LabelPredictor& predictor, const ScoreMatrix& matrix);

/// Groups records of all matrices by benchmark tag and aggregates. The
/// optional perturbed list feeds the robustness mean (uniform over the
/// flattened channel x severity list).
EvalReport evaluate(const LabelPredictor& predictor, std::span<const ScoreMatrix> matrices,
                    std::span<const ScoreMatrix> perturbed = {});

std::string report_to_json(const EvalReport& report);

/// Two-row aligned table: benchmark tags then Overall / Avg. / Std. /
/// Robustness, mirroring the usual results-table column order.
std::string report_to_text(const EvalReport& report);

struct PromptGridRecord {
  std::uint32_t system_idx = 1;    // 1..6
  std::uint32_t question_idx = 1;  // 1..7
  std::uint32_t output_idx = 1;    // 1..4
  double accuracy = 0.0;

  bool operator==(const PromptGridRecord&) const = default;
};

/// Argmax by accuracy; ties go to the lowest (system, question, output)
/// triple. Rejects duplicate triples and out-of-range indices.
PromptGridRecord select_prompt(std::span<const PromptGridRecord> grid);

/// CSV with header system_idx,question_idx,output_idx,accuracy, rows ordered
/// by (system, question, output).
std::string export_heatmap(std::span<const PromptGridRecord> grid);

std::vector<PromptGridRecord> parse_heatmap_csv(const std::string& text);

}  // namespace fdt
