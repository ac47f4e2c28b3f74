#pragma once

#include <span>
#include <string>
#include <vector>

#include "fdt/score_model.hpp"

namespace fdt {

/// Binarizes each score at 0.5 (score > 0.5 is a fake vote) and returns the
/// vote winner; ties go to fake, same rule as tree leaves.
Label majority_vote(std::span<const double> features);

struct LogisticModel {
  std::vector<double> weights;  // one per detector
  double bias = 0.0;
  std::uint32_t iterations = 0;
  double final_loss = 0.0;
  // Mean log-loss before any update and after each one; monotone
  // non-increasing for a small enough learning rate.
  std::vector<double> loss_trace;
};

/// Mean log-loss of the sigmoid linear model over the matrix.
double logistic_loss(const ScoreMatrix& matrix, std::span<const double> weights, double bias);

/// Analytic gradient of logistic_loss. grad_weights must have one slot per
/// detector.
void logistic_gradient(const ScoreMatrix& matrix, std::span<const double> weights, double bias,
                       std::span<double> grad_weights, double& grad_bias);

/// Full-batch gradient descent from zero initialization; deterministic (the
/// seed is accepted for interface symmetry and ignored). Requires both
/// classes in the matrix.
LogisticModel train_logistic(const ScoreMatrix& matrix, double learning_rate = 0.1,
                             std::uint32_t iterations = 2000, std::uint64_t seed = 0);

struct LogisticPrediction {
  double probability = 0.5;
  Label label = Label::real;
};

/// sigmoid(w . f + b); label fake iff probability strictly exceeds 0.5.
LogisticPrediction predict_logistic(const LogisticModel& model, std::span<const double> features);

/// {"weights":[...],"bias":...}
std::string logistic_to_json(const LogisticModel& model);
LogisticModel logistic_from_json(const std::string& text);

}  // namespace fdt
