#include "fdt/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace fdt {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double linear_term(std::span<const double> weights, double bias,
                   std::span<const double> features) {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * features[j];
  return z;
}

}  // namespace

Label majority_vote(std::span<const double> features) {
  if (features.empty()) throw Error("majority_vote requires a non-empty feature vector");
  std::size_t fake_votes = 0;
  for (double v : features) {
    if (v > 0.5) ++fake_votes;
  }
  const std::size_t real_votes = features.size() - fake_votes;
  return fake_votes >= real_votes ? Label::fake : Label::real;
}

double logistic_loss(const ScoreMatrix& matrix, std::span<const double> weights, double bias) {
  if (weights.size() != matrix.detector_count()) {
    throw Error("weight arity does not match the registry");
  }
  if (matrix.size() == 0) throw Error("logistic_loss requires a non-empty matrix");
  double total = 0.0;
  for (const auto& rec : matrix.records()) {
    const double z = linear_term(weights, bias, rec.scores);
    total += rec.label == Label::fake ? softplus(-z) : softplus(z);
  }
  return total / static_cast<double>(matrix.size());
}

void logistic_gradient(const ScoreMatrix& matrix, std::span<const double> weights, double bias,
                       std::span<double> grad_weights, double& grad_bias) {
  if (weights.size() != matrix.detector_count() || grad_weights.size() != weights.size()) {
    throw Error("weight arity does not match the registry");
  }
  if (matrix.size() == 0) throw Error("logistic_gradient requires a non-empty matrix");
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  grad_bias = 0.0;
  for (const auto& rec : matrix.records()) {
    const double z = linear_term(weights, bias, rec.scores);
    const double error = sigmoid(z) - unify_binary(rec.label);
    for (std::size_t j = 0; j < weights.size(); ++j) grad_weights[j] += error * rec.scores[j];
    grad_bias += error;
  }
  const double n = static_cast<double>(matrix.size());
  for (double& g : grad_weights) g /= n;
  grad_bias /= n;
}

LogisticModel train_logistic(const ScoreMatrix& matrix, double learning_rate,
                             std::uint32_t iterations, std::uint64_t seed) {
  (void)seed;  // zero init + full batch; nothing to randomize
  if (matrix.size() == 0) throw Error("cannot train on an empty matrix");
  bool has_real = false, has_fake = false;
  for (const auto& rec : matrix.records()) {
    (rec.label == Label::real ? has_real : has_fake) = true;
  }
  if (!has_real || !has_fake) {
    throw Error("logistic training requires both classes in the matrix");
  }

  LogisticModel model;
  model.weights.assign(matrix.detector_count(), 0.0);
  model.bias = 0.0;
  model.iterations = iterations;
  model.loss_trace.reserve(iterations + 1);
  model.loss_trace.push_back(logistic_loss(matrix, model.weights, model.bias));

  std::vector<double> grad(matrix.detector_count());
  for (std::uint32_t it = 0; it < iterations; ++it) {
    double grad_bias = 0.0;
    logistic_gradient(matrix, model.weights, model.bias, grad, grad_bias);
    for (std::size_t j = 0; j < grad.size(); ++j) model.weights[j] -= learning_rate * grad[j];
    model.bias -= learning_rate * grad_bias;
    model.loss_trace.push_back(logistic_loss(matrix, model.weights, model.bias));
  }
  model.final_loss = model.loss_trace.back();
  return model;
}

LogisticPrediction predict_logistic(const LogisticModel& model,
                                    std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw Error("feature arity " + std::to_string(features.size()) +
                " does not match the model's " + std::to_string(model.weights.size()) +
                " weights");
  }
  LogisticPrediction prediction;
  prediction.probability = sigmoid(linear_term(model.weights, model.bias, features));
  prediction.label = prediction.probability > 0.5 ? Label::fake : Label::real;
  return prediction;
}

std::string logistic_to_json(const LogisticModel& model) {
  nlohmann::ordered_json doc;
  doc["weights"] = model.weights;
  doc["bias"] = model.bias;
  return doc.dump(2) + "\n";
}

LogisticModel logistic_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed logistic model JSON: ") + e.what());
  }
  if (!doc.contains("weights") || !doc.contains("bias")) {
    throw Error("logistic model JSON needs 'weights' and 'bias'");
  }
  LogisticModel model;
  model.weights = doc.at("weights").get<std::vector<double>>();
  model.bias = doc.at("bias").get<double>();
  return model;
}

}  // namespace fdt
