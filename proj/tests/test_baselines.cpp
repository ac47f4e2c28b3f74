#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fdt/baselines.hpp"
#include "test_util.hpp"

using namespace fdt;

TEST_CASE("majority_vote binarizes at 0.5 with ties to fake") {
  const std::vector<double> two_of_three = {1.0, 1.0, 0.0};
  CHECK(majority_vote(two_of_three) == Label::fake);
  const std::vector<double> unanimous = {0.2, 0.3, 0.1};
  CHECK(majority_vote(unanimous) == Label::real);
  const std::vector<double> tie = {0.9, 0.1};
  CHECK(majority_vote(tie) == Label::fake);
  CHECK_THROWS_AS(majority_vote({}), Error);

  SUBCASE("invariant under feature permutation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> v(1 + rng() % 6);
      for (double& x : v) x = static_cast<double>(rng() % 101) / 100.0;
      const Label expected = majority_vote(v);
      for (int shuffle = 0; shuffle < 5; ++shuffle) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
        CHECK(majority_vote(v) == expected);
      }
    }
  }
}

TEST_CASE("train_logistic separates separable data") {
  const ScoreMatrix matrix = make_matrix(
      {{Label::real, {0.1}}, {Label::real, {0.2}}, {Label::fake, {0.8}}, {Label::fake, {0.9}}});
  const LogisticModel model = train_logistic(matrix);
  for (const auto& rec : matrix.records()) {
    CHECK(predict_logistic(model, rec.scores).label == rec.label);
  }
  CHECK(model.iterations == 2000);
  CHECK(model.final_loss == model.loss_trace.back());
}

TEST_CASE("zero iterations keep the zero model") {
  const ScoreMatrix matrix =
      make_matrix({{Label::real, {0.3, 0.4}}, {Label::fake, {0.6, 0.7}}});
  const LogisticModel model = train_logistic(matrix, 0.1, 0);
  CHECK(model.weights == std::vector<double>{0.0, 0.0});
  CHECK(model.bias == 0.0);
  const std::vector<double> any = {0.123, 0.456};
  const LogisticPrediction pred = predict_logistic(model, any);
  CHECK(pred.probability == 0.5);
  CHECK(pred.label == Label::real);  // strictly-greater rule
}

TEST_CASE("single-class training is rejected") {
  const ScoreMatrix matrix = make_matrix({{Label::fake, {0.5}}, {Label::fake, {0.6}}});
  CHECK_THROWS_AS(train_logistic(matrix), Error);
}

TEST_CASE("predict_logistic computes the sigmoid linear model") {
  LogisticModel model;
  model.weights = {10.0};
  model.bias = -5.0;
  const std::vector<double> one = {1.0};
  const LogisticPrediction hot = predict_logistic(model, one);
  CHECK(hot.probability == doctest::Approx(1.0 / (1.0 + std::exp(-5.0))).epsilon(1e-12));
  CHECK(hot.probability == doctest::Approx(0.9933).epsilon(1e-3));
  CHECK(hot.label == Label::fake);

  const std::vector<double> boundary = {0.5};
  const LogisticPrediction mid = predict_logistic(model, boundary);
  CHECK(mid.probability == 0.5);
  CHECK(mid.label == Label::real);

  const std::vector<double> wrong = {0.5, 0.5};
  CHECK_THROWS_AS(predict_logistic(model, wrong), Error);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  for (int instance = 0; instance < 5; ++instance) {
    const std::size_t n = 5 + rng() % 10;
    const std::size_t m = 1 + rng() % 3;
    std::vector<std::pair<Label, std::vector<double>>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> scores;
      for (std::size_t j = 0; j < m; ++j) {
        scores.push_back(static_cast<double>(rng() % 101) / 100.0);
      }
      rows.emplace_back(rng() % 2 == 0 ? Label::real : Label::fake, std::move(scores));
    }
    const ScoreMatrix matrix = make_matrix(std::move(rows));

    std::vector<double> weights(m);
    for (double& w : weights) w = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;
    const double bias = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;

    std::vector<double> grad(m);
    double grad_bias = 0.0;
    logistic_gradient(matrix, weights, bias, grad, grad_bias);

    const double h = 1e-6;
    auto check_close = [](double analytic, double numeric) {
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      CHECK(std::abs(analytic - numeric) / scale < 1e-6);
    };
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> up = weights, down = weights;
      up[j] += h;
      down[j] -= h;
      check_close(grad[j],
                  (logistic_loss(matrix, up, bias) - logistic_loss(matrix, down, bias)) / (2 * h));
    }
    check_close(grad_bias, (logistic_loss(matrix, weights, bias + h) -
                            logistic_loss(matrix, weights, bias - h)) /
                               (2 * h));
  }
}

TEST_CASE("training loss is non-increasing at the default rate") {
  std::mt19937_64 rng(23);
  for (int instance = 0; instance < 3; ++instance) {
    std::vector<std::pair<Label, std::vector<double>>> rows;
    for (int i = 0; i < 30; ++i) {
      rows.emplace_back(rng() % 2 == 0 ? Label::real : Label::fake,
                        std::vector<double>{static_cast<double>(rng() % 101) / 100.0,
                                            static_cast<double>(rng() % 101) / 100.0});
    }
    const ScoreMatrix matrix = make_matrix(std::move(rows));
    const LogisticModel model = train_logistic(matrix, 0.1, 300);
    REQUIRE(model.loss_trace.size() == 301);
    for (std::size_t i = 1; i < model.loss_trace.size(); ++i) {
      CHECK(model.loss_trace[i] <= model.loss_trace[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("logistic model persists as JSON") {
  const ScoreMatrix matrix = make_matrix(
      {{Label::real, {0.1, 0.9}}, {Label::fake, {0.8, 0.2}}, {Label::fake, {0.9, 0.4}}});
  const LogisticModel model = train_logistic(matrix, 0.1, 50);
  const LogisticModel loaded = logistic_from_json(logistic_to_json(model));
  CHECK(loaded.weights == model.weights);
  CHECK(loaded.bias == model.bias);
  CHECK_THROWS_AS(logistic_from_json("{}"), Error);
  CHECK_THROWS_AS(logistic_from_json("nope"), Error);
}
