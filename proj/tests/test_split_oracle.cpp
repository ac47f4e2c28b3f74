#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fdt/fuzzy_tree.hpp"
#include "fdt/split_oracle.hpp"
#include "test_util.hpp"

using namespace fdt;

namespace {

std::vector<std::uint32_t> all_rows(const ScoreMatrix& matrix) {
  std::vector<std::uint32_t> rows(matrix.size());
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

ScoreMatrix random_matrix(std::uint64_t seed, std::size_t n, std::size_t m) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Label, std::vector<double>>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> scores;
    for (std::size_t j = 0; j < m; ++j) {
      scores.push_back(static_cast<double>(rng() % 21) / 20.0);
    }
    rows.emplace_back(rng() % 2 == 0 ? Label::real : Label::fake, std::move(scores));
  }
  return make_matrix(std::move(rows));
}

}  // namespace

TEST_CASE("enumerate_all covers the closed-form candidate count") {
  SUBCASE("M=6, s=3, g=10 gives 1640 candidates") {
    const ScoreMatrix matrix = random_matrix(1, 12, 6);
    Hyperparams hp;  // s=3, g=10
    const CandidateReport report = enumerate_all(matrix, all_rows(matrix), hp);
    CHECK(report.candidates.size() == 1640);  // (6+15+20) * 4 * 10
  }
  SUBCASE("M=1, s=1, g=2 gives 8 candidates") {
    const ScoreMatrix matrix = random_matrix(2, 6, 1);
    Hyperparams hp;
    hp.max_split_models = 1;
    hp.thr_grid_size = 2;
    const CandidateReport report = enumerate_all(matrix, all_rows(matrix), hp);
    CHECK(report.candidates.size() == 8);
  }
  SUBCASE("count matches the closed form across M, s, g") {
    for (std::uint32_t m = 1; m <= 8; ++m) {
      for (std::uint32_t s = 1; s <= 3; ++s) {
        for (std::uint32_t g : {2u, 7u, 16u}) {
          const ScoreMatrix matrix = random_matrix(100 + m, 8, m);
          Hyperparams hp;
          hp.max_split_models = s;
          hp.thr_grid_size = g;
          auto choose = [](std::uint64_t n, std::uint64_t k) {
            std::uint64_t result = 1;
            for (std::uint64_t i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
            return result;
          };
          std::uint64_t subsets = 0;
          for (std::uint32_t k = 1; k <= std::min(s, m); ++k) subsets += choose(m, k);
          const CandidateReport report = enumerate_all(matrix, all_rows(matrix), hp);
          CHECK(report.candidates.size() == subsets * 4 * g);
        }
      }
    }
  }
}

TEST_CASE("the separable instance tops out at gain 0.5") {
  const ScoreMatrix matrix = make_matrix(
      {{Label::real, {0.1}}, {Label::real, {0.2}}, {Label::fake, {0.8}}, {Label::fake, {0.9}}});
  const CandidateReport report = enumerate_all(matrix, all_rows(matrix), Hyperparams{});
  REQUIRE_FALSE(report.candidates.empty());
  CHECK(report.candidates.front().gain == 0.5);
  const auto top = top_qualifying(report, Hyperparams{});
  REQUIRE(top.has_value());
  CHECK(top->gain == 0.5);
  CHECK(top->left_count == 2);
  CHECK(top->right_count == 2);
}

TEST_CASE("oracle gains agree exactly with evaluate_split on every candidate") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const ScoreMatrix matrix = random_matrix(seed, 30, 3);
    const auto rows = all_rows(matrix);
    Hyperparams hp;
    hp.thr_grid_size = 6;
    for (SplitLabeling labeling : {SplitLabeling::majority, SplitLabeling::fixed}) {
      const CandidateReport report = enumerate_all(matrix, rows, hp, labeling);
      for (const Candidate& candidate : report.candidates) {
        const SplitEval eval = evaluate_split(candidate.config, matrix, rows, labeling);
        CHECK(eval.gain == candidate.gain);  // exact equality
        CHECK(eval.left.size() == candidate.left_count);
        CHECK(eval.right.size() == candidate.right_count);
      }
    }
  }
}

TEST_CASE("best_split reproduces the oracle's top qualifying candidate") {
  for (std::uint64_t seed = 60; seed < 72; ++seed) {
    std::mt19937_64 rng(seed);
    const ScoreMatrix matrix = random_matrix(seed, 10 + rng() % 40, 1 + rng() % 4);
    const auto rows = all_rows(matrix);
    Hyperparams hp;
    hp.max_split_models = 1 + static_cast<std::uint32_t>(rng() % 3);
    hp.thr_grid_size = 2 + static_cast<std::uint32_t>(rng() % 9);
    hp.min_samples = static_cast<std::uint32_t>(rng() % 3);
    const SplitLabeling labeling =
        seed % 2 == 0 ? SplitLabeling::majority : SplitLabeling::fixed;

    const auto fast = best_split(matrix, rows, hp, labeling);
    const auto top = top_qualifying(enumerate_all(matrix, rows, hp, labeling), hp);
    REQUIRE(fast.has_value() == top.has_value());
    if (fast) {
      CHECK(fast->config == top->config);
      CHECK(fast->gain == top->gain);
    }
  }
}

TEST_CASE("certify_tree validates fresh trees and spots tampering") {
  const ScoreMatrix matrix = random_matrix(77, 60, 3);
  const FuzzyTree tree = grow(matrix, Hyperparams{});

  SUBCASE("freshly grown tree passes") {
    const CertificationVerdict verdict = certify_tree(tree, matrix);
    CAPTURE(verdict.issues.empty() ? "" : verdict.issues[0].message);
    CHECK(verdict.passed);
    CHECK(verdict.issues.empty());
  }
  SUBCASE("perturbed root threshold fails naming the root") {
    REQUIRE_FALSE(tree.root->is_leaf());
    auto doc = nlohmann::json::parse(serialize(tree));
    const double tau = doc["root"]["threshold"].get<double>();
    doc["root"]["threshold"] = tau == 0.5 ? 0.4999 : 0.5;
    const FuzzyTree tampered = deserialize(doc.dump());
    const CertificationVerdict verdict = certify_tree(tampered, matrix);
    CHECK_FALSE(verdict.passed);
    REQUIRE_FALSE(verdict.issues.empty());
    CHECK(verdict.issues[0].node_path == "root");
  }
  SUBCASE("depth-0 tree passes vacuously") {
    const ScoreMatrix pure = make_matrix({{Label::fake, {0.3}}, {Label::fake, {0.6}}});
    const FuzzyTree stump = grow(pure, Hyperparams{});
    REQUIRE(stump.depth() == 0);
    CHECK(certify_tree(stump, pure).passed);
  }
  SUBCASE("registry mismatch is an error") {
    const ScoreMatrix other = random_matrix(78, 10, 2);
    CHECK_THROWS_AS(certify_tree(tree, other), Error);
  }
}

TEST_CASE("candidate report dumps as CSV") {
  const ScoreMatrix matrix = random_matrix(5, 8, 2);
  Hyperparams hp;
  hp.max_split_models = 2;
  hp.thr_grid_size = 3;
  const CandidateReport report = enumerate_all(matrix, all_rows(matrix), hp);
  const std::string csv = report_to_csv(report, matrix.detector_names());

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "subset,operator,threshold,gain,left_count,right_count");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == report.candidates.size());
  CHECK(csv.find("det0+det1") != std::string::npos);
}
