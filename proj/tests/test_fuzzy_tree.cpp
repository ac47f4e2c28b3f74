#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "fdt/fuzzy_tree.hpp"
#include "test_util.hpp"

using namespace fdt;

namespace {

// The hand-enumerated 4-sample instance: two real samples scoring low, two
// fake samples scoring high on a single detector. Split accuracy at any
// threshold between 0.2 and 0.8 is 1.0, majority accuracy 0.5, so the best
// gain is 0.5.
ScoreMatrix separable_matrix() {
  return make_matrix({{Label::real, {0.1}},
                      {Label::real, {0.2}},
                      {Label::fake, {0.8}},
                      {Label::fake, {0.9}}});
}

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
      // lattice values half the time to force threshold ties
      if (rng() % 2 == 0) {
        scores.push_back(static_cast<double>(rng() % 21) / 20.0);
      } else {
        scores.push_back(static_cast<double>(rng() >> 11) * 0x1.0p-53);
      }
    }
    rows.emplace_back(rng() % 2 == 0 ? Label::real : Label::fake, std::move(scores));
  }
  return make_matrix(std::move(rows));
}

// Replays the training partition and checks the structural invariants:
// stored gains recompute exactly, both children exceed min_samples, leaves
// carry their majority label, and the depth bound holds.
void check_tree_invariants(const FuzzyTree& tree, const ScoreMatrix& matrix) {
  std::function<void(const TreeNode&, std::vector<std::uint32_t>, std::size_t)> walk =
      [&](const TreeNode& node, std::vector<std::uint32_t> rows, std::size_t depth) {
        CHECK(depth <= tree.hyperparams.max_depth);
        if (node.is_leaf()) {
          const auto& leaf = node.leaf();
          std::uint64_t n_real = 0;
          for (std::uint32_t i : rows) {
            n_real += matrix.records()[i].label == Label::real ? 1 : 0;
          }
          CHECK(leaf.n_real == n_real);
          CHECK(leaf.n_fake == rows.size() - n_real);
          CHECK(leaf.label == majority_label(leaf.n_real, leaf.n_fake));
          return;
        }
        const auto& internal = node.internal();
        const SplitEval eval =
            evaluate_split(internal.config, matrix, rows, tree.split_labeling);
        CHECK(eval.gain == internal.gain);  // bit-exact recomputation
        CHECK(internal.gain > 0.0);
        CHECK(eval.left.size() > tree.hyperparams.min_samples);
        CHECK(eval.right.size() > tree.hyperparams.min_samples);
        walk(*internal.left, eval.left, depth + 1);
        walk(*internal.right, eval.right, depth + 1);
      };
  walk(*tree.root, all_rows(matrix), 0);
}

}  // namespace

TEST_CASE("apply_operator implements the four fusion operators") {
  const std::vector<double> v1 = {0.2, 0.9, 0.4};
  CHECK(apply_operator(EnsembleOperator::max, v1) == 0.9);
  const std::vector<double> v2 = {0.0, 1.0};
  CHECK(apply_operator(EnsembleOperator::mean, v2) == 0.5);
  const std::vector<double> v3 = {0.1, 0.7, 0.3, 0.9};
  CHECK(apply_operator(EnsembleOperator::median, v3) == 0.5);  // (0.3+0.7)/2
  const std::vector<double> v4 = {0.3};
  CHECK(apply_operator(EnsembleOperator::min, v4) == 0.3);
  CHECK(apply_operator(EnsembleOperator::median, v1) == 0.4);
  CHECK_THROWS_AS(apply_operator(EnsembleOperator::mean, {}), Error);
}

TEST_CASE("max and min realize fuzzy OR and AND") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 5);
    for (double& x : v) x = static_cast<double>(rng() % 1000) / 999.0;
    double fuzzy_or = 0.0, fuzzy_and = 1.0;
    for (double x : v) {
      fuzzy_or = std::max(fuzzy_or, x);   // Godel t-conorm fold
      fuzzy_and = std::min(fuzzy_and, x); // Godel t-norm fold
    }
    CHECK(apply_operator(EnsembleOperator::max, v) == fuzzy_or);
    CHECK(apply_operator(EnsembleOperator::min, v) == fuzzy_and);
  }
}

TEST_CASE("local_prediction fuses the configured subset") {
  const std::vector<double> f1 = {0.2, 0.8, 0.1};
  CHECK(local_prediction({{0, 1, 2}, EnsembleOperator::max, 0.5}, f1) == 0.8);
  const std::vector<double> f2 = {0.2, 0.8};
  CHECK(local_prediction({{1}, EnsembleOperator::mean, 0.5}, f2) == 0.8);
  CHECK(local_prediction({{1}, EnsembleOperator::median, 0.5}, f2) == 0.8);
  const std::vector<double> f3 = {0.4, 0.6};
  CHECK(local_prediction({{0, 1}, EnsembleOperator::min, 0.5}, f3) == 0.4);
  CHECK_THROWS_AS(local_prediction({{5}, EnsembleOperator::mean, 0.5}, f3), Error);
}

TEST_CASE("majority_accuracy returns the dominant-class share") {
  const std::vector<Label> pure = {Label::fake, Label::fake, Label::fake};
  CHECK(majority_accuracy(pure) == 1.0);
  const std::vector<Label> balanced = {Label::real, Label::fake};
  CHECK(majority_accuracy(balanced) == 0.5);
  const std::vector<Label> two_thirds = {Label::real, Label::real, Label::fake};
  CHECK(majority_accuracy(two_thirds) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(majority_accuracy({}), Error);
}

TEST_CASE("evaluate_split scores the hand-enumerated instance") {
  const ScoreMatrix matrix = separable_matrix();
  const auto rows = all_rows(matrix);
  const NodeConfig config{{0}, EnsembleOperator::mean, 0.5};
  const SplitEval eval = evaluate_split(config, matrix, rows);
  CHECK(eval.gain == 0.5);  // 1.0 - 0.5, exactly representable
  CHECK(eval.left.size() == 2);
  CHECK(eval.right.size() == 2);

  SUBCASE("one-sided split gains nothing") {
    const SplitEval skewed =
        evaluate_split({{0}, EnsembleOperator::mean, 0.95}, matrix, rows);
    CHECK(skewed.gain <= 0.0);
    CHECK(skewed.right.empty());
  }
  SUBCASE("fixed labeling agrees on this separable instance") {
    const SplitEval fixed = evaluate_split(config, matrix, rows, SplitLabeling::fixed);
    CHECK(fixed.gain == 0.5);
  }
}

TEST_CASE("pure nodes admit no positive gain under any config") {
  const ScoreMatrix matrix = make_matrix(
      {{Label::fake, {0.2, 0.9}}, {Label::fake, {0.7, 0.3}}, {Label::fake, {0.5, 0.5}}});
  const auto rows = all_rows(matrix);
  for (const auto& subset :
       std::vector<std::vector<std::uint32_t>>{{0}, {1}, {0, 1}}) {
    for (EnsembleOperator op : {EnsembleOperator::mean, EnsembleOperator::min,
                                EnsembleOperator::max, EnsembleOperator::median}) {
      for (int k = 1; k <= 10; ++k) {
        const double tau = k / 11.0;
        CHECK(evaluate_split({subset, op, tau}, matrix, rows).gain <= 0.0);
      }
    }
  }
}

TEST_CASE("best_split finds the separating threshold") {
  const ScoreMatrix matrix = separable_matrix();
  const auto rows = all_rows(matrix);
  const Hyperparams hp;  // defaults 3, 0, 4, 10

  const auto choice = best_split(matrix, rows, hp);
  REQUIRE(choice.has_value());
  CHECK(choice->gain == 0.5);
  CHECK(choice->config.detectors == std::vector<std::uint32_t>{0});
  CHECK(choice->config.threshold > 0.2);
  CHECK(choice->config.threshold < 0.8);
  // canonical tie-break: mean comes first, and 3/11 is the smallest
  // threshold separating the classes
  CHECK(choice->config.op == EnsembleOperator::mean);
  CHECK(choice->config.threshold == 3.0 / 11.0);

  SUBCASE("pure node yields none") {
    const ScoreMatrix pure =
        make_matrix({{Label::fake, {0.1}}, {Label::fake, {0.9}}});
    CHECK_FALSE(best_split(pure, all_rows(pure), hp).has_value());
  }
  SUBCASE("min_samples >= N-1 forbids every partition") {
    Hyperparams strict = hp;
    strict.min_samples = static_cast<std::uint32_t>(matrix.size()) - 1;
    CHECK_FALSE(best_split(matrix, rows, strict).has_value());
  }
  SUBCASE("candidate count is the closed form") {
    std::uint64_t candidates = 0;
    best_split(matrix, rows, hp, SplitLabeling::majority, 1, &candidates);
    CHECK(candidates == 1 * 4 * 10);  // M=1, s capped at 1 subset
  }
}

TEST_CASE("grow builds the expected tiny trees") {
  const Hyperparams hp;

  SUBCASE("separable data gives a depth-1 stump with pure leaves") {
    const ScoreMatrix matrix = separable_matrix();
    const FuzzyTree tree = grow(matrix, hp);
    CHECK(tree.depth() == 1);
    CHECK(tree.node_count() == 3);
    REQUIRE_FALSE(tree.root->is_leaf());
    const auto& internal = tree.root->internal();
    CHECK(internal.gain == 0.5);
    REQUIRE(internal.left->is_leaf());
    REQUIRE(internal.right->is_leaf());
    CHECK(internal.left->leaf().label == Label::real);
    CHECK(internal.left->leaf().n_real == 2);
    CHECK(internal.left->leaf().n_fake == 0);
    CHECK(internal.right->leaf().label == Label::fake);

    // training accuracy 1.0
    for (const auto& rec : matrix.records()) {
      CHECK(predict(tree, rec.scores).label == rec.label);
    }
  }
  SUBCASE("uniform labels give a single leaf") {
    const ScoreMatrix matrix =
        make_matrix({{Label::real, {0.1}}, {Label::real, {0.9}}});
    const FuzzyTree tree = grow(matrix, hp);
    CHECK(tree.depth() == 0);
    REQUIRE(tree.root->is_leaf());
    CHECK(tree.root->leaf().label == Label::real);
  }
  SUBCASE("max_depth 1 caps the tree at one internal node") {
    Hyperparams shallow = hp;
    shallow.max_depth = 1;
    const FuzzyTree tree = grow(random_matrix(5, 40, 3), shallow);
    CHECK(tree.depth() <= 1);
  }
  SUBCASE("empty matrix is rejected") {
    const ScoreMatrix empty(std::vector<DetectorMeta>{{"d"}}, {});
    CHECK_THROWS_AS(grow(empty, hp), Error);
  }
}

TEST_CASE("predict traverses with strict threshold comparison") {
  const FuzzyTree tree = grow(separable_matrix(), Hyperparams{});
  REQUIRE(tree.depth() == 1);

  const std::vector<double> fake_scores = {0.9};
  const Prediction fake_pred = predict(tree, fake_scores);
  CHECK(fake_pred.label == Label::fake);
  CHECK(fake_pred.path.size() == 1);
  CHECK(fake_pred.path[0].second == Branch::right);

  // exactly tau routes left (real-ward)
  const std::vector<double> boundary = {tree.root->internal().config.threshold};
  const Prediction boundary_pred = predict(tree, boundary);
  CHECK(boundary_pred.path[0].second == Branch::left);
  CHECK(boundary_pred.label == Label::real);

  const std::vector<double> wrong_arity = {0.5, 0.5};
  CHECK_THROWS_AS(predict(tree, wrong_arity), Error);

  SUBCASE("depth-0 tree predicts unconditionally") {
    const ScoreMatrix pure = make_matrix({{Label::real, {0.4}}, {Label::real, {0.6}}});
    const FuzzyTree stump = grow(pure, Hyperparams{});
    const std::vector<double> any = {0.99};
    const Prediction pred = predict(stump, any);
    CHECK(pred.label == Label::real);
    CHECK(pred.path.empty());
  }
}

TEST_CASE("extract_rules renders fuzzy-logic clauses") {
  FuzzyTree tree;
  tree.detector_names = {"f1", "f2", "f3"};
  tree.hyperparams = Hyperparams{};

  auto leaf = [](Label label, std::uint64_t nr, std::uint64_t nf) {
    return std::make_unique<TreeNode>(TreeNode{LeafNode{label, nr, nf}});
  };

  SUBCASE("max joins clauses with OR on the fake branch") {
    InternalNode root;
    root.config = {{0, 1, 2}, EnsembleOperator::max, 0.5};
    root.gain = 0.25;
    root.left = leaf(Label::real, 5, 0);
    root.right = leaf(Label::fake, 0, 5);
    tree.root = std::make_unique<TreeNode>(TreeNode{std::move(root)});

    const auto rules = extract_rules(tree);
    REQUIRE(rules.size() == 2);
    const std::string right_rule = rule_text(rules[1]);
    CHECK(right_rule ==
          "IF f1 suggests that x is fake OR f2 suggests that x is fake OR "
          "f3 suggests that x is fake THEN x is fake");
    const std::string left_rule = rule_text(rules[0]);
    CHECK(left_rule.find("NOT (") != std::string::npos);
    CHECK(left_rule.find("THEN x is real") != std::string::npos);
  }
  SUBCASE("min replaces OR with AND") {
    InternalNode root;
    root.config = {{0, 2}, EnsembleOperator::min, 0.5};
    root.gain = 0.25;
    root.left = leaf(Label::real, 5, 0);
    root.right = leaf(Label::fake, 0, 5);
    tree.root = std::make_unique<TreeNode>(TreeNode{std::move(root)});

    const auto rules = extract_rules(tree);
    CHECK(rule_text(rules[1]) ==
          "IF f1 suggests that x is fake AND f3 suggests that x is fake THEN x is fake");
  }
  SUBCASE("mean and median compare the fused opinion to the threshold") {
    InternalNode root;
    root.config = {{0, 1}, EnsembleOperator::mean, 0.25};
    root.gain = 0.25;
    root.left = leaf(Label::real, 5, 0);
    root.right = leaf(Label::fake, 0, 5);
    tree.root = std::make_unique<TreeNode>(TreeNode{std::move(root)});

    const auto rules = extract_rules(tree);
    CHECK(rule_text(rules[1]) ==
          "IF the mean opinion of {f1, f2} exceeds 0.25 THEN x is fake");
  }
  SUBCASE("depth-0 tree yields one unconditional rule") {
    tree.root = leaf(Label::fake, 1, 3);
    const auto rules = extract_rules(tree);
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].conditions.empty());
    CHECK(rule_text(rules[0]) == "x is fake");
  }
}

TEST_CASE("rules replay the traversal on every training sample") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ScoreMatrix matrix = random_matrix(seed, 60, 3);
    const FuzzyTree tree = grow(matrix, Hyperparams{});
    const auto rules = extract_rules(tree);
    for (const auto& rec : matrix.records()) {
      int matches = 0;
      Label conclusion = Label::real;
      for (const auto& rule : rules) {
        if (rule_matches(rule, rec.scores)) {
          ++matches;
          conclusion = rule.conclusion;
        }
      }
      CHECK(matches == 1);  // leaves partition the feature space
      CHECK(conclusion == predict(tree, rec.scores).label);
    }
  }
}

TEST_CASE("serialization round-trips grown trees") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const ScoreMatrix matrix = random_matrix(seed, 50, 3);
    const FuzzyTree tree = grow(matrix, Hyperparams{});
    const std::string doc = serialize(tree);
    const FuzzyTree loaded = deserialize(doc);
    CHECK(serialize(loaded) == doc);  // field-identical structure
    CHECK(loaded.detector_names == tree.detector_names);
    // predict agreement on training data and random probes
    std::mt19937_64 rng(seed);
    for (const auto& rec : matrix.records()) {
      CHECK(predict(loaded, rec.scores).label == predict(tree, rec.scores).label);
    }
    for (int probe = 0; probe < 50; ++probe) {
      std::vector<double> scores(matrix.detector_count());
      for (double& s : scores) s = static_cast<double>(rng() % 1001) / 1000.0;
      CHECK(predict(loaded, scores).label == predict(tree, scores).label);
    }
  }
}

TEST_CASE("deserialize validates documents with field paths") {
  const std::string good = R"({
    "version": 1,
    "detectors": ["detA", "detB"],
    "hyperparams": {"max_split_models": 2, "min_samples": 0, "max_depth": 3,
                    "thr_grid_size": 10, "split_labeling": "majority"},
    "root": {
      "kind": "internal", "detectors": ["detA", "detB"], "operator": "max",
      "threshold": 0.5, "gain": 0.25,
      "left": {"kind": "leaf", "label": "real", "train_counts": {"real": 3, "fake": 1}},
      "right": {"kind": "leaf", "label": "fake", "train_counts": {"real": 0, "fake": 4}}
    }
  })";

  SUBCASE("hand-written document loads and predicts") {
    const FuzzyTree tree = deserialize(good);
    CHECK(tree.depth() == 1);
    const std::vector<double> hot = {0.9, 0.1};
    CHECK(predict(tree, hot).label == Label::fake);
    const std::vector<double> cold = {0.1, 0.2};
    CHECK(predict(tree, cold).label == Label::real);
  }
  SUBCASE("unknown operator is rejected naming the node") {
    auto doc = nlohmann::json::parse(good);
    doc["root"]["operator"] = "fuse";
    try {
      deserialize(doc.dump());
      FAIL("expected rejection");
    } catch (const Error& e) {
      const std::string what = e.what();
      CHECK(what.find("fuse") != std::string::npos);
      CHECK(what.find("root") != std::string::npos);
    }
  }
  SUBCASE("unknown detector is rejected") {
    auto doc = nlohmann::json::parse(good);
    doc["root"]["detectors"][1] = "detZ";
    CHECK_THROWS_WITH_AS(deserialize(doc.dump()), doctest::Contains("detZ"), Error);
  }
  SUBCASE("version mismatch is rejected") {
    auto doc = nlohmann::json::parse(good);
    doc["version"] = 2;
    CHECK_THROWS_WITH_AS(deserialize(doc.dump()), doctest::Contains("version"), Error);
  }
  SUBCASE("malformed JSON is rejected") {
    CHECK_THROWS_AS(deserialize("{not json"), Error);
  }
}

TEST_CASE("grown trees satisfy the structural invariants") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const ScoreMatrix matrix = random_matrix(seed, 45, 4);
    Hyperparams hp;
    hp.min_samples = seed % 3;
    for (SplitLabeling labeling : {SplitLabeling::majority, SplitLabeling::fixed}) {
      const FuzzyTree tree = grow(matrix, hp, labeling);
      check_tree_invariants(tree, matrix);
    }
  }
}

TEST_CASE("training is invariant to record order and parallelism") {
  const ScoreMatrix matrix = random_matrix(31, 50, 3);
  const std::string reference = serialize(grow(matrix, Hyperparams{}));

  SUBCASE("shuffled records grow the identical tree") {
    std::vector<SampleRecord> shuffled = matrix.records();
    std::mt19937_64 rng(99);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng() % i]);
    }
    const ScoreMatrix permuted(matrix.registry(), std::move(shuffled));
    CHECK(serialize(grow(permuted, Hyperparams{})) == reference);
  }
  SUBCASE("multi-threaded search matches the sequential result") {
    CHECK(serialize(grow(matrix, Hyperparams{}, SplitLabeling::majority, 4)) == reference);
  }
}

TEST_CASE("hyperparameters validate their ranges") {
  Hyperparams hp;
  hp.max_split_models = 0;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = Hyperparams{};
  hp.max_depth = 0;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = Hyperparams{};
  hp.thr_grid_size = 1;
  CHECK_THROWS_AS(hp.validate(), Error);
  CHECK_NOTHROW(Hyperparams{}.validate());
}
