#include "fdt/fuzzy_tree.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <future>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

namespace fdt {

namespace {

std::string format_threshold(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", tau);
  return buf;
}

// Subsets of {0..M-1} with size 1..limit, size-major then lexicographic.
// This is the canonical enumeration order of the split search.
std::vector<std::vector<std::uint32_t>> enumerate_subsets(std::uint32_t m, std::uint32_t limit) {
  std::vector<std::vector<std::uint32_t>> subsets;
  for (std::uint32_t k = 1; k <= std::min(limit, m); ++k) {
    std::vector<std::uint32_t> combo(k);
    std::iota(combo.begin(), combo.end(), 0u);
    while (true) {
      subsets.push_back(combo);
      // advance to the next k-combination in lexicographic order
      std::int64_t i = static_cast<std::int64_t>(k) - 1;
      while (i >= 0 && combo[static_cast<std::size_t>(i)] == m - k + static_cast<std::uint32_t>(i)) {
        --i;
      }
      if (i < 0) break;
      ++combo[static_cast<std::size_t>(i)];
      for (std::size_t j = static_cast<std::size_t>(i) + 1; j < k; ++j) {
        combo[j] = combo[j - 1] + 1;
      }
    }
  }
  return subsets;
}

struct NodeCounts {
  std::uint64_t n_real = 0;
  std::uint64_t n_fake = 0;
};

NodeCounts count_labels(const ScoreMatrix& matrix, std::span<const std::uint32_t> rows) {
  NodeCounts c;
  for (std::uint32_t i : rows) {
    if (matrix.records()[i].label == Label::real) {
      ++c.n_real;
    } else {
      ++c.n_fake;
    }
  }
  return c;
}

double split_accuracy_from_counts(std::uint64_t lr, std::uint64_t lf, std::uint64_t rr,
                                  std::uint64_t rf, SplitLabeling labeling) {
  const std::uint64_t n = lr + lf + rr + rf;
  const std::uint64_t correct = labeling == SplitLabeling::majority
                                    ? std::max(lr, lf) + std::max(rr, rf)
                                    : lr + rf;  // left labeled real, right fake
  return static_cast<double>(correct) / static_cast<double>(n);
}

struct SearchBest {
  bool found = false;
  NodeConfig config;
  double gain = 0.0;
};

void consider(SearchBest& best, const std::vector<std::uint32_t>& subset, EnsembleOperator op,
              double tau, double gain) {
  if (!best.found || gain > best.gain) {
    best.found = true;
    best.config = NodeConfig{subset, op, tau};
    best.gain = gain;
    return;
  }
  if (gain == best.gain) {
    NodeConfig candidate{subset, op, tau};
    if (canonical_config_less(candidate, best.config)) best.config = std::move(candidate);
  }
}

constexpr EnsembleOperator kOperators[] = {EnsembleOperator::mean, EnsembleOperator::min,
                                           EnsembleOperator::max, EnsembleOperator::median};

// Evaluates every candidate over one slice of the subset list, keeping the
// best under (gain desc, canonical asc). Candidates are visited in canonical
// order within the slice.
SearchBest search_subsets(const ScoreMatrix& matrix, std::span<const std::uint32_t> rows,
                          std::span<const std::vector<std::uint32_t>> subsets,
                          const Hyperparams& hp, SplitLabeling labeling, double majority_acc,
                          std::uint64_t& candidates) {
  SearchBest best;
  const auto& records = matrix.records();
  const std::size_t n = rows.size();
  const double n_d = static_cast<double>(n);

  std::vector<double> gathered;
  std::array<std::vector<double>, 4> phat;
  for (auto& p : phat) p.resize(n);
  std::vector<std::uint8_t> is_fake(n);
  for (std::size_t i = 0; i < n; ++i) {
    is_fake[i] = records[rows[i]].label == Label::fake ? 1 : 0;
  }

  for (const auto& subset : subsets) {
    gathered.resize(subset.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& scores = records[rows[i]].scores;
      for (std::size_t j = 0; j < subset.size(); ++j) gathered[j] = scores[subset[j]];
      for (std::size_t o = 0; o < 4; ++o) phat[o][i] = apply_operator(kOperators[o], gathered);
    }
    for (std::size_t o = 0; o < 4; ++o) {
      for (std::uint32_t k = 1; k <= hp.thr_grid_size; ++k) {
        const double tau =
            static_cast<double>(k) / static_cast<double>(hp.thr_grid_size + 1);
        std::uint64_t lr = 0, lf = 0, rr = 0, rf = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (phat[o][i] > tau) {
            rf += is_fake[i];
            rr += 1 - is_fake[i];
          } else {
            lf += is_fake[i];
            lr += 1 - is_fake[i];
          }
        }
        ++candidates;
        const bool nontrivial = lr + lf > hp.min_samples && rr + rf > hp.min_samples;
        if (!nontrivial) continue;
        const double correct = static_cast<double>(
            labeling == SplitLabeling::majority ? std::max(lr, lf) + std::max(rr, rf) : lr + rf);
        const double gain = correct / n_d - majority_acc;
        if (gain > 0.0) consider(best, subset, kOperators[o], tau, gain);
      }
    }
  }
  return best;
}

std::unique_ptr<TreeNode> grow_node(const ScoreMatrix& matrix, std::vector<std::uint32_t> rows,
                                    std::uint32_t depth, const Hyperparams& hp,
                                    SplitLabeling labeling, unsigned threads, TrainStats* stats) {
  const NodeCounts counts = count_labels(matrix, rows);
  if (depth < hp.max_depth) {
    std::uint64_t candidates = 0;
    auto choice = best_split(matrix, rows, hp, labeling, threads, &candidates);
    if (stats) stats->candidates_per_node.push_back(candidates);
    if (choice) {
      auto eval = evaluate_split(choice->config, matrix, rows, labeling);
      rows.clear();
      rows.shrink_to_fit();
      InternalNode node;
      node.config = std::move(choice->config);
      node.gain = choice->gain;
      node.left = grow_node(matrix, std::move(eval.left), depth + 1, hp, labeling, threads, stats);
      node.right =
          grow_node(matrix, std::move(eval.right), depth + 1, hp, labeling, threads, stats);
      return std::make_unique<TreeNode>(TreeNode{std::move(node)});
    }
  }
  LeafNode leaf;
  leaf.n_real = counts.n_real;
  leaf.n_fake = counts.n_fake;
  leaf.label = majority_label(counts.n_real, counts.n_fake);
  return std::make_unique<TreeNode>(TreeNode{leaf});
}

std::size_t depth_of(const TreeNode& node) {
  if (node.is_leaf()) return 0;
  return 1 + std::max(depth_of(*node.internal().left), depth_of(*node.internal().right));
}

std::size_t count_nodes(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  return 1 + count_nodes(*node.internal().left) + count_nodes(*node.internal().right);
}

std::size_t count_leaves(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  return count_leaves(*node.internal().left) + count_leaves(*node.internal().right);
}

std::string clause_text(const NodeConfig& config, const std::vector<std::string>& names,
                        Branch branch) {
  std::string body;
  switch (config.op) {
    case EnsembleOperator::max:
    case EnsembleOperator::min: {
      const std::string joiner = config.op == EnsembleOperator::max ? " OR " : " AND ";
      for (std::size_t j = 0; j < config.detectors.size(); ++j) {
        if (j > 0) body += joiner;
        body += names[config.detectors[j]] + " suggests that x is fake";
      }
      break;
    }
    case EnsembleOperator::mean:
    case EnsembleOperator::median: {
      body = config.op == EnsembleOperator::mean ? "the mean opinion of {" : "the median opinion of {";
      for (std::size_t j = 0; j < config.detectors.size(); ++j) {
        if (j > 0) body += ", ";
        body += names[config.detectors[j]];
      }
      body += "} exceeds " + format_threshold(config.threshold);
      break;
    }
  }
  return branch == Branch::right ? body : "NOT (" + body + ")";
}

void collect_rules(const TreeNode& node, const std::vector<std::string>& names,
                   std::vector<std::string>& conditions,
                   std::vector<std::pair<NodeConfig, Branch>>& path,
                   std::vector<FuzzyRule>& rules) {
  if (node.is_leaf()) {
    rules.push_back(FuzzyRule{conditions, node.leaf().label, path});
    return;
  }
  const auto& internal = node.internal();
  for (Branch branch : {Branch::left, Branch::right}) {
    conditions.push_back(clause_text(internal.config, names, branch));
    path.emplace_back(internal.config, branch);
    collect_rules(branch == Branch::left ? *internal.left : *internal.right, names, conditions,
                  path, rules);
    conditions.pop_back();
    path.pop_back();
  }
}

nlohmann::ordered_json node_to_json(const TreeNode& node, const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  if (node.is_leaf()) {
    const auto& leaf = node.leaf();
    j["kind"] = "leaf";
    j["label"] = to_string(leaf.label);
    j["train_counts"] = {{"real", leaf.n_real}, {"fake", leaf.n_fake}};
    return j;
  }
  const auto& internal = node.internal();
  j["kind"] = "internal";
  auto& detectors = j["detectors"] = nlohmann::ordered_json::array();
  for (std::uint32_t d : internal.config.detectors) detectors.push_back(names[d]);
  j["operator"] = to_string(internal.config.op);
  j["threshold"] = internal.config.threshold;
  j["gain"] = internal.gain;
  j["left"] = node_to_json(*internal.left, names);
  j["right"] = node_to_json(*internal.right, names);
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j,
                                         const std::map<std::string, std::uint32_t>& index_of,
                                         const Hyperparams& hp, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) {
    throw Error("node " + path + ": missing 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    if (!j.contains("label") || !j.contains("train_counts")) {
      throw Error("node " + path + ": leaf needs 'label' and 'train_counts'");
    }
    LeafNode leaf;
    leaf.label = parse_label(j.at("label").get<std::string>());
    const auto& counts = j.at("train_counts");
    if (!counts.contains("real") || !counts.contains("fake")) {
      throw Error("node " + path + ": train_counts needs 'real' and 'fake'");
    }
    leaf.n_real = counts.at("real").get<std::uint64_t>();
    leaf.n_fake = counts.at("fake").get<std::uint64_t>();
    if (leaf.label != majority_label(leaf.n_real, leaf.n_fake)) {
      throw Error("node " + path + ": leaf label contradicts its train_counts majority");
    }
    return std::make_unique<TreeNode>(TreeNode{leaf});
  }
  if (kind != "internal") {
    throw Error("node " + path + ": unknown kind '" + kind + "'");
  }
  for (const char* field : {"detectors", "operator", "threshold", "gain", "left", "right"}) {
    if (!j.contains(field)) {
      throw Error("node " + path + ": missing '" + std::string(field) + "'");
    }
  }
  InternalNode node;
  for (const auto& name : j.at("detectors")) {
    const std::string n = name.get<std::string>();
    auto it = index_of.find(n);
    if (it == index_of.end()) {
      throw Error("node " + path + ": unknown detector '" + n + "'");
    }
    node.config.detectors.push_back(it->second);
  }
  if (node.config.detectors.empty()) {
    throw Error("node " + path + ": detector subset must be non-empty");
  }
  if (!std::is_sorted(node.config.detectors.begin(), node.config.detectors.end()) ||
      std::adjacent_find(node.config.detectors.begin(), node.config.detectors.end()) !=
          node.config.detectors.end()) {
    throw Error("node " + path + ": detector subset must be strictly increasing");
  }
  if (node.config.detectors.size() > hp.max_split_models) {
    throw Error("node " + path + ": detector subset larger than max_split_models");
  }
  try {
    node.config.op = parse_operator(j.at("operator").get<std::string>());
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " at node " + path);
  }
  node.config.threshold = j.at("threshold").get<double>();
  if (!(node.config.threshold > 0.0 && node.config.threshold < 1.0)) {
    throw Error("node " + path + ": threshold must lie strictly inside (0,1)");
  }
  node.gain = j.at("gain").get<double>();
  if (!(node.gain > 0.0)) {
    throw Error("node " + path + ": internal node gain must be strictly positive");
  }
  node.left = node_from_json(j.at("left"), index_of, hp, path + ".left");
  node.right = node_from_json(j.at("right"), index_of, hp, path + ".right");
  return std::make_unique<TreeNode>(TreeNode{std::move(node)});
}

}  // namespace

std::string to_string(EnsembleOperator op) {
  switch (op) {
    case EnsembleOperator::mean: return "mean";
    case EnsembleOperator::min: return "min";
    case EnsembleOperator::max: return "max";
    case EnsembleOperator::median: return "median";
  }
  throw Error("invalid operator value");
}

EnsembleOperator parse_operator(const std::string& token) {
  if (token == "mean") return EnsembleOperator::mean;
  if (token == "min") return EnsembleOperator::min;
  if (token == "max") return EnsembleOperator::max;
  if (token == "median") return EnsembleOperator::median;
  throw Error("unknown operator '" + token + "'");
}

std::string to_string(SplitLabeling labeling) {
  return labeling == SplitLabeling::majority ? "majority" : "fixed";
}

SplitLabeling parse_split_labeling(const std::string& token) {
  if (token == "majority") return SplitLabeling::majority;
  if (token == "fixed") return SplitLabeling::fixed;
  throw Error("unknown split labeling '" + token + "'");
}

bool canonical_config_less(const NodeConfig& a, const NodeConfig& b) {
  if (a.detectors.size() != b.detectors.size()) return a.detectors.size() < b.detectors.size();
  if (a.detectors != b.detectors) return a.detectors < b.detectors;
  if (a.op != b.op) return static_cast<int>(a.op) < static_cast<int>(b.op);
  return a.threshold < b.threshold;
}

void Hyperparams::validate() const {
  if (max_split_models < 1) throw Error("max_split_models must be >= 1");
  if (max_depth < 1) throw Error("max_depth must be >= 1");
  if (thr_grid_size < 2) throw Error("thr_grid_size must be >= 2");
}

std::size_t FuzzyTree::depth() const { return root ? depth_of(*root) : 0; }
std::size_t FuzzyTree::node_count() const { return root ? count_nodes(*root) : 0; }
std::size_t FuzzyTree::leaf_count() const { return root ? count_leaves(*root) : 0; }

double apply_operator(EnsembleOperator op, std::span<const double> values) {
  if (values.empty()) throw Error("apply_operator requires a non-empty value list");
  switch (op) {
    case EnsembleOperator::mean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
    case EnsembleOperator::min: return *std::min_element(values.begin(), values.end());
    case EnsembleOperator::max: return *std::max_element(values.begin(), values.end());
    case EnsembleOperator::median: {
      std::array<double, 16> small;
      std::vector<double> large;
      std::span<double> sorted;
      if (values.size() <= small.size()) {
        std::copy(values.begin(), values.end(), small.begin());
        sorted = std::span<double>(small.data(), values.size());
      } else {
        large.assign(values.begin(), values.end());
        sorted = large;
      }
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      if (n % 2 == 1) return sorted[n / 2];
      return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    }
  }
  throw Error("invalid operator value");
}

double local_prediction(const NodeConfig& config, std::span<const double> features) {
  if (config.detectors.empty()) throw Error("node config has an empty detector subset");
  std::vector<double> gathered;
  gathered.reserve(config.detectors.size());
  for (std::uint32_t d : config.detectors) {
    if (d >= features.size()) {
      throw Error("detector index " + std::to_string(d) + " out of range for " +
                  std::to_string(features.size()) + " features");
    }
    gathered.push_back(features[d]);
  }
  return apply_operator(config.op, gathered);
}

double majority_accuracy(std::span<const Label> labels) {
  if (labels.empty()) throw Error("majority_accuracy requires a non-empty label list");
  std::uint64_t n_real = 0;
  for (Label l : labels) n_real += l == Label::real ? 1 : 0;
  const std::uint64_t n_fake = labels.size() - n_real;
  return static_cast<double>(std::max(n_real, n_fake)) / static_cast<double>(labels.size());
}

Label majority_label(std::uint64_t n_real, std::uint64_t n_fake) {
  return n_fake >= n_real ? Label::fake : Label::real;
}

SplitEval evaluate_split(const NodeConfig& config, const ScoreMatrix& matrix,
                         std::span<const std::uint32_t> rows, SplitLabeling labeling) {
  if (rows.empty()) throw Error("evaluate_split requires a non-empty sample set");
  SplitEval eval;
  std::uint64_t lr = 0, lf = 0, rr = 0, rf = 0;
  for (std::uint32_t i : rows) {
    const auto& rec = matrix.records()[i];
    const double p = local_prediction(config, rec.scores);
    if (p > config.threshold) {
      eval.right.push_back(i);
      (rec.label == Label::real ? rr : rf) += 1;
    } else {
      eval.left.push_back(i);
      (rec.label == Label::real ? lr : lf) += 1;
    }
  }
  const double majority_acc = static_cast<double>(std::max(lr + rr, lf + rf)) /
                              static_cast<double>(rows.size());
  eval.gain = split_accuracy_from_counts(lr, lf, rr, rf, labeling) - majority_acc;
  return eval;
}

std::optional<SplitChoice> best_split(const ScoreMatrix& matrix,
                                      std::span<const std::uint32_t> rows, const Hyperparams& hp,
                                      SplitLabeling labeling, unsigned threads,
                                      std::uint64_t* candidates_evaluated) {
  hp.validate();
  if (rows.empty()) throw Error("best_split requires a non-empty sample set");
  const auto m = static_cast<std::uint32_t>(matrix.detector_count());
  if (m == 0) throw Error("best_split requires at least one detector");

  const NodeCounts counts = count_labels(matrix, rows);
  const double majority_acc = static_cast<double>(std::max(counts.n_real, counts.n_fake)) /
                              static_cast<double>(rows.size());

  const auto subsets = enumerate_subsets(m, hp.max_split_models);
  const std::span<const std::vector<std::uint32_t>> all(subsets);

  SearchBest best;
  std::uint64_t candidates = 0;
  if (threads <= 1 || subsets.size() < 2) {
    best = search_subsets(matrix, rows, all, hp, labeling, majority_acc, candidates);
  } else {
    // Chunks follow the canonical subset order; the reduce below keeps that
    // order authoritative, so the outcome matches the sequential search.
    const std::size_t chunk_count = std::min<std::size_t>(threads, subsets.size());
    std::vector<std::future<std::pair<SearchBest, std::uint64_t>>> futures;
    for (std::size_t c = 0; c < chunk_count; ++c) {
      const std::size_t begin = subsets.size() * c / chunk_count;
      const std::size_t end = subsets.size() * (c + 1) / chunk_count;
      futures.push_back(std::async(std::launch::async, [&, begin, end] {
        std::uint64_t local_count = 0;
        SearchBest local = search_subsets(matrix, rows, all.subspan(begin, end - begin), hp,
                                          labeling, majority_acc, local_count);
        return std::make_pair(std::move(local), local_count);
      }));
    }
    for (auto& future : futures) {
      auto [local, local_count] = future.get();
      candidates += local_count;
      if (!local.found) continue;
      if (!best.found || local.gain > best.gain ||
          (local.gain == best.gain && canonical_config_less(local.config, best.config))) {
        best = std::move(local);
      }
    }
  }

  if (candidates_evaluated) *candidates_evaluated = candidates;
  if (!best.found) return std::nullopt;
  return SplitChoice{std::move(best.config), best.gain};
}

FuzzyTree grow(const ScoreMatrix& matrix, const Hyperparams& hp, SplitLabeling labeling,
               unsigned threads, TrainStats* stats) {
  hp.validate();
  if (matrix.size() == 0) throw Error("cannot grow a tree from an empty matrix");
  std::vector<std::uint32_t> rows(matrix.size());
  std::iota(rows.begin(), rows.end(), 0u);

  FuzzyTree tree;
  tree.detector_names = matrix.detector_names();
  tree.hyperparams = hp;
  tree.split_labeling = labeling;
  tree.root = grow_node(matrix, std::move(rows), 0, hp, labeling, threads, stats);
  return tree;
}

Prediction predict(const FuzzyTree& tree, std::span<const double> features) {
  if (features.size() != tree.detector_names.size()) {
    throw Error("feature arity " + std::to_string(features.size()) + " does not match the " +
                std::to_string(tree.detector_names.size()) + "-detector registry");
  }
  Prediction result;
  const TreeNode* node = tree.root.get();
  while (!node->is_leaf()) {
    const auto& internal = node->internal();
    const double p = local_prediction(internal.config, features);
    const Branch branch = p > internal.config.threshold ? Branch::right : Branch::left;
    result.path.emplace_back(internal.config, branch);
    node = branch == Branch::right ? internal.right.get() : internal.left.get();
  }
  result.label = node->leaf().label;
  return result;
}

std::vector<FuzzyRule> extract_rules(const FuzzyTree& tree) {
  std::vector<FuzzyRule> rules;
  std::vector<std::string> conditions;
  std::vector<std::pair<NodeConfig, Branch>> path;
  collect_rules(*tree.root, tree.detector_names, conditions, path, rules);
  return rules;
}

bool rule_matches(const FuzzyRule& rule, std::span<const double> features) {
  for (const auto& [config, branch] : rule.path) {
    const double p = local_prediction(config, features);
    const bool went_right = p > config.threshold;
    if (went_right != (branch == Branch::right)) return false;
  }
  return true;
}

std::string rule_text(const FuzzyRule& rule) {
  const std::string conclusion = "x is " + to_string(rule.conclusion);
  if (rule.conditions.empty()) return conclusion;
  std::string text = "IF ";
  for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
    if (i > 0) text += " AND ";
    text += rule.conditions[i];
  }
  return text + " THEN " + conclusion;
}

std::string serialize(const FuzzyTree& tree) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["detectors"] = tree.detector_names;
  doc["hyperparams"] = {{"max_split_models", tree.hyperparams.max_split_models},
                        {"min_samples", tree.hyperparams.min_samples},
                        {"max_depth", tree.hyperparams.max_depth},
                        {"thr_grid_size", tree.hyperparams.thr_grid_size},
                        {"split_labeling", to_string(tree.split_labeling)}};
  doc["root"] = node_to_json(*tree.root, tree.detector_names);
  return doc.dump(2) + "\n";
}

FuzzyTree deserialize(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tree document: ") + e.what());
  }
  if (!doc.is_object()) throw Error("tree document must be a JSON object");
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    throw Error("tree document misses 'version'");
  }
  if (doc.at("version").get<int>() != 1) {
    throw Error("unsupported tree document version " + doc.at("version").dump());
  }
  for (const char* field : {"detectors", "root", "hyperparams"}) {
    if (!doc.contains(field)) throw Error("tree document misses '" + std::string(field) + "'");
  }

  FuzzyTree tree;
  std::map<std::string, std::uint32_t> index_of;
  for (const auto& name : doc.at("detectors")) {
    const std::string n = name.get<std::string>();
    if (index_of.count(n)) throw Error("duplicate detector '" + n + "' in tree document");
    index_of[n] = static_cast<std::uint32_t>(tree.detector_names.size());
    tree.detector_names.push_back(n);
  }
  if (tree.detector_names.empty()) throw Error("tree document has an empty detector list");

  const auto& hp = doc.at("hyperparams");
  tree.hyperparams.max_split_models = hp.value("max_split_models", 3u);
  tree.hyperparams.min_samples = hp.value("min_samples", 0u);
  tree.hyperparams.max_depth = hp.value("max_depth", 4u);
  tree.hyperparams.thr_grid_size = hp.value("thr_grid_size", 10u);
  tree.hyperparams.validate();
  tree.split_labeling = parse_split_labeling(hp.value("split_labeling", std::string("majority")));

  tree.root = node_from_json(doc.at("root"), index_of, tree.hyperparams, "root");
  if (tree.depth() > tree.hyperparams.max_depth) {
    throw Error("tree depth " + std::to_string(tree.depth()) + " exceeds max_depth " +
                std::to_string(tree.hyperparams.max_depth));
  }
  return tree;
}

}  // namespace fdt
