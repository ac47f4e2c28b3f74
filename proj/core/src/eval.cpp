#include "fdt/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace fdt {

namespace {

void check_registry(const LabelPredictor& predictor, const ScoreMatrix& matrix) {
  if (predictor.detector_names() != matrix.detector_names()) {
    throw Error("matrix registry does not match the predictor's expected detectors");
  }
}

void validate_grid(std::span<const PromptGridRecord> grid) {
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> seen;
  for (const auto& rec : grid) {
    if (rec.system_idx < 1 || rec.system_idx > 6 || rec.question_idx < 1 ||
        rec.question_idx > 7 || rec.output_idx < 1 || rec.output_idx > 4) {
      throw Error("prompt grid index out of range: (" + std::to_string(rec.system_idx) + "," +
                  std::to_string(rec.question_idx) + "," + std::to_string(rec.output_idx) + ")");
    }
    if (!(rec.accuracy >= 0.0 && rec.accuracy <= 1.0)) {
      throw Error("prompt grid accuracy outside [0,1]");
    }
    if (!seen.insert({rec.system_idx, rec.question_idx, rec.output_idx}).second) {
      throw Error("duplicate prompt grid triple (" + std::to_string(rec.system_idx) + "," +
                  std::to_string(rec.question_idx) + "," + std::to_string(rec.output_idx) + ")");
    }
  }
}

}  // namespace

double accuracy_on(const LabelPredictor& predictor, const ScoreMatrix& matrix) {
  check_registry(predictor, matrix);
  if (matrix.size() == 0) throw Error("cannot evaluate an empty matrix");
  std::uint64_t correct = 0;
  for (const auto& rec : matrix.records()) {
    if (predictor.predict_label(rec.scores) == rec.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(matrix.size());
}

EvalReport evaluate(const LabelPredictor& predictor, std::span<const ScoreMatrix> matrices,
                    std::span<const ScoreMatrix> perturbed) {
  if (matrices.empty()) throw Error("evaluate requires at least one matrix");

  std::vector<std::string> order;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> tally;  // correct, total
  for (const auto& matrix : matrices) {
    check_registry(predictor, matrix);
    for (const auto& rec : matrix.records()) {
      auto [it, inserted] = tally.try_emplace(rec.benchmark, 0, 0);
      if (inserted) order.push_back(rec.benchmark);
      if (predictor.predict_label(rec.scores) == rec.label) ++it->second.first;
      ++it->second.second;
    }
  }
  if (order.empty()) throw Error("evaluate requires at least one record");

  EvalReport report;
  std::uint64_t total_correct = 0, total_n = 0;
  for (const auto& tag : order) {
    const auto& [correct, n] = tally.at(tag);
    report.per_benchmark.push_back(
        {tag, static_cast<double>(correct) / static_cast<double>(n), n});
    total_correct += correct;
    total_n += n;
  }
  report.overall = static_cast<double>(total_correct) / static_cast<double>(total_n);

  const double b = static_cast<double>(report.per_benchmark.size());
  double sum = 0.0;
  for (const auto& entry : report.per_benchmark) sum += entry.accuracy;
  report.avg = sum / b;
  double variance = 0.0;
  for (const auto& entry : report.per_benchmark) {
    const double d = entry.accuracy - report.avg;
    variance += d * d;
  }
  report.stddev = std::sqrt(variance / b);

  if (!perturbed.empty()) {
    double acc_sum = 0.0;
    for (const auto& matrix : perturbed) acc_sum += accuracy_on(predictor, matrix);
    report.robustness = acc_sum / static_cast<double>(perturbed.size());
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  auto& per_benchmark = doc["per_benchmark"] = nlohmann::ordered_json::object();
  for (const auto& entry : report.per_benchmark) {
    per_benchmark[entry.benchmark] = {{"accuracy", entry.accuracy},
                                      {"n", entry.sample_count}};
  }
  doc["overall"] = report.overall;
  doc["avg"] = report.avg;
  doc["std"] = report.stddev;
  if (report.robustness) doc["robustness"] = *report.robustness;
  return doc.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
  std::vector<std::pair<std::string, std::string>> columns;
  auto format = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
  };
  for (const auto& entry : report.per_benchmark) {
    columns.emplace_back(entry.benchmark, format(entry.accuracy));
  }
  columns.emplace_back("Overall", format(report.overall));
  columns.emplace_back("Avg.", format(report.avg));
  columns.emplace_back("Std.", format(report.stddev));
  if (report.robustness) columns.emplace_back("Robustness", format(*report.robustness));

  std::ostringstream header, values;
  for (const auto& [name, value] : columns) {
    const std::size_t width = std::max(name.size(), value.size()) + 2;
    header << std::setw(static_cast<int>(width)) << name;
    values << std::setw(static_cast<int>(width)) << value;
  }
  return header.str() + "\n" + values.str() + "\n";
}

PromptGridRecord select_prompt(std::span<const PromptGridRecord> grid) {
  if (grid.empty()) throw Error("select_prompt requires a non-empty grid");
  validate_grid(grid);
  const PromptGridRecord* best = &grid[0];
  for (const auto& rec : grid.subspan(1)) {
    const auto key = std::tuple{rec.system_idx, rec.question_idx, rec.output_idx};
    const auto best_key = std::tuple{best->system_idx, best->question_idx, best->output_idx};
    if (rec.accuracy > best->accuracy ||
        (rec.accuracy == best->accuracy && key < best_key)) {
      best = &rec;
    }
  }
  return *best;
}

std::string export_heatmap(std::span<const PromptGridRecord> grid) {
  validate_grid(grid);
  std::vector<PromptGridRecord> ordered(grid.begin(), grid.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::tuple{a.system_idx, a.question_idx, a.output_idx} <
           std::tuple{b.system_idx, b.question_idx, b.output_idx};
  });
  std::ostringstream out;
  out << "system_idx,question_idx,output_idx,accuracy\n";
  for (const auto& rec : ordered) {
    out << rec.system_idx << ',' << rec.question_idx << ',' << rec.output_idx << ','
        << double_to_string(rec.accuracy) << '\n';
  }
  return out.str();
}

std::vector<PromptGridRecord> parse_heatmap_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty prompt grid CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "system_idx,question_idx,output_idx,accuracy") {
    throw Error("unexpected prompt grid CSV header: " + line);
  }
  std::vector<PromptGridRecord> grid;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    PromptGridRecord rec;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    auto parse_field = [&](auto& value, bool last) {
      auto [next, ec] = std::from_chars(ptr, end, value);
      if (ec != std::errc() || (last ? next != end : (next == end || *next != ','))) {
        throw Error("malformed prompt grid row " + std::to_string(row) + ": " + line);
      }
      ptr = last ? next : next + 1;
    };
    parse_field(rec.system_idx, false);
    parse_field(rec.question_idx, false);
    parse_field(rec.output_idx, false);
    parse_field(rec.accuracy, true);
    grid.push_back(rec);
  }
  validate_grid(grid);
  return grid;
}

}  // namespace fdt
