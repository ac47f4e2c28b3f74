#include "fdt/score_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rand_util.hpp"

namespace fdt {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_score(const std::string& text, std::size_t row, const std::string& detector) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error("non-numeric score at row " + std::to_string(row) + " for detector '" +
                detector + "': '" + text + "'");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error("score out of range at row " + std::to_string(row) + " for detector '" +
                detector + "': " + text);
  }
  return value;
}

DetectorKind parse_kind(const std::string& token) {
  if (token == "continuous") return DetectorKind::continuous;
  if (token == "binary") return DetectorKind::binary;
  throw Error("unknown detector kind '" + token + "'");
}

// Strips a trailing '\r' so CRLF files parse the same as LF files.
std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

ScoreMatrix load_csv(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& registry_sidecar) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error("empty score file: " + path.string());
  const auto header = split_csv_line(chomp(line));
  const std::vector<std::string> expected = {"sample_id", "benchmark", "subset", "label"};
  if (header.size() < expected.size() + 1) {
    throw Error("CSV header must be sample_id,benchmark,subset,label,<detectors...> in " +
                path.string());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      throw Error("CSV header column " + std::to_string(i + 1) + " must be '" + expected[i] +
                  "', got '" + header[i] + "'");
    }
  }

  std::vector<DetectorMeta> registry;
  for (std::size_t i = expected.size(); i < header.size(); ++i) {
    registry.push_back({header[i], DetectorKind::continuous});
  }

  if (registry_sidecar) {
    const auto declared = parse_registry_json(read_file(*registry_sidecar));
    std::map<std::string, DetectorKind> kinds;
    for (const auto& meta : declared) kinds[meta.name] = meta.kind;
    if (kinds.size() != declared.size()) throw Error("duplicate detector in registry sidecar");
    for (auto& meta : registry) {
      auto it = kinds.find(meta.name);
      if (it == kinds.end()) {
        throw Error("registry sidecar has no entry for detector '" + meta.name + "'");
      }
      meta.kind = it->second;
      kinds.erase(it);
    }
    if (!kinds.empty()) {
      throw Error("registry sidecar declares unknown detector '" + kinds.begin()->first + "'");
    }
  }

  std::vector<SampleRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = chomp(line);
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error("wrong field count at row " + std::to_string(row) + ": expected " +
                  std::to_string(header.size()) + ", got " + std::to_string(fields.size()));
    }
    SampleRecord rec;
    rec.sample_id = fields[0];
    rec.benchmark = fields[1];
    rec.subset = fields[2];
    try {
      rec.label = parse_label(fields[3]);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at row " + std::to_string(row));
    }
    rec.scores.reserve(registry.size());
    for (std::size_t i = 0; i < registry.size(); ++i) {
      const double v = parse_score(fields[4 + i], row, registry[i].name);
      if (registry[i].kind == DetectorKind::binary && v != 0.0 && v != 1.0) {
        throw Error("binary detector '" + registry[i].name + "' has non-binary value " +
                    fields[4 + i] + " at row " + std::to_string(row));
      }
      rec.scores.push_back(v);
    }
    records.push_back(std::move(rec));
  }
  return ScoreMatrix(std::move(registry), std::move(records));
}

ScoreMatrix load_jsonl(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& registry_sidecar) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score file: " + path.string());

  std::vector<DetectorMeta> registry;
  std::map<std::string, std::size_t> index_of;
  std::vector<SampleRecord> records;

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = chomp(line);
    if (line.empty()) continue;
    ++row;
    nlohmann::ordered_json obj;
    try {
      obj = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed JSON at row " + std::to_string(row) + ": " + e.what());
    }
    if (!obj.is_object()) throw Error("row " + std::to_string(row) + " is not an object");
    if (!obj.contains("sample_id") || !obj.contains("label") || !obj.contains("scores")) {
      throw Error("row " + std::to_string(row) + " misses sample_id, label or scores");
    }

    SampleRecord rec;
    rec.sample_id = obj.at("sample_id").get<std::string>();
    rec.benchmark = obj.value("benchmark", std::string("default"));
    rec.subset = obj.value("subset", std::string("default"));
    const auto& label = obj.at("label");
    try {
      rec.label = label.is_number_integer()
                      ? parse_label(std::to_string(label.get<long long>()))
                      : parse_label(label.get<std::string>());
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at row " + std::to_string(row));
    }

    const auto& scores = obj.at("scores");
    if (!scores.is_object()) throw Error("scores must be an object at row " + std::to_string(row));
    if (registry.empty() && records.empty()) {
      for (auto it = scores.begin(); it != scores.end(); ++it) {
        index_of[it.key()] = registry.size();
        registry.push_back({it.key(), DetectorKind::continuous});
      }
      if (index_of.size() != registry.size()) {
        throw Error("duplicate detector key at row " + std::to_string(row));
      }
    }
    if (scores.size() != registry.size()) {
      throw Error("wrong score count at row " + std::to_string(row) + ": expected " +
                  std::to_string(registry.size()) + ", got " + std::to_string(scores.size()));
    }
    rec.scores.assign(registry.size(), 0.0);
    std::vector<bool> seen(registry.size(), false);
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      auto found = index_of.find(it.key());
      if (found == index_of.end()) {
        throw Error("unknown detector '" + it.key() + "' at row " + std::to_string(row));
      }
      if (!it.value().is_number()) {
        throw Error("non-numeric score at row " + std::to_string(row) + " for detector '" +
                    it.key() + "'");
      }
      const double v = it.value().get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error("score out of range at row " + std::to_string(row) + " for detector '" +
                    it.key() + "': " + double_to_string(v));
      }
      seen[found->second] = true;
      rec.scores[found->second] = v;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error("duplicate detector key at row " + std::to_string(row));
    }
    records.push_back(std::move(rec));
  }
  if (registry.empty()) throw Error("empty score file: " + path.string());

  if (registry_sidecar) {
    const auto declared = parse_registry_json(read_file(*registry_sidecar));
    for (auto& meta : registry) {
      auto it = std::find_if(declared.begin(), declared.end(),
                             [&](const DetectorMeta& d) { return d.name == meta.name; });
      if (it == declared.end()) {
        throw Error("registry sidecar has no entry for detector '" + meta.name + "'");
      }
      meta.kind = it->kind;
    }
  }
  return ScoreMatrix(std::move(registry), std::move(records));
}

}  // namespace

std::string to_string(Label label) { return label == Label::real ? "real" : "fake"; }

std::string to_string(DetectorKind kind) {
  return kind == DetectorKind::continuous ? "continuous" : "binary";
}

Label parse_label(const std::string& token) {
  const std::string t = lowercase(token);
  if (t == "0" || t == "real") return Label::real;
  if (t == "1" || t == "fake") return Label::fake;
  throw Error("unknown label token '" + token + "'");
}

double unify_binary(Label decision) { return decision == Label::real ? 0.0 : 1.0; }

ScoreMatrix::ScoreMatrix(std::vector<DetectorMeta> registry, std::vector<SampleRecord> records)
    : registry_(std::move(registry)), records_(std::move(records)) {
  std::set<std::string> names;
  for (const auto& meta : registry_) {
    if (meta.name.empty()) throw Error("detector name must be non-empty");
    if (!names.insert(meta.name).second) throw Error("duplicate detector name '" + meta.name + "'");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& rec = records_[i];
    if (rec.scores.size() != registry_.size()) {
      throw Error("record '" + rec.sample_id + "' has " + std::to_string(rec.scores.size()) +
                  " scores, registry has " + std::to_string(registry_.size()));
    }
    for (std::size_t m = 0; m < registry_.size(); ++m) {
      const double v = rec.scores[m];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error("record '" + rec.sample_id + "' score out of range for detector '" +
                    registry_[m].name + "': " + double_to_string(v));
      }
      if (registry_[m].kind == DetectorKind::binary && v != 0.0 && v != 1.0) {
        throw Error("record '" + rec.sample_id + "' has non-binary value for binary detector '" +
                    registry_[m].name + "'");
      }
    }
  }
}

std::vector<std::string> ScoreMatrix::detector_names() const {
  std::vector<std::string> names;
  names.reserve(registry_.size());
  for (const auto& meta : registry_) names.push_back(meta.name);
  return names;
}

ScoreMatrix load_scores(const std::filesystem::path& path, ScoreFormat format,
                        const std::optional<std::filesystem::path>& registry_sidecar) {
  return format == ScoreFormat::csv ? load_csv(path, registry_sidecar)
                                    : load_jsonl(path, registry_sidecar);
}

void save_scores(const ScoreMatrix& matrix, const std::filesystem::path& path,
                 ScoreFormat format) {
  std::ostringstream out;
  if (format == ScoreFormat::csv) {
    out << "sample_id,benchmark,subset,label";
    for (const auto& meta : matrix.registry()) {
      if (meta.name.find_first_of(",\r\n") != std::string::npos) {
        throw Error("detector name '" + meta.name + "' cannot be written as CSV");
      }
      out << ',' << meta.name;
    }
    out << '\n';
    for (const auto& rec : matrix.records()) {
      for (const auto* field : {&rec.sample_id, &rec.benchmark, &rec.subset}) {
        if (field->find_first_of(",\r\n") != std::string::npos) {
          throw Error("field '" + *field + "' cannot be written as CSV");
        }
      }
      out << rec.sample_id << ',' << rec.benchmark << ',' << rec.subset << ','
          << to_string(rec.label);
      for (double v : rec.scores) out << ',' << double_to_string(v);
      out << '\n';
    }
  } else {
    for (const auto& rec : matrix.records()) {
      nlohmann::ordered_json obj;
      obj["sample_id"] = rec.sample_id;
      obj["benchmark"] = rec.benchmark;
      obj["subset"] = rec.subset;
      obj["label"] = to_string(rec.label);
      nlohmann::ordered_json scores;
      for (std::size_t m = 0; m < matrix.registry().size(); ++m) {
        scores[matrix.registry()[m].name] = rec.scores[m];
      }
      obj["scores"] = std::move(scores);
      out << obj.dump() << '\n';
    }
  }
  atomic_write_file(path, out.str());
}

void save_registry(const ScoreMatrix& matrix, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  auto& detectors = doc["detectors"] = nlohmann::ordered_json::array();
  for (const auto& meta : matrix.registry()) {
    detectors.push_back({{"name", meta.name}, {"kind", to_string(meta.kind)}});
  }
  atomic_write_file(path, doc.dump(2) + "\n");
}

std::vector<DetectorMeta> parse_registry_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed registry JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("detectors") || !doc["detectors"].is_array()) {
    throw Error("registry JSON must be {\"detectors\":[...]}");
  }
  std::vector<DetectorMeta> registry;
  for (const auto& entry : doc["detectors"]) {
    if (!entry.contains("name")) throw Error("registry entry misses 'name'");
    DetectorMeta meta;
    meta.name = entry.at("name").get<std::string>();
    meta.kind = parse_kind(entry.value("kind", std::string("continuous")));
    registry.push_back(std::move(meta));
  }
  return registry;
}

ScoreMatrix sample_balanced(const ScoreMatrix& matrix, std::size_t per_class_per_subset,
                            std::uint64_t seed) {
  // Strata keyed by (subset, class); std::map gives a deterministic
  // subset-sorted draw order independent of record order in the file.
  std::map<std::string, std::array<std::vector<std::size_t>, 2>> strata;
  for (std::size_t i = 0; i < matrix.records().size(); ++i) {
    const auto& rec = matrix.records()[i];
    strata[rec.subset][static_cast<std::size_t>(rec.label)].push_back(i);
  }

  std::mt19937_64 rng(detail::mix64(seed));
  std::vector<std::size_t> selected;
  for (auto& [subset, by_class] : strata) {
    for (std::size_t cls = 0; cls < 2; ++cls) {
      auto& pool = by_class[cls];
      if (pool.size() < per_class_per_subset) {
        throw Error("subset '" + subset + "' has only " + std::to_string(pool.size()) + " " +
                    to_string(static_cast<Label>(cls)) + " records, need " +
                    std::to_string(per_class_per_subset));
      }
      // Partial Fisher-Yates: the first k slots end up holding the draw.
      for (std::size_t j = 0; j < per_class_per_subset; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(detail::bounded(rng, pool.size() - j));
        std::swap(pool[j], pool[pick]);
        selected.push_back(pool[j]);
      }
    }
  }

  std::sort(selected.begin(), selected.end());
  std::vector<SampleRecord> records;
  records.reserve(selected.size());
  for (std::size_t i : selected) records.push_back(matrix.records()[i]);
  return ScoreMatrix(matrix.registry(), std::move(records));
}

std::string double_to_string(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fdt
