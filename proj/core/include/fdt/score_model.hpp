#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdt {

/// Error raised by any fdtfuse operation on invalid input or malformed data.
/// The message carries enough context (row number, field, detector name) to
/// locate the offending input.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Label : std::uint8_t { real = 0, fake = 1 };

enum class DetectorKind : std::uint8_t { continuous = 0, binary = 1 };

std::string to_string(Label label);
std::string to_string(DetectorKind kind);

/// Parses a label token. Accepts "0"/"real" and "1"/"fake", case-insensitive.
Label parse_label(const std::string& token);

/// Maps a binary real/fake decision to the soft score used throughout:
/// real -> 0.0, fake -> 1.0.
double unify_binary(Label decision);

struct DetectorMeta {
  std::string name;
  DetectorKind kind = DetectorKind::continuous;
};

struct SampleRecord {
  std::string sample_id;
  Label label = Label::real;
  std::string benchmark;
  std::string subset;
  std::vector<double> scores;  // one per registry entry, each in [0,1]
};

/// N labeled samples x M detector scores. Immutable once constructed; every
/// downstream operation works on read-only views, so instances can be shared
/// freely across threads.
class ScoreMatrix {
public:
  /// Validates that registry names are unique and non-empty, that every
  /// record has exactly one score per detector, that scores lie in [0,1],
  /// and that binary-kind detectors carry exactly 0.0 or 1.0.
  ScoreMatrix(std::vector<DetectorMeta> registry, std::vector<SampleRecord> records);

  const std::vector<DetectorMeta>& registry() const { return registry_; }
  const std::vector<SampleRecord>& records() const { return records_; }

  std::size_t detector_count() const { return registry_.size(); }
  std::size_t size() const { return records_.size(); }

  std::vector<std::string> detector_names() const;

private:
  std::vector<DetectorMeta> registry_;
  std::vector<SampleRecord> records_;
};

enum class ScoreFormat : std::uint8_t { csv, jsonl };

/// Loads a score file.
///
/// CSV: header `sample_id,benchmark,subset,label,<det_1>,...,<det_M>`, one
/// record per line. An optional sidecar registry (JSON) declares detector
/// kinds; without it all detectors are treated as continuous.
///
/// JSONL: one object per line with keys sample_id, benchmark, subset, label
/// and a `scores` object mapping detector name -> value. benchmark/subset
/// default to "default" when absent. Detector order follows the first line.
ScoreMatrix load_scores(const std::filesystem::path& path, ScoreFormat format,
                        const std::optional<std::filesystem::path>& registry_sidecar = std::nullopt);

/// Serializes back to the on-disk format. Scores are written with the
/// shortest representation that parses back to the identical double, so a
/// load/save/load round trip reproduces records field for field.
void save_scores(const ScoreMatrix& matrix, const std::filesystem::path& path, ScoreFormat format);

/// Writes the registry sidecar: {"detectors":[{"name":...,"kind":...},...]}.
void save_registry(const ScoreMatrix& matrix, const std::filesystem::path& path);

std::vector<DetectorMeta> parse_registry_json(const std::string& text);

/// Draws exactly `per_class_per_subset` real and fake records per subset,
/// uniformly without replacement, deterministic for a fixed seed. Selected
/// records keep their original relative order. Throws if any
/// (subset x class) stratum is understocked.
ScoreMatrix sample_balanced(const ScoreMatrix& matrix, std::size_t per_class_per_subset,
                            std::uint64_t seed);

/// Shortest decimal string that round-trips to the same double.
std::string double_to_string(double value);

/// Writes `content` to a temp file next to `path` and renames it into place.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace fdt
