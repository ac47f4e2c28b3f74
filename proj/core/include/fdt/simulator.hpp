#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdt/score_model.hpp"

namespace fdt {

/// Declarative behavior of one synthetic detector: per-source-family
/// probability of a correct-side score, plus the concentration of the
/// continuous score distribution.
struct DetectorProfile {
  std::string name;
  DetectorKind kind = DetectorKind::continuous;
  std::map<std::string, double> per_family_skill;
  double sharpness = 6.0;
};

struct FamilyBlock {
  std::string family;
  Label cls = Label::fake;
  std::uint32_t count = 0;
};

struct BenchmarkSpec {
  std::string name;
  std::vector<FamilyBlock> families;
  std::uint64_t seed = 0;
};

enum class PerturbChannel : std::uint8_t { blur = 0, jpeg = 1, resize = 2 };

std::string to_string(PerturbChannel channel);
PerturbChannel parse_channel(const std::string& token);

/// Score-level stand-in for an image post-processing operation: each
/// severity level multiplies every detector's skill by the decay constant
/// of its kind. Continuous (artifact-style) detectors decay at 0.85 per
/// level, binary (semantic-style) ones at 0.97.
struct PerturbationSpec {
  PerturbChannel channel = PerturbChannel::blur;
  std::uint32_t severity = 1;
  std::map<DetectorKind, double> skill_decay = {{DetectorKind::continuous, 0.85},
                                                {DetectorKind::binary, 0.97}};
};

/// skill * decay^severity, clamped into [0,1] (with a stderr warning when
/// the clamp fires).
double effective_skill(double skill, double decay, std::uint32_t severity);

/// Draws one score matrix. Continuous detectors emit a Beta(sharpness,1)
/// draw mapped into the correct half of [0,1] with probability skill and
/// mirrored otherwise; binary detectors emit the true soft label with
/// probability skill. Every sample uses its own substream derived from
/// (spec.seed, sample index), so generation order never matters.
ScoreMatrix generate(const BenchmarkSpec& spec, const std::vector<DetectorProfile>& profiles);

/// Redraws all scores with each profile's skills decayed per the
/// perturbation spec; sample ids, labels and tags stay untouched. With
/// severity 0 and the generating seed this reproduces the input matrix.
ScoreMatrix perturb(const ScoreMatrix& matrix, const std::vector<DetectorProfile>& profiles,
                    const PerturbationSpec& spec, std::uint64_t seed);

/// Canned configuration reproducing the complementarity setting: three
/// artifact-style continuous detectors (strong on gan/dm families, weak in
/// the wild) and three semantic-style binary detectors (moderate
/// everywhere, strong in the wild), a balanced 2,500-sample dev matrix
/// drawn from 25 subsets, and six benchmarks with differing family mixes.
struct ComplementarySuite {
  std::vector<DetectorProfile> profiles;
  ScoreMatrix dev;
  std::vector<ScoreMatrix> benchmarks;
};

ComplementarySuite complementary_suite(std::uint64_t seed);

/// The canned robustness battery: blur/jpeg/resize at severities 1..3
/// applied to the given matrix (nine perturbed copies).
std::vector<std::pair<PerturbationSpec, ScoreMatrix>> standard_perturbations(
    const ScoreMatrix& matrix, const std::vector<DetectorProfile>& profiles, std::uint64_t seed);

std::string profiles_to_json(std::span<const DetectorProfile> profiles);
std::vector<DetectorProfile> profiles_from_json(const std::string& text);
std::string benchmark_spec_to_json(const BenchmarkSpec& spec);
BenchmarkSpec benchmark_spec_from_json(const std::string& text);

}  // namespace fdt
