#include "fdt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <nlohmann/json.hpp>

#include "rand_util.hpp"

namespace fdt {

namespace {

void validate_profiles(const std::vector<DetectorProfile>& profiles) {
  if (profiles.empty()) throw Error("at least one detector profile is required");
  for (const auto& profile : profiles) {
    if (profile.name.empty()) throw Error("detector profile name must be non-empty");
    if (!(profile.sharpness > 0.0)) {
      throw Error("profile '" + profile.name + "' needs sharpness > 0");
    }
    for (const auto& [family, skill] : profile.per_family_skill) {
      if (!(skill >= 0.0 && skill <= 1.0)) {
        throw Error("profile '" + profile.name + "' has skill outside [0,1] for family '" +
                    family + "'");
      }
    }
  }
}

double family_skill(const DetectorProfile& profile, const std::string& family) {
  auto it = profile.per_family_skill.find(family);
  if (it == profile.per_family_skill.end()) {
    throw Error("profile '" + profile.name + "' covers no family '" + family + "'");
  }
  return it->second;
}

// One detector's draw for one sample. Consumes a fixed number of uniforms
// per kind so substreams stay aligned.
double draw_score(std::mt19937_64& rng, const DetectorProfile& profile, Label truth,
                  double skill) {
  const bool correct = detail::uniform01(rng) < skill;
  if (profile.kind == DetectorKind::binary) {
    return correct ? unify_binary(truth) : unify_binary(truth == Label::real ? Label::fake
                                                                             : Label::real);
  }
  // Beta(sharpness, 1) via inverse CDF, scaled into the half interval next
  // to the pole the draw should sit at. Strictly inside (0,1), so the 0.5
  // boundary is never hit and correct-side probability equals the skill.
  const double u = detail::uniform01_open(rng);
  const double concentration = std::pow(u, 1.0 / profile.sharpness);
  const bool toward_fake = (truth == Label::fake) == correct;
  return toward_fake ? 0.5 + 0.5 * concentration : 0.5 - 0.5 * concentration;
}

std::vector<DetectorMeta> registry_from_profiles(const std::vector<DetectorProfile>& profiles) {
  std::vector<DetectorMeta> registry;
  registry.reserve(profiles.size());
  for (const auto& profile : profiles) registry.push_back({profile.name, profile.kind});
  return registry;
}

DetectorKind parse_kind_token(const std::string& token) {
  if (token == "continuous") return DetectorKind::continuous;
  if (token == "binary") return DetectorKind::binary;
  throw Error("unknown detector kind '" + token + "'");
}

// Small fixed spread so the 25 dev subsets are not carbon copies of each
// other, the way real per-category accuracies vary.
double jitter(double base, std::size_t index) {
  static constexpr double offsets[] = {0.0, 0.012, -0.015, 0.02, -0.008};
  return std::clamp(base + offsets[index % 5], 0.02, 0.98);
}

}  // namespace

std::string to_string(PerturbChannel channel) {
  switch (channel) {
    case PerturbChannel::blur: return "blur";
    case PerturbChannel::jpeg: return "jpeg";
    case PerturbChannel::resize: return "resize";
  }
  throw Error("invalid perturbation channel");
}

PerturbChannel parse_channel(const std::string& token) {
  if (token == "blur") return PerturbChannel::blur;
  if (token == "jpeg") return PerturbChannel::jpeg;
  if (token == "resize") return PerturbChannel::resize;
  throw Error("unknown perturbation channel '" + token + "'");
}

double effective_skill(double skill, double decay, std::uint32_t severity) {
  double result = skill;
  for (std::uint32_t i = 0; i < severity; ++i) result *= decay;
  if (result < 0.0 || result > 1.0) {
    const double clamped = std::clamp(result, 0.0, 1.0);
    std::cerr << "warning: decayed skill " << result << " clamped to " << clamped << "\n";
    result = clamped;
  }
  return result;
}

ScoreMatrix generate(const BenchmarkSpec& spec, const std::vector<DetectorProfile>& profiles) {
  validate_profiles(profiles);
  for (const auto& block : spec.families) {
    if (block.count == 0) throw Error("family block '" + block.family + "' has count 0");
    for (const auto& profile : profiles) family_skill(profile, block.family);
  }

  std::vector<SampleRecord> records;
  std::uint64_t index = 0;
  for (const auto& block : spec.families) {
    for (std::uint32_t c = 0; c < block.count; ++c, ++index) {
      SampleRecord rec;
      rec.sample_id = spec.name + "_" + block.family + "_" + to_string(block.cls) + "_" +
                      std::to_string(c);
      rec.label = block.cls;
      rec.benchmark = spec.name;
      rec.subset = block.family;
      rec.scores.reserve(profiles.size());
      std::mt19937_64 rng(detail::substream_seed(spec.seed, index));
      for (const auto& profile : profiles) {
        rec.scores.push_back(
            draw_score(rng, profile, rec.label, family_skill(profile, block.family)));
      }
      records.push_back(std::move(rec));
    }
  }
  return ScoreMatrix(registry_from_profiles(profiles), std::move(records));
}

ScoreMatrix perturb(const ScoreMatrix& matrix, const std::vector<DetectorProfile>& profiles,
                    const PerturbationSpec& spec, std::uint64_t seed) {
  validate_profiles(profiles);
  if (matrix.detector_names() != [&] {
        std::vector<std::string> names;
        for (const auto& p : profiles) names.push_back(p.name);
        return names;
      }()) {
    throw Error("profiles do not match the matrix registry");
  }
  for (const auto& profile : profiles) {
    if (!spec.skill_decay.count(profile.kind)) {
      throw Error("perturbation spec has no decay for kind '" + to_string(profile.kind) + "'");
    }
  }

  std::vector<SampleRecord> records = matrix.records();
  for (std::size_t index = 0; index < records.size(); ++index) {
    auto& rec = records[index];
    std::mt19937_64 rng(detail::substream_seed(seed, index));
    for (std::size_t m = 0; m < profiles.size(); ++m) {
      const auto& profile = profiles[m];
      const double skill = effective_skill(family_skill(profile, rec.subset),
                                           spec.skill_decay.at(profile.kind), spec.severity);
      rec.scores[m] = draw_score(rng, profile, rec.label, skill);
    }
  }
  return ScoreMatrix(matrix.registry(), std::move(records));
}

ComplementarySuite complementary_suite(std::uint64_t seed) {
  // Coarse per-family skills: artifact detectors ace gan/dm but collapse in
  // the wild; semantic detectors hold a moderate level everywhere and lead
  // in the wild.
  struct Coarse {
    const char* name;
    DetectorKind kind;
    double gan, dm, wild, sharpness;
  };
  static constexpr Coarse coarse[] = {
      {"art_a", DetectorKind::continuous, 0.96, 0.84, 0.22, 6.0},
      {"art_b", DetectorKind::continuous, 0.86, 0.95, 0.30, 5.0},
      {"art_c", DetectorKind::continuous, 0.92, 0.90, 0.18, 7.0},
      {"sem_a", DetectorKind::binary, 0.72, 0.74, 0.90, 6.0},
      {"sem_b", DetectorKind::binary, 0.70, 0.68, 0.93, 6.0},
      {"sem_c", DetectorKind::binary, 0.75, 0.70, 0.88, 6.0},
  };

  // 25 dev subsets: 9 gan-family, 9 dm-family, 7 in-the-wild.
  std::vector<std::pair<std::string, const char*>> dev_families;
  for (int i = 1; i <= 9; ++i) dev_families.emplace_back("gan_" + std::to_string(i), "gan");
  for (int i = 1; i <= 9; ++i) dev_families.emplace_back("dm_" + std::to_string(i), "dm");
  for (int i = 1; i <= 7; ++i) dev_families.emplace_back("wild_" + std::to_string(i), "wild");

  std::vector<DetectorProfile> profiles;
  for (const auto& c : coarse) {
    DetectorProfile profile;
    profile.name = c.name;
    profile.kind = c.kind;
    profile.sharpness = c.sharpness;
    profile.per_family_skill["gan"] = c.gan;
    profile.per_family_skill["dm"] = c.dm;
    profile.per_family_skill["wild"] = c.wild;
    for (std::size_t i = 0; i < dev_families.size(); ++i) {
      const auto& [subset, family] = dev_families[i];
      const double base = family == std::string("gan") ? c.gan
                          : family == std::string("dm") ? c.dm
                                                        : c.wild;
      profile.per_family_skill[subset] = jitter(base, i);
    }
    profiles.push_back(std::move(profile));
  }

  // Oversized pool, then the balanced 50 real + 50 fake draw per subset.
  BenchmarkSpec pool_spec;
  pool_spec.name = "dev";
  pool_spec.seed = detail::mix64(seed ^ 1);
  for (const auto& [subset, family] : dev_families) {
    (void)family;
    pool_spec.families.push_back({subset, Label::real, 150});
    pool_spec.families.push_back({subset, Label::fake, 150});
  }
  const ScoreMatrix pool = generate(pool_spec, profiles);
  ScoreMatrix dev = sample_balanced(pool, 50, detail::mix64(seed ^ 2));

  struct BenchMix {
    const char* name;
    std::uint32_t gan, dm, wild;  // per class
  };
  static constexpr BenchMix mixes[] = {
      {"gan_zoo", 400, 0, 0},         {"dm_gallery", 0, 400, 0},
      {"wild_social", 0, 0, 350},     {"balanced_mix", 150, 150, 100},
      {"dm_lean_mix", 100, 250, 50},  {"wild_heavy_mix", 50, 100, 250},
  };
  std::vector<ScoreMatrix> benchmarks;
  for (std::size_t j = 0; j < std::size(mixes); ++j) {
    const auto& mix = mixes[j];
    BenchmarkSpec spec;
    spec.name = mix.name;
    spec.seed = detail::mix64(seed ^ (16 + j));
    const std::pair<const char*, std::uint32_t> parts[] = {
        {"gan", mix.gan}, {"dm", mix.dm}, {"wild", mix.wild}};
    for (const auto& [family, count] : parts) {
      if (count == 0) continue;
      spec.families.push_back({family, Label::real, count});
      spec.families.push_back({family, Label::fake, count});
    }
    benchmarks.push_back(generate(spec, profiles));
  }
  return ComplementarySuite{std::move(profiles), std::move(dev), std::move(benchmarks)};
}

std::vector<std::pair<PerturbationSpec, ScoreMatrix>> standard_perturbations(
    const ScoreMatrix& matrix, const std::vector<DetectorProfile>& profiles, std::uint64_t seed) {
  std::vector<std::pair<PerturbationSpec, ScoreMatrix>> out;
  for (PerturbChannel channel :
       {PerturbChannel::blur, PerturbChannel::jpeg, PerturbChannel::resize}) {
    for (std::uint32_t severity = 1; severity <= 3; ++severity) {
      PerturbationSpec spec;
      spec.channel = channel;
      spec.severity = severity;
      const std::uint64_t sub_seed =
          detail::mix64(seed ^ (64 + static_cast<std::uint64_t>(channel) * 8 + severity));
      out.emplace_back(spec, perturb(matrix, profiles, spec, sub_seed));
    }
  }
  return out;
}

std::string profiles_to_json(std::span<const DetectorProfile> profiles) {
  nlohmann::ordered_json doc;
  auto& list = doc["profiles"] = nlohmann::ordered_json::array();
  for (const auto& profile : profiles) {
    nlohmann::ordered_json p;
    p["name"] = profile.name;
    p["kind"] = to_string(profile.kind);
    p["sharpness"] = profile.sharpness;
    p["per_family_skill"] = profile.per_family_skill;
    list.push_back(std::move(p));
  }
  return doc.dump(2) + "\n";
}

std::vector<DetectorProfile> profiles_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed profiles JSON: ") + e.what());
  }
  if (!doc.contains("profiles") || !doc["profiles"].is_array()) {
    throw Error("profiles JSON must be {\"profiles\":[...]}");
  }
  std::vector<DetectorProfile> profiles;
  for (const auto& p : doc["profiles"]) {
    DetectorProfile profile;
    profile.name = p.at("name").get<std::string>();
    profile.kind = parse_kind_token(p.value("kind", std::string("continuous")));
    profile.sharpness = p.value("sharpness", 6.0);
    if (p.contains("per_family_skill")) {
      profile.per_family_skill =
          p.at("per_family_skill").get<std::map<std::string, double>>();
    }
    profiles.push_back(std::move(profile));
  }
  validate_profiles(profiles);
  return profiles;
}

std::string benchmark_spec_to_json(const BenchmarkSpec& spec) {
  nlohmann::ordered_json doc;
  doc["name"] = spec.name;
  doc["seed"] = spec.seed;
  auto& families = doc["families"] = nlohmann::ordered_json::array();
  for (const auto& block : spec.families) {
    families.push_back({{"family", block.family},
                        {"class", to_string(block.cls)},
                        {"count", block.count}});
  }
  return doc.dump(2) + "\n";
}

BenchmarkSpec benchmark_spec_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed benchmark spec JSON: ") + e.what());
  }
  BenchmarkSpec spec;
  spec.name = doc.at("name").get<std::string>();
  spec.seed = doc.value("seed", 0ull);
  if (!doc.contains("families") || !doc["families"].is_array()) {
    throw Error("benchmark spec needs a 'families' array");
  }
  for (const auto& f : doc["families"]) {
    FamilyBlock block;
    block.family = f.at("family").get<std::string>();
    block.cls = parse_label(f.at("class").get<std::string>());
    block.count = f.at("count").get<std::uint32_t>();
    spec.families.push_back(std::move(block));
  }
  return spec;
}

}  // namespace fdt
