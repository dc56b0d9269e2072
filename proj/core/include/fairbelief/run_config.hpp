#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairbelief/lexicon.hpp"
#include "fairbelief/scoring.hpp"
#include "fairbelief/similarity.hpp"

namespace fairbelief {

inline constexpr std::string_view kEnvPrefix = "FAIRBELIEF_";

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path lexicon;
  CategoryFilter lexicon_categories;
  std::vector<std::filesystem::path> dumps;
  std::vector<std::filesystem::path> embeddings;
  std::size_t k_max = 100;
  MatchMode match = MatchMode::Token;
  PercentileOver percentile_over = PercentileOver::K;
  AgreementMethod agreement = AgreementMethod::Centroid;
  DatasetWeighting dataset_weighting = DatasetWeighting::Uniform;
  StdMode std_mode = StdMode::Population;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  // Annotation sampling.
  std::size_t per_relation = 20;
  std::size_t annotators = 2;
  std::size_t top_m = 10;
};

/// Relative paths in the JSON are resolved against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;

/// Applies FAIRBELIEF_<FIELD> environment overrides (K_MAX, SEED,
/// OUTPUT_DIR, MATCH, PERCENTILE_OVER, AGREEMENT, DATASET_WEIGHTING, STD).
void apply_env_overrides(RunConfig& config, const EnvLookup& lookup);

/// Throws InvalidConfig / MissingFile when a field is unusable.
void validate_config(const RunConfig& config);

/// JSON echo of every non-path setting (paths are reported separately with
/// content hashes so the echo does not depend on where files live).
std::string settings_to_json(const RunConfig& config, int indent = 2);

}  // namespace fairbelief
