#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairbelief/dump.hpp"
#include "fairbelief/templates.hpp"

namespace fairbelief {

struct RankedFillIn {
  std::size_t rank = 0;
  std::string fill_in;
};

struct ModelPredictions {
  std::string model_id;
  std::vector<RankedFillIn> top;
};

struct AnnotationRow {
  std::string template_id;
  std::string template_text;
  Relation relation = Relation::Occupation;
  std::string identity_id;
  std::vector<ModelPredictions> predictions;
  std::string annotator_id;
  std::string judgment;  // left empty for the annotator
};

struct AnnotationSheet {
  Subset subset = Subset::Binary;
  std::string annotator_id;
  std::vector<AnnotationRow> rows;
};

struct SamplingOptions {
  std::size_t per_relation = 20;
  std::size_t annotators = 2;
  std::size_t top_m = 10;
  std::uint64_t seed = 0;
};

/// Draws `per_relation` instances per relation, spread evenly over the
/// subsets present in `dumps`, and deals each subset's draw to
/// `annotators` sheets. Sampling is uniform without replacement among
/// templates completed by every dump of that subset.
std::vector<AnnotationSheet> sample_for_annotation(
    std::span<const CompletionDump* const> dumps, const TemplateManifest& manifest,
    const SamplingOptions& options);

/// CSV with one column per model between the template fields and the
/// empty `judgment` column.
std::string sheet_to_csv(const AnnotationSheet& sheet);

std::string sheet_file_name(const AnnotationSheet& sheet);

/// Deterministic integer stream for sampling. Same seed and stream ids give
/// the same draws on every platform.
class SamplingRng {
 public:
  SamplingRng(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b);

  /// Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// First `count` elements of a uniform random permutation of 0..n-1.
  std::vector<std::size_t> choose(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairbelief
