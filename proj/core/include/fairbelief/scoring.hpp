#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbelief/dump.hpp"
#include "fairbelief/lexicon.hpp"
#include "fairbelief/templates.hpp"

namespace fairbelief {

enum class StdMode { Population, Sample };
enum class PercentileOver { K, Template };
enum class DatasetWeighting { Uniform, ByTemplates };

std::string_view to_string(StdMode m);
std::string_view to_string(PercentileOver p);
std::string_view to_string(DatasetWeighting w);
std::optional<StdMode> parse_std_mode(std::string_view s);
std::optional<PercentileOver> parse_percentile_over(std::string_view s);
std::optional<DatasetWeighting> parse_dataset_weighting(std::string_view s);

/// HONEST score as a function of k. `scores_by_k[k - 1]` holds HONEST@k.
struct ScoreSeries {
  ModelDescriptor model;
  Subset subset = Subset::Binary;
  std::optional<GroupAxis> group_axis;
  std::optional<std::string> group_label;
  std::vector<double> scores_by_k;
  std::size_t n_templates = 0;

  double at(std::size_t k) const { return scores_by_k.at(k - 1); }
  std::size_t k_max() const noexcept { return scores_by_k.size(); }
};

struct PercentileSummary {
  double mean = 0.0;
  double std = 0.0;
  double q1 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
};

struct RankedModel {
  ModelDescriptor model;
  PercentileSummary summary;
  int rank = 0;
};

/// Cumulative hurtful counts per template: `counts[t][k]` is the number of
/// hurtful fill-ins among the top-k completions of view template t
/// (`counts[t][0] == 0`). Each distinct fill-in is matched once.
using HurtfulProfile = std::vector<std::vector<std::uint32_t>>;
HurtfulProfile hurtful_profile(const DumpView& view, const Lexicon& lexicon,
                               MatchMode mode = MatchMode::Token);

double honest_at_k(const DumpView& view, const Lexicon& lexicon, std::size_t k,
                   MatchMode mode = MatchMode::Token);

ScoreSeries honest_series(const DumpView& view, const Lexicon& lexicon,
                          std::size_t k_max, MatchMode mode = MatchMode::Token);

/// HONEST@k of each template on its own, in view order.
std::vector<double> per_template_scores(const DumpView& view, const Lexicon& lexicon,
                                        std::size_t k,
                                        MatchMode mode = MatchMode::Token);

/// Inclusive linear interpolation between order statistics; `p` in [0, 1].
/// `sorted` must be ascending and non-empty.
double percentile(std::span<const double> sorted, double p);

PercentileSummary summarize(std::span<const double> values,
                            StdMode std_mode = StdMode::Population);
PercentileSummary summarize(const ScoreSeries& series,
                            StdMode std_mode = StdMode::Population);

/// Rank 1 is the highest mean. Equal means are ordered by model_id.
std::vector<RankedModel> rank_models(
    std::span<const std::pair<ModelDescriptor, PercentileSummary>> summaries);

struct GroupScores {
  std::map<std::string, ScoreSeries> series;
  std::vector<std::string> warnings;
};

/// One series per identity group on `axis`; groups without templates are
/// omitted and reported in `warnings`.
GroupScores group_series(const DumpView& view, const Lexicon& lexicon,
                         const TemplateManifest& manifest, GroupAxis axis,
                         std::size_t k_max, MatchMode mode = MatchMode::Token);

/// Per-k average of one model's subset series (binary, queer).
ScoreSeries combine_subsets(std::span<const ScoreSeries> per_subset,
                            DatasetWeighting weighting);

}  // namespace fairbelief
