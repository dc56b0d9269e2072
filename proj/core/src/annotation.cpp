#include "fairbelief/annotation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fairbelief/csv.hpp"
#include "fairbelief/error.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "report-cli";

}  // namespace

SamplingRng::SamplingRng(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream_a, stream_b};
  engine_.seed(seq);
}

std::uint64_t SamplingRng::below(std::uint64_t bound) {
  // Reject the low 2^64 mod bound values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::vector<std::size_t> SamplingRng::choose(std::size_t n, std::size_t count) {
  std::vector<std::size_t> items(n);
  std::iota(items.begin(), items.end(), std::size_t{0});
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(below(n - i));
    std::swap(items[i], items[j]);
  }
  items.resize(count);
  return items;
}

std::vector<AnnotationSheet> sample_for_annotation(std::span<const CompletionDump* const> dumps,
                                                   const TemplateManifest& manifest,
                                                   const SamplingOptions& options) {
  if (dumps.empty()) throw Error(ErrorCode::NotEnoughInstances, kModule, "no dumps supplied");
  if (options.annotators < 1) throw Error(ErrorCode::InvalidConfig, kModule, "annotators must be >= 1");
  if (options.per_relation < 1) {
    throw Error(ErrorCode::InvalidConfig, kModule, "per_relation must be >= 1");
  }

  std::vector<Subset> subsets;
  for (const auto* d : dumps) {
    if (std::find(subsets.begin(), subsets.end(), d->subset) == subsets.end()) {
      subsets.push_back(d->subset);
    }
    if (options.top_m < 1 || options.top_m > d->k_max) {
      throw Error(ErrorCode::KOutOfRange, kModule,
                  "top_m=" + std::to_string(options.top_m) + " outside 1.." +
                      std::to_string(d->k_max) + " for " + d->model.model_id);
    }
  }
  std::sort(subsets.begin(), subsets.end());

  if (options.per_relation % subsets.size() != 0 ||
      (options.per_relation / subsets.size()) % options.annotators != 0) {
    throw Error(ErrorCode::IndivisibleSplit, kModule,
                std::to_string(options.per_relation) + " instances per relation cannot be split over " +
                    std::to_string(subsets.size()) + " subset(s) and " +
                    std::to_string(options.annotators) + " annotator(s)");
  }
  const std::size_t per_subset = options.per_relation / subsets.size();
  const std::size_t per_annotator = per_subset / options.annotators;

  std::vector<AnnotationSheet> sheets;
  for (const Subset subset : subsets) {
    std::vector<const CompletionDump*> members;
    std::vector<std::unordered_map<std::string_view, std::size_t>> blocks;
    for (const auto* d : dumps) {
      if (d->subset != subset) continue;
      members.push_back(d);
      auto& index = blocks.emplace_back();
      for (std::size_t i = 0; i < d->templates.size(); ++i) {
        index.emplace(d->templates[i].template_id, i);
      }
    }

    std::vector<AnnotationSheet> subset_sheets(options.annotators);
    for (std::size_t a = 0; a < options.annotators; ++a) {
      subset_sheets[a].subset = subset;
      subset_sheets[a].annotator_id = "A" + std::to_string(a + 1);
    }

    for (const Relation relation : kAllRelations) {
      std::vector<const Template*> eligible;
      for (const auto& t : manifest.templates()) {
        if (t.subset != subset || t.relation != relation) continue;
        const bool covered = std::all_of(blocks.begin(), blocks.end(),
                                         [&](const auto& index) { return index.contains(t.id); });
        if (covered) eligible.push_back(&t);
      }
      if (eligible.size() < per_subset) {
        throw Error(ErrorCode::NotEnoughInstances, kModule,
                    std::string(to_string(relation)) + " in subset " +
                        std::string(to_string(subset)) + ": need " + std::to_string(per_subset) +
                        ", have " + std::to_string(eligible.size()));
      }

      SamplingRng rng(options.seed, static_cast<std::uint32_t>(subset),
                      static_cast<std::uint32_t>(relation));
      const auto chosen = rng.choose(eligible.size(), per_subset);
      for (std::size_t n = 0; n < chosen.size(); ++n) {
        const Template& t = *eligible[chosen[n]];
        auto& sheet = subset_sheets[n / per_annotator];

        AnnotationRow row;
        row.template_id = t.id;
        row.template_text = t.text;
        row.relation = t.relation;
        row.identity_id = t.identity_id;
        row.annotator_id = sheet.annotator_id;
        for (std::size_t m = 0; m < members.size(); ++m) {
          const auto& block = members[m]->templates[blocks[m].at(t.id)];
          ModelPredictions predictions{members[m]->model.model_id, {}};
          for (std::size_t r = 0; r < options.top_m; ++r) {
            predictions.top.push_back({r + 1, block.ranked[r].fill_in});
          }
          row.predictions.push_back(std::move(predictions));
        }
        sheet.rows.push_back(std::move(row));
      }
    }
    for (auto& sheet : subset_sheets) sheets.push_back(std::move(sheet));
  }
  return sheets;
}

std::string sheet_to_csv(const AnnotationSheet& sheet) {
  std::ostringstream out;
  csv::Row header = {"annotator_id", "subset", "relation", "template_id", "identity_id",
                     "template_text"};
  if (!sheet.rows.empty()) {
    for (const auto& p : sheet.rows.front().predictions) header.push_back(p.model_id);
  }
  header.push_back("judgment");
  csv::write_row(out, header);

  for (const auto& row : sheet.rows) {
    csv::Row fields = {row.annotator_id,
                       std::string(to_string(sheet.subset)),
                       std::string(to_string(row.relation)),
                       row.template_id,
                       row.identity_id,
                       row.template_text};
    for (const auto& p : row.predictions) {
      std::string cell;
      for (const auto& f : p.top) {
        if (!cell.empty()) cell += "; ";
        cell += std::to_string(f.rank) + "=" + f.fill_in;
      }
      fields.push_back(std::move(cell));
    }
    fields.push_back(row.judgment);
    csv::write_row(out, fields);
  }
  return out.str();
}

std::string sheet_file_name(const AnnotationSheet& sheet) {
  return "annotation_" + std::string(to_string(sheet.subset)) + "_" + sheet.annotator_id + ".csv";
}

}  // namespace fairbelief
