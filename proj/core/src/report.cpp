#include "fairbelief/report.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "fairbelief/csv.hpp"
#include "fairbelief/dump.hpp"
#include "fairbelief/error.hpp"
#include "fairbelief/hashing.hpp"
#include "fairbelief/io.hpp"
#include "fairbelief/lexicon.hpp"
#include "fairbelief/similarity.hpp"
#include "fairbelief/templates.hpp"
#include "json.hpp"

#ifndef FAIRBELIEF_VERSION
#define FAIRBELIEF_VERSION "0.0.0"
#endif

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "report-cli";

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fixed(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

const csv::Row kScoreHeader = {"model_id", "family", "scale_label", "subset",
                               "group_axis", "group_label", "k", "score"};
const csv::Row kAgreementHeader = {"scope", "label", "k", "value", "n_template_pairs"};

void append_series(std::ostream& out, const ScoreSeries& s) {
  for (std::size_t k = 1; k <= s.k_max(); ++k) {
    csv::write_row(out, {s.model.model_id, s.model.family, std::string(to_string(s.model.scale_label)),
                         std::string(to_string(s.subset)),
                         s.group_axis ? std::string(to_string(*s.group_axis)) : std::string(),
                         s.group_label.value_or(std::string()), std::to_string(k),
                         format_number(s.at(k))});
  }
}

void append_agreement(std::ostream& out, const AgreementSeries& s) {
  for (std::size_t k = 1; k <= s.values_by_k.size(); ++k) {
    csv::write_row(out, {std::string(to_string(s.scope)), s.label, std::to_string(k),
                         format_number(s.values_by_k[k - 1]), std::to_string(s.n_template_pairs)});
  }
}

// Everything computed for one dump.
struct DumpScores {
  ScoreSeries whole;
  GroupScores by_gender;
  GroupScores by_age;
  std::vector<double> per_template;
};

DumpScores score_dump(const CompletionDump& dump, const Lexicon& lexicon,
                      const TemplateManifest& manifest, const RunConfig& config) {
  const DumpView view = slice_top(dump, config.k_max);
  DumpScores out;
  out.whole = honest_series(view, lexicon, config.k_max, config.match);
  out.by_gender = group_series(view, lexicon, manifest, GroupAxis::Gender, config.k_max, config.match);
  out.by_age = group_series(view, lexicon, manifest, GroupAxis::Age, config.k_max, config.match);
  out.per_template = per_template_scores(view, lexicon, config.k_max, config.match);
  return out;
}

ordered_json file_entry(const fs::path& path) {
  ordered_json j;
  j["name"] = path.filename().string();
  j["sha256"] = sha256_hex(read_text_file(path, kModule));
  return j;
}

fs::path sidecar_path(const fs::path& dump) { return fs::path(dump.string() + ".emb"); }

}  // namespace

std::string_view tool_version() { return FAIRBELIEF_VERSION; }

Table1 emit_table1(std::span<const RankedModel> ranked,
                   std::span<const ModelDescriptor> descriptor_order) {
  std::vector<ModelDescriptor> order(descriptor_order.begin(), descriptor_order.end());
  if (order.empty()) {
    for (const auto& r : ranked) order.push_back(r.model);
  }
  std::map<std::string, const RankedModel*> by_id;
  for (const auto& r : ranked) by_id.emplace(r.model.model_id, &r);

  std::vector<std::string> families;
  for (const auto& d : order) {
    if (std::find(families.begin(), families.end(), d.family) == families.end()) {
      families.push_back(d.family);
    }
  }
  std::vector<const RankedModel*> rows;
  for (const auto& family : families) {
    for (const auto& d : order) {
      if (d.family != family) continue;
      const auto it = by_id.find(d.model_id);
      if (it != by_id.end()) rows.push_back(it->second);
    }
  }

  double best_mean = 0.0;
  if (!ranked.empty()) {
    best_mean = std::min_element(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                  return a.summary.mean < b.summary.mean;
                })->summary.mean;
  }

  Table1 table;
  std::ostringstream csv_out;
  csv::write_row(csv_out, {"family", "model_id", "scale_label", "rank", "mean", "std", "q1", "q50",
                           "q75", "q90", "q95", "best"});
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Family", "Model", "Rank", "HONEST", "q1", "q50", "q75", "q90", "q95"});
  std::string previous_family;
  for (const auto* r : rows) {
    const auto& s = r->summary;
    const bool best = s.mean == best_mean;
    csv::write_row(csv_out, {r->model.family, r->model.model_id,
                             std::string(to_string(r->model.scale_label)), std::to_string(r->rank),
                             format_number(s.mean), format_number(s.std), format_number(s.q1),
                             format_number(s.q50), format_number(s.q75), format_number(s.q90),
                             format_number(s.q95), best ? "true" : "false"});
    cells.push_back({r->model.family == previous_family ? "" : r->model.family, r->model.model_id,
                     std::to_string(r->rank),
                     fixed(s.mean) + " ± " + fixed(s.std) + (best ? " *" : ""), fixed(s.q1),
                     fixed(s.q50), fixed(s.q75), fixed(s.q90), fixed(s.q95)});
    previous_family = r->model.family;
  }
  table.csv = csv_out.str();

  // Column widths in code points so "±" aligns.
  const auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(
        s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xc0) != 0x80; }));
  };
  std::vector<std::size_t> widths(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::ostringstream text;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) line += "  ";
      line += cells[r][c];
      line.append(widths[c] - width(cells[r][c]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    text << line << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      text << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  text << "* lowest mean (least hurtful)\n";
  table.text = text.str();
  return table;
}

AuditBundle run_audit(const RunConfig& config) {
  validate_config(config);
  AuditBundle bundle;

  const TemplateManifest manifest = read_manifest(config.manifest);
  const Lexicon lexicon = load_lexicon(config.lexicon, config.lexicon_categories);

  std::deque<CompletionDump> dumps;
  std::set<std::pair<std::string, Subset>> seen_runs;
  std::map<std::string, ModelDescriptor> descriptors;
  std::map<std::pair<std::string, ScaleLabel>, std::string> family_scale;
  std::vector<ModelDescriptor> model_order;
  for (const auto& path : config.dumps) {
    auto& dump = dumps.emplace_back(read_dump(path, &manifest));
    if (config.k_max > dump.k_max) {
      throw Error(ErrorCode::KOutOfRange, kModule,
                  "k_max " + std::to_string(config.k_max) + " exceeds " + path.filename().string() +
                      " k_max " + std::to_string(dump.k_max));
    }
    if (!seen_runs.emplace(dump.model.model_id, dump.subset).second) {
      throw Error(ErrorCode::DuplicateModel, kModule,
                  dump.model.model_id + " has two " + std::string(to_string(dump.subset)) + " dumps");
    }
    const auto [it, inserted] = descriptors.emplace(dump.model.model_id, dump.model);
    if (!inserted && !(it->second == dump.model)) {
      throw Error(ErrorCode::DuplicateModel, kModule,
                  dump.model.model_id + " has inconsistent descriptors across dumps");
    }
    if (inserted) {
      model_order.push_back(dump.model);
      const auto key = std::make_pair(dump.model.family, dump.model.scale_label);
      const auto [fs_it, fresh] = family_scale.emplace(key, dump.model.model_id);
      if (!fresh) {
        throw Error(ErrorCode::DuplicateModel, kModule,
                    dump.model.model_id + " and " + fs_it->second + " share family " +
                        dump.model.family + " and scale " +
                        std::string(to_string(dump.model.scale_label)));
      }
    }
  }

  // Scoring, one task per dump; results are collected in config order.
  std::vector<std::future<DumpScores>> pending;
  for (const auto& dump : dumps) {
    pending.push_back(std::async(std::launch::async, score_dump, std::cref(dump),
                                 std::cref(lexicon), std::cref(manifest), std::cref(config)));
  }
  std::vector<DumpScores> scores;
  for (auto& f : pending) scores.push_back(f.get());

  std::ostringstream scores_csv;
  std::ostringstream groups_csv;
  csv::write_row(scores_csv, kScoreHeader);
  csv::write_row(groups_csv, kScoreHeader);
  for (const auto& s : scores) {
    append_series(scores_csv, s.whole);
    for (const auto* groups : {&s.by_gender, &s.by_age}) {
      for (const auto& [label, series] : groups->series) append_series(groups_csv, series);
      bundle.warnings.insert(bundle.warnings.end(), groups->warnings.begin(), groups->warnings.end());
    }
  }

  // Per-model summaries across subsets.
  std::vector<std::pair<ModelDescriptor, PercentileSummary>> summaries;
  for (const auto& model : model_order) {
    std::vector<ScoreSeries> per_subset;
    std::vector<double> pooled;
    for (std::size_t i = 0; i < dumps.size(); ++i) {
      if (dumps[i].model.model_id != model.model_id) continue;
      per_subset.push_back(scores[i].whole);
      pooled.insert(pooled.end(), scores[i].per_template.begin(), scores[i].per_template.end());
    }
    const PercentileSummary summary =
        config.percentile_over == PercentileOver::K
            ? summarize(combine_subsets(per_subset, config.dataset_weighting), config.std_mode)
            : summarize(pooled, config.std_mode);
    summaries.emplace_back(model, summary);
  }
  const auto ranked = rank_models(summaries);
  const Table1 table = emit_table1(ranked, model_order);

  // Agreement.
  std::ostringstream family_csv;
  std::ostringstream group_agreement_csv;
  csv::write_row(family_csv, kAgreementHeader);
  csv::write_row(group_agreement_csv, kAgreementHeader);

  std::vector<fs::path> embedding_paths = config.embeddings;
  if (embedding_paths.empty()) {
    for (const auto& d : config.dumps) {
      if (fs::is_regular_file(sidecar_path(d))) embedding_paths.push_back(sidecar_path(d));
    }
  }
  std::string agreement_status = "skipped: no embeddings";
  EmbeddingTable embeddings;
  if (!embedding_paths.empty()) {
    for (const auto& p : embedding_paths) embeddings.merge(load_embeddings(p));
    std::vector<const CompletionDump*> all;
    for (const auto& d : dumps) all.push_back(&d);
    check_coverage(embeddings, all);
    agreement_status = "computed";

    for (const Subset subset : {Subset::Binary, Subset::Queer}) {
      std::vector<DumpView> views;
      for (const auto& d : dumps) {
        if (d.subset == subset) views.push_back(slice_top(d, config.k_max));
      }
      if (views.empty()) continue;
      const std::string prefix = std::string(to_string(subset)) + "/";

      std::vector<std::string> families;
      std::map<std::string, std::vector<DumpView>> by_family;
      for (const auto& v : views) {
        const auto& family = v.dump().model.family;
        if (!by_family.contains(family)) families.push_back(family);
        by_family[family].push_back(v);
      }
      for (const auto& family : families) {
        const auto& members = by_family[family];
        if (members.size() < 2) {
          bundle.warnings.push_back(prefix + family + ": single scale, no intra-family agreement");
          continue;
        }
        auto series = intra_family_agreement(members, embeddings, config.k_max, config.agreement);
        series.label = prefix + series.label;
        append_agreement(family_csv, series);
      }
      for (std::size_t i = 0; i < families.size(); ++i) {
        for (std::size_t j = i + 1; j < families.size(); ++j) {
          auto series = inter_family_agreement(by_family[families[i]], by_family[families[j]],
                                               embeddings, config.k_max, config.agreement);
          series.label = prefix + series.label;
          append_agreement(family_csv, series);
        }
      }

      if (views.size() < 2) {
        bundle.warnings.push_back(prefix + "single model, no group agreement");
        continue;
      }
      for (const GroupAxis axis : {GroupAxis::Gender, GroupAxis::Age}) {
        auto groups = group_agreement(views, embeddings, manifest, axis, config.k_max,
                                      config.agreement);
        for (auto& [label, series] : groups.series) {
          series.label = prefix + std::string(to_string(axis)) + "=" + label;
          append_agreement(group_agreement_csv, series);
        }
        for (const auto& w : groups.warnings) bundle.warnings.push_back(prefix + w);
      }
    }
  }

  // Metadata.
  ordered_json meta;
  meta["tool"] = "fairbelief-audit";
  meta["tool_version"] = tool_version();
  meta["settings"] = ordered_json::parse(settings_to_json(config));
  ordered_json inputs;
  inputs["manifest"] = file_entry(config.manifest);
  inputs["manifest"]["template_manifest_hash"] = manifest.hash();
  inputs["manifest"]["templates"] = manifest.size();
  inputs["lexicon"] = file_entry(config.lexicon);
  inputs["lexicon"]["source_version"] = lexicon.source_version();
  inputs["lexicon"]["terms"] = lexicon.size();
  inputs["dumps"] = ordered_json::array();
  for (std::size_t i = 0; i < dumps.size(); ++i) {
    auto entry = file_entry(config.dumps[i]);
    entry["model_id"] = dumps[i].model.model_id;
    entry["family"] = dumps[i].model.family;
    entry["subset"] = to_string(dumps[i].subset);
    entry["k_max"] = dumps[i].k_max;
    entry["producer_version"] = dumps[i].producer_version;
    inputs["dumps"].push_back(entry);
  }
  inputs["embeddings"] = ordered_json::array();
  for (const auto& p : embedding_paths) inputs["embeddings"].push_back(file_entry(p));
  if (!embedding_paths.empty()) {
    inputs["encoder_id"] = embeddings.encoder_id();
    inputs["embedding_dimension"] = embeddings.dimension();
  }
  meta["inputs"] = inputs;
  meta["agreement"] = agreement_status;
  meta["warnings"] = bundle.warnings;

  const std::vector<std::pair<std::string, std::string>> files = {
      {"summary.csv", table.csv},
      {"table1.txt", table.text},
      {"scores_by_k.csv", scores_csv.str()},
      {"group_scores.csv", groups_csv.str()},
      {"agreement_family.csv", family_csv.str()},
      {"agreement_group.csv", group_agreement_csv.str()},
  };
  ordered_json outputs = ordered_json::array();
  for (const auto& [name, content] : files) outputs.push_back(name);
  meta["outputs"] = outputs;

  OutputTransaction transaction(config.output_dir);
  for (const auto& [name, content] : files) transaction.stage(name, content);
  transaction.stage("metadata.json", meta.dump(2) + "\n");
  bundle.files = transaction.commit();
  return bundle;
}

}  // namespace fairbelief
