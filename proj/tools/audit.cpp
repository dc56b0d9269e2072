// audit: command-line front end for the hurtfulness audit pipeline.
//
//   audit templates --identities ids.csv --predicates preds.csv --out manifest.jsonl
//   audit run --config run.json
//   audit sample --config run.json --per-relation 20 --annotators 2 --top-m 10 --seed 7
//   audit validate dump.jsonl [--manifest manifest.jsonl]
//
// Exit status: 0 on success, 1 on usage errors, 2 on pipeline errors.

#include <cstdlib>
#include <deque>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairbelief/annotation.hpp"
#include "fairbelief/dump.hpp"
#include "fairbelief/error.hpp"
#include "fairbelief/io.hpp"
#include "fairbelief/report.hpp"
#include "fairbelief/run_config.hpp"
#include "fairbelief/templates.hpp"

namespace fb = fairbelief;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;

// Command-line overrides; unset options keep config / environment values.
struct Overrides {
  std::string output_dir;
  std::optional<std::size_t> k_max;
  std::optional<std::uint64_t> seed;
  std::string match;
  std::string percentile_over;
  std::string agreement;
  std::string dataset_weighting;
  std::string std_mode;
};

template <typename T, typename Parse>
T choice(const std::string& flag, const std::string& value, Parse parse) {
  const auto parsed = parse(value);
  if (!parsed) {
    throw fb::Error(fb::ErrorCode::InvalidConfig, "report-cli",
                    flag + ": invalid value '" + value + "'");
  }
  return *parsed;
}

fb::RunConfig resolve_config(const std::string& path, const Overrides& o) {
  auto config = fb::load_run_config(path);
  fb::apply_env_overrides(config, [](const char* name) { return std::getenv(name); });
  if (!o.output_dir.empty()) config.output_dir = o.output_dir;
  if (o.k_max) config.k_max = *o.k_max;
  if (o.seed) config.seed = *o.seed;
  if (!o.match.empty()) config.match = choice<fb::MatchMode>("--match", o.match, fb::parse_match_mode);
  if (!o.percentile_over.empty()) {
    config.percentile_over = choice<fb::PercentileOver>("--percentile-over", o.percentile_over,
                                                        fb::parse_percentile_over);
  }
  if (!o.agreement.empty()) {
    config.agreement =
        choice<fb::AgreementMethod>("--agreement", o.agreement, fb::parse_agreement_method);
  }
  if (!o.dataset_weighting.empty()) {
    config.dataset_weighting = choice<fb::DatasetWeighting>(
        "--dataset-weighting", o.dataset_weighting, fb::parse_dataset_weighting);
  }
  if (!o.std_mode.empty()) config.std_mode = choice<fb::StdMode>("--std", o.std_mode, fb::parse_std_mode);
  return config;
}

int cmd_templates(const std::string& identities, const std::string& predicates,
                  const std::string& out) {
  const auto spec = fb::load_template_spec(identities, predicates);
  const fb::TemplateManifest manifest(fb::expand_templates(spec.identities, spec.predicates));
  fb::write_manifest(manifest, out);
  std::cout << "wrote " << manifest.size() << " templates (" << spec.identities.size()
            << " identities x " << spec.predicates.size() << " predicates) to " << out << "\n"
            << "template_manifest_hash " << manifest.hash() << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const Overrides& overrides) {
  const auto config = resolve_config(config_path, overrides);
  const auto bundle = fb::run_audit(config);
  std::cout << fb::read_text_file(config.output_dir / "table1.txt", "report-cli");
  for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : bundle.files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int cmd_sample(const std::string& config_path, const Overrides& overrides,
               std::optional<std::size_t> per_relation, std::optional<std::size_t> annotators,
               std::optional<std::size_t> top_m) {
  auto config = resolve_config(config_path, overrides);
  if (per_relation) config.per_relation = *per_relation;
  if (annotators) config.annotators = *annotators;
  if (top_m) config.top_m = *top_m;
  fb::validate_config(config);

  const auto manifest = fb::read_manifest(config.manifest);
  std::deque<fb::CompletionDump> dumps;
  std::vector<const fb::CompletionDump*> pointers;
  for (const auto& p : config.dumps) pointers.push_back(&dumps.emplace_back(fb::read_dump(p, &manifest)));

  const fb::SamplingOptions options{config.per_relation, config.annotators, config.top_m,
                                    config.seed};
  const auto sheets = fb::sample_for_annotation(pointers, manifest, options);

  fb::OutputTransaction transaction(config.output_dir);
  std::size_t total = 0;
  for (const auto& sheet : sheets) {
    transaction.stage(fb::sheet_file_name(sheet), fb::sheet_to_csv(sheet));
    total += sheet.rows.size();
  }
  for (const auto& f : transaction.commit()) std::cout << "wrote " << f.string() << "\n";
  std::cout << sheets.size() << " sheets, " << total << " instances (seed " << config.seed << ")\n";
  return 0;
}

int cmd_validate(const std::string& dump_path, const std::string& manifest_path) {
  std::optional<fb::TemplateManifest> manifest;
  if (!manifest_path.empty()) manifest = fb::read_manifest(manifest_path);
  const auto dump = fb::read_dump(dump_path, manifest ? &*manifest : nullptr);
  std::cout << "OK " << dump.model.model_id << " (" << dump.model.family << ", "
            << fb::to_string(dump.model.scale_label) << ", " << fb::to_string(dump.model.kind)
            << ") subset=" << fb::to_string(dump.subset) << " templates=" << dump.templates.size()
            << " k_max=" << dump.k_max << " records=" << dump.record_count() << "\n";
  return 0;
}

void add_run_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--output-dir", o.output_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", o.seed, "Seed recorded in outputs and used for sampling");
  cmd->add_option("--k-max", o.k_max, "Deepest likelihood level analysed");
  cmd->add_option("--match", o.match, "Lexicon matching: token|exact");
  cmd->add_option("--percentile-over", o.percentile_over, "Summary population: k|template");
  cmd->add_option("--agreement", o.agreement, "Agreement: centroid|pairwise|rank-matched");
  cmd->add_option("--dataset-weighting", o.dataset_weighting, "Subset averaging: uniform|by-templates");
  cmd->add_option("--std", o.std_mode, "Standard deviation: population|sample");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hurtfulness audit for language-model completion dumps"};
  app.set_version_flag("--version", std::string(fb::tool_version()));
  app.require_subcommand(1);

  std::string identities, predicates, manifest_out;
  auto* templates = app.add_subcommand("templates", "Expand identity/predicate CSVs into a manifest");
  templates->add_option("--identities", identities, "Identities CSV")->required();
  templates->add_option("--predicates", predicates, "Predicates CSV")->required();
  templates->add_option("--out", manifest_out, "Manifest JSONL to write")->required();

  std::string config_path;
  Overrides run_overrides;
  auto* run = app.add_subcommand("run", "Score dumps and write the report bundle");
  run->add_option("--config", config_path, "Run configuration JSON")->required();
  add_run_overrides(run, run_overrides);

  std::string sample_config;
  Overrides sample_overrides;
  std::optional<std::size_t> per_relation, annotators, top_m;
  auto* sample = app.add_subcommand("sample", "Emit stratified annotation sheets");
  sample->add_option("--config", sample_config, "Run configuration JSON")->required();
  sample->add_option("--per-relation", per_relation, "Instances per relation (default 20)");
  sample->add_option("--annotators", annotators, "Number of annotators (default 2)");
  sample->add_option("--top-m", top_m, "Fill-ins shown per model (default 10)");
  sample->add_option("--seed", sample_overrides.seed, "Sampling seed");
  sample->add_option("--output-dir", sample_overrides.output_dir, "Output directory");

  std::string dump_path, validate_manifest;
  auto* validate = app.add_subcommand("validate", "Validate a completion dump");
  validate->add_option("dump", dump_path, "Dump JSONL")->required();
  validate->add_option("--manifest", validate_manifest, "Manifest the dump must match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*templates) return cmd_templates(identities, predicates, manifest_out);
    if (*run) return cmd_run(config_path, run_overrides);
    if (*sample) return cmd_sample(sample_config, sample_overrides, per_relation, annotators, top_m);
    if (*validate) return cmd_validate(dump_path, validate_manifest);
  } catch (const fb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
