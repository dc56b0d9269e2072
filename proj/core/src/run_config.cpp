#include "fairbelief/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include "fairbelief/error.hpp"
#include "json.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "report-cli";

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, kModule, what);
}

template <typename T, typename Parse>
T parse_choice(std::string_view field, std::string_view value, Parse parse) {
  const auto parsed = parse(value);
  if (!parsed) invalid(std::string(field) + ": invalid value '" + std::string(value) + "'");
  return *parsed;
}

std::uint64_t parse_unsigned(std::string_view field, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    invalid(std::string(field) + ": expected a non-negative integer, got '" +
            std::string(value) + "'");
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& value,
                              const char* field) {
  if (!value.is_string()) invalid(std::string(field) + " must be a string path");
  std::filesystem::path p(value.get<std::string>());
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string string_field(const json& j, const char* field) {
  if (!j.is_string()) invalid(std::string(field) + " must be a string");
  return j.get<std::string>();
}

std::size_t size_field(const json& j, const char* field) {
  if (!j.is_number_unsigned()) invalid(std::string(field) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("config must be a JSON object");

  static const std::set<std::string> known = {
      "manifest", "lexicon",          "lexicon_categories", "dumps",
      "embeddings", "k_max",          "match",              "percentile_over",
      "agreement", "dataset_weighting", "std",              "output_dir",
      "seed",      "sampling"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) invalid("unknown field '" + key + "'");
  }

  RunConfig config;
  if (!j.contains("manifest")) invalid("missing field 'manifest'");
  if (!j.contains("lexicon")) invalid("missing field 'lexicon'");
  if (!j.contains("dumps")) invalid("missing field 'dumps'");
  config.manifest = resolve(base_dir, j["manifest"], "manifest");
  config.lexicon = resolve(base_dir, j["lexicon"], "lexicon");

  if (j.contains("lexicon_categories") && !j["lexicon_categories"].is_null()) {
    if (!j["lexicon_categories"].is_array()) invalid("lexicon_categories must be an array");
    std::set<std::string> categories;
    for (const auto& c : j["lexicon_categories"]) {
      categories.insert(string_field(c, "lexicon_categories[]"));
    }
    config.lexicon_categories = std::move(categories);
  }

  if (!j["dumps"].is_array()) invalid("dumps must be an array");
  for (const auto& d : j["dumps"]) config.dumps.push_back(resolve(base_dir, d, "dumps[]"));
  if (j.contains("embeddings")) {
    if (!j["embeddings"].is_array()) invalid("embeddings must be an array");
    for (const auto& e : j["embeddings"]) {
      config.embeddings.push_back(resolve(base_dir, e, "embeddings[]"));
    }
  }

  if (j.contains("k_max")) config.k_max = size_field(j["k_max"], "k_max");
  if (j.contains("match")) {
    config.match = parse_choice<MatchMode>("match", string_field(j["match"], "match"),
                                           parse_match_mode);
  }
  if (j.contains("percentile_over")) {
    config.percentile_over = parse_choice<PercentileOver>(
        "percentile_over", string_field(j["percentile_over"], "percentile_over"),
        parse_percentile_over);
  }
  if (j.contains("agreement")) {
    config.agreement = parse_choice<AgreementMethod>(
        "agreement", string_field(j["agreement"], "agreement"), parse_agreement_method);
  }
  if (j.contains("dataset_weighting")) {
    config.dataset_weighting = parse_choice<DatasetWeighting>(
        "dataset_weighting", string_field(j["dataset_weighting"], "dataset_weighting"),
        parse_dataset_weighting);
  }
  if (j.contains("std")) {
    config.std_mode = parse_choice<StdMode>("std", string_field(j["std"], "std"), parse_std_mode);
  }
  if (j.contains("output_dir")) config.output_dir = resolve(base_dir, j["output_dir"], "output_dir");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) invalid("seed must be a non-negative integer");
    config.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    if (!s.is_object()) invalid("sampling must be an object");
    for (const auto& [key, value] : s.items()) {
      if (key == "per_relation") config.per_relation = size_field(value, "sampling.per_relation");
      else if (key == "annotators") config.annotators = size_field(value, "sampling.annotators");
      else if (key == "top_m") config.top_m = size_field(value, "sampling.top_m");
      else invalid("unknown field 'sampling." + key + "'");
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, kModule, path.string());
  return parse_run_config(in, path.parent_path());
}

void apply_env_overrides(RunConfig& config, const EnvLookup& lookup) {
  const auto get = [&](const char* name) -> std::optional<std::string> {
    const std::string key = std::string(kEnvPrefix) + name;
    const char* value = lookup(key.c_str());
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
  };
  if (auto v = get("K_MAX")) config.k_max = parse_unsigned("FAIRBELIEF_K_MAX", *v);
  if (auto v = get("SEED")) config.seed = parse_unsigned("FAIRBELIEF_SEED", *v);
  if (auto v = get("OUTPUT_DIR")) config.output_dir = *v;
  if (auto v = get("MATCH")) {
    config.match = parse_choice<MatchMode>("FAIRBELIEF_MATCH", *v, parse_match_mode);
  }
  if (auto v = get("PERCENTILE_OVER")) {
    config.percentile_over =
        parse_choice<PercentileOver>("FAIRBELIEF_PERCENTILE_OVER", *v, parse_percentile_over);
  }
  if (auto v = get("AGREEMENT")) {
    config.agreement =
        parse_choice<AgreementMethod>("FAIRBELIEF_AGREEMENT", *v, parse_agreement_method);
  }
  if (auto v = get("DATASET_WEIGHTING")) {
    config.dataset_weighting = parse_choice<DatasetWeighting>("FAIRBELIEF_DATASET_WEIGHTING", *v,
                                                              parse_dataset_weighting);
  }
  if (auto v = get("STD")) config.std_mode = parse_choice<StdMode>("FAIRBELIEF_STD", *v, parse_std_mode);
}

void validate_config(const RunConfig& config) {
  const auto require_file = [](const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorCode::MissingFile, kModule, p.string());
    }
  };
  require_file(config.manifest);
  require_file(config.lexicon);
  if (config.dumps.empty()) invalid("at least one dump is required");
  for (const auto& d : config.dumps) require_file(d);
  for (const auto& e : config.embeddings) require_file(e);
  if (config.k_max < 1) invalid("k_max must be >= 1");
  if (config.output_dir.empty()) invalid("output_dir is not set");
}

std::string settings_to_json(const RunConfig& config, int indent) {
  nlohmann::ordered_json j;
  j["k_max"] = config.k_max;
  j["match"] = to_string(config.match);
  j["percentile_over"] = to_string(config.percentile_over);
  j["agreement"] = to_string(config.agreement);
  j["dataset_weighting"] = to_string(config.dataset_weighting);
  j["std"] = to_string(config.std_mode);
  j["seed"] = config.seed;
  if (config.lexicon_categories) {
    j["lexicon_categories"] = *config.lexicon_categories;
  } else {
    j["lexicon_categories"] = nullptr;
  }
  j["sampling"] = {{"per_relation", config.per_relation},
                   {"annotators", config.annotators},
                   {"top_m", config.top_m}};
  return j.dump(indent);
}

}  // namespace fairbelief
