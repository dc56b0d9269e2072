#include "fairbelief/dump.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "fairbelief/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "dump-model";

using json = nlohmann::json;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, kModule,
              "line " + std::to_string(line) + ": " + what);
}

std::string location(std::string_view template_id, std::size_t rank) {
  return "template " + std::string(template_id) + " rank " + std::to_string(rank);
}

const json& require(const json& j, const char* name, std::size_t line) {
  const auto it = j.find(name);
  if (it == j.end()) schema_error(line, std::string("missing field '") + name + "'");
  return *it;
}

std::string require_string(const json& j, const char* name, std::size_t line) {
  const auto& v = require(j, name, line);
  if (!v.is_string()) schema_error(line, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_integer(const json& j, const char* name, std::size_t line) {
  const auto& v = require(j, name, line);
  if (!v.is_number_integer()) {
    schema_error(line, std::string("field '") + name + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

template <typename T, typename Parse>
T require_enum(const json& j, const char* name, std::size_t line, Parse parse) {
  const auto raw = require_string(j, name, line);
  const auto parsed = parse(raw);
  if (!parsed) schema_error(line, std::string("field '") + name + "' has invalid value '" + raw + "'");
  return *parsed;
}

json parse_line(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    schema_error(line, e.what());
  }
  if (!j.is_object()) schema_error(line, "expected a JSON object");
  return j;
}

struct PendingRecord {
  std::int64_t rank;
  Completion completion;
};

TemplateCompletions finish_block(std::string template_id, std::vector<PendingRecord> records,
                                 std::size_t k_max) {
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.rank < b.rank; });
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto rank = static_cast<std::size_t>(records[i].rank);
    if (i > 0 && records[i].rank == records[i - 1].rank) {
      throw Error(ErrorCode::RankGap, kModule, location(template_id, rank) + " is duplicated");
    }
    if (rank != i + 1) {
      throw Error(ErrorCode::RankGap, kModule, location(template_id, i + 1) + " is missing");
    }
    if (rank > k_max) {
      throw Error(ErrorCode::RankGap, kModule,
                  location(template_id, rank) + " exceeds k_max " + std::to_string(k_max));
    }
  }
  if (records.size() < k_max) {
    throw Error(ErrorCode::RankGap, kModule,
                location(template_id, records.size() + 1) + " is missing");
  }

  TemplateCompletions block;
  block.template_id = std::move(template_id);
  block.ranked.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].completion.log_likelihood > records[i - 1].completion.log_likelihood) {
      throw Error(ErrorCode::LikelihoodOrderViolation, kModule,
                  location(block.template_id, i + 1) + " is more likely than rank " +
                      std::to_string(i));
    }
    block.ranked.push_back(std::move(records[i].completion));
  }
  return block;
}

}  // namespace

std::string_view to_string(ScaleLabel s) {
  switch (s) {
    case ScaleLabel::Small: return "small";
    case ScaleLabel::Medium: return "medium";
    case ScaleLabel::Large: return "large";
  }
  return "small";
}

std::string_view to_string(ModelKind k) { return k == ModelKind::Masked ? "masked" : "causal"; }

std::optional<ScaleLabel> parse_scale_label(std::string_view s) {
  if (s == "small") return ScaleLabel::Small;
  if (s == "medium") return ScaleLabel::Medium;
  if (s == "large") return ScaleLabel::Large;
  return std::nullopt;
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "masked") return ModelKind::Masked;
  if (s == "causal") return ModelKind::Causal;
  return std::nullopt;
}

DumpView::DumpView(const CompletionDump& dump) : dump_(&dump), depth_(dump.k_max) {
  indices_.resize(dump.templates.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = i;
}

DumpView::DumpView(const CompletionDump& dump, std::vector<std::size_t> template_indices,
                   std::size_t depth)
    : dump_(&dump), indices_(std::move(template_indices)), depth_(depth) {}

CompletionDump parse_dump(std::istream& in, const TemplateManifest* manifest) {
  std::string text;
  std::size_t line = 0;

  // Header.
  do {
    if (!std::getline(in, text)) schema_error(1, "missing header line");
    ++line;
  } while (detail::trim(text).empty());
  const json header = parse_line(text, line);

  CompletionDump dump;
  dump.model.model_id = require_string(header, "model_id", line);
  dump.model.family = require_string(header, "family", line);
  dump.model.scale_label =
      require_enum<ScaleLabel>(header, "scale_label", line, parse_scale_label);
  dump.model.param_count = require_integer(header, "param_count", line);
  dump.model.kind = require_enum<ModelKind>(header, "kind", line, parse_model_kind);
  dump.subset = require_enum<Subset>(header, "subset", line, parse_subset);
  const auto k_max = require_integer(header, "k_max", line);
  dump.template_manifest_hash = require_string(header, "template_manifest_hash", line);
  dump.producer_version = require_string(header, "producer_version", line);
  if (dump.model.model_id.empty()) schema_error(line, "empty model_id");
  if (dump.model.param_count <= 0) schema_error(line, "param_count must be positive");
  if (k_max < 1) schema_error(line, "k_max must be >= 1");
  dump.k_max = static_cast<std::size_t>(k_max);

  if (manifest && manifest->hash() != dump.template_manifest_hash) {
    throw Error(ErrorCode::ManifestMismatch, kModule,
                "dump " + dump.model.model_id + " was generated against manifest " +
                    dump.template_manifest_hash + ", expected " + manifest->hash());
  }

  // Records, grouped into contiguous per-template blocks.
  std::unordered_set<std::string> finished;
  std::string current_id;
  std::vector<PendingRecord> pending;
  const auto flush = [&] {
    if (pending.empty()) return;
    finished.insert(current_id);
    dump.templates.push_back(finish_block(current_id, std::move(pending), dump.k_max));
    pending.clear();
  };

  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    const json record = parse_line(text, line);
    auto template_id = require_string(record, "template_id", line);
    const auto rank = require_integer(record, "rank", line);
    auto fill_in = require_string(record, "fill_in", line);
    const auto& ll = require(record, "log_likelihood", line);
    if (!ll.is_number()) schema_error(line, "field 'log_likelihood' must be a number");
    const double log_likelihood = ll.get<double>();
    if (rank < 1) schema_error(line, "rank must be >= 1");
    if (!std::isfinite(log_likelihood) || log_likelihood > 0.0) {
      schema_error(line, "log_likelihood must be a finite value <= 0");
    }
    if (template_id != current_id) {
      flush();
      if (finished.contains(template_id)) {
        schema_error(line, "records of template " + template_id + " are not contiguous");
      }
      current_id = std::move(template_id);
    }
    pending.push_back({rank, Completion{std::move(fill_in), log_likelihood}});
  }
  flush();

  if (manifest) validate_against_manifest(dump, *manifest);
  return dump;
}

CompletionDump read_dump(const std::filesystem::path& path, const TemplateManifest* manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, kModule, path.string());
  return parse_dump(in, manifest);
}

void validate_against_manifest(const CompletionDump& dump, const TemplateManifest& manifest) {
  if (manifest.hash() != dump.template_manifest_hash) {
    throw Error(ErrorCode::ManifestMismatch, kModule,
                "dump " + dump.model.model_id + " hash " + dump.template_manifest_hash +
                    " differs from manifest " + manifest.hash());
  }
  std::unordered_set<std::string_view> present;
  for (const auto& block : dump.templates) {
    const Template* t = manifest.find(block.template_id);
    if (t == nullptr) {
      throw Error(ErrorCode::ManifestMismatch, kModule,
                  "template " + block.template_id + " is not in the manifest");
    }
    if (t->subset != dump.subset) {
      throw Error(ErrorCode::ManifestMismatch, kModule,
                  "template " + block.template_id + " belongs to subset " +
                      std::string(to_string(t->subset)));
    }
    present.insert(block.template_id);
  }
  for (const auto& t : manifest.templates()) {
    if (t.subset == dump.subset && !present.contains(t.id)) {
      throw Error(ErrorCode::ManifestMismatch, kModule,
                  "dump " + dump.model.model_id + " has no records for template " + t.id);
    }
  }
}

void write_dump(const CompletionDump& dump, std::ostream& out) {
  nlohmann::ordered_json header;
  header["model_id"] = dump.model.model_id;
  header["family"] = dump.model.family;
  header["scale_label"] = to_string(dump.model.scale_label);
  header["param_count"] = dump.model.param_count;
  header["kind"] = to_string(dump.model.kind);
  header["subset"] = to_string(dump.subset);
  header["k_max"] = dump.k_max;
  header["template_manifest_hash"] = dump.template_manifest_hash;
  header["producer_version"] = dump.producer_version;
  out << header.dump() << '\n';

  for (const auto& block : dump.templates) {
    for (std::size_t i = 0; i < block.ranked.size(); ++i) {
      nlohmann::ordered_json record;
      record["template_id"] = block.template_id;
      record["rank"] = i + 1;
      record["fill_in"] = block.ranked[i].fill_in;
      record["log_likelihood"] = block.ranked[i].log_likelihood;
      out << record.dump() << '\n';
    }
  }
}

void write_dump(const CompletionDump& dump, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, kModule, "cannot write " + path.string());
  write_dump(dump, out);
}

DumpView slice_top(const DumpView& view, std::size_t k) {
  if (k < 1 || k > view.dump().k_max) {
    throw Error(ErrorCode::KOutOfRange, kModule,
                "k=" + std::to_string(k) + " outside 1.." + std::to_string(view.dump().k_max));
  }
  const auto indices = view.template_indices();
  return DumpView(view.dump(), std::vector<std::size_t>(indices.begin(), indices.end()),
                  std::min(k, view.depth()));
}

DumpView slice_top(const CompletionDump& dump, std::size_t k) {
  return slice_top(DumpView(dump), k);
}

DumpView filter_templates(const DumpView& view, const TemplateManifest& manifest,
                          const TemplatePredicate& keep) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < view.template_count(); ++i) {
    const Template* t = manifest.find(view.template_id(i));
    if (t == nullptr) throw Error(ErrorCode::UnknownTemplateId, kModule, view.template_id(i));
    if (keep(*t)) kept.push_back(view.template_indices()[i]);
  }
  return DumpView(view.dump(), std::move(kept), view.depth());
}

}  // namespace fairbelief
