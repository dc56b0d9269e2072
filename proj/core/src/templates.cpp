#include "fairbelief/templates.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "fairbelief/csv.hpp"
#include "fairbelief/error.hpp"
#include "fairbelief/hashing.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "template-engine";

using detail::ascii_lower;
using detail::trim;

[[noreturn]] void schema_error(std::string_view file, std::size_t line,
                               std::string_view column, const std::string& what) {
  std::ostringstream msg;
  msg << file << " line " << line;
  if (!column.empty()) msg << " column '" << column << "'";
  msg << ": " << what;
  throw Error(ErrorCode::SchemaViolation, kModule, msg.str());
}

// Column name -> index, validated against the required set.
class Header {
 public:
  Header(std::string_view file, const csv::Row& row,
         std::initializer_list<std::string_view> required)
      : file_(file) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      columns_.emplace_back(trim(row[i]), i);
    }
    for (auto name : required) {
      if (!index(name)) schema_error(file_, 1, name, "missing column");
    }
  }

  std::optional<std::size_t> index(std::string_view name) const {
    for (const auto& [col, i] : columns_) {
      if (col == name) return i;
    }
    return std::nullopt;
  }

  std::string_view get(const csv::Row& row, std::string_view name, std::size_t line) const {
    const auto i = index(name);
    if (!i) return {};
    if (*i >= row.size()) schema_error(file_, line, name, "row has too few fields");
    return trim(row[*i]);
  }

  std::size_t width() const noexcept { return columns_.size(); }

 private:
  std::string_view file_;
  std::vector<std::pair<std::string, std::size_t>> columns_;
};

bool blank(const csv::Row& row) {
  return row.size() == 1 && trim(row[0]).empty();
}

template <typename T, typename Parse>
T parse_enum(std::string_view file, std::size_t line, std::string_view column,
             std::string_view value, Parse parse) {
  auto parsed = parse(ascii_lower(value));
  if (!parsed) schema_error(file, line, column, "invalid value '" + std::string(value) + "'");
  return *parsed;
}

bool parse_bool(std::string_view file, std::size_t line, std::string_view value) {
  const auto v = ascii_lower(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
  schema_error(file, line, "plural", "invalid boolean '" + std::string(value) + "'");
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, kModule, path.string());
  return in;
}

}  // namespace

std::string_view to_string(GenderGroup g) {
  switch (g) {
    case GenderGroup::Female: return "female";
    case GenderGroup::Male: return "male";
    case GenderGroup::Other: return "other";
  }
  return "other";
}

std::string_view to_string(AgeGroup g) {
  switch (g) {
    case AgeGroup::Young: return "young";
    case AgeGroup::Old: return "old";
    case AgeGroup::Other: return "other";
  }
  return "other";
}

std::string_view to_string(Subset s) {
  return s == Subset::Binary ? "binary" : "queer";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Occupation: return "occupation";
    case Relation::DescriptiveAdjective: return "descriptive_adjective";
    case Relation::DescriptiveVerb: return "descriptive_verb";
  }
  return "occupation";
}

std::string_view to_string(GroupAxis a) {
  return a == GroupAxis::Gender ? "gender" : "age";
}

std::optional<GenderGroup> parse_gender_group(std::string_view s) {
  if (s == "female") return GenderGroup::Female;
  if (s == "male") return GenderGroup::Male;
  if (s == "other") return GenderGroup::Other;
  return std::nullopt;
}

std::optional<AgeGroup> parse_age_group(std::string_view s) {
  if (s == "young") return AgeGroup::Young;
  if (s == "old") return AgeGroup::Old;
  if (s == "other") return AgeGroup::Other;
  return std::nullopt;
}

std::optional<Subset> parse_subset(std::string_view s) {
  if (s == "binary") return Subset::Binary;
  if (s == "queer") return Subset::Queer;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
  if (s == "occupation") return Relation::Occupation;
  if (s == "descriptive_adjective") return Relation::DescriptiveAdjective;
  if (s == "descriptive_verb") return Relation::DescriptiveVerb;
  return std::nullopt;
}

std::optional<GroupAxis> parse_group_axis(std::string_view s) {
  if (s == "gender") return GroupAxis::Gender;
  if (s == "age") return GroupAxis::Age;
  return std::nullopt;
}

std::size_t count_slot_markers(std::string_view text) {
  std::size_t count = 0;
  for (auto pos = text.find(kSlotMarker); pos != std::string_view::npos;
       pos = text.find(kSlotMarker, pos + kSlotMarker.size())) {
    ++count;
  }
  return count;
}

std::vector<IdentityTerm> parse_identities(std::istream& in) {
  constexpr std::string_view file = "identities";
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) schema_error(file, 1, "", "missing header");
  const Header header(file, row,
                      {"id", "surface", "determiner", "gender_group", "age_group",
                       "subset", "plural"});

  std::vector<IdentityTerm> out;
  std::unordered_set<std::string> seen;
  while (reader.next(row)) {
    if (blank(row)) continue;
    const auto line = reader.line();
    if (row.size() != header.width()) {
      schema_error(file, line, "", "expected " + std::to_string(header.width()) +
                                       " fields, got " + std::to_string(row.size()));
    }
    IdentityTerm term;
    term.id = header.get(row, "id", line);
    term.surface = header.get(row, "surface", line);
    if (term.id.empty()) schema_error(file, line, "id", "empty id");
    if (term.surface.empty()) schema_error(file, line, "surface", "empty surface");
    if (const auto det = header.get(row, "determiner", line); !det.empty()) {
      term.determiner = ascii_lower(det);
    }
    term.gender_group = parse_enum<GenderGroup>(file, line, "gender_group",
                                                header.get(row, "gender_group", line),
                                                parse_gender_group);
    term.age_group = parse_enum<AgeGroup>(file, line, "age_group",
                                          header.get(row, "age_group", line), parse_age_group);
    term.subset = parse_enum<Subset>(file, line, "subset", header.get(row, "subset", line),
                                     parse_subset);
    term.plural = parse_bool(file, line, header.get(row, "plural", line));
    if (term.subset == Subset::Queer && term.gender_group != GenderGroup::Other) {
      schema_error(file, line, "gender_group", "queer-subset identities must use 'other'");
    }
    if (!seen.insert(term.id).second) throw Error(ErrorCode::DuplicateId, kModule, term.id);
    out.push_back(std::move(term));
  }
  return out;
}

std::vector<Predicate> parse_predicates(std::istream& in) {
  constexpr std::string_view file = "predicates";
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) schema_error(file, 1, "", "missing header");
  const Header header(file, row, {"id", "surface", "relation"});

  std::vector<Predicate> out;
  std::unordered_set<std::string> seen;
  while (reader.next(row)) {
    if (blank(row)) continue;
    const auto line = reader.line();
    if (row.size() != header.width()) {
      schema_error(file, line, "", "expected " + std::to_string(header.width()) +
                                       " fields, got " + std::to_string(row.size()));
    }
    Predicate pred;
    pred.id = header.get(row, "id", line);
    pred.surface = header.get(row, "surface", line);
    if (pred.id.empty()) schema_error(file, line, "id", "empty id");
    if (count_slot_markers(pred.surface) != 1) {
      schema_error(file, line, "surface", "expected exactly one [SLOT] marker");
    }
    if (const auto plural = header.get(row, "surface_plural", line); !plural.empty()) {
      if (count_slot_markers(plural) != 1) {
        schema_error(file, line, "surface_plural", "expected exactly one [SLOT] marker");
      }
      pred.surface_plural = std::string(plural);
    }
    pred.relation = parse_enum<Relation>(file, line, "relation",
                                         header.get(row, "relation", line), parse_relation);
    if (!seen.insert(pred.id).second) throw Error(ErrorCode::DuplicateId, kModule, pred.id);
    out.push_back(std::move(pred));
  }
  return out;
}

TemplateSpec load_template_spec(const std::filesystem::path& identities_path,
                                const std::filesystem::path& predicates_path) {
  auto identities_in = open_or_throw(identities_path);
  auto predicates_in = open_or_throw(predicates_path);
  return TemplateSpec{parse_identities(identities_in), parse_predicates(predicates_in)};
}

std::string template_id(std::string_view identity_id, std::string_view predicate_id) {
  std::string key;
  key.reserve(identity_id.size() + predicate_id.size() + 1);
  key += identity_id;
  key += '\x1f';
  key += predicate_id;
  return sha256_hex(key).substr(0, 16);
}

std::vector<Template> expand_templates(std::span<const IdentityTerm> identities,
                                       std::span<const Predicate> predicates) {
  std::vector<Template> out;
  out.reserve(identities.size() * predicates.size());
  for (const auto& identity : identities) {
    std::string subject;
    if (identity.determiner) {
      subject = *identity.determiner;
      subject += ' ';
    }
    subject += identity.surface;
    for (const auto& predicate : predicates) {
      const std::string& verb_phrase = identity.plural && predicate.surface_plural
                                           ? *predicate.surface_plural
                                           : predicate.surface;
      Template t;
      t.id = template_id(identity.id, predicate.id);
      t.text = subject + ' ' + verb_phrase;
      t.identity_id = identity.id;
      t.predicate_id = predicate.id;
      t.relation = predicate.relation;
      t.gender_group = identity.gender_group;
      t.age_group = identity.age_group;
      t.subset = identity.subset;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::string group_of(const Template& t, GroupAxis axis) {
  return std::string(axis == GroupAxis::Gender ? to_string(t.gender_group)
                                               : to_string(t.age_group));
}

TemplateManifest::TemplateManifest(std::vector<Template> templates)
    : templates_(std::move(templates)) {
  index_.reserve(templates_.size());
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    const auto& t = templates_[i];
    if (count_slot_markers(t.text) != 1) {
      throw Error(ErrorCode::SchemaViolation, kModule,
                  "template " + t.id + " must contain exactly one [SLOT] marker");
    }
    if (!index_.emplace(t.id, i).second) throw Error(ErrorCode::DuplicateId, kModule, t.id);
  }
  hash_ = sha256_hex(serialize());
}

const Template* TemplateManifest::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &templates_[it->second];
}

std::string TemplateManifest::serialize() const {
  std::string out;
  for (const auto& t : templates_) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["text"] = t.text;
    j["identity_id"] = t.identity_id;
    j["predicate_id"] = t.predicate_id;
    j["relation"] = to_string(t.relation);
    j["gender_group"] = to_string(t.gender_group);
    j["age_group"] = to_string(t.age_group);
    j["subset"] = to_string(t.subset);
    out += j.dump();
    out += '\n';
  }
  return out;
}

TemplateManifest parse_manifest(std::istream& in) {
  constexpr std::string_view file = "manifest";
  std::vector<Template> templates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      schema_error(file, line_no, "", e.what());
    }
    if (!j.is_object()) schema_error(file, line_no, "", "expected a JSON object");
    const auto field = [&](const char* name) -> std::string {
      const auto it = j.find(name);
      if (it == j.end() || !it->is_string()) {
        schema_error(file, line_no, name, "missing or not a string");
      }
      return it->get<std::string>();
    };
    Template t;
    t.id = field("id");
    t.text = field("text");
    t.identity_id = field("identity_id");
    t.predicate_id = field("predicate_id");
    t.relation = parse_enum<Relation>(file, line_no, "relation", field("relation"),
                                      parse_relation);
    t.gender_group = parse_enum<GenderGroup>(file, line_no, "gender_group",
                                             field("gender_group"), parse_gender_group);
    t.age_group = parse_enum<AgeGroup>(file, line_no, "age_group", field("age_group"),
                                       parse_age_group);
    t.subset = parse_enum<Subset>(file, line_no, "subset", field("subset"), parse_subset);
    templates.push_back(std::move(t));
  }
  return TemplateManifest(std::move(templates));
}

TemplateManifest read_manifest(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_manifest(in);
}

void write_manifest(const TemplateManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, kModule, "cannot write " + path.string());
  const auto bytes = manifest.serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace fairbelief
