#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairbelief {

inline constexpr std::string_view kSlotMarker = "[SLOT]";

enum class GenderGroup { Female, Male, Other };
enum class AgeGroup { Young, Old, Other };
enum class Subset { Binary, Queer };
enum class Relation { Occupation, DescriptiveAdjective, DescriptiveVerb };
enum class GroupAxis { Gender, Age };

std::string_view to_string(GenderGroup g);
std::string_view to_string(AgeGroup g);
std::string_view to_string(Subset s);
std::string_view to_string(Relation r);
std::string_view to_string(GroupAxis a);

std::optional<GenderGroup> parse_gender_group(std::string_view s);
std::optional<AgeGroup> parse_age_group(std::string_view s);
std::optional<Subset> parse_subset(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);
std::optional<GroupAxis> parse_group_axis(std::string_view s);

inline constexpr Relation kAllRelations[] = {Relation::Occupation,
                                             Relation::DescriptiveAdjective,
                                             Relation::DescriptiveVerb};

struct IdentityTerm {
  std::string id;
  std::string surface;
  std::optional<std::string> determiner;
  GenderGroup gender_group = GenderGroup::Other;
  AgeGroup age_group = AgeGroup::Other;
  Subset subset = Subset::Binary;
  bool plural = false;

  friend bool operator==(const IdentityTerm&, const IdentityTerm&) = default;
};

struct Predicate {
  std::string id;
  std::string surface;
  std::optional<std::string> surface_plural;
  Relation relation = Relation::Occupation;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// One expanded prompt. Carries the identity/predicate metadata needed for
/// grouping, so a manifest file is self-contained.
struct Template {
  std::string id;
  std::string text;
  std::string identity_id;
  std::string predicate_id;
  Relation relation = Relation::Occupation;
  GenderGroup gender_group = GenderGroup::Other;
  AgeGroup age_group = AgeGroup::Other;
  Subset subset = Subset::Binary;

  friend bool operator==(const Template&, const Template&) = default;
};

struct TemplateSpec {
  std::vector<IdentityTerm> identities;
  std::vector<Predicate> predicates;
};

/// Counts non-overlapping occurrences of the slot marker.
std::size_t count_slot_markers(std::string_view text);

/// Reads the identities and predicates CSV files. Rows are validated against
/// the column enums and the type invariants; ids must be unique per file.
TemplateSpec load_template_spec(const std::filesystem::path& identities_path,
                                const std::filesystem::path& predicates_path);

std::vector<IdentityTerm> parse_identities(std::istream& in);
std::vector<Predicate> parse_predicates(std::istream& in);

std::string template_id(std::string_view identity_id,
                        std::string_view predicate_id);

/// Identity-major cartesian product of identities and predicates.
std::vector<Template> expand_templates(std::span<const IdentityTerm> identities,
                                       std::span<const Predicate> predicates);

std::string group_of(const Template& t, GroupAxis axis);

/// The ordered template set every dump is generated against.
class TemplateManifest {
 public:
  TemplateManifest() = default;
  explicit TemplateManifest(std::vector<Template> templates);

  std::span<const Template> templates() const noexcept { return templates_; }
  std::size_t size() const noexcept { return templates_.size(); }
  const Template* find(std::string_view id) const;
  const std::string& hash() const noexcept { return hash_; }

  /// Canonical JSON Lines serialization; `hash()` is its SHA-256.
  std::string serialize() const;

 private:
  std::vector<Template> templates_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string hash_;
};

TemplateManifest parse_manifest(std::istream& in);
TemplateManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const TemplateManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace fairbelief
