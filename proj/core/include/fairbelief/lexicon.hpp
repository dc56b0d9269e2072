#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>

namespace fairbelief {

enum class MatchMode { Token, Exact };

std::string_view to_string(MatchMode m);
std::optional<MatchMode> parse_match_mode(std::string_view s);

/// NFKC, lowercase, trim, and strip punctuation from both ends. Interior
/// whitespace runs collapse to one space; interior hyphens and apostrophes
/// are kept. Idempotent.
std::string normalize_term(std::string_view raw);

/// The hurtful-term set. Terms are stored normalized.
class Lexicon {
 public:
  Lexicon() = default;

  void add(std::string_view term, std::string_view category);

  bool contains(std::string_view normalized) const {
    return terms_.contains(std::string(normalized));
  }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  const std::map<std::string, std::set<std::string>>& categories() const noexcept {
    return categories_;
  }

  const std::string& source_version() const noexcept { return source_version_; }
  void set_source_version(std::string v) { source_version_ = std::move(v); }

 private:
  std::unordered_set<std::string> terms_;
  std::map<std::string, std::set<std::string>> categories_;
  std::string source_version_;
};

using CategoryFilter = std::optional<std::set<std::string>>;

/// Loads a `term<TAB>category<TAB>level` file. `#` lines are comments; a
/// comment of the form `# source_version: X` sets the version, otherwise the
/// file name is used. An optional header row starting with `term` is skipped.
Lexicon load_lexicon(const std::filesystem::path& path,
                     const CategoryFilter& category_filter = std::nullopt);
Lexicon parse_lexicon(std::istream& in, std::string_view fallback_version,
                      const CategoryFilter& category_filter = std::nullopt);

void write_lexicon(const Lexicon& lexicon, std::ostream& out);

bool is_hurtful(const Lexicon& lexicon, std::string_view fill_in,
                MatchMode mode = MatchMode::Token);

}  // namespace fairbelief
