#include "fairbelief/lexicon.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>
#include <istream>
#include <ostream>

#include "fairbelief/error.hpp"
#include "text_util.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "lexicon";
constexpr std::string_view kVersionKey = "source_version:";

const icu::Normalizer2& nfkc() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error(ErrorCode::IoFailure, kModule, "ICU NFKC data unavailable");
    }
    return n;
  }();
  return *instance;
}

bool is_edge_strippable(UChar32 c) { return u_isUWhiteSpace(c) || u_ispunct(c); }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(MatchMode m) { return m == MatchMode::Token ? "token" : "exact"; }

std::optional<MatchMode> parse_match_mode(std::string_view s) {
  if (s == "token") return MatchMode::Token;
  if (s == "exact") return MatchMode::Exact;
  return std::nullopt;
}

std::string normalize_term(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = nfkc().normalize(s, status);
  s.toLower(icu::Locale::getRoot());
  s = nfkc().normalize(s, status);
  if (U_FAILURE(status)) return {};

  int32_t begin = 0;
  int32_t end = s.length();
  while (begin < end) {
    const UChar32 c = s.char32At(begin);
    if (!is_edge_strippable(c)) break;
    begin += U16_LENGTH(c);
  }
  while (end > begin) {
    const int32_t last = s.moveIndex32(end, -1);
    if (!is_edge_strippable(s.char32At(last))) break;
    end = last;
  }

  icu::UnicodeString collapsed;
  bool in_space = false;
  for (int32_t i = begin; i < end;) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      in_space = true;
      continue;
    }
    if (in_space) collapsed.append(static_cast<UChar>(u' '));
    in_space = false;
    collapsed.append(c);
  }

  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

void Lexicon::add(std::string_view term, std::string_view category) {
  auto normalized = normalize_term(term);
  if (normalized.empty()) return;
  categories_[normalized].insert(std::string(category));
  terms_.insert(std::move(normalized));
}

Lexicon parse_lexicon(std::istream& in, std::string_view fallback_version,
                      const CategoryFilter& category_filter) {
  Lexicon lexicon;
  std::string version(fallback_version);
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      const auto body = detail::trim(trimmed.substr(1));
      if (body.starts_with(kVersionKey)) {
        version = std::string(detail::trim(body.substr(kVersionKey.size())));
      }
      continue;
    }
    const auto fields = split_tabs(line);
    if (!seen_data && detail::ascii_lower(detail::trim(fields[0])) == "term") {
      seen_data = true;
      continue;  // header row
    }
    seen_data = true;
    if (fields.size() < 3) {
      throw Error(ErrorCode::SchemaViolation, kModule,
                  "line " + std::to_string(line_no) + ": expected term<TAB>category<TAB>level");
    }
    const auto term = detail::trim(fields[0]);
    const auto category = detail::trim(fields[1]);
    if (normalize_term(term).empty() || category.empty()) {
      throw Error(ErrorCode::SchemaViolation, kModule,
                  "line " + std::to_string(line_no) + ": empty term or category");
    }
    if (category_filter && !category_filter->contains(std::string(category))) continue;
    lexicon.add(term, category);
  }
  if (lexicon.empty()) {
    throw Error(ErrorCode::EmptyLexicon, kModule,
                category_filter ? "no terms match the category filter" : "no terms");
  }
  lexicon.set_source_version(std::move(version));
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path, const CategoryFilter& category_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, kModule, path.string());
  return parse_lexicon(in, path.filename().string(), category_filter);
}

void write_lexicon(const Lexicon& lexicon, std::ostream& out) {
  out << "# " << kVersionKey << ' ' << lexicon.source_version() << '\n';
  for (const auto& [term, categories] : lexicon.categories()) {
    for (const auto& category : categories) out << term << '\t' << category << "\t-\n";
  }
}

bool is_hurtful(const Lexicon& lexicon, std::string_view fill_in, MatchMode mode) {
  const auto normalized = normalize_term(fill_in);
  if (normalized.empty()) return false;
  if (lexicon.contains(normalized)) return true;
  if (mode == MatchMode::Exact) return false;

  std::string_view rest = normalized;
  while (!rest.empty()) {
    const auto space = rest.find(' ');
    const auto piece = rest.substr(0, space);
    if (!piece.empty()) {
      const auto token = normalize_term(piece);
      if (!token.empty() && lexicon.contains(token)) return true;
    }
    if (space == std::string_view::npos) break;
    rest.remove_prefix(space + 1);
  }
  return false;
}

}  // namespace fairbelief
