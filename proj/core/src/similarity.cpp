#include "fairbelief/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "fairbelief/error.hpp"
#include "fairbelief/lexicon.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace fairbelief {

namespace {

constexpr std::string_view kModule = "similarity";

using json = nlohmann::json;
using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, kModule,
              "embeddings line " + std::to_string(line) + ": " + what);
}

// Embedding pointers for every completion of a view, resolved once.
struct ResolvedView {
  const DumpView* view;
  std::vector<std::vector<const Vector*>> vectors;  // [template][rank - 1]
};

ResolvedView resolve(const DumpView& view, const EmbeddingTable& table) {
  ResolvedView out{&view, {}};
  out.vectors.resize(view.template_count());
  std::set<std::string> missing;
  for (std::size_t t = 0; t < view.template_count(); ++t) {
    for (const auto& c : view.completions(t)) {
      const Vector* v = table.find(c.fill_in);
      if (v == nullptr) missing.insert(normalize_term(c.fill_in));
      out.vectors[t].push_back(v);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) {
      if (!list.empty()) list += ", ";
      list += '"' + m + '"';
    }
    throw Error(ErrorCode::MissingVectors, kModule, "[" + list + "]");
  }
  return out;
}

PairAgreement agree(const ResolvedView& a, const ResolvedView& b, std::size_t dimension,
                    std::size_t k_max, AgreementMethod method) {
  const DumpView& va = *a.view;
  const DumpView& vb = *b.view;
  if (va.dump().template_manifest_hash != vb.dump().template_manifest_hash) {
    throw Error(ErrorCode::ManifestMismatch, kModule,
                va.dump().model.model_id + " and " + vb.dump().model.model_id +
                    " were generated against different manifests");
  }
  if (k_max < 1 || k_max > va.depth() || k_max > vb.depth()) {
    throw Error(ErrorCode::KOutOfRange, kModule, "k=" + std::to_string(k_max));
  }
  if (va.template_count() != vb.template_count()) {
    throw Error(ErrorCode::ManifestMismatch, kModule, "views cover different template sets");
  }
  std::unordered_map<std::string_view, std::size_t> b_index;
  for (std::size_t t = 0; t < vb.template_count(); ++t) b_index.emplace(vb.template_id(t), t);

  std::vector<double> sums(k_max, 0.0);
  std::vector<std::size_t> counts(k_max, 0);
  PairAgreement out;
  out.n_templates = va.template_count();

  Vector acc_a(dimension), acc_b(dimension);
  for (std::size_t ta = 0; ta < va.template_count(); ++ta) {
    const auto it = b_index.find(va.template_id(ta));
    if (it == b_index.end()) {
      throw Error(ErrorCode::ManifestMismatch, kModule,
                  "template " + va.template_id(ta) + " missing from " + vb.dump().model.model_id);
    }
    const auto& ea = a.vectors[ta];
    const auto& eb = b.vectors[it->second];
    std::fill(acc_a.begin(), acc_a.end(), 0.0);
    std::fill(acc_b.begin(), acc_b.end(), 0.0);
    double matched = 0.0;

    for (std::size_t k = 1; k <= k_max; ++k) {
      const Vector& x = *ea[k - 1];
      const Vector& y = *eb[k - 1];
      double value = 0.0;
      switch (method) {
        case AgreementMethod::Centroid: {
          for (std::size_t d = 0; d < dimension; ++d) {
            acc_a[d] += x[d];
            acc_b[d] += y[d];
          }
          const double na = norm(acc_a);
          const double nb = norm(acc_b);
          if (na == 0.0 || nb == 0.0) {
            out.skipped.emplace_back(va.template_id(ta), k);
            continue;
          }
          value = dot(acc_a, acc_b) / (na * nb);
          break;
        }
        case AgreementMethod::Pairwise: {
          // Mean over all k*k cosines = (sum of unit a) . (sum of unit b) / k^2.
          const double nx = norm(x);
          const double ny = norm(y);
          for (std::size_t d = 0; d < dimension; ++d) {
            acc_a[d] += x[d] / nx;
            acc_b[d] += y[d] / ny;
          }
          value = dot(acc_a, acc_b) / static_cast<double>(k * k);
          break;
        }
        case AgreementMethod::RankMatched: {
          matched += dot(x, y) / (norm(x) * norm(y));
          value = matched / static_cast<double>(k);
          break;
        }
      }
      sums[k - 1] += clamp_unit(value);
      ++counts[k - 1];
    }
  }

  out.values_by_k.resize(k_max);
  for (std::size_t k = 0; k < k_max; ++k) {
    if (counts[k] == 0) {
      const std::string first = out.skipped.empty() ? "" : out.skipped.front().first;
      throw Error(ErrorCode::ZeroCentroid, kModule,
                  "every template has a zero centroid at k=" + std::to_string(k + 1) +
                      (first.empty() ? "" : " (first: " + first + ")"));
    }
    out.values_by_k[k] = clamp_unit(sums[k] / static_cast<double>(counts[k]));
  }
  return out;
}

// Accumulates pair series into a mean series.
struct SeriesMean {
  std::vector<double> sum;
  std::size_t pairs = 0;
  std::size_t template_pairs = 0;

  explicit SeriesMean(std::size_t k_max) : sum(k_max, 0.0) {}

  void add(const PairAgreement& p) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += p.values_by_k[k];
    ++pairs;
    template_pairs += p.n_templates;
  }

  AgreementSeries finish(AgreementScope scope, std::string label) const {
    AgreementSeries s;
    s.scope = scope;
    s.label = std::move(label);
    s.values_by_k.resize(sum.size());
    for (std::size_t k = 0; k < sum.size(); ++k) {
      s.values_by_k[k] = clamp_unit(sum[k] / static_cast<double>(pairs));
    }
    s.n_template_pairs = template_pairs;
    return s;
  }
};

std::vector<ResolvedView> resolve_all(std::span<const DumpView> views,
                                      const EmbeddingTable& table) {
  std::vector<ResolvedView> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(resolve(v, table));
  return out;
}

AgreementSeries all_pairs(std::span<const DumpView> views, const EmbeddingTable& table,
                          std::size_t k_max, AgreementMethod method, AgreementScope scope,
                          std::string label) {
  if (views.size() < 2) {
    throw Error(ErrorCode::FamilyTooSmall, kModule,
                "'" + label + "' needs at least 2 models, got " + std::to_string(views.size()));
  }
  const auto resolved = resolve_all(views, table);
  SeriesMean mean(k_max);
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    for (std::size_t j = i + 1; j < resolved.size(); ++j) {
      mean.add(agree(resolved[i], resolved[j], table.dimension(), k_max, method));
    }
  }
  return mean.finish(scope, std::move(label));
}

const std::string_view kGenderLabels[] = {"female", "male", "other"};
const std::string_view kAgeLabels[] = {"old", "other", "young"};

}  // namespace

std::string_view to_string(AgreementMethod m) {
  switch (m) {
    case AgreementMethod::Centroid: return "centroid";
    case AgreementMethod::Pairwise: return "pairwise";
    case AgreementMethod::RankMatched: return "rank-matched";
  }
  return "centroid";
}

std::string_view to_string(AgreementScope s) {
  switch (s) {
    case AgreementScope::IntraFamily: return "intra_family";
    case AgreementScope::InterFamily: return "inter_family";
    case AgreementScope::IntraGroup: return "intra_group";
  }
  return "intra_family";
}

std::optional<AgreementMethod> parse_agreement_method(std::string_view s) {
  if (s == "centroid") return AgreementMethod::Centroid;
  if (s == "pairwise") return AgreementMethod::Pairwise;
  if (s == "rank-matched") return AgreementMethod::RankMatched;
  return std::nullopt;
}

EmbeddingTable::EmbeddingTable(std::size_t dimension, std::string encoder_id)
    : dimension_(dimension), encoder_id_(std::move(encoder_id)) {}

void EmbeddingTable::insert(std::string_view fill_in, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, kModule,
                "vector for \"" + std::string(fill_in) + "\" has length " +
                    std::to_string(vector.size()) + ", expected " + std::to_string(dimension_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::SchemaViolation, kModule,
                  "non-finite component for \"" + std::string(fill_in) + "\"");
    }
  }
  if (norm(vector) == 0.0) {
    throw Error(ErrorCode::SchemaViolation, kModule,
                "zero-norm vector for \"" + std::string(fill_in) + "\"");
  }
  auto key = normalize_term(fill_in);
  const auto [it, inserted] = vectors_.try_emplace(std::move(key), std::move(vector));
  if (!inserted && it->second != vector) {
    throw Error(ErrorCode::SchemaViolation, kModule,
                "conflicting vectors for \"" + it->first + "\"");
  }
}

const std::vector<double>* EmbeddingTable::find(std::string_view fill_in) const {
  const auto it = vectors_.find(normalize_term(fill_in));
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingTable::merge(const EmbeddingTable& other) {
  if (vectors_.empty() && dimension_ == 0) {
    dimension_ = other.dimension_;
    encoder_id_ = other.encoder_id_;
  }
  if (other.dimension_ != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, kModule,
                "cannot merge tables of dimension " + std::to_string(dimension_) + " and " +
                    std::to_string(other.dimension_));
  }
  if (other.encoder_id_ != encoder_id_) {
    throw Error(ErrorCode::SchemaViolation, kModule,
                "cannot merge encoders " + encoder_id_ + " and " + other.encoder_id_);
  }
  for (const auto& [key, vec] : other.vectors_) insert(key, vec);
}

EmbeddingTable parse_embeddings(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  do {
    if (!std::getline(in, text)) schema_error(1, "missing header line");
    ++line;
  } while (detail::trim(text).empty());

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    schema_error(line, e.what());
  }
  if (!header.is_object() || !header.contains("dimension") ||
      !header["dimension"].is_number_integer() || !header.contains("encoder_id") ||
      !header["encoder_id"].is_string()) {
    schema_error(line, "header must be {\"dimension\": int, \"encoder_id\": string}");
  }
  const auto dimension = header["dimension"].get<std::int64_t>();
  if (dimension < 1) schema_error(line, "dimension must be >= 1");
  EmbeddingTable table(static_cast<std::size_t>(dimension),
                       header["encoder_id"].get<std::string>());

  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::exception& e) {
      schema_error(line, e.what());
    }
    if (!record.is_object() || !record.contains("fill_in") || !record["fill_in"].is_string() ||
        !record.contains("vector") || !record["vector"].is_array()) {
      schema_error(line, "expected {\"fill_in\": string, \"vector\": [number, ...]}");
    }
    std::vector<double> vec;
    vec.reserve(record["vector"].size());
    for (const auto& v : record["vector"]) {
      if (!v.is_number()) schema_error(line, "vector components must be numbers");
      vec.push_back(v.get<double>());
    }
    table.insert(record["fill_in"].get<std::string>(), std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, kModule, path.string());
  return parse_embeddings(in);
}

void check_coverage(const EmbeddingTable& table, std::span<const CompletionDump* const> dumps) {
  std::set<std::string> missing;
  for (const CompletionDump* dump : dumps) {
    for (const auto& block : dump->templates) {
      for (const auto& c : block.ranked) {
        if (table.find(c.fill_in) == nullptr) missing.insert(normalize_term(c.fill_in));
      }
    }
  }
  if (missing.empty()) return;
  std::string list;
  for (const auto& m : missing) {
    if (!list.empty()) list += ", ";
    list += '"' + m + '"';
  }
  throw Error(ErrorCode::MissingVectors, kModule, "[" + list + "]");
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::span<const CompletionDump* const> dumps) {
  auto table = load_embeddings(path);
  check_coverage(table, dumps);
  return table;
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  nlohmann::ordered_json header;
  header["dimension"] = table.dimension();
  header["encoder_id"] = table.encoder_id();
  out << header.dump() << '\n';

  std::vector<const std::pair<const std::string, Vector>*> sorted;
  sorted.reserve(table.size());
  for (const auto& entry : table.entries()) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  for (const auto* entry : sorted) {
    nlohmann::ordered_json record;
    record["fill_in"] = entry->first;
    record["vector"] = entry->second;
    out << record.dump() << '\n';
  }
}

PairAgreement pair_agreement(const DumpView& a, const DumpView& b,
                             const EmbeddingTable& embeddings, std::size_t k_max,
                             AgreementMethod method) {
  return agree(resolve(a, embeddings), resolve(b, embeddings), embeddings.dimension(), k_max,
               method);
}

double pair_agreement_at_k(const DumpView& a, const DumpView& b,
                           const EmbeddingTable& embeddings, std::size_t k,
                           AgreementMethod method) {
  return pair_agreement(a, b, embeddings, k, method).values_by_k.at(k - 1);
}

AgreementSeries intra_family_agreement(std::span<const DumpView> views,
                                       const EmbeddingTable& embeddings, std::size_t k_max,
                                       AgreementMethod method) {
  const std::string label = views.empty() ? std::string() : views.front().dump().model.family;
  return all_pairs(views, embeddings, k_max, method, AgreementScope::IntraFamily, label);
}

AgreementSeries inter_family_agreement(std::span<const DumpView> family_a,
                                       std::span<const DumpView> family_b,
                                       const EmbeddingTable& embeddings, std::size_t k_max,
                                       AgreementMethod method) {
  if (family_a.empty() || family_b.empty()) {
    throw Error(ErrorCode::FamilyTooSmall, kModule, "inter-family agreement needs two families");
  }
  const std::string label =
      family_a.front().dump().model.family + "~" + family_b.front().dump().model.family;
  const auto resolved_a = resolve_all(family_a, embeddings);
  const auto resolved_b = resolve_all(family_b, embeddings);
  SeriesMean mean(k_max);
  for (const auto& ra : resolved_a) {
    for (const auto& rb : resolved_b) {
      mean.add(agree(ra, rb, embeddings.dimension(), k_max, method));
    }
  }
  return mean.finish(AgreementScope::InterFamily, label);
}

GroupAgreement group_agreement(std::span<const DumpView> views,
                               const EmbeddingTable& embeddings,
                               const TemplateManifest& manifest, GroupAxis axis,
                               std::size_t k_max, AgreementMethod method) {
  if (views.size() < 2) {
    throw Error(ErrorCode::FamilyTooSmall, kModule,
                "group agreement needs at least 2 models, got " + std::to_string(views.size()));
  }
  GroupAgreement out;
  const auto labels = axis == GroupAxis::Gender ? std::span(kGenderLabels) : std::span(kAgeLabels);
  for (auto label : labels) {
    std::vector<DumpView> restricted;
    restricted.reserve(views.size());
    for (const auto& v : views) {
      restricted.push_back(filter_templates(v, manifest, [&](const Template& t) {
        return group_of(t, axis) == label;
      }));
    }
    if (restricted.front().empty()) {
      out.warnings.push_back("no templates in " + std::string(to_string(axis)) + " group '" +
                             std::string(label) + "'");
      continue;
    }
    out.series.emplace(std::string(label),
                       all_pairs(restricted, embeddings, k_max, method,
                                 AgreementScope::IntraGroup, std::string(label)));
  }
  return out;
}

}  // namespace fairbelief
