#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairbelief/dump.hpp"
#include "fairbelief/templates.hpp"

namespace fairbelief {

enum class AgreementMethod { Centroid, Pairwise, RankMatched };
enum class AgreementScope { IntraFamily, InterFamily, IntraGroup };

std::string_view to_string(AgreementMethod m);
std::string_view to_string(AgreementScope s);
std::optional<AgreementMethod> parse_agreement_method(std::string_view s);

/// Fill-in embeddings keyed by normalized fill-in.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dimension, std::string encoder_id);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& encoder_id() const noexcept { return encoder_id_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  /// Throws DimensionMismatch on a wrong length and SchemaViolation on a
  /// zero-norm vector or a conflicting duplicate key.
  void insert(std::string_view fill_in, std::vector<double> vector);

  /// Lookup by raw fill-in (normalized internally). Null when absent.
  const std::vector<double>* find(std::string_view fill_in) const;

  const std::unordered_map<std::string, std::vector<double>>& entries() const noexcept {
    return vectors_;
  }

  /// Adds every entry of `other`; dimension and encoder must agree.
  void merge(const EmbeddingTable& other);

 private:
  std::size_t dimension_ = 0;
  std::string encoder_id_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// Throws MissingVectors listing every distinct uncovered fill-in (sorted).
void check_coverage(const EmbeddingTable& table,
                    std::span<const CompletionDump* const> dumps);

/// Loads the sidecar and checks coverage of `dumps` in one step.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::span<const CompletionDump* const> dumps);

void write_embeddings(const EmbeddingTable& table, std::ostream& out);

struct PairAgreement {
  /// `values_by_k[k - 1]` is the template-mean agreement at depth k.
  std::vector<double> values_by_k;
  std::size_t n_templates = 0;
  /// Template ids skipped because of a zero-norm centroid, with the k at
  /// which it happened.
  std::vector<std::pair<std::string, std::size_t>> skipped;
};

/// Agreement of two views over their shared templates for k = 1..k_max.
PairAgreement pair_agreement(const DumpView& a, const DumpView& b,
                             const EmbeddingTable& embeddings, std::size_t k_max,
                             AgreementMethod method = AgreementMethod::Centroid);

double pair_agreement_at_k(const DumpView& a, const DumpView& b,
                           const EmbeddingTable& embeddings, std::size_t k,
                           AgreementMethod method = AgreementMethod::Centroid);

struct AgreementSeries {
  AgreementScope scope = AgreementScope::IntraFamily;
  std::string label;
  std::vector<double> values_by_k;
  std::size_t n_template_pairs = 0;
};

/// Mean pair agreement over every unordered pair of `views`.
AgreementSeries intra_family_agreement(std::span<const DumpView> views,
                                       const EmbeddingTable& embeddings,
                                       std::size_t k_max,
                                       AgreementMethod method = AgreementMethod::Centroid);

/// Mean pair agreement over every (a, b) with a from `family_a` and b from
/// `family_b`.
AgreementSeries inter_family_agreement(std::span<const DumpView> family_a,
                                       std::span<const DumpView> family_b,
                                       const EmbeddingTable& embeddings,
                                       std::size_t k_max,
                                       AgreementMethod method = AgreementMethod::Centroid);

struct GroupAgreement {
  std::map<std::string, AgreementSeries> series;
  std::vector<std::string> warnings;
};

GroupAgreement group_agreement(std::span<const DumpView> views,
                               const EmbeddingTable& embeddings,
                               const TemplateManifest& manifest, GroupAxis axis,
                               std::size_t k_max,
                               AgreementMethod method = AgreementMethod::Centroid);

}  // namespace fairbelief
