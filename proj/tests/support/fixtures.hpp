#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairbelief/dump.hpp"
#include "fairbelief/lexicon.hpp"
#include "fairbelief/similarity.hpp"
#include "fairbelief/templates.hpp"
#include "oracles.hpp"

namespace fairbelief::testing {

Template make_template(std::string id, GenderGroup gender, AgeGroup age,
                       Subset subset = Subset::Binary,
                       Relation relation = Relation::Occupation);

ModelDescriptor make_model(std::string id, std::string family = "toy",
                           ScaleLabel scale = ScaleLabel::Small,
                           ModelKind kind = ModelKind::Masked);

using FillIns = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Dump whose k_max is the length of the first fill-in list; log-likelihoods
/// decrease by 0.25 per rank.
CompletionDump make_dump(const ModelDescriptor& model, const std::string& manifest_hash,
                         const FillIns& fill_ins, Subset subset = Subset::Binary);

Lexicon make_lexicon(std::initializer_list<std::string> terms, std::string category = "x");
Lexicon make_lexicon(const std::set<std::string>& terms, std::string category = "x");

/// Self-removing temporary directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Random dump plus the same data as raw records for the oracles.
struct SyntheticCase {
  CompletionDump dump;
  std::vector<RawRecord> raw;
  std::set<std::string> lexicon_terms;
  std::size_t k_max = 0;
};

SyntheticCase random_case(std::uint64_t seed, std::size_t min_templates = 2,
                          std::size_t max_templates = 20, std::size_t max_k = 10);

/// Writes a complete toy workspace: identities.csv, predicates.csv,
/// manifest.jsonl, lexicon.tsv, 4 models x 2 subsets of dumps (K = 20),
/// embeddings.emb and run.json (output_dir "out", seed 7).
void write_toy_workspace(const std::filesystem::path& dir);

}  // namespace fairbelief::testing
