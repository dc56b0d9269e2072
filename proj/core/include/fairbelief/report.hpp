#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairbelief/run_config.hpp"
#include "fairbelief/scoring.hpp"

namespace fairbelief {

std::string_view tool_version();

struct Table1 {
  std::string csv;
  std::string text;
};

/// Model ranking table. Rows are grouped by family; family and model order
/// follow `descriptor_order` (or the order of `ranked` when empty). The
/// lowest mean is flagged as best.
Table1 emit_table1(std::span<const RankedModel> ranked,
                   std::span<const ModelDescriptor> descriptor_order = {});

struct AuditBundle {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Runs the whole analysis and writes the report bundle into
/// `config.output_dir`: summary.csv, table1.txt, scores_by_k.csv,
/// group_scores.csv, agreement_family.csv, agreement_group.csv, metadata.json.
AuditBundle run_audit(const RunConfig& config);

}  // namespace fairbelief
