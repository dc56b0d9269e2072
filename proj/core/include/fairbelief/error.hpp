#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairbelief {

enum class ErrorCode {
  MissingFile,
  SchemaViolation,
  DuplicateId,
  EmptyLexicon,
  RankGap,
  LikelihoodOrderViolation,
  ManifestMismatch,
  KOutOfRange,
  EmptyTemplateSet,
  SeriesTooShort,
  DuplicateModel,
  UnknownTemplateId,
  DimensionMismatch,
  MissingVectors,
  ZeroCentroid,
  FamilyTooSmall,
  NotEnoughInstances,
  IndivisibleSplit,
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `module()` names the pipeline stage
/// that produced it (e.g. "dump-model") so the CLI can report provenance.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view module, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string detail_;
};

}  // namespace fairbelief
