#include "fairbelief/error.hpp"

namespace fairbelief {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::RankGap: return "RankGap";
    case ErrorCode::LikelihoodOrderViolation: return "LikelihoodOrderViolation";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::EmptyTemplateSet: return "EmptyTemplateSet";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::DuplicateModel: return "DuplicateModel";
    case ErrorCode::UnknownTemplateId: return "UnknownTemplateId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingVectors: return "MissingVectors";
    case ErrorCode::ZeroCentroid: return "ZeroCentroid";
    case ErrorCode::FamilyTooSmall: return "FamilyTooSmall";
    case ErrorCode::NotEnoughInstances: return "NotEnoughInstances";
    case ErrorCode::IndivisibleSplit: return "IndivisibleSplit";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, std::string_view module, const std::string& detail) {
  std::string out;
  out.reserve(module.size() + detail.size() + 32);
  out += '[';
  out += module;
  out += "] ";
  out += to_string(code);
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string_view module, const std::string& detail)
    : std::runtime_error(compose(code, module, detail)),
      code_(code),
      module_(module),
      detail_(detail) {}

}  // namespace fairbelief
