#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairbelief/templates.hpp"

namespace fairbelief {

enum class ScaleLabel { Small, Medium, Large };
enum class ModelKind { Masked, Causal };

std::string_view to_string(ScaleLabel s);
std::string_view to_string(ModelKind k);
std::optional<ScaleLabel> parse_scale_label(std::string_view s);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelDescriptor {
  std::string model_id;
  std::string family;
  ScaleLabel scale_label = ScaleLabel::Small;
  std::int64_t param_count = 1;
  ModelKind kind = ModelKind::Masked;

  friend bool operator==(const ModelDescriptor&, const ModelDescriptor&) = default;
};

struct Completion {
  std::string fill_in;
  double log_likelihood = 0.0;  // natural log, <= 0

  friend bool operator==(const Completion&, const Completion&) = default;
};

/// Ranked completions of one template; `ranked[0]` is rank 1.
struct TemplateCompletions {
  std::string template_id;
  std::vector<Completion> ranked;

  friend bool operator==(const TemplateCompletions&, const TemplateCompletions&) = default;
};

struct CompletionDump {
  ModelDescriptor model;
  Subset subset = Subset::Binary;
  std::size_t k_max = 0;
  std::string template_manifest_hash;
  std::string producer_version;
  std::vector<TemplateCompletions> templates;

  std::size_t record_count() const noexcept { return templates.size() * k_max; }

  friend bool operator==(const CompletionDump&, const CompletionDump&) = default;
};

/// Non-owning view over a dump: a subset of its templates and only the
/// top-`depth()` completions of each. The dump must outlive the view.
class DumpView {
 public:
  explicit DumpView(const CompletionDump& dump);
  DumpView(const CompletionDump& dump, std::vector<std::size_t> template_indices,
           std::size_t depth);

  const CompletionDump& dump() const noexcept { return *dump_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t template_count() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t record_count() const noexcept { return indices_.size() * depth_; }

  const std::string& template_id(std::size_t i) const {
    return dump_->templates[indices_[i]].template_id;
  }
  std::span<const Completion> completions(std::size_t i) const {
    return std::span<const Completion>(dump_->templates[indices_[i]].ranked)
        .first(depth_);
  }
  std::span<const std::size_t> template_indices() const noexcept { return indices_; }

 private:
  const CompletionDump* dump_;
  std::vector<std::size_t> indices_;
  std::size_t depth_;
};

/// Parses and validates a dump. Checks rank contiguity, likelihood order and,
/// when `manifest` is given, the manifest hash and template coverage.
CompletionDump parse_dump(std::istream& in, const TemplateManifest* manifest = nullptr);
CompletionDump read_dump(const std::filesystem::path& path,
                         const TemplateManifest* manifest = nullptr);

void validate_against_manifest(const CompletionDump& dump,
                               const TemplateManifest& manifest);

/// Canonical serialization: header, then template blocks in stored order.
void write_dump(const CompletionDump& dump, std::ostream& out);
void write_dump(const CompletionDump& dump, const std::filesystem::path& path);

DumpView slice_top(const DumpView& view, std::size_t k);
DumpView slice_top(const CompletionDump& dump, std::size_t k);

using TemplatePredicate = std::function<bool(const Template&)>;

DumpView filter_templates(const DumpView& view, const TemplateManifest& manifest,
                          const TemplatePredicate& keep);

}  // namespace fairbelief
