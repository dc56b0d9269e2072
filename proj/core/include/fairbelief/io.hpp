#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fairbelief {

/// Shortest decimal form that round-trips to the same double.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path, std::string_view module);

/// Stages files next to their destinations and moves them into place on
/// commit(). Anything staged or already moved is removed if the transaction
/// is destroyed without a successful commit.
class OutputTransaction {
 public:
  explicit OutputTransaction(std::filesystem::path directory);
  ~OutputTransaction();

  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;

  void stage(const std::string& name, std::string_view content);
  std::vector<std::filesystem::path> commit();

  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  void rollback() noexcept;

  std::filesystem::path directory_;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
  std::vector<std::filesystem::path> placed_;
  bool committed_ = false;
};

}  // namespace fairbelief
