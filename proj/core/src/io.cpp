#include "fairbelief/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fairbelief/error.hpp"

namespace fairbelief {

namespace fs = std::filesystem;

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::string read_text_file(const fs::path& path, std::string_view module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, module, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

OutputTransaction::OutputTransaction(fs::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "report-cli",
                "cannot create " + directory_.string() + ": " + ec.message());
  }
}

OutputTransaction::~OutputTransaction() {
  if (!committed_) rollback();
}

void OutputTransaction::stage(const std::string& name, std::string_view content) {
  const fs::path target = directory_ / name;
  const fs::path temp = directory_ / ("." + name + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "report-cli", "cannot write " + temp.string());
    staged_.emplace_back(temp, target);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "report-cli", "short write " + temp.string());
  }
}

std::vector<fs::path> OutputTransaction::commit() {
  for (const auto& [temp, target] : staged_) {
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
      throw Error(ErrorCode::IoFailure, "report-cli",
                  "cannot move " + temp.string() + " to " + target.string());
    }
    placed_.push_back(target);
  }
  committed_ = true;
  return placed_;
}

void OutputTransaction::rollback() noexcept {
  std::error_code ec;
  for (const auto& [temp, target] : staged_) fs::remove(temp, ec);
  for (const auto& placed : placed_) fs::remove(placed, ec);
}

}  // namespace fairbelief
