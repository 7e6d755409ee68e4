#pragma once
// Deterministic file output: fixed float formatting, a version/parameter echo
// header on every file, LF line endings. Same inputs produce identical bytes.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace autores {

// %.12g with canonical nan/inf spelling.
std::string format_double(double v);

using ParamEcho = std::vector<std::pair<std::string, std::string>>;

std::string echo_line(const std::string& command, const ParamEcho& params);

class CsvFile {
 public:
  CsvFile(const std::string& command, const ParamEcho& params,
          std::vector<std::string> columns);

  void row(const std::vector<std::string>& cells);
  const std::string& content() const { return content_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::size_t n_columns_;
  std::string content_;
};

}  // namespace autores
