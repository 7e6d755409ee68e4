#include "autores/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "autores/errors.hpp"
#include "autores/version.hpp"

namespace autores {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string echo_line(const std::string& command, const ParamEcho& params) {
  std::string line = "# autores ";
  line += kVersion;
  line += ' ';
  line += command;
  for (const auto& [k, v] : params) {
    line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  line += '\n';
  return line;
}

CsvFile::CsvFile(const std::string& command, const ParamEcho& params,
                 std::vector<std::string> columns)
    : n_columns_(columns.size()) {
  content_ = echo_line(command, params);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) content_ += ',';
    content_ += columns[i];
  }
  content_ += '\n';
}

void CsvFile::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_) throw ConfigError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) content_ += ',';
    content_ += cells[i];
  }
  content_ += '\n';
}

void CsvFile::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << content_;
  if (!out) throw ConfigError("failed writing output file: " + path.string());
}

}  // namespace autores
