#pragma once

#include "lqrpg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lqrpg {

/// Shortest round-trip-exact decimal form (17 significant digits); "inf" and
/// "nan" tokens for non-finite values.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string cell(double v);
std::string cell(std::int64_t v);
std::string cell(int v);
std::string cell(bool v);
std::string cell(const std::string& v);  // quoted when needed

/// RFC-4180-style CSV with '.' decimal separator and LF line endings.
void write_csv(const CsvTable& table, const std::string& path);

/// Git-style blob hash (SHA-1 over "blob <len>\0<content>") used to
/// fingerprint resolved configs.
std::string git_blob_sha1(const std::string& content);

}  // namespace lqrpg
