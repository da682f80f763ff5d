#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tiers/model.hpp"

namespace tiers {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix values;
};

/// Comma-separated numbers, one observation per row. A first row with any
/// non-numeric cell is taken as a header. Throws CsvError with 1-based
/// line/column for empty, missing, non-numeric or non-finite cells and ragged rows.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

Matrix ingest_matrix(const std::string& path);
/// Single-column file (a single row is accepted too).
Vector ingest_vector(const std::string& path);

/// Shortest round-trip representation of each value.
void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& header = {});

/// Shortest string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace tiers
