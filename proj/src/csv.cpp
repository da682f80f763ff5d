#include "tiers/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tiers/error.hpp"

namespace tiers {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::vector<double> data;
  long cols = -1;
  long rows = 0;
  long line_no = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (first && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto cells = split(view);
    if (first) {
      first = false;
      bool numeric = true;
      for (auto c : cells) {
        double v;
        if (!c.empty() && !parse_number(c, v)) numeric = false;
      }
      if (!numeric) {
        for (auto c : cells) table.header.emplace_back(c);
        cols = static_cast<long>(cells.size());
        continue;
      }
    }
    if (cols < 0) cols = static_cast<long>(cells.size());
    if (static_cast<long>(cells.size()) != cols) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                         " cells, found " + std::to_string(cells.size()),
                     line_no, std::min<long>(static_cast<long>(cells.size()), cols) + 1);
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const long col = static_cast<long>(j) + 1;
      const std::string where = "line " + std::to_string(line_no) + ", column " + std::to_string(col);
      if (cells[j].empty()) throw CsvError(where + ": missing value", line_no, col);
      double v;
      if (!parse_number(cells[j], v)) {
        throw CsvError(where + ": not a number: '" + std::string(cells[j]) + "'", line_no, col);
      }
      if (!std::isfinite(v)) throw CsvError(where + ": non-finite value", line_no, col);
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw CsvError("no data rows", line_no, 0);
  table.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), rows, cols);
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  try {
    return parse_csv(in);
  } catch (const CsvError& e) {
    throw CsvError(path + ": " + e.what(), e.line(), e.column());
  }
}

Matrix ingest_matrix(const std::string& path) { return read_csv(path).values; }

Vector ingest_vector(const std::string& path) {
  Matrix m = read_csv(path).values;
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw DimensionError("n", path + ": expected a single column, found " + std::to_string(m.cols()));
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
}

void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  write_csv(out, values, header);
}

}  // namespace tiers
