#include "hsac/cli/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hsac/errors.hpp"

namespace hsac {

std::string format_number(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_number(std::int64_t v) {
  std::array<char, 24> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  for (const std::string& c : table.comments) os << c << "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i)
    os << (i ? "," : "") << table.header[i];
  os << "\n";
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.header.size())
      throw ContractError("csv row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, int line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError("csv line " + std::to_string(line_no) +
                      ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool header_done = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_done && line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (!header_done) {
      table.header = split_line(line);
      header_done = true;
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size())
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) row.push_back(parse_cell(c, line_no));
    table.rows.push_back(std::move(row));
  }
  if (!header_done) throw ConfigError("csv: no header line");
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
  if (!out) throw ConfigError("short write: " + path);
}

std::vector<double> savitzky_golay_7_3(const std::vector<double>& v) {
  // cubic least-squares projection over a 7-point window, exact rationals
  static constexpr int kDen = 42;
  static constexpr std::array<std::array<int, 7>, 4> kNum = {{
      {39, 8, -4, -4, 1, 4, -2},   // fitted value at window position 0
      {8, 19, 16, 6, -4, -7, 4},   // position 1
      {-4, 16, 19, 12, 2, -4, 1},  // position 2
      {-4, 6, 12, 14, 12, 6, -4},  // center: (-2,3,6,7,6,3,-2)/21
  }};
  const std::size_t n = v.size();
  if (n < 7) return v;

  std::vector<double> out(n);
  auto apply = [&](const std::array<int, 7>& num, std::size_t start,
                   bool mirrored) {
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) {
      const std::size_t idx = mirrored ? start + 6 - i : start + i;
      acc += num[i] * v[idx];
    }
    return acc / kDen;
  };
  for (std::size_t i = 0; i < 3; ++i) out[i] = apply(kNum[i], 0, false);
  for (std::size_t i = 3; i + 3 < n; ++i) out[i] = apply(kNum[3], i - 3, false);
  for (std::size_t i = 0; i < 3; ++i)
    out[n - 1 - i] = apply(kNum[i], n - 7, true);
  return out;
}

}  // namespace hsac
