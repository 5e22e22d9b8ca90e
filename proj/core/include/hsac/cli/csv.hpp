#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsac {

// Shortest round-trip decimal form via std::to_chars: locale-independent,
// period decimal separator, no grouping. NaN prints as "nan".
std::string format_number(double v);
std::string format_number(std::int64_t v);

// Comma-separated table with optional leading '#' comment lines. All data
// cells are numeric.
struct CsvTable {
  std::vector<std::string> comments;  // stored without trailing newline
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string to_csv(const CsvTable& table);
// Throws ConfigError naming the 1-based line of the first offending cell.
CsvTable parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Savitzky-Golay smoothing, window 7, cubic polynomial. The filter matrix is
// kept as exact integer numerators over 42, so polynomial series (degree <= 3)
// with integer-representable values pass through bit-exactly; endpoints use
// the edge-window polynomial fit. Series shorter than the window are returned
// unchanged.
std::vector<double> savitzky_golay_7_3(const std::vector<double>& v);

}  // namespace hsac
