#pragma once

#include "rocbench/cases.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rocbench {

/// Thrown for malformed input files; the message is a single line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-width significant-digit rendering used by every CSV writer.
std::string format_number(double value, int significant_digits = 10);
std::string format_optional(const std::optional<double>& value, int significant_digits = 10);

std::vector<std::string> split_csv_line(std::string_view line);
double parse_double(std::string_view field, std::string_view what);
std::optional<double> parse_optional_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

/// Case CSV: header `maker_id,y,y_hat[,f1,...]`.
std::vector<CaseRecord> read_cases_csv(std::istream& in);
std::vector<CaseRecord> read_cases_csv(const std::string& path);
void write_cases_csv(std::ostream& out, std::span<const CaseRecord> cases,
                     const std::vector<std::string>& feature_names = {});
void write_cases_csv(const std::string& path, std::span<const CaseRecord> cases,
                     const std::vector<std::string>& feature_names = {});

/// Reads a whole CSV table: header plus rows; every row must match the header width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};
CsvTable read_csv_table(std::istream& in);
CsvTable read_csv_table(const std::string& path);

}  // namespace rocbench
