#include "rocbench/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace rocbench {

std::string format_number(double value, int significant_digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
  return buf;
}

std::string format_optional(const std::optional<double>& value, int significant_digits) {
  return value ? format_number(*value, significant_digits) : std::string{};
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::string_view what) {
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("invalid number for " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

std::optional<double> parse_optional_double(std::string_view field, std::string_view what) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, what);
}

long long parse_int(std::string_view field, std::string_view what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("invalid integer for " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

std::vector<CaseRecord> read_cases_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("case file is empty (header required)");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "maker_id" || header[1] != "y" || header[2] != "y_hat") {
    throw ParseError("case file header must start with maker_id,y,y_hat");
  }
  const auto dim = static_cast<Eigen::Index>(header.size() - 3);
  std::vector<CaseRecord> cases;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    CaseRecord c;
    c.maker_id = f[0];
    if ((f[1] != "0" && f[1] != "1") || (f[2] != "0" && f[2] != "1")) {
      throw ParseError("line " + std::to_string(line_no) + ": y and y_hat must be literal 0/1");
    }
    c.y = f[1] == "1";
    c.y_hat = f[2] == "1";
    c.features.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      c.features[k] = parse_double(f[3 + k], "feature on line " + std::to_string(line_no));
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<CaseRecord> read_cases_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_cases_csv(in);
}

void write_cases_csv(std::ostream& out, std::span<const CaseRecord> cases,
                     const std::vector<std::string>& feature_names) {
  const Eigen::Index dim = cases.empty() ? 0 : cases.front().features.size();
  out << "maker_id,y,y_hat";
  for (Eigen::Index k = 0; k < dim; ++k) {
    out << ',';
    if (static_cast<std::size_t>(k) < feature_names.size()) {
      out << feature_names[k];
    } else {
      out << 'f' << (k + 1);
    }
  }
  out << '\n';
  for (const auto& c : cases) {
    out << c.maker_id << ',' << c.y << ',' << c.y_hat;
    for (Eigen::Index k = 0; k < c.features.size(); ++k) out << ',' << format_number(c.features[k]);
    out << '\n';
  }
}

void write_cases_csv(const std::string& path, std::span<const CaseRecord> cases,
                     const std::vector<std::string>& feature_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_cases_csv(out, cases, feature_names);
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("missing column '" + std::string(name) + "'");
}

CsvTable read_csv_table(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv file is empty (header required)");
  t.header = split_csv_line(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != t.header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " + std::to_string(f.size()));
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_csv_table(in);
}

}  // namespace rocbench
