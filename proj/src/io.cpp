#include "corrsift/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace corrsift {

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  if (delimiter == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) cells.push_back(tok);
    return cells;
  }
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delimiter)) {
    // Trim surrounding whitespace so "1, 2" parses.
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      cells.emplace_back();
    } else {
      const auto last = cell.find_last_not_of(" \t\r");
      cells.push_back(cell.substr(first, last - first + 1));
    }
  }
  if (!line.empty() && line.back() == delimiter) cells.emplace_back();
  return cells;
}

char detect_delimiter(const std::string& line) {
  for (char candidate : {',', ';', '\t'}) {
    if (line.find(candidate) != std::string::npos) return candidate;
  }
  return ' ';
}

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_content = true;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    if (first_content) {
      table.delimiter = detect_delimiter(line);
    }
    const auto cells = split_line(line, table.delimiter);
    if (cells.empty()) continue;
    std::vector<double> row;
    row.reserve(cells.size());
    bool numeric = true;
    for (const auto& cell : cells) {
      double v;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (first_content) {
      first_content = false;
      cols = cells.size();
      if (!numeric) {
        table.had_header = true;
        table.column_names = cells;
        continue;
      }
    }
    if (!numeric) {
      throw ArgumentError("non-numeric cell on line " +
                          std::to_string(line_no));
    }
    if (row.size() != cols) {
      throw ArgumentError("line " + std::to_string(line_no) + " has " +
                          std::to_string(row.size()) + " cells, expected " +
                          std::to_string(cols));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ArgumentError("input contains no data rows");
  if (table.column_names.empty()) {
    for (std::size_t j = 0; j < cols; ++j) {
      table.column_names.push_back("v" + std::to_string(j + 1));
    }
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      table.values(static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open file: " + path);
  return read_csv(in);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_type1_csv(std::ostream& out, const Type1Result& result) {
  out << "replicate,group_size,r,p_selective,p_classical,selective_method\n";
  for (const auto& rec : result.records) {
    out << rec.replicate << ',' << rec.group_size << ',' << rec.r << ','
        << format_double(rec.p_selective) << ','
        << format_double(rec.p_classical) << ',' << rec.selective_method
        << '\n';
  }
}

void write_power_csv(std::ostream& out, const PowerResult& result) {
  out << "replicate,delta,delta_bin,r,rejected_selective,rejected_classical\n";
  for (const auto& rec : result.records) {
    out << rec.replicate << ',' << format_double(rec.delta) << ','
        << rec.delta_bin << ',' << rec.r << ','
        << (rec.rejected_selective ? 1 : 0) << ','
        << (rec.rejected_classical ? 1 : 0) << '\n';
  }
}

void write_power_bins_csv(std::ostream& out, const PowerResult& result) {
  out << "delta_bin,count,power_selective,power_classical\n";
  for (const auto& bin : result.bins) {
    out << bin.bin << ',' << bin.count << ','
        << format_double(bin.power_selective) << ','
        << format_double(bin.power_classical) << '\n';
  }
}

}  // namespace corrsift
