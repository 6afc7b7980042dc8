#ifndef CORRSIFT_IO_HPP
#define CORRSIFT_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "corrsift/harness.hpp"

namespace corrsift {

struct CsvTable {
  std::vector<std::string> column_names;  // synthesized v1..vp when no header
  bool had_header = false;
  char delimiter = ',';
  Matrix values;
};

// Reads a numeric table. The delimiter (comma, semicolon, tab, or runs of
// spaces) is inferred from the first non-empty line, and a header row is
// assumed when that line contains any non-numeric cell. Blank lines and
// lines starting with '#' are skipped. Ragged rows raise ArgumentError.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Probabilities and other reported doubles, 17 significant digits so the
// value round-trips exactly.
std::string format_double(double value);

// One row per replicate; columns documented in the header line.
void write_type1_csv(std::ostream& out, const Type1Result& result);
void write_power_csv(std::ostream& out, const PowerResult& result);
void write_power_bins_csv(std::ostream& out, const PowerResult& result);

}  // namespace corrsift

#endif  // CORRSIFT_IO_HPP
