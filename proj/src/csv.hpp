#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jdfm {

// Doubles serialized with 12 significant digits: stable round-trip at the
// magnitudes this data uses, and byte-identical across runs.
std::string format_double(double v);

double parse_double(const std::string& field, std::size_t row, const std::string& what);

std::string csv_escape(const std::string& field);

std::string csv_join(const std::vector<std::string>& fields);

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

// Reads a CSV file: '#' comment lines and blank lines are skipped; fields may
// be double-quoted with "" escaping. Throws std::runtime_error on IO failure
// or malformed quoting, naming the line.
std::vector<CsvRow> read_csv(const std::string& path);

// Writes lines verbatim (caller builds them with csv_join).
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace jdfm
