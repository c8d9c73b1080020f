// Copyright 2026 The kpm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KPM_CSV_H_
#define KPM_CSV_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kpm {

// One parsed record. `line` is the 1-based physical line on which the record
// starts, so diagnostics point at what an editor shows.
struct CsvRecord {
  std::vector<std::string> fields;
  int line = 0;
};

// Comma-separated table with a header row. Fields may be quoted with '"';
// quoted fields may contain commas, newlines and doubled quotes. A leading
// UTF-8 byte order mark and CRLF line endings are accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRecord> rows;

  // Index of a header column, or nullopt.
  std::optional<size_t> Column(std::string_view name) const;
};

// Throws ValidationError on unterminated quotes or a missing header.
CsvTable ParseCsv(std::string_view text);

// Throws IoError if the file cannot be read.
CsvTable ReadCsvFile(const std::string& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string CsvEscape(std::string_view field);

void WriteCsvRow(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);

// Strict decimal parse (no trailing garbage, no surrounding spaces).
std::optional<double> ParseDouble(std::string_view text);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace kpm

#endif  // KPM_CSV_H_
