#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acq::ingest {

/// RFC 4180 style reader: quoted fields, doubled quotes, CRLF tolerant.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next record; false at end of input.
  bool next(std::vector<std::string>& fields);

  /// 1-based physical line on which the last record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Column lookup for a header row.
class CsvHeader {
 public:
  explicit CsvHeader(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws DataError naming the missing column.
  std::size_t require(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

std::string csv_escape(std::string_view field);

/// Shortest round-trip decimal; empty for NaN or infinity.
std::string format_number(double v);

/// Strict decimal parse of a whole field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace acq::ingest
