#include "acq/pipeline/frame.hpp"

#include <fstream>
#include <sstream>

#include "acq/error.hpp"
#include "acq/ingest/csv.hpp"
#include "acq/pipeline/workspace.hpp"

namespace acq::pipeline {

Frame::Frame(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Frame::add(std::vector<std::string> row) {
  if (row.size() != columns_.size())
    throw ConfigError("frame row has " + std::to_string(row.size()) + " cells for " +
                      std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(row));
}

bool Frame::has_column(std::string_view name) const {
  for (const auto& c : columns_)
    if (c == name) return true;
  return false;
}

std::size_t Frame::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw DataError("table has no column " + std::string(name));
}

const std::string& Frame::at(std::size_t row, std::string_view col) const { return rows_.at(row)[column(col)]; }

std::optional<double> Frame::number(std::size_t row, std::string_view col) const {
  const auto& s = at(row, col);
  if (s.empty()) return std::nullopt;
  const auto v = ingest::parse_double(s);
  if (!v) throw DataError("column " + std::string(col) + ": not a number: " + s);
  return v;
}

std::vector<std::optional<double>> Frame::numbers(std::string_view col) const {
  std::vector<std::optional<double>> out;
  out.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out.push_back(number(i, col));
  return out;
}

std::vector<std::string> Frame::strings(std::string_view col) const {
  const auto c = column(col);
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[c]);
  return out;
}

void Frame::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << ingest::csv_escape(cells[i]);
    }
    out << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

Frame Frame::read_csv(std::istream& in) {
  ingest::CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw DataError("table is empty");
  Frame f(fields);
  while (reader.next(fields)) {
    if (fields.size() != f.columns_.size())
      throw DataError("table line " + std::to_string(reader.line()) + " has the wrong number of cells");
    f.rows_.push_back(fields);
  }
  return f;
}

void Frame::save(const std::filesystem::path& p) const {
  std::ostringstream ss;
  write_csv(ss);
  write_file(p, ss.str());
}

Frame Frame::load(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return read_csv(in);
}

std::string cell(double v) { return ingest::format_number(v); }
std::string cell(std::optional<double> v) { return v ? cell(*v) : std::string(); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }

}  // namespace acq::pipeline
