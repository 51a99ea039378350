#include "acq/ingest/crime.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "acq/error.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::ingest {

std::string_view to_string(CrimeType t) {
  switch (t) {
    case CrimeType::Burglary: return "Burglary";
    case CrimeType::Robbery: return "Robbery";
    case CrimeType::TheftOfMV: return "TheftOfMV";
    case CrimeType::TheftFromMV: return "TheftFromMV";
  }
  return "?";
}

std::string_view short_code(CrimeType t) {
  switch (t) {
    case CrimeType::Burglary: return "BURG";
    case CrimeType::Robbery: return "ROB";
    case CrimeType::TheftOfMV: return "TMV";
    case CrimeType::TheftFromMV: return "TFMV";
  }
  return "?";
}

std::optional<CrimeType> parse_crime_type(std::string_view s) {
  std::string key;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::map<std::string, CrimeType, std::less<>> names = {
      {"burglary", CrimeType::Burglary},
      {"burglaries", CrimeType::Burglary},
      {"burg", CrimeType::Burglary},
      {"robbery", CrimeType::Robbery},
      {"robberies", CrimeType::Robbery},
      {"rob", CrimeType::Robbery},
      {"theftofmv", CrimeType::TheftOfMV},
      {"theftofmotorvehicle", CrimeType::TheftOfMV},
      {"mvtheft", CrimeType::TheftOfMV},
      {"motorvehicletheft", CrimeType::TheftOfMV},
      {"vehicletheft", CrimeType::TheftOfMV},
      {"tmv", CrimeType::TheftOfMV},
      {"theftfrommv", CrimeType::TheftFromMV},
      {"theftfrommotorvehicle", CrimeType::TheftFromMV},
      {"tfmv", CrimeType::TheftFromMV},
  };
  if (auto it = names.find(key); it != names.end()) return it->second;
  return std::nullopt;
}

TimeOfDay TimeOfDay::from_hms(int hour, int minute, int second) {
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59)
    throw DataError("time of day out of range");
  return TimeOfDay(hour * 3600 + minute * 60 + second);
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

}  // namespace

std::optional<TimeOfDay> TimeOfDay::parse(std::string_view s) {
  if (s.size() != 5 && s.size() != 8) return std::nullopt;
  if (s[2] != ':' || (s.size() == 8 && s[5] != ':')) return std::nullopt;
  const auto hh = s.substr(0, 2), mm = s.substr(3, 2);
  const auto ss = s.size() == 8 ? s.substr(6, 2) : std::string_view("00");
  if (!all_digits(hh) || !all_digits(mm) || !all_digits(ss)) return std::nullopt;
  const int h = to_int(hh), m = to_int(mm), sec = to_int(ss);
  if (h > 23 || m > 59 || sec > 59) return std::nullopt;
  return TimeOfDay(h * 3600 + m * 60 + sec);
}

std::string TimeOfDay::to_string() const {
  char buf[16];
  const int sec = seconds_ % 60;
  if (sec == 0)
    std::snprintf(buf, sizeof buf, "%02d:%02d", hour(), minute());
  else
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", hour(), minute(), sec);
  return buf;
}

std::optional<LocalDateTime> LocalDateTime::parse(std::string_view s) {
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.size() < 16) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  const auto yy = s.substr(0, 4), mo = s.substr(5, 2), dd = s.substr(8, 2);
  if (!all_digits(yy) || !all_digits(mo) || !all_digits(dd)) return std::nullopt;
  LocalDateTime dt;
  dt.year = to_int(yy);
  dt.month = to_int(mo);
  dt.day = to_int(dd);
  if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > days_in_month(dt.year, dt.month))
    return std::nullopt;
  auto time = TimeOfDay::parse(s.substr(11));
  if (!time) return std::nullopt;
  dt.time = *time;
  return dt;
}

std::string LocalDateTime::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d ", year, month, day);
  return buf + time.to_string();
}

TimeWindow::TimeWindow(TimeOfDay start, TimeOfDay end) : start_(start), end_(end) {
  if (start == end) throw ConfigError("time window start equals end");
}

TimeWindow TimeWindow::parse(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) throw ConfigError("time window must look like HH:MM-HH:MM");
  const auto a = TimeOfDay::parse(s.substr(0, dash));
  const auto b = TimeOfDay::parse(s.substr(dash + 1));
  if (!a || !b) throw ConfigError("bad time window '" + std::string(s) + "'");
  return TimeWindow(*a, *b);
}

bool TimeWindow::contains(TimeOfDay t) const {
  if (start_ < end_) return start_ <= t && t < end_;
  return t >= start_ || t < end_;
}

double TimeWindow::hours() const {
  int span = end_.seconds() - start_.seconds();
  if (span < 0) span += 86400;
  return span / 3600.0;
}

std::string TimeWindow::to_string() const { return start_.to_string() + "-" + end_.to_string(); }

NightWindows::NightWindows()
    : windows_{TimeWindow(TimeOfDay::from_hms(22, 0), TimeOfDay::from_hms(4, 0)),
               TimeWindow(TimeOfDay::from_hms(21, 0), TimeOfDay::from_hms(3, 0)),
               TimeWindow(TimeOfDay::from_hms(22, 0), TimeOfDay::from_hms(4, 0)),
               TimeWindow(TimeOfDay::from_hms(22, 0), TimeOfDay::from_hms(4, 0))} {}

void NightWindows::apply_override(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("night window override must look like type=HH:MM-HH:MM");
  const auto type = parse_crime_type(spec.substr(0, eq));
  if (!type) throw ConfigError("unknown crime type in '" + std::string(spec) + "'");
  set(*type, TimeWindow::parse(spec.substr(eq + 1)));
}

Period classify_daynight(const CrimeRecord& rec, const NightWindows& windows) {
  return windows[rec.type].contains(rec.timestamp.time) ? Period::Night : Period::Day;
}

std::array<WindowTally, 4> tally_windows(std::span<const CrimeRecord> recs, const NightWindows& windows) {
  std::array<WindowTally, 4> out{};
  for (const auto& r : recs) {
    auto& t = out[index_of(r.type)];
    ++t.all;
    ++(classify_daynight(r, windows) == Period::Night ? t.night : t.day);
  }
  for (auto& t : out)
    if (t.all > 0) t.night_share = static_cast<double>(t.night) / t.all;
  return out;
}

CrimeParse parse_crimes(std::istream& in, const CrimeSchema& schema) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("crime CSV is empty");
  const CsvHeader header(row);
  const auto c_type = header.require(schema.type_column);
  const auto c_time = header.require(schema.datetime_column);
  const auto c_x = header.require(schema.x_column);
  const auto c_y = header.require(schema.y_column);
  const auto width = std::max({c_type, c_time, c_x, c_y}) + 1;

  CrimeParse out;
  while (reader.next(row)) {
    auto reject = [&](std::string why) { out.rejected.push_back({reader.line(), std::move(why)}); };
    if (row.size() < width) {
      reject("too few fields");
      continue;
    }
    std::optional<CrimeType> type;
    if (auto it = schema.type_aliases.find(row[c_type]); it != schema.type_aliases.end())
      type = it->second;
    else
      type = parse_crime_type(row[c_type]);
    if (!type) {
      reject("unrecognised crime type '" + row[c_type] + "'");
      continue;
    }
    const auto ts = LocalDateTime::parse(row[c_time]);
    if (!ts) {
      reject("unparseable datetime '" + row[c_time] + "'");
      continue;
    }
    const auto x = parse_double(row[c_x]);
    const auto y = parse_double(row[c_y]);
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      reject("missing or invalid coordinates");
      continue;
    }
    out.records.push_back({*type, *ts, {*x, *y}});
  }
  return out;
}

std::array<int, 24> hourly_histogram(std::span<const CrimeRecord> recs, CrimeType type) {
  std::array<int, 24> bins{};
  for (const auto& r : recs)
    if (r.type == type) ++bins[static_cast<std::size_t>(r.timestamp.time.hour())];
  return bins;
}

TimeOfDay median_report_time(std::span<const CrimeRecord> recs) {
  if (recs.empty()) throw DataError("median report time of an empty set");
  std::vector<TimeOfDay> times;
  times.reserve(recs.size());
  for (const auto& r : recs) times.push_back(r.timestamp.time);
  const auto mid = times.begin() + static_cast<std::ptrdiff_t>((times.size() - 1) / 2);
  std::nth_element(times.begin(), mid, times.end());
  return *mid;
}

}  // namespace acq::ingest
