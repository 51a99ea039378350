#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acq/geo/geometry.hpp"

namespace acq::ingest {

/// The four acquisitive offence categories.
enum class CrimeType { Burglary = 0, Robbery = 1, TheftOfMV = 2, TheftFromMV = 3 };

inline constexpr std::array<CrimeType, 4> kCrimeTypes = {
    CrimeType::Burglary, CrimeType::Robbery, CrimeType::TheftOfMV, CrimeType::TheftFromMV};

inline constexpr std::size_t index_of(CrimeType t) { return static_cast<std::size_t>(t); }

std::string_view to_string(CrimeType t);
/// Upper-case short code: BURG, ROB, TMV, TFMV.
std::string_view short_code(CrimeType t);
/// Accepts canonical names, short codes and common spellings, case-insensitively.
std::optional<CrimeType> parse_crime_type(std::string_view s);

/// Time of day, seconds after midnight in [0, 86400).
class TimeOfDay {
 public:
  constexpr TimeOfDay() = default;
  /// Throws DataError when out of range.
  static TimeOfDay from_hms(int hour, int minute, int second = 0);
  /// "HH:MM" or "HH:MM:SS".
  static std::optional<TimeOfDay> parse(std::string_view s);

  constexpr int seconds() const { return seconds_; }
  constexpr int hour() const { return seconds_ / 3600; }
  constexpr int minute() const { return (seconds_ / 60) % 60; }
  /// "HH:MM", or "HH:MM:SS" when seconds are nonzero.
  std::string to_string() const;

  friend constexpr auto operator<=>(TimeOfDay, TimeOfDay) = default;

 private:
  constexpr explicit TimeOfDay(int s) : seconds_(s) {}
  int seconds_ = 0;
};

struct LocalDateTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  TimeOfDay time;

  /// ISO "YYYY-MM-DDTHH:MM[:SS]" or "YYYY-MM-DD HH:MM[:SS]".
  static std::optional<LocalDateTime> parse(std::string_view s);
  /// "YYYY-MM-DD HH:MM[:SS]".
  std::string to_string() const;
};

struct CrimeRecord {
  CrimeType type = CrimeType::Burglary;
  LocalDateTime timestamp;
  geo::Point location;
};

enum class Period { Day, Night };

/// Time-of-day interval [start, end), wrapping past midnight when end < start.
class TimeWindow {
 public:
  /// Throws ConfigError if start == end.
  TimeWindow(TimeOfDay start, TimeOfDay end);
  /// "HH:MM-HH:MM".
  static TimeWindow parse(std::string_view s);

  TimeOfDay start() const { return start_; }
  TimeOfDay end() const { return end_; }
  bool contains(TimeOfDay t) const;
  /// Window length in hours.
  double hours() const;
  std::string to_string() const;

 private:
  TimeOfDay start_;
  TimeOfDay end_;
};

/// Night window per crime type.
class NightWindows {
 public:
  /// 22:00-04:00 for every type except robbery at 21:00-03:00.
  NightWindows();

  const TimeWindow& operator[](CrimeType t) const { return windows_[index_of(t)]; }
  void set(CrimeType t, TimeWindow w) { windows_[index_of(t)] = w; }
  /// "robbery=21:00-03:00"
  void apply_override(std::string_view spec);

 private:
  std::array<TimeWindow, 4> windows_;
};

Period classify_daynight(const CrimeRecord& rec, const NightWindows& windows);

struct WindowTally {
  int all = 0;
  int day = 0;
  int night = 0;
  std::optional<double> night_share;  // night / all
};

/// Counts by type and period over every record.
std::array<WindowTally, 4> tally_windows(std::span<const CrimeRecord> recs, const NightWindows& windows);

struct CrimeSchema {
  std::string type_column = "type";
  std::string datetime_column = "datetime";
  std::string x_column = "x";
  std::string y_column = "y";
  /// Extra raw-value -> type mappings, checked before the built-in spellings.
  std::map<std::string, CrimeType> type_aliases;
};

struct RowIssue {
  std::size_t line = 0;
  std::string reason;
};

struct CrimeParse {
  std::vector<CrimeRecord> records;
  std::vector<RowIssue> rejected;
};

/// Missing header columns are fatal (DataError); bad rows are skipped and reported.
CrimeParse parse_crimes(std::istream& in, const CrimeSchema& schema = {});

/// Crimes of `type` per reporting hour.
std::array<int, 24> hourly_histogram(std::span<const CrimeRecord> recs, CrimeType type);

/// Lower median of the times of day (index floor((n-1)/2) after sorting).
/// Throws DataError on empty input.
TimeOfDay median_report_time(std::span<const CrimeRecord> recs);

}  // namespace acq::ingest
