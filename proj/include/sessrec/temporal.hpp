#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sessrec/common.hpp"
#include "sessrec/tensor.hpp"

namespace sessrec {

// Date-time embedding table layout: 12 month + 31 day-of-month + 7 weekday +
// 24 hour + 60 minute rows = 134. Months with fewer than 31 days simply never
// index the tail day rows.
constexpr int kMonthRows = 12;
constexpr int kDayRows = 31;
constexpr int kWeekdayRows = 7;
constexpr int kHourRows = 24;
constexpr int kMinuteRows = 60;
constexpr int kDateTimeRows = kMonthRows + kDayRows + kWeekdayRows + kHourRows + kMinuteRows;

constexpr int kMonthOffset = 0;
constexpr int kDayOffset = kMonthRows;
constexpr int kWeekdayOffset = kDayOffset + kDayRows;
constexpr int kHourOffset = kWeekdayOffset + kWeekdayRows;
constexpr int kMinuteOffset = kHourOffset + kHourRows;

// Active-time buckets: floor(log2 t) clamped to [0, m-1], plus one sentinel
// category for clicks whose duration is unknowable (the last click of a
// session has no successor to measure against).
constexpr int kDurationCategories = 12;  // log2 of 1s..68min dwell times spans 0..11
constexpr int64_t kUnknownDuration = -1;

inline int duration_bucket(int64_t seconds, int categories = kDurationCategories) {
  if (seconds == kUnknownDuration) return categories;  // sentinel row
  if (seconds < 1) return 0;
  int b = 0;
  uint64_t t = static_cast<uint64_t>(seconds);
  while (t >>= 1) ++b;  // floor(log2)
  return b < categories - 1 ? b : categories - 1;
}

struct DateTimeFields {
  int month;         // [0, 11]
  int day_of_month;  // [0, 30]
  int weekday;       // [0, 6], 0 = Monday
  int hour;          // [0, 23]
  int minute;        // [0, 59]
};

// Epoch seconds -> UTC civil fields, via the days-from-civil algorithm.
// Pure function of the timestamp; no timezone machinery anywhere.
inline DateTimeFields civil_from_epoch(int64_t ts) {
  int64_t days = ts / 86400;
  int64_t rem = ts % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int64_t z = days + 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned month = mp < 10 ? mp + 3 : mp - 9;  // [1, 12]
  DateTimeFields f;
  f.month = static_cast<int>(month) - 1;
  f.day_of_month = static_cast<int>(day) - 1;
  f.weekday = static_cast<int>(((days % 7) + 7 + 3) % 7);  // epoch day 0 was a Thursday
  f.hour = static_cast<int>(rem / 3600);
  f.minute = static_cast<int>((rem % 3600) / 60);
  return f;
}

// Absolute row indices into the 134-row table, in the fixed concatenation
// order month, day, weekday, hour, minute.
inline std::array<int64_t, 5> datetime_row_indices(const DateTimeFields& f) {
  return {kMonthOffset + f.month, kDayOffset + f.day_of_month, kWeekdayOffset + f.weekday,
          kHourOffset + f.hour, kMinuteOffset + f.minute};
}

inline std::array<int64_t, 5> datetime_row_indices(int64_t ts) {
  return datetime_row_indices(civil_from_epoch(ts));
}

// Start-time encoding uses only (weekday, hour).
inline std::array<int64_t, 2> start_row_indices(int64_t ts) {
  const DateTimeFields f = civil_from_epoch(ts);
  return {kWeekdayOffset + f.weekday, kHourOffset + f.hour};
}

// Plain (non-autodiff) lookups, used by tests and the export path.
inline std::vector<double> encode_datetime_full(const Tensor& table, int64_t ts) {
  const auto idx = datetime_row_indices(ts);
  const int64_t d = table.cols();
  std::vector<double> out(static_cast<size_t>(5 * d));
  for (int k = 0; k < 5; ++k)
    for (int64_t j = 0; j < d; ++j) out[static_cast<size_t>(k * d + j)] = table.at(idx[k], j);
  return out;
}

inline std::vector<double> encode_start_time(const Tensor& table, int64_t ts) {
  const auto idx = start_row_indices(ts);
  const int64_t d = table.cols();
  std::vector<double> out(static_cast<size_t>(2 * d));
  for (int k = 0; k < 2; ++k)
    for (int64_t j = 0; j < d; ++j) out[static_cast<size_t>(k * d + j)] = table.at(idx[k], j);
  return out;
}

inline std::vector<double> encode_duration(const Tensor& duration_table, int64_t seconds,
                                           int categories = kDurationCategories) {
  const int64_t row = duration_bucket(seconds, categories);
  const int64_t d = duration_table.cols();
  std::vector<double> out(static_cast<size_t>(d));
  for (int64_t j = 0; j < d; ++j) out[static_cast<size_t>(j)] = duration_table.at(row, j);
  return out;
}

inline const char* time_group_name(int64_t row) {
  if (row < kDayOffset) return "month";
  if (row < kWeekdayOffset) return "day";
  if (row < kHourOffset) return "weekday";
  if (row < kMinuteOffset) return "hour";
  return "minute";
}

inline int64_t time_group_index(int64_t row) {
  if (row < kDayOffset) return row - kMonthOffset;
  if (row < kWeekdayOffset) return row - kDayOffset;
  if (row < kHourOffset) return row - kWeekdayOffset;
  if (row < kMinuteOffset) return row - kHourOffset;
  return row - kMinuteOffset;
}

// Tabular dump: group, index, then the d_t values in full precision. The
// duration table appends under group "duration" (last row = "unknown").
inline void export_time_embeddings(std::ostream& os, const Tensor& datetime_table,
                                   const Tensor& duration_table) {
  os << std::setprecision(17);
  auto emit = [&](const char* group, int64_t index, const Tensor& t, int64_t row) {
    os << group << '\t' << index;
    for (int64_t j = 0; j < t.cols(); ++j) os << '\t' << t.at(row, j);
    os << '\n';
  };
  for (int64_t r = 0; r < datetime_table.rows(); ++r)
    emit(time_group_name(r), time_group_index(r), datetime_table, r);
  for (int64_t r = 0; r < duration_table.rows(); ++r) emit("duration", r, duration_table, r);
}

// Inverse of export_time_embeddings; shapes must match the given tensors.
inline void import_time_embeddings(std::istream& is, Tensor& datetime_table,
                                   Tensor& duration_table) {
  std::string line;
  int64_t dt_row = 0, dur_row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string group;
    int64_t index;
    ls >> group >> index;
    Tensor& target = group == "duration" ? duration_table : datetime_table;
    int64_t& row = group == "duration" ? dur_row : dt_row;
    if (row >= target.rows()) throw DataError("time embedding import: too many rows");
    for (int64_t j = 0; j < target.cols(); ++j) {
      double v;
      if (!(ls >> v)) throw DataError("time embedding import: short row: " + line);
      target.at(row, j) = v;
    }
    ++row;
  }
  if (dt_row != datetime_table.rows() || dur_row != duration_table.rows())
    throw DataError("time embedding import: row count mismatch");
}

}  // namespace sessrec
