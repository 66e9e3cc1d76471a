#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survcomp/core/errors.hpp"

namespace survcomp {

/// One subject: observed time, event indicator (true = event observed,
/// false = right censored) and group label (1 or 2).
struct Record {
  double time = 0.0;
  bool event = false;
  int group = 1;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Immutable two-sample right-censored dataset.
class SurvivalDataset {
 public:
  SurvivalDataset() = default;

  explicit SurvivalDataset(std::vector<Record> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const Record& r = records_[i];
      if (!std::isfinite(r.time) || r.time < 0.0) {
        throw invalid_input_error("record " + std::to_string(i) + ": time must be finite and non-negative");
      }
      if (r.group != 1 && r.group != 2) {
        throw invalid_input_error("record " + std::to_string(i) + ": group must be 1 or 2");
      }
      ++sizes_[r.group - 1];
      if (r.event) ++events_;
    }
  }

  /// Builds a dataset from per-group (time, event) columns.
  static SurvivalDataset from_groups(std::span<const double> times1, std::span<const bool> events1,
                                     std::span<const double> times2, std::span<const bool> events2) {
    if (times1.size() != events1.size() || times2.size() != events2.size()) {
      throw invalid_input_error("time and event columns differ in length");
    }
    std::vector<Record> records;
    records.reserve(times1.size() + times2.size());
    for (std::size_t i = 0; i < times1.size(); ++i) records.push_back({times1[i], events1[i], 1});
    for (std::size_t i = 0; i < times2.size(); ++i) records.push_back({times2[i], events2[i], 2});
    return SurvivalDataset(std::move(records));
  }

  const std::vector<Record>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t n1() const noexcept { return sizes_[0]; }
  std::size_t n2() const noexcept { return sizes_[1]; }
  std::size_t group_size(int group) const { return sizes_.at(static_cast<std::size_t>(group - 1)); }
  std::size_t n_events() const noexcept { return events_; }

  std::vector<Record> group_records(int group) const {
    std::vector<Record> out;
    out.reserve(group_size(group));
    std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
                 [group](const Record& r) { return r.group == group; });
    return out;
  }

  /// Largest observed time (event or censored) in a group.
  double max_time(int group) const {
    double m = -1.0;
    for (const Record& r : records_) {
      if (r.group == group) m = std::max(m, r.time);
    }
    if (m < 0.0) throw invalid_input_error("group " + std::to_string(group) + " is empty");
    return m;
  }

  void require_two_groups() const {
    if (n1() == 0 || n2() == 0) throw invalid_input_error("both groups must be non-empty");
  }

  SurvivalDataset with_swapped_groups() const {
    std::vector<Record> swapped = records_;
    for (Record& r : swapped) r.group = 3 - r.group;
    return SurvivalDataset(std::move(swapped));
  }

  /// Same subjects with the given labels (one per record, in record order).
  SurvivalDataset relabeled(std::span<const int> groups) const {
    if (groups.size() != records_.size()) throw invalid_input_error("label vector has wrong length");
    std::vector<Record> out = records_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].group = groups[i];
    return SurvivalDataset(std::move(out));
  }

 private:
  std::vector<Record> records_;
  std::array<std::size_t, 2> sizes_{0, 0};
  std::size_t events_ = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline double parse_double(std::string_view field, std::size_t line_no, const char* column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw invalid_input_error("line " + std::to_string(line_no) + ": cannot parse " + column + " '" +
                              std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

/// Reads the `time,event,group` CSV format. The header row is required,
/// event must be 0 or 1 and group 1 or 2. Blank lines are ignored.
inline SurvivalDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto fields = detail::split_commas(view);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "time" || fields[1] != "event" || fields[2] != "group") {
        throw invalid_input_error("line " + std::to_string(line_no) + ": expected header 'time,event,group'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw invalid_input_error("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                                std::to_string(fields.size()));
    }
    const double time = detail::parse_double(fields[0], line_no, "time");
    if (!std::isfinite(time) || time < 0.0) {
      throw invalid_input_error("line " + std::to_string(line_no) + ": time must be finite and non-negative");
    }
    if (fields[1] != "0" && fields[1] != "1") {
      throw invalid_input_error("line " + std::to_string(line_no) + ": event must be 0 or 1");
    }
    if (fields[2] != "1" && fields[2] != "2") {
      throw invalid_input_error("line " + std::to_string(line_no) + ": group must be 1 or 2");
    }
    records.push_back({time, fields[1] == "1", fields[2] == "1" ? 1 : 2});
  }
  if (!have_header) throw invalid_input_error("empty input: missing header 'time,event,group'");
  return SurvivalDataset(std::move(records));
}

inline SurvivalDataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("cannot open '" + path + "'");
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const SurvivalDataset& data) {
  out << "time,event,group\n";
  const auto old = out.precision(17);
  for (const Record& r : data.records()) out << r.time << ',' << (r.event ? 1 : 0) << ',' << r.group << '\n';
  out.precision(old);
}

}  // namespace survcomp
