#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"

namespace survcomp {

/// Counts at one distinct observed event time. At-risk counts include every
/// subject whose time is >= `time`, so subjects censored at an event time
/// are still at risk there (events precede censorings at ties).
struct RiskRow {
  double time = 0.0;
  std::size_t events1 = 0;
  std::size_t events2 = 0;
  std::size_t at_risk1 = 0;
  std::size_t at_risk2 = 0;

  std::size_t events() const noexcept { return events1 + events2; }
  std::size_t at_risk() const noexcept { return at_risk1 + at_risk2; }
};

class RiskTable {
 public:
  RiskTable(std::vector<RiskRow> rows, std::size_t n1, std::size_t n2)
      : rows_(std::move(rows)), n1_(n1), n2_(n2) {}

  std::span<const RiskRow> rows() const noexcept { return rows_; }
  const RiskRow& operator[](std::size_t i) const { return rows_[i]; }
  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t n1() const noexcept { return n1_; }
  std::size_t n2() const noexcept { return n2_; }
  std::size_t n() const noexcept { return n1_ + n2_; }

 private:
  std::vector<RiskRow> rows_;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
};

/// A dataset sorted by time once. Label permutations only change the group
/// column, so tables for relabeled data are built in O(n).
class SortedSample {
 public:
  explicit SortedSample(const SurvivalDataset& data) {
    const auto& records = data.records();
    order_.resize(records.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });
    times_.reserve(records.size());
    events_.reserve(records.size());
    labels_.reserve(records.size());
    for (std::size_t idx : order_) {
      times_.push_back(records[idx].time);
      events_.push_back(records[idx].event ? 1 : 0);
      labels_.push_back(records[idx].group);
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (i == 0 || times_[i] != times_[i - 1]) block_starts_.push_back(i);
    }
    block_starts_.push_back(times_.size());
  }

  std::size_t size() const noexcept { return times_.size(); }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const unsigned char> events() const noexcept { return events_; }
  /// Group labels in sorted order.
  std::span<const int> labels() const noexcept { return labels_; }
  /// Position in the original record vector of the i-th sorted subject.
  std::span<const std::size_t> order() const noexcept { return order_; }

  RiskTable table() const { return table(labels_); }

  /// Risk table for the sorted subjects carrying `sorted_labels`.
  RiskTable table(std::span<const int> sorted_labels) const {
    std::size_t at_risk1 = 0;
    std::size_t at_risk2 = 0;
    std::vector<RiskRow> rows;
    for (std::size_t b = block_starts_.size() - 1; b-- > 0;) {
      RiskRow row;
      row.time = times_[block_starts_[b]];
      for (std::size_t i = block_starts_[b]; i < block_starts_[b + 1]; ++i) {
        if (sorted_labels[i] == 1) {
          ++at_risk1;
          row.events1 += events_[i];
        } else {
          ++at_risk2;
          row.events2 += events_[i];
        }
      }
      if (row.events() == 0) continue;
      row.at_risk1 = at_risk1;
      row.at_risk2 = at_risk2;
      rows.push_back(row);
    }
    if (rows.empty()) throw no_events_error();
    std::reverse(rows.begin(), rows.end());
    return RiskTable(std::move(rows), at_risk1, at_risk2);
  }

 private:
  std::vector<std::size_t> order_;
  std::vector<double> times_;
  std::vector<unsigned char> events_;
  std::vector<int> labels_;
  std::vector<std::size_t> block_starts_;
};

/// One row per distinct observed event time, with per-group event and
/// at-risk counts. Throws no_events_error when nothing is observed.
inline RiskTable build_risk_table(const SurvivalDataset& data) { return SortedSample(data).table(); }

}  // namespace survcomp
