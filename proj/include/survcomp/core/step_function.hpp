#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "survcomp/core/errors.hpp"

namespace survcomp {

/// Right-continuous piecewise-constant function of time. Equals `initial`
/// before the first knot and `values[k]` on [knots[k], knots[k+1]).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(double initial, std::vector<double> knots, std::vector<double> values)
      : initial_(initial), knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() != values_.size()) throw invalid_input_error("step function: knots/values size mismatch");
    for (std::size_t k = 1; k < knots_.size(); ++k) {
      if (!(knots_[k] > knots_[k - 1])) throw invalid_input_error("step function: knots must increase strictly");
    }
  }

  double initial() const noexcept { return initial_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return knots_.size(); }

  double operator()(double t) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return it == knots_.begin() ? initial_ : values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  double left_limit(double t) const {
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    return it == knots_.begin() ? initial_ : values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  /// Exact integral over [a, b].
  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    double total = 0.0;
    double left = a;
    double level = (*this)(a);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
    for (; it != knots_.end() && *it < b; ++it) {
      total += level * (*it - left);
      left = *it;
      level = values_[static_cast<std::size_t>(it - knots_.begin())];
    }
    return total + level * (b - left);
  }

  /// For a non-increasing function: the first knot where the value drops to
  /// `u` or below, or +inf when it never does.
  double first_crossing_below(double u) const {
    if (initial_ <= u) return 0.0;
    const auto it = std::partition_point(values_.begin(), values_.end(), [u](double v) { return v > u; });
    if (it == values_.end()) return std::numeric_limits<double>::infinity();
    return knots_[static_cast<std::size_t>(it - values_.begin())];
  }

 private:
  double initial_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Exact integral of |f - g| over [0, tau].
inline double integrated_abs_difference(const StepFunction& f, const StepFunction& g, double tau) {
  std::vector<double> cuts;
  cuts.reserve(f.size() + g.size() + 2);
  cuts.push_back(0.0);
  for (double k : f.knots()) if (k > 0.0 && k < tau) cuts.push_back(k);
  for (double k : g.knots()) if (k > 0.0 && k < tau) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(tau);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += std::abs(f(cuts[k]) - g(cuts[k])) * (cuts[k + 1] - cuts[k]);
  }
  return total;
}

}  // namespace survcomp
