#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "survcomp/core/errors.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/datagen/distributions.hpp"

namespace survcomp {

enum class CensoringFamily { uniform, exponential };

inline std::string to_string(CensoringFamily f) { return f == CensoringFamily::uniform ? "uniform" : "exponential"; }

inline CensoringFamily parse_censoring_family(const std::string& s) {
  if (s == "uniform") return CensoringFamily::uniform;
  if (s == "exponential") return CensoringFamily::exponential;
  throw invalid_input_error("unknown censoring family '" + s + "' (expected uniform or exponential)");
}

/// Censoring law: Uniform(0, parameter) or Exponential(rate = parameter).
/// `none` means no censoring (target rate 0).
struct CensoringModel {
  CensoringFamily family = CensoringFamily::uniform;
  double parameter = 0.0;
  bool none = true;

  double sample(Rng& rng) const {
    if (none) return std::numeric_limits<double>::infinity();
    if (family == CensoringFamily::uniform) return parameter * rng.uniform();
    return -std::log(rng.uniform()) / parameter;
  }
};

namespace detail {

// Times where the event density has a kink or jump.
inline std::vector<double> density_kinks(const EventDistribution& dist) {
  if (const auto* p = std::get_if<PiecewiseExponential>(&dist)) return p->breaks;
  if (const auto* c = std::get_if<WeibullUniformWeibull>(&dist)) return {c->start, c->resume};
  return {};
}

}  // namespace detail

/// P(C < T) for independent C ~ model and T ~ dist, by adaptive
/// Gauss-Kronrod quadrature after mapping the integral onto (0, 1):
///   uniform:      int_0^1 S(b v) dv
///   exponential:  int_0^1 S(-log(v) / rate) dv
/// The range is split at the images of the density kinks.
inline double censoring_probability(const EventDistribution& dist, const CensoringModel& model) {
  if (model.none) return 0.0;
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const bool uniform = model.family == CensoringFamily::uniform;
  const double p = model.parameter;
  auto f = [&](double v) {
    if (uniform) return survival(dist, p * v);
    return v <= 0.0 ? 0.0 : survival(dist, -std::log(v) / p);
  };
  std::vector<double> cuts{0.0, 1.0};
  for (double t : detail::density_kinks(dist)) {
    const double v = uniform ? t / p : std::exp(-p * t);
    if (v > 0.0 && v < 1.0) cuts.push_back(v);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total += Quad::integrate(f, cuts[k], cuts[k + 1], 12, 1e-12);
  return total;
}

/// Solves P(C < T) = target for the free censoring parameter on the log
/// scale (TOMS 748 root finder). target = 0 returns the no-censoring model.
/// The probability is decreasing in the uniform upper bound and increasing
/// in the exponential rate.
inline CensoringModel calibrate_censoring(const EventDistribution& dist, CensoringFamily family, double target) {
  validate(dist);
  if (!(target >= 0.0 && target < 1.0)) throw invalid_input_error("censoring rate must lie in [0, 1)");
  if (target == 0.0) return {family, 0.0, true};
  const bool increasing = family == CensoringFamily::exponential;
  auto prob = [&](double log_param) { return censoring_probability(dist, {family, std::exp(log_param), false}); };
  // Signed so that g < 0 below the root and g > 0 above it.
  auto g = [&](double lp) { return increasing ? prob(lp) - target : target - prob(lp); };

  constexpr double lo_limit = -60.0, hi_limit = 60.0;
  double lo = -1.0, hi = 1.0;
  double g_lo = g(lo), g_hi = g(hi);
  while (g_lo > 0.0 && lo > lo_limit) g_lo = g(lo -= 2.0);
  while (g_hi < 0.0 && hi < hi_limit) g_hi = g(hi += 2.0);
  if (g_lo > 0.0 || g_hi < 0.0) {
    const double p_lo = prob(lo_limit), p_hi = prob(hi_limit);
    throw invalid_input_error("censoring rate " + std::to_string(target) + " is unattainable for " + describe(dist) +
                              " with " + to_string(family) + " censoring; attainable range is (" +
                              std::to_string(std::min(p_lo, p_hi)) + ", " + std::to_string(std::max(p_lo, p_hi)) +
                              ")");
  }
  double lp = lo;
  if (g_lo != 0.0) {
    lp = hi;
    if (g_hi != 0.0) {
      std::uintmax_t iters = 100;
      const auto bracket = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi,
                                                             boost::math::tools::eps_tolerance<double>(45), iters);
      lp = 0.5 * (bracket.first + bracket.second);
    }
  }
  const double achieved = prob(lp);
  if (std::abs(achieved - target) > 1e-4) {
    throw computation_error("censoring calibration did not converge (achieved " + std::to_string(achieved) + ")");
  }
  return {family, std::exp(lp), false};
}

}  // namespace survcomp
