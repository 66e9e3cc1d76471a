#pragma once

// Event-time laws used by the simulation scenarios. Parameterizations:
//   Exponential(rate)             S(t) = exp(-rate t)
//   Weibull(shape, scale)         S(t) = exp(-(t / scale)^shape)
//   Gompertz(shape, rate)         hazard rate * exp(shape t),
//                                 S(t) = exp(-(rate / shape)(exp(shape t) - 1))
//   LogNormal(meanlog, sdlog)     log T ~ N(meanlog, sdlog^2)
//   PiecewiseExponential          constant hazard rates[k] on [breaks[k-1], breaks[k])
//   WeibullUniformWeibull         Weibull hazard up to `start`, the residual
//                                 hazard 1 / (uniform_end - t) of a uniform law
//                                 on (start, uniform_end) until `resume`, then the
//                                 Weibull hazard again. Survival is continuous.

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "survcomp/core/errors.hpp"
#include "survcomp/core/random.hpp"

namespace survcomp {

struct Exponential {
  double rate = 1.0;
};

struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};

struct Gompertz {
  double shape = 1.0;
  double rate = 1.0;
};

struct LogNormal {
  double meanlog = 0.0;
  double sdlog = 1.0;
};

struct PiecewiseExponential {
  std::vector<double> breaks;  // increasing change points, size = rates.size() - 1
  std::vector<double> rates;
};

struct WeibullUniformWeibull {
  Weibull base;
  double start = 3.0;
  double uniform_end = 50.625;
  double resume = 33.0;
};

using EventDistribution =
    std::variant<Exponential, Weibull, Gompertz, LogNormal, PiecewiseExponential, WeibullUniformWeibull>;

inline void validate(const EventDistribution& dist) {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw invalid_input_error(std::string(what) + " must be positive");
  };
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          positive(d.rate, "exponential rate");
        } else if constexpr (std::is_same_v<D, Weibull>) {
          positive(d.shape, "weibull shape");
          positive(d.scale, "weibull scale");
        } else if constexpr (std::is_same_v<D, Gompertz>) {
          positive(d.shape, "gompertz shape");
          positive(d.rate, "gompertz rate");
        } else if constexpr (std::is_same_v<D, LogNormal>) {
          if (!std::isfinite(d.meanlog)) throw invalid_input_error("lognormal meanlog must be finite");
          positive(d.sdlog, "lognormal sdlog");
        } else if constexpr (std::is_same_v<D, PiecewiseExponential>) {
          if (d.rates.empty() || d.breaks.size() + 1 != d.rates.size()) {
            throw invalid_input_error("piecewise exponential needs one more rate than breaks");
          }
          for (double r : d.rates) positive(r, "piecewise exponential rate");
          for (std::size_t k = 0; k < d.breaks.size(); ++k) {
            positive(d.breaks[k], "piecewise exponential break");
            if (k > 0 && !(d.breaks[k] > d.breaks[k - 1])) throw invalid_input_error("breaks must increase");
          }
        } else {
          positive(d.base.shape, "weibull shape");
          positive(d.base.scale, "weibull scale");
          if (!(0.0 < d.start && d.start < d.resume && d.resume < d.uniform_end)) {
            throw invalid_input_error("composite law needs 0 < start < resume < uniform_end");
          }
        }
      },
      dist);
}

namespace detail {

inline double weibull_cumhaz(const Weibull& w, double t) { return std::pow(t / w.scale, w.shape); }
inline double weibull_inverse_cumhaz(const Weibull& w, double h) { return w.scale * std::pow(h, 1.0 / w.shape); }

inline double cumulative_hazard(const PiecewiseExponential& d, double t) {
  double h = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < d.rates.size(); ++k) {
    const double right = k < d.breaks.size() ? d.breaks[k] : std::numeric_limits<double>::infinity();
    if (t <= right) return h + d.rates[k] * (t - left);
    h += d.rates[k] * (right - left);
    left = right;
  }
  return h;
}

inline double cumulative_hazard(const WeibullUniformWeibull& d, double t) {
  if (t <= d.start) return weibull_cumhaz(d.base, t);
  const double at_start = weibull_cumhaz(d.base, d.start);
  const double width = d.uniform_end - d.start;
  if (t <= d.resume) return at_start - std::log((d.uniform_end - t) / width);
  const double at_resume = at_start - std::log((d.uniform_end - d.resume) / width);
  return at_resume + weibull_cumhaz(d.base, t) - weibull_cumhaz(d.base, d.resume);
}

}  // namespace detail

inline double survival(const EventDistribution& dist, double t) {
  if (t <= 0.0) return 1.0;
  return std::visit(
      [t](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          return std::exp(-d.rate * t);
        } else if constexpr (std::is_same_v<D, Weibull>) {
          return std::exp(-detail::weibull_cumhaz(d, t));
        } else if constexpr (std::is_same_v<D, Gompertz>) {
          return std::exp(-(d.rate / d.shape) * std::expm1(d.shape * t));
        } else if constexpr (std::is_same_v<D, LogNormal>) {
          const boost::math::normal_distribution<double> z(d.meanlog, d.sdlog);
          return boost::math::cdf(boost::math::complement(z, std::log(t)));
        } else {
          return std::exp(-detail::cumulative_hazard(d, t));
        }
      },
      dist);
}

inline double cdf(const EventDistribution& dist, double t) { return 1.0 - survival(dist, t); }

/// Smallest t with S(t) <= u, for u in (0, 1).
inline double survival_quantile(const EventDistribution& dist, double u) {
  const double target = -std::log(u);  // cumulative hazard to reach
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          return target / d.rate;
        } else if constexpr (std::is_same_v<D, Weibull>) {
          return detail::weibull_inverse_cumhaz(d, target);
        } else if constexpr (std::is_same_v<D, Gompertz>) {
          return std::log1p(d.shape * target / d.rate) / d.shape;
        } else if constexpr (std::is_same_v<D, LogNormal>) {
          const boost::math::normal_distribution<double> z(d.meanlog, d.sdlog);
          return std::exp(boost::math::quantile(boost::math::complement(z, u)));
        } else if constexpr (std::is_same_v<D, PiecewiseExponential>) {
          double h = 0.0;
          double left = 0.0;
          for (std::size_t k = 0; k < d.rates.size(); ++k) {
            const double right = k < d.breaks.size() ? d.breaks[k] : std::numeric_limits<double>::infinity();
            const double segment = d.rates[k] * (right - left);
            if (h + segment >= target) return left + (target - h) / d.rates[k];
            h += segment;
            left = right;
          }
          return left;
        } else {
          const double at_start = detail::weibull_cumhaz(d.base, d.start);
          if (target <= at_start) return detail::weibull_inverse_cumhaz(d.base, target);
          const double width = d.uniform_end - d.start;
          const double at_resume = at_start - std::log((d.uniform_end - d.resume) / width);
          if (target <= at_resume) return d.uniform_end - width * std::exp(at_start - target);
          return detail::weibull_inverse_cumhaz(d.base,
                                                target - at_resume + detail::weibull_cumhaz(d.base, d.resume));
        }
      },
      dist);
}

/// Inverse-CDF draw.
inline double sample(const EventDistribution& dist, Rng& rng) { return survival_quantile(dist, rng.uniform()); }

inline std::vector<double> sample_event_times(const EventDistribution& dist, std::size_t n, Rng& rng) {
  validate(dist);
  std::vector<double> out(n);
  for (double& t : out) t = sample(dist, rng);
  return out;
}

inline std::string describe(const EventDistribution& dist) {
  std::ostringstream os;
  os.precision(10);
  std::visit(
      [&os](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          os << "Exp(" << d.rate << ')';
        } else if constexpr (std::is_same_v<D, Weibull>) {
          os << "Weibull(" << d.shape << ", " << d.scale << ')';
        } else if constexpr (std::is_same_v<D, Gompertz>) {
          os << "Gompertz(" << d.shape << ", " << d.rate << ')';
        } else if constexpr (std::is_same_v<D, LogNormal>) {
          os << "LogNormal(" << d.meanlog << ", " << d.sdlog << ')';
        } else if constexpr (std::is_same_v<D, PiecewiseExponential>) {
          os << "PiecewiseExp(rates=[";
          for (std::size_t k = 0; k < d.rates.size(); ++k) os << (k ? ", " : "") << d.rates[k];
          os << "], breaks=[";
          for (std::size_t k = 0; k < d.breaks.size(); ++k) os << (k ? ", " : "") << d.breaks[k];
          os << "])";
        } else {
          os << "Weibull(" << d.base.shape << ", " << d.base.scale << ") | Unif(" << d.start << ", "
             << d.uniform_end << ") on (" << d.start << ", " << d.resume << "] | Weibull tail";
        }
      },
      dist);
  return os.str();
}

}  // namespace survcomp
