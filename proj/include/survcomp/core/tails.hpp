#pragma once

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace survcomp {

/// Two-sided standard-normal tail probability P(|G| >= |z|).
inline double normal_two_sided_p(double z) { return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0); }

/// Upper tail of the chi-squared law with `df` degrees of freedom.
inline double chi_squared_sf(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  return std::clamp(boost::math::gamma_q(df / 2.0, x / 2.0), 0.0, 1.0);
}

}  // namespace survcomp
