#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "survcomp/core/risk_table.hpp"

namespace survcomp {

/// w_i = value for every event time.
struct Constant {
  double value = 1.0;
};

/// Pooled Kaplan-Meier estimate evaluated at the event time itself.
struct PetoPeto {};

/// S(t-)^rho * (1 - S(t-))^gamma with S the pooled Kaplan-Meier estimate.
struct FlemingHarrington {
  double rho = 0.0;
  double gamma = 0.0;
};

/// 1 - 2 S(t-), changing sign where the pooled survival crosses 1/2.
struct Crossing {};

/// -1 on the first m event times, c afterwards.
struct SignSwitch {
  std::size_t m = 1;
  double c = 1.0;
};

using WeightFunction = std::variant<Constant, PetoPeto, FlemingHarrington, Crossing, SignSwitch>;

/// Pooled Kaplan-Meier estimate at each table row: `at` is S(t_i), `before`
/// is the left limit S(t_i-).
struct PooledSurvival {
  std::vector<double> at;
  std::vector<double> before;
};

inline PooledSurvival pooled_survival(const RiskTable& table) {
  PooledSurvival s;
  s.at.reserve(table.size());
  s.before.reserve(table.size());
  double level = 1.0;
  for (const RiskRow& row : table.rows()) {
    s.before.push_back(level);
    level *= 1.0 - static_cast<double>(row.events()) / static_cast<double>(row.at_risk());
    s.at.push_back(level);
  }
  return s;
}

inline std::vector<double> evaluate_weights(const WeightFunction& w, const RiskTable& table,
                                            const PooledSurvival& pooled) {
  const std::size_t d = table.size();
  std::vector<double> out(d);
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        for (std::size_t i = 0; i < d; ++i) {
          if constexpr (std::is_same_v<K, Constant>) {
            out[i] = kind.value;
          } else if constexpr (std::is_same_v<K, PetoPeto>) {
            out[i] = pooled.at[i];
          } else if constexpr (std::is_same_v<K, FlemingHarrington>) {
            const double s = pooled.before[i];
            out[i] = std::pow(s, kind.rho) * std::pow(1.0 - s, kind.gamma);
          } else if constexpr (std::is_same_v<K, Crossing>) {
            out[i] = 1.0 - 2.0 * pooled.before[i];
          } else {
            out[i] = (i + 1 <= kind.m) ? -1.0 : kind.c;
          }
        }
      },
      w);
  return out;
}

inline std::vector<double> evaluate_weights(const WeightFunction& w, const RiskTable& table) {
  return evaluate_weights(w, table, pooled_survival(table));
}

inline std::string weight_name(const WeightFunction& w) {
  return std::visit(
      [](const auto& kind) -> std::string {
        using K = std::decay_t<decltype(kind)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<K, Constant>) {
          os << "constant";
        } else if constexpr (std::is_same_v<K, PetoPeto>) {
          os << "peto_peto";
        } else if constexpr (std::is_same_v<K, FlemingHarrington>) {
          os << "FH(" << kind.rho << ',' << kind.gamma << ')';
        } else if constexpr (std::is_same_v<K, Crossing>) {
          os << "crossing";
        } else {
          os << "sign_switch(" << kind.m << ',' << kind.c << ')';
        }
        return os.str();
      },
      w);
}

}  // namespace survcomp
