#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "survcomp/core/risk_table.hpp"
#include "survcomp/wlrt/logrank.hpp"
#include "survcomp/wlrt/weights.hpp"

namespace survcomp {

using WeightSet = std::vector<WeightFunction>;

namespace weight_sets {

/// Log-rank plus crossing weight.
inline WeightSet mdir2() { return {Constant{}, Crossing{}}; }
/// mdir2 plus a middle-difference FH(1,1) weight. FH(1,0) and FH(0,1) are
/// affine in S and so already lie in the span of the mdir2 pair.
inline WeightSet mdir3() { return {Constant{}, Crossing{}, FlemingHarrington{1.0, 1.0}}; }
/// mdir3 plus a late-difference FH(0,3) weight (cubic in S).
inline WeightSet mdir4() { return {Constant{}, Crossing{}, FlemingHarrington{1.0, 1.0}, FlemingHarrington{0.0, 3.0}}; }

inline std::vector<FlemingHarrington> maxcombo() {
  return {{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
}

}  // namespace weight_sets

/// Event-time by weight matrix: column r holds w_r evaluated on the table.
inline Eigen::MatrixXd weight_matrix(const RiskTable& table, std::span<const WeightFunction> weights) {
  const PooledSurvival pooled = pooled_survival(table);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(table.size()), static_cast<Eigen::Index>(weights.size()));
  for (std::size_t r = 0; r < weights.size(); ++r) {
    const auto col = evaluate_weights(weights[r], table, pooled);
    for (std::size_t i = 0; i < col.size(); ++i) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = col[i];
  }
  return w;
}

/// Scaled score vector and its estimated covariance for several weights.
///   score_r = sqrt(n/(n1 n2)) sum_i w_ir (N_i1 - Y_i1 N_i/Y_i)
///   cov_rs  = n/(n1 n2) sum_i w_ir w_is (Y_i1 Y_i2 / Y_i^2) N_i (Y_i - N_i)/(Y_i - 1)
/// Without tied events the tie factor is 1 and cov_rs is the Nelson-Aalen
/// integral of w_r w_s Y1 Y2 / Y.
struct ScoreCovariance {
  Eigen::VectorXd score;
  Eigen::MatrixXd covariance;
};

inline ScoreCovariance score_covariance(const RiskTable& table, const LogrankTerms& terms, const Eigen::MatrixXd& w) {
  const double n = static_cast<double>(table.n());
  const double scale = n / (static_cast<double>(table.n1()) * static_cast<double>(table.n2()));
  const Eigen::Map<const Eigen::VectorXd> u(terms.score.data(), static_cast<Eigen::Index>(terms.score.size()));
  const Eigen::Map<const Eigen::VectorXd> v(terms.variance.data(), static_cast<Eigen::Index>(terms.variance.size()));
  ScoreCovariance out;
  out.score = std::sqrt(scale) * (w.transpose() * u);
  out.covariance = scale * (w.transpose() * v.asDiagonal() * w);
  return out;
}

inline ScoreCovariance score_covariance(const RiskTable& table, std::span<const WeightFunction> weights) {
  return score_covariance(table, logrank_terms(table), weight_matrix(table, weights));
}

}  // namespace survcomp
