#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/omnibus/covariance.hpp"
#include "survcomp/omnibus/linalg.hpp"

namespace survcomp {

/// Raised when MaxCombo cannot produce a result (a component statistic has
/// zero variance). Simulation code counts these separately.
class maxcombo_failure : public degenerate_variance_error {
 public:
  using degenerate_variance_error::degenerate_variance_error;
};

struct MaxComboOptions {
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// P(max_k |G_k| >= observed) for G ~ N(0, L L^T), estimated from n_mc
/// seeded draws. Draws are generated in fixed-size chunks with one
/// substream each, so the estimate does not depend on the thread count.
inline double max_abs_normal_tail(const Eigen::MatrixXd& factor, double observed, std::size_t n_mc,
                                  std::uint64_t seed, unsigned threads = 1) {
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (n_mc + chunk - 1) / chunk;
  const auto dim = factor.rows();
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(mix_seed(seed, c));
    Eigen::VectorXd eps(factor.cols());
    const std::size_t end = std::min(n_mc, (c + 1) * chunk);
    std::size_t local = 0;
    for (std::size_t k = c * chunk; k < end; ++k) {
      for (Eigen::Index j = 0; j < eps.size(); ++j) eps(j) = rng.normal();
      double m = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) m = std::max(m, std::abs(factor.row(i).dot(eps)));
      if (m >= observed) ++local;
    }
    hits[c] = local;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(n_mc);
}

/// Two-sided MaxCombo test: maximum absolute standardized FH statistic,
/// calibrated against the multivariate normal law with the estimated
/// correlation between the component statistics.
inline TestOutcome maxcombo_test(const SurvivalDataset& data, std::span<const FlemingHarrington> pairs,
                                 const MaxComboOptions& options = {}) {
  if (pairs.size() < 2) throw invalid_input_error("maxcombo: at least two weight pairs are required");
  if (options.n_mc < 1) throw invalid_input_error("maxcombo: n_mc must be at least 1");
  data.require_two_groups();
  const RiskTable table = build_risk_table(data);
  const WeightSet weights(pairs.begin(), pairs.end());
  const LogrankTerms terms = logrank_terms(table);
  const Eigen::MatrixXd w = weight_matrix(table, weights);
  const ScoreCovariance sc = score_covariance(table, terms, w);

  TestOutcome out;
  out.method = "MC";
  double observed = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Eigen::VectorXd col = w.col(static_cast<Eigen::Index>(k));
    WeightedLogrank z;
    try {
      z = weighted_logrank(terms, std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    } catch (const degenerate_variance_error&) {
      throw maxcombo_failure("maxcombo: " + weight_name(weights[k]) + " statistic has zero variance");
    }
    out.detail["z_" + weight_name(weights[k])] = z.z;
    observed = std::max(observed, std::abs(z.z));
  }

  const Eigen::VectorXd sd = sc.covariance.diagonal().cwiseSqrt();
  const Eigen::MatrixXd corr = sc.covariance.cwiseQuotient(sd * sd.transpose());
  const CorrelationFactor factor = correlation_factor(corr);
  if (factor.projected) out.flags.push_back("correlation_projected_to_psd");
  out.detail["min_eigenvalue"] = factor.min_eigenvalue;
  out.statistic = observed;
  out.p_value = max_abs_normal_tail(factor.factor, observed, options.n_mc, options.seed, options.threads);
  out.detail["resamples"] = static_cast<double>(options.n_mc);
  return out;
}

}  // namespace survcomp
