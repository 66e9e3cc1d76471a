#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/core/tails.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/omnibus/covariance.hpp"
#include "survcomp/omnibus/linalg.hpp"

namespace survcomp {

struct MdirStatistic {
  double value = 0.0;
  std::size_t rank = 0;
};

/// Studentized quadratic form score' * pinv(cov) * score.
inline MdirStatistic mdir_statistic(const ScoreCovariance& sc) {
  const PseudoInverse pinv = pseudo_inverse(sc.covariance);
  MdirStatistic out;
  out.rank = pinv.rank;
  out.value = pinv.rank == 0 ? 0.0 : sc.score.dot(pinv.matrix * sc.score);
  return out;
}

inline MdirStatistic mdir_statistic(const SurvivalDataset& data, std::span<const WeightFunction> weights) {
  data.require_two_groups();
  const RiskTable table = build_risk_table(data);
  const MdirStatistic s = mdir_statistic(score_covariance(table, weights));
  if (s.rank == 0) throw degenerate_variance_error("mdir: covariance matrix is zero");
  return s;
}

enum class MdirMode { asymptotic, permutation };

struct MdirOptions {
  MdirMode mode = MdirMode::permutation;
  std::size_t n_perm = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// mdir test. Asymptotic p-values use the chi-squared law with df equal to
/// the numerical rank of the covariance. Permutation p-values permute group
/// labels (times and censoring stay with the subject) and return
/// (1 + #{S* >= S}) / (n_perm + 1).
inline TestOutcome mdir_test(const SurvivalDataset& data, std::span<const WeightFunction> weights,
                             const MdirOptions& options = {}, std::string method = "mdir") {
  if (weights.empty()) throw invalid_input_error("mdir: at least one weight is required");
  if (options.mode == MdirMode::permutation && options.n_perm < 1) {
    throw invalid_input_error("mdir: n_perm must be at least 1");
  }
  data.require_two_groups();
  const SortedSample sample(data);
  const RiskTable table = sample.table();
  // Weights depend only on pooled quantities, which permutation leaves unchanged.
  const Eigen::MatrixXd w = weight_matrix(table, weights);
  const MdirStatistic observed = mdir_statistic(score_covariance(table, logrank_terms(table), w));
  if (observed.rank == 0) throw degenerate_variance_error("mdir: covariance matrix is zero");

  TestOutcome out;
  out.method = std::move(method);
  out.statistic = observed.value;
  out.detail["df"] = static_cast<double>(observed.rank);
  out.detail["weights"] = static_cast<double>(weights.size());
  if (options.mode == MdirMode::asymptotic) {
    out.p_value = chi_squared_sf(observed.value, static_cast<double>(observed.rank));
    return out;
  }

  std::vector<unsigned char> exceed(options.n_perm, 0);
  const double threshold = observed.value - 1e-12 * std::abs(observed.value);
  parallel_for(options.n_perm, options.threads, [&](std::size_t b) {
    Rng rng(mix_seed(options.seed, b));
    std::vector<int> labels(sample.labels().begin(), sample.labels().end());
    rng.shuffle(std::span<int>(labels));
    const RiskTable permuted = sample.table(labels);
    const MdirStatistic s = mdir_statistic(score_covariance(permuted, logrank_terms(permuted), w));
    exceed[b] = s.value >= threshold ? 1 : 0;
  });
  std::size_t count = 0;
  for (unsigned char e : exceed) count += e;
  out.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(options.n_perm) + 1.0);
  out.detail["resamples"] = static_cast<double>(options.n_perm);
  out.detail["p_asymptotic"] = chi_squared_sf(observed.value, static_cast<double>(observed.rank));
  return out;
}

}  // namespace survcomp
