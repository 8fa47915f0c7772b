#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbmclt/model.hpp"

namespace sbmclt {

/// Streaming first-to-fourth moments of d-dimensional observations. Two
/// accumulators merge exactly (Chan/Pebay update), so partial sums computed on
/// different workers combine into the same result as a serial pass.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim = 0);

  void add(const Vector& x);
  void merge(const MomentAccumulator& other);

  std::int64_t count() const { return n_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  /// Sum of outer products of deviations.
  const Matrix& comoment() const { return m2_; }
  const Vector& third() const { return m3_; }
  const Vector& fourth() const { return m4_; }

 private:
  std::int64_t n_ = 0;
  Vector mean_;
  Matrix m2_;
  Vector m3_;
  Vector m4_;
};

struct MomentSummary {
  Vector sample_mean;
  Matrix sample_cov;
  Vector standard_errors;
  Vector skewness;
  Vector excess_kurtosis;
  std::int64_t R = 0;
};

/// Accumulates in a fixed balanced binary tree over the index order, so the
/// result does not depend on how the observations were produced.
MomentAccumulator accumulate_pairwise(std::span<const Vector> samples);

MomentSummary summarize(const MomentAccumulator& acc);
MomentSummary summarize(std::span<const Vector> samples);

/// Leave-one-out jackknife standard error of the mean, per coordinate.
Vector jackknife_se(std::span<const Vector> samples);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Exact two-sample KS statistic sup |F_a - F_b| (ties handled jointly) with
/// the asymptotic p-value Q((sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D), ne = n_a n_b / (n_a + n_b).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Standard normal quantile.
double normal_quantile(double p);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> xs, double p);

}  // namespace sbmclt
