#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "sbmclt/model.hpp"
#include "sbmclt/sbm.hpp"

namespace sbmclt {

/// Exponential clock field: for each type j, block_sizes[j] i.i.d. Exp(1)
/// variates sorted ascending.
struct ClockSet {
  std::vector<std::vector<double>> xi;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(xi.size()); }
  std::int64_t total() const;
};

/// Piecewise-linear nondecreasing path y -> T(y) = v y + sum_{l: E_l < y} Delta_l.
/// jump_counts[l] is the per-type number of clocks absorbed by jump l, so
/// jump_vectors[l] = N^{-1} K jump_counts[l].
struct HittingPath {
  Vector v;
  std::vector<double> jump_locations;
  std::vector<Vector> jump_vectors;
  std::vector<std::vector<std::int64_t>> jump_counts;
  double horizon = std::numeric_limits<double>::infinity();
  Matrix rates;  // K^(N) used to turn counts into jump vectors
  std::int64_t total = 0;

  std::size_t size() const { return jump_locations.size(); }

  /// Left-continuous evaluation T(y).
  Vector at(double y) const;

  /// Index of the jump with the largest total count (ties: larger counts
  /// vector first). Requires at least one jump.
  std::size_t largest_jump() const;
};

/// Draws block_sizes[j] Exp(1) clocks per type (substream per type).
ClockSet sample_clocks(const TypeProfile& profile, std::uint64_t seed);

/// counts[j][k] = #{l : xi_{l,j} <= grid[k]} for the clock field that
/// sample_clocks(profile, seed) would produce, without sorting it. grid must
/// be ascending.
std::vector<std::vector<std::int64_t>> clock_counts(const TypeProfile& profile, std::uint64_t seed,
                                                    const std::vector<double>& grid);

/// Z_i(t) = -t_i + sum_j K_ij N^{-1} #{l : xi_{l,j} <= t_j}, with strict
/// inequality when left_limit is set. N is the total clock count.
Vector z_eval(const ClockSet& clocks, const Matrix& kernel_n, const Vector& t, bool left_limit);

/// Coordinatewise-minimal t with Z(t-) = -v y, by monotone fixed-point sweeps
/// from t = v y.
Vector hitting_time(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v, double y);

/// Same as hitting_time but also returns the per-type absorbed clock counts.
Vector hitting_time(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v, double y,
                    std::vector<std::int64_t>& counts);

/// Exact event-driven jump decomposition of y -> T(y) on [0, y_max]; the
/// default horizon runs until every clock has been absorbed.
HittingPath hitting_path(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                         double y_max = std::numeric_limits<double>::infinity());

/// Hitting time of the unscaled field X with X_ij(s) = K_ii^{-1} K_ij N_j(s)
/// - 1[i=j] s and N_j(s) = N^{-2/3} #{xi0 <= N^{1/3} K_jj s}, xi0 = N^{2/3} xi.
Vector hitting_time_x_scale(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                            double y);

/// sup-norm gap between T(y, v, Z) and N^{-1/3} diag(K) T(N^{1/3} y, diag(K)^{-1} v, X).
double scaling_identity_check(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                              double y);

/// Graph-side path: given the component tallies, E_l ~ Exp(v^T C_l)
/// independently, with jumps N^{-1} K^(N) C_l, sorted by location.
HittingPath graph_side_path(const GraphSample& sample, const Matrix& kernel_n, const Vector& v,
                            std::uint64_t seed);

/// CSV rows "l,E_l,delta_1..delta_d" with a header line.
void write_path_csv(std::ostream& out, const HittingPath& path);

}  // namespace sbmclt
