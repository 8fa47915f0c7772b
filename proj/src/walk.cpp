#include "sbmclt/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sbmclt/errors.hpp"
#include "sbmclt/rng.hpp"

namespace sbmclt {

namespace {

constexpr std::uint64_t kClockStream = 0xc10c;
constexpr std::uint64_t kGraphSideStream = 0x96a9;

void require(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v) {
  const auto d = clocks.dim();
  if (kernel_n.rows() != d || kernel_n.cols() != d)
    throw DimensionError("walk: rate matrix does not match clock dimension");
  if (v.size() != d) throw DimensionError("walk: direction vector length mismatch");
  if (!(v.array() > 0.0).all()) throw DomainError("walk: direction v must be > 0");
}

// v y + K^(N) c / N; the single place counts become coordinates, so every
// caller produces bit-identical values for identical counts.
Vector drift_plus_mass(const Vector& v, double y, const Matrix& rates,
                       const std::vector<std::int64_t>& counts, double n) {
  const auto d = v.size();
  Vector t(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double mass = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) mass += rates(i, j) * static_cast<double>(counts[j]);
    t[i] = v[i] * y + mass / n;
  }
  return t;
}

Vector mass_of(const Matrix& rates, const std::vector<std::int64_t>& counts, double n) {
  return drift_plus_mass(Vector::Zero(rates.rows()), 0.0, rates, counts, n);
}

std::int64_t count_below(const std::vector<double>& xs, double t) {
  return std::lower_bound(xs.begin(), xs.end(), t) - xs.begin();
}

std::int64_t count_at_most(const std::vector<double>& xs, double t) {
  return std::upper_bound(xs.begin(), xs.end(), t) - xs.begin();
}

bool before(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  const auto sa = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  const auto sb = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  if (sa != sb) return sa > sb;
  return a > b;
}

}  // namespace

std::int64_t ClockSet::total() const {
  std::int64_t n = 0;
  for (const auto& x : xi) n += static_cast<std::int64_t>(x.size());
  return n;
}

Vector HittingPath::at(double y) const {
  std::vector<std::int64_t> counts(v.size(), 0);
  for (std::size_t l = 0; l < jump_locations.size(); ++l)
    if (jump_locations[l] < y)
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += jump_counts[l][k];
  return drift_plus_mass(v, y, rates, counts, static_cast<double>(total));
}

std::size_t HittingPath::largest_jump() const {
  if (jump_counts.empty()) throw DomainError("largest_jump: path has no jumps");
  std::size_t best = 0;
  for (std::size_t l = 1; l < jump_counts.size(); ++l)
    if (before(jump_counts[l], jump_counts[best])) best = l;
  return best;
}

ClockSet sample_clocks(const TypeProfile& profile, std::uint64_t seed) {
  if (!profile.realized()) throw DomainError("sample_clocks: profile has no block sizes");
  ClockSet clocks;
  clocks.seed = seed;
  clocks.xi.resize(profile.block_sizes.size());
  for (std::size_t j = 0; j < clocks.xi.size(); ++j) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(j), kClockStream}));
    auto& xs = clocks.xi[j];
    xs.resize(static_cast<std::size_t>(profile.block_sizes[j]));
    for (auto& x : xs) x = rng.exponential();
    std::sort(xs.begin(), xs.end());
  }
  return clocks;
}

std::vector<std::vector<std::int64_t>> clock_counts(const TypeProfile& profile, std::uint64_t seed,
                                                    const std::vector<double>& grid) {
  if (!profile.realized()) throw DomainError("clock_counts: profile has no block sizes");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("clock_counts: grid must be ascending");
  const std::size_t m = grid.size();
  std::vector<std::vector<std::int64_t>> out(profile.block_sizes.size());
  std::vector<std::int64_t> bins(m + 1);
  for (std::size_t j = 0; j < out.size(); ++j) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(j), kClockStream}));
    std::fill(bins.begin(), bins.end(), 0);
    for (std::int64_t l = 0; l < profile.block_sizes[j]; ++l) {
      const double x = rng.exponential();
      std::size_t k = 0;
      while (k < m && x > grid[k]) ++k;
      ++bins[k];
    }
    out[j].resize(m);
    std::int64_t cum = 0;
    for (std::size_t k = 0; k < m; ++k) out[j][k] = (cum += bins[k]);
  }
  return out;
}

Vector z_eval(const ClockSet& clocks, const Matrix& kernel_n, const Vector& t, bool left_limit) {
  const auto d = clocks.dim();
  if (kernel_n.rows() != d || t.size() != d) throw DimensionError("z_eval: dimension mismatch");
  std::vector<std::int64_t> counts(d);
  for (int j = 0; j < d; ++j)
    counts[j] = left_limit ? count_below(clocks.xi[j], t[j]) : count_at_most(clocks.xi[j], t[j]);
  return mass_of(kernel_n, counts, static_cast<double>(clocks.total())) - t;
}

Vector hitting_time(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v, double y,
                    std::vector<std::int64_t>& counts) {
  require(clocks, kernel_n, v);
  if (!(y >= 0.0)) throw DomainError("hitting_time: y must be >= 0");
  const auto d = clocks.dim();
  const double n = static_cast<double>(clocks.total());
  counts.assign(d, 0);
  Vector t = drift_plus_mass(v, y, kernel_n, counts, n);
  // Counts only grow, so this terminates within total() + 1 sweeps.
  while (true) {
    bool changed = false;
    for (int j = 0; j < d; ++j) {
      const std::int64_t c = count_below(clocks.xi[j], t[j]);
      if (c != counts[j]) {
        counts[j] = c;
        changed = true;
      }
    }
    if (!changed) return t;
    t = drift_plus_mass(v, y, kernel_n, counts, n);
  }
}

Vector hitting_time(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v, double y) {
  std::vector<std::int64_t> counts;
  return hitting_time(clocks, kernel_n, v, y, counts);
}

HittingPath hitting_path(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                         double y_max) {
  require(clocks, kernel_n, v);
  if (!(y_max > 0.0)) throw DomainError("hitting_path: horizon must be > 0");
  const auto d = clocks.dim();
  const double n = static_cast<double>(clocks.total());

  HittingPath path;
  path.v = v;
  path.horizon = y_max;
  path.rates = kernel_n;
  path.total = clocks.total();

  std::vector<std::int64_t> consumed(d, 0);
  while (true) {
    // Next clock reached by the drift alone.
    const Vector mass = mass_of(kernel_n, consumed, n);
    int trigger = -1;
    double next = std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
      if (consumed[j] >= static_cast<std::int64_t>(clocks.xi[j].size())) continue;
      const double yj = (clocks.xi[j][consumed[j]] - mass[j]) / v[j];
      if (yj < next) {
        next = yj;
        trigger = j;
      }
    }
    if (trigger < 0 || next > y_max) break;

    // Avalanche: absorb the triggering clock, then close under t_j >= xi.
    std::vector<std::int64_t> after = consumed;
    ++after[trigger];
    while (true) {
      const Vector t = drift_plus_mass(v, next, kernel_n, after, n);
      bool changed = false;
      for (int j = 0; j < d; ++j) {
        const std::int64_t c = std::max(after[j], count_at_most(clocks.xi[j], t[j]));
        if (c != after[j]) {
          after[j] = c;
          changed = true;
        }
      }
      if (!changed) break;
    }

    std::vector<std::int64_t> delta(d);
    for (int j = 0; j < d; ++j) delta[j] = after[j] - consumed[j];
    path.jump_locations.push_back(next);
    path.jump_vectors.push_back(mass_of(kernel_n, delta, n));
    path.jump_counts.push_back(std::move(delta));
    consumed = std::move(after);
  }
  return path;
}

Vector hitting_time_x_scale(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                            double y) {
  require(clocks, kernel_n, v);
  const auto d = clocks.dim();
  const double n = static_cast<double>(clocks.total());
  const double n13 = std::cbrt(n);
  const double n23 = n13 * n13;
  for (int j = 0; j < d; ++j)
    if (!(kernel_n(j, j) > 0.0)) throw DomainError("x-scale walk needs a positive diagonal");

  std::vector<std::vector<double>> unscaled(d);
  for (int j = 0; j < d; ++j) {
    unscaled[j].reserve(clocks.xi[j].size());
    for (double x : clocks.xi[j]) unscaled[j].push_back(n23 * x);
  }

  std::vector<std::int64_t> counts(d, 0);
  auto solve_for = [&](const std::vector<std::int64_t>& c) {
    Vector s(d);
    for (int i = 0; i < d; ++i) {
      double mass = 0.0;
      for (int j = 0; j < d; ++j)
        mass += kernel_n(i, j) / kernel_n(i, i) * static_cast<double>(c[j]) / n23;
      s[i] = v[i] * y + mass;
    }
    return s;
  };
  Vector s = solve_for(counts);
  while (true) {
    bool changed = false;
    for (int j = 0; j < d; ++j) {
      const std::int64_t c = count_below(unscaled[j], n13 * kernel_n(j, j) * s[j]);
      if (c != counts[j]) {
        counts[j] = c;
        changed = true;
      }
    }
    if (!changed) return s;
    s = solve_for(counts);
  }
}

double scaling_identity_check(const ClockSet& clocks, const Matrix& kernel_n, const Vector& v,
                              double y) {
  const Vector lhs = hitting_time(clocks, kernel_n, v, y);
  const double n13 = std::cbrt(static_cast<double>(clocks.total()));
  const Vector diag = kernel_n.diagonal();
  const Vector s = hitting_time_x_scale(clocks, kernel_n, v.cwiseQuotient(diag), n13 * y);
  const Vector rhs = diag.cwiseProduct(s) / n13;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

HittingPath graph_side_path(const GraphSample& sample, const Matrix& kernel_n, const Vector& v,
                            std::uint64_t seed) {
  const auto d = sample.profile.dim();
  if (kernel_n.rows() != d || v.size() != d) throw DimensionError("graph_side_path: dimension mismatch");
  if (!(v.array() > 0.0).all()) throw DomainError("graph_side_path: v must be > 0");
  const double n = static_cast<double>(sample.profile.total());
  Rng rng(derive_seed({seed, kGraphSideStream}));

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(sample.components.size());
  for (std::size_t l = 0; l < sample.components.size(); ++l) {
    double rate = 0.0;
    for (int k = 0; k < d; ++k) rate += v[k] * static_cast<double>(sample.components[l].counts[k]);
    order.emplace_back(rng.exponential(rate), l);
  }
  std::sort(order.begin(), order.end());

  HittingPath path;
  path.v = v;
  path.rates = kernel_n;
  path.total = sample.profile.total();
  for (const auto& [loc, l] : order) {
    path.jump_locations.push_back(loc);
    path.jump_counts.push_back(sample.components[l].counts);
    path.jump_vectors.push_back(mass_of(kernel_n, sample.components[l].counts, n));
  }
  return path;
}

void write_path_csv(std::ostream& out, const HittingPath& path) {
  const auto d = path.v.size();
  out << "l,E_l";
  for (Eigen::Index k = 0; k < d; ++k) out << ",delta_" << (k + 1);
  out << '\n';
  out.precision(17);
  for (std::size_t l = 0; l < path.size(); ++l) {
    out << (l + 1) << ',' << path.jump_locations[l];
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << path.jump_vectors[l][k];
    out << '\n';
  }
}

}  // namespace sbmclt
