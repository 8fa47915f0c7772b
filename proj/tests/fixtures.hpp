#pragma once

// Builders shared by the unit tests and the acceptance suite.

#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "sbmclt/spectral.hpp"
#include "sbmclt/walk.hpp"

namespace fixture {

using namespace sbmclt;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline oracle::Vec to_vec(const Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

/// Realized profile with exactly the given block sizes.
inline TypeProfile sized(std::vector<std::int64_t> sizes) {
  const auto d = static_cast<int>(sizes.size());
  std::int64_t n = 0;
  for (auto s : sizes) n += s;
  Vector mu(d);
  for (int j = 0; j < d; ++j) mu[j] = static_cast<double>(sizes[j]) / static_cast<double>(n);
  mu[d - 1] = 1.0 - (mu.sum() - mu[d - 1]);
  TypeProfile p = TypeProfile::make(mu);
  p.n = n;
  p.block_sizes = std::move(sizes);
  return p;
}

/// Random symmetric positive kernel and type law with lambda1(KM) in (1.3, 6).
inline std::pair<Kernel, TypeProfile> random_supercritical(std::mt19937_64& gen, int d) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  while (true) {
    Matrix K(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) K(i, j) = K(j, i) = u(gen);
    Vector mu(d);
    for (int j = 0; j < d; ++j) mu[j] = u(gen);
    mu /= mu.sum();
    mu[d - 1] = 1.0 - (mu.sum() - mu[d - 1]);
    const double l1 = perron(K * mu.asDiagonal()).lambda1;
    if (l1 > 1.3 && l1 < 6.0) return {Kernel::make(K), TypeProfile::make(mu)};
  }
}

struct WalkInstance {
  ClockSet clocks;
  Matrix K;
  Vector v;
};

/// d in {1, 2, 3}, block sizes in [1, max_block], rates and v in [0.2, 3].
inline WalkInstance random_walk_instance(std::mt19937_64& gen, int max_block) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const int d = 1 + static_cast<int>(gen() % 3);
  std::vector<std::int64_t> sizes(d);
  for (auto& s : sizes) s = 1 + static_cast<std::int64_t>(gen() % max_block);
  WalkInstance in;
  in.clocks = sample_clocks(sized(sizes), gen());
  in.K = Matrix(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) in.K(i, j) = in.K(j, i) = u(gen);
  in.v = Vector(d);
  for (int i = 0; i < d; ++i) in.v[i] = u(gen);
  return in;
}

inline std::vector<std::int64_t> brute_force_counts(const WalkInstance& in, double y) {
  return oracle::least_hitting_counts(in.clocks.xi, to_mat(in.K), to_vec(in.v), y);
}

}  // namespace fixture
