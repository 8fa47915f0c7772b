#include <doctest.h>

#include <cmath>
#include <random>

#include "sbmclt/errors.hpp"
#include "sbmclt/stats.hpp"

using namespace sbmclt;

namespace {

std::vector<Vector> draw(std::uint64_t seed, int n, int d) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> g(2.0, 1.0);
  std::vector<Vector> xs;
  for (int i = 0; i < n; ++i) {
    Vector x(d);
    for (int k = 0; k < d; ++k) x[k] = g(gen) + (k > 0 ? 0.5 * x[k - 1] : 0.0);
    xs.push_back(x);
  }
  return xs;
}

}  // namespace

TEST_CASE("moments agree with a two-pass computation") {
  const auto xs = draw(1, 1001, 3);
  const auto s = summarize(xs);
  const double n = static_cast<double>(xs.size());
  Vector mean = Vector::Zero(3);
  for (const auto& x : xs) mean += x;
  mean /= n;
  Matrix cov = Matrix::Zero(3, 3);
  Vector m3 = Vector::Zero(3), m4 = Vector::Zero(3);
  for (const auto& x : xs) {
    const Vector dx = x - mean;
    cov += dx * dx.transpose();
    m3 += dx.array().cube().matrix();
    m4 += dx.array().square().square().matrix();
  }
  const Vector m2 = cov.diagonal() / n;
  cov /= n - 1;
  CHECK((s.sample_mean - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.sample_cov - cov).cwiseAbs().maxCoeff() < 1e-11);
  for (int k = 0; k < 3; ++k) {
    CHECK(s.standard_errors[k] == doctest::Approx(std::sqrt(cov(k, k) / n)).epsilon(1e-12));
    CHECK(s.skewness[k] == doctest::Approx(m3[k] / n / std::pow(m2[k], 1.5)).epsilon(1e-10));
    CHECK(s.excess_kurtosis[k] == doctest::Approx(m4[k] / n / (m2[k] * m2[k]) - 3).epsilon(1e-10));
  }
  CHECK(s.R == 1001);
  // Gamma(2) has skewness sqrt(2) in the first coordinate.
  CHECK(std::abs(s.skewness[0] - std::sqrt(2.0)) < 0.5);
}

TEST_CASE("merging accumulators matches a serial pass") {
  const auto xs = draw(2, 500, 2);
  MomentAccumulator serial(2);
  for (const auto& x : xs) serial.add(x);
  for (std::size_t cut : {1u, 137u, 250u, 499u}) {
    MomentAccumulator a(2), b(2);
    for (std::size_t i = 0; i < xs.size(); ++i) (i < cut ? a : b).add(xs[i]);
    a.merge(b);
    CHECK(a.count() == serial.count());
    CHECK((a.mean() - serial.mean()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.comoment() - serial.comoment()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.third() - serial.third()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.fourth() - serial.fourth()).cwiseAbs().maxCoeff() < 1e-7);
  }
  MomentAccumulator empty(2);
  empty.merge(serial);
  CHECK(empty.mean() == serial.mean());
}

TEST_CASE("pairwise accumulation is deterministic") {
  const auto xs = draw(3, 777, 2);
  const auto a = accumulate_pairwise(xs);
  const auto b = accumulate_pairwise(xs);
  CHECK(a.mean() == b.mean());
  CHECK(a.comoment() == b.comoment());
  CHECK_THROWS_AS(summarize(std::span<const Vector>(xs.data(), 1)), DomainError);
}

TEST_CASE("jackknife standard error of the mean equals s / sqrt(R)") {
  const auto xs = draw(4, 300, 2);
  const auto se = jackknife_se(xs);
  const auto s = summarize(xs);
  CHECK((se - s.standard_errors).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_q(1.6276236115189487) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(kolmogorov_q(5.0) < 1e-20);
}

TEST_CASE("two-sample KS statistic") {
  const auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(ks_two_sample({1, 2, 3}, {4, 5, 6}).statistic == 1.0);
  // F_a jumps at 1,2,3,4; F_b at 2.5, 3.5: max gap 0.5 at x = 2.
  CHECK(ks_two_sample({1, 2, 3, 4}, {2.5, 3.5}).statistic == doctest::Approx(0.5));
  // Ties across samples are stepped together.
  CHECK(ks_two_sample({1, 1, 2}, {1, 2, 2}).statistic == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), DomainError);
}

TEST_CASE("KS test holds its level under the null and detects a shift") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> z;
  int rejections = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(200), b(300);
    for (auto& x : a) x = z(gen);
    for (auto& x : b) x = z(gen);
    if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / trials;
  CHECK(rate < 0.05 + 4 * std::sqrt(0.05 * 0.95 / trials));
  CHECK(rate > 0.01);

  std::vector<double> a(500), b(500);
  for (auto& x : a) x = z(gen);
  for (auto& x : b) x = z(gen) + 0.5;
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("quantiles") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(quantile({7}, 0.3) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), DomainError);
}
