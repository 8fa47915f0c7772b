#include "sbmclt/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "sbmclt/errors.hpp"

namespace sbmclt {

MomentAccumulator::MomentAccumulator(int dim)
    : mean_(Vector::Zero(dim)), m2_(Matrix::Zero(dim, dim)), m3_(Vector::Zero(dim)),
      m4_(Vector::Zero(dim)) {}

void MomentAccumulator::add(const Vector& x) {
  MomentAccumulator one(static_cast<int>(x.size()));
  one.n_ = 1;
  one.mean_ = x;
  merge(one);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) throw DimensionError("MomentAccumulator: dimension mismatch");
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const Vector delta = other.mean_ - mean_;

  for (int k = 0; k < dim(); ++k) {
    const double dk = delta[k];
    const double a2 = m2_(k, k);
    const double b2 = other.m2_(k, k);
    const double a3 = m3_[k];
    const double b3 = other.m3_[k];
    m4_[k] += other.m4_[k] + dk * dk * dk * dk * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
              6.0 * dk * dk * (na * na * b2 + nb * nb * a2) / (n * n) + 4.0 * dk * (na * b3 - nb * a3) / n;
    m3_[k] += b3 + dk * dk * dk * na * nb * (na - nb) / (n * n) + 3.0 * dk * (na * b2 - nb * a2) / n;
  }
  m2_ += other.m2_ + (delta * delta.transpose()) * (na * nb / n);
  mean_ += delta * (nb / n);
  n_ += other.n_;
}

namespace {

MomentAccumulator tree(std::span<const Vector> xs) {
  if (xs.size() == 1) {
    MomentAccumulator acc(static_cast<int>(xs[0].size()));
    acc.add(xs[0]);
    return acc;
  }
  const std::size_t mid = xs.size() / 2;
  MomentAccumulator left = tree(xs.first(mid));
  left.merge(tree(xs.subspan(mid)));
  return left;
}

}  // namespace

MomentAccumulator accumulate_pairwise(std::span<const Vector> samples) {
  if (samples.empty()) return MomentAccumulator(0);
  return tree(samples);
}

MomentSummary summarize(const MomentAccumulator& acc) {
  if (acc.count() < 2) throw DomainError("summarize: need at least two observations");
  const double n = static_cast<double>(acc.count());
  MomentSummary s;
  s.R = acc.count();
  s.sample_mean = acc.mean();
  s.sample_cov = acc.comoment() / (n - 1.0);
  s.standard_errors = (s.sample_cov.diagonal() / n).cwiseSqrt();
  const auto d = acc.dim();
  s.skewness.resize(d);
  s.excess_kurtosis.resize(d);
  for (int k = 0; k < d; ++k) {
    const double m2 = acc.comoment()(k, k);
    s.skewness[k] = m2 > 0.0 ? std::sqrt(n) * acc.third()[k] / std::pow(m2, 1.5) : 0.0;
    s.excess_kurtosis[k] = m2 > 0.0 ? n * acc.fourth()[k] / (m2 * m2) - 3.0 : 0.0;
  }
  return s;
}

MomentSummary summarize(std::span<const Vector> samples) {
  return summarize(accumulate_pairwise(samples));
}

Vector jackknife_se(std::span<const Vector> samples) {
  const auto r = samples.size();
  if (r < 2) throw DomainError("jackknife_se: need at least two observations");
  const auto d = samples[0].size();
  Vector total = Vector::Zero(d);
  for (const auto& x : samples) total += x;
  std::vector<Vector> loo;
  loo.reserve(r);
  Vector loo_mean = Vector::Zero(d);
  for (const auto& x : samples) {
    loo.push_back((total - x) / static_cast<double>(r - 1));
    loo_mean += loo.back();
  }
  loo_mean /= static_cast<double>(r);
  Vector ss = Vector::Zero(d);
  for (const auto& m : loo) ss += (m - loo_mean).cwiseAbs2();
  return (ss * (static_cast<double>(r - 1) / static_cast<double>(r))).cwiseSqrt();
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace sbmclt
