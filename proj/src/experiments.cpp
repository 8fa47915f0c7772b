#include "sbmclt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sbmclt/errors.hpp"
#include "sbmclt/rng.hpp"
#include "sbmclt/sbm.hpp"
#include "sbmclt/walk.hpp"

namespace sbmclt {

namespace {

constexpr int kBootstrapDraws = 200;
constexpr std::uint64_t kBootstrapStream = 0xb007;
constexpr std::uint64_t kWalkRole = 1;
constexpr std::uint64_t kGraphRole = 2;
constexpr std::uint64_t kNullRole = 3;

double frobenius_rel(const Matrix& emp, const Matrix& theory) {
  return (emp - theory).norm() / theory.norm();
}

Matrix sample_cov(const std::vector<Vector>& xs, const std::vector<std::size_t>& idx) {
  const auto d = xs.front().size();
  Vector mean = Vector::Zero(d);
  for (auto i : idx) mean += xs[i];
  mean /= static_cast<double>(idx.size());
  Matrix cov = Matrix::Zero(d, d);
  for (auto i : idx) {
    const Vector c = xs[i] - mean;
    cov += c * c.transpose();
  }
  return cov / static_cast<double>(idx.size() - 1);
}

double bootstrap_cov_error_se(const std::vector<Vector>& xs, const Matrix& theory,
                              std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t r = xs.size();
  std::vector<std::size_t> idx(r);
  std::vector<double> errors;
  errors.reserve(kBootstrapDraws);
  for (int b = 0; b < kBootstrapDraws; ++b) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng() % r);
    errors.push_back(frobenius_rel(sample_cov(xs, idx), theory));
  }
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= errors.size();
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / (errors.size() - 1));
}

const ComponentTally* second_component(const GraphSample& s) {
  return s.components.size() > 1 ? &s.components[1] : nullptr;
}

double auto_y0(const Kernel& kernel, const TypeProfile& profile, const Vector& a, std::int64_t N) {
  const RhoSolution sol = solve_rho(kernel, profile);
  const double mass = sol.supercritical ? a.dot(profile.mu.cwiseProduct(sol.rho)) : 0.0;
  if (mass > 0.0) return std::log(2.0) / (static_cast<double>(N) * mass);
  return 1.0 / static_cast<double>(N);
}

struct WalkFunctionals {
  std::vector<std::vector<double>> columns;  // one column per functional
  std::vector<Vector> largest;
};

WalkFunctionals functionals(const std::vector<HittingPath>& paths, double y0) {
  WalkFunctionals out;
  const auto d = paths.front().v.size();
  out.columns.assign(2 * d + 1, {});
  for (const auto& p : paths) {
    const Vector big = p.jump_vectors[p.largest_jump()];
    const Vector t = p.at(y0);
    for (Eigen::Index k = 0; k < d; ++k) {
      out.columns[k].push_back(big[k]);
      out.columns[d + k].push_back(t[k]);
    }
    const auto below = std::count_if(p.jump_locations.begin(), p.jump_locations.end(),
                                     [&](double e) { return e < y0; });
    out.columns[2 * d].push_back(static_cast<double>(below));
    out.largest.push_back(big);
  }
  return out;
}

KsReport ks_battery(const WalkFunctionals& a, const WalkFunctionals& b, int d) {
  KsReport rep;
  const double threshold = kKsAlpha / static_cast<double>(a.columns.size());
  rep.pass = true;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    std::string name;
    if (c < static_cast<std::size_t>(d)) name = "largest_jump_" + std::to_string(c + 1);
    else if (c < static_cast<std::size_t>(2 * d)) name = "T_y0_" + std::to_string(c - d + 1);
    else name = "jumps_below_y0";
    KsLine line{name, ks_two_sample(a.columns[c], b.columns[c])};
    rep.pass = rep.pass && line.ks.p_value > threshold;
    rep.tests.push_back(std::move(line));
  }
  return rep;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replicas < 100) throw DomainError("experiment: replicas must be >= 100");
  if (n_list.empty()) throw DomainError("experiment: n_list is empty");
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw DomainError("experiment: n_list must be ascending");
  check_compatible(kernel, profile);
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t n, std::int64_t replica) {
  return derive_seed({base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica)});
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(count, 1)));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::int64_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

CltReport run_clt_experiment(const ExperimentConfig& config) {
  config.validate();
  const RhoSolution sol = solve_rho(config.kernel, config.profile);
  if (!sol.supercritical) throw SubcriticalError("run_clt_experiment: model is subcritical");

  CltReport report;
  report.frame = config.frame;
  report.theory = limit_law(config.kernel, config.profile, config.frame);
  const Matrix& K = config.kernel.rates;
  const auto R = config.replicas;

  std::vector<Vector> raw_last;
  for (auto n : config.n_list) {
    const TypeProfile prof = config.profile.at_size(n);
    CltLevel level;
    level.n = n;
    level.N = prof.total();
    level.seeds.resize(R);
    std::vector<Vector> raw(R);
    parallel_for(R, config.threads, [&](std::int64_t r) {
      const auto seed = replica_seed(config.base_seed, n, r);
      level.seeds[r] = seed;
      raw[r] = giant_statistic(sample_sbm(config.kernel, prof, seed), config.kernel, sol.rho,
                               Frame::Raw);
    });
    level.statistics.reserve(R);
    for (const auto& x : raw)
      level.statistics.push_back(config.frame == Frame::Raw ? x : Vector(K * x));

    level.summary = summarize(level.statistics);
    level.mean_error = (level.summary.sample_mean - report.theory.mean).cwiseAbs().maxCoeff();
    level.max_se = level.summary.standard_errors.maxCoeff();
    level.cov_rel_error = frobenius_rel(level.summary.sample_cov, report.theory.covariance);
    level.cov_rel_error_se = bootstrap_cov_error_se(
        level.statistics, report.theory.covariance,
        derive_seed({config.base_seed, static_cast<std::uint64_t>(n), kBootstrapStream}));
    report.levels.push_back(std::move(level));
    raw_last = std::move(raw);
  }

  const CltLevel& last = report.levels.back();
  report.mean_ok = last.mean_error <= kMeanSeMultiple * last.max_se;
  report.cov_ok = last.cov_rel_error <= kCovFrobeniusTolerance;
  report.monotone_ok = true;
  for (std::size_t k = 1; k < report.levels.size(); ++k) {
    const auto& prev = report.levels[k - 1];
    const auto& cur = report.levels[k];
    const double noise = std::hypot(prev.cov_rel_error_se, cur.cov_rel_error_se);
    if (cur.cov_rel_error > prev.cov_rel_error + kMonotoneNoiseAllowance * noise)
      report.monotone_ok = false;
  }
  report.normality_ok = (last.summary.skewness.array().abs() < kSkewTolerance).all() &&
                        (last.summary.excess_kurtosis.array().abs() < kExcessKurtosisTolerance).all();
  report.pass = report.mean_ok && report.cov_ok && report.monotone_ok;

  // Frame arbitration: the covariance J^{-1} K D K^T J^{-T} read as the law of
  // K C (k_weighted) or of C itself (raw).
  const LimitLaw weighted = config.frame == Frame::KWeighted
                                ? report.theory
                                : limit_law(config.kernel, config.profile, Frame::KWeighted);
  std::vector<Vector> weighted_stats;
  weighted_stats.reserve(raw_last.size());
  for (const auto& x : raw_last) weighted_stats.push_back(K * x);
  report.arbitration_error_k_weighted =
      frobenius_rel(summarize(weighted_stats).sample_cov, weighted.covariance);
  report.arbitration_error_raw = frobenius_rel(summarize(raw_last).sample_cov, weighted.covariance);
  const bool k_ok = report.arbitration_error_k_weighted <= kCovFrobeniusTolerance;
  const bool raw_ok = report.arbitration_error_raw <= kCovFrobeniusTolerance;
  report.frame_arbitration = k_ok && raw_ok ? "both" : k_ok ? "k_weighted" : raw_ok ? "raw" : "none";
  return report;
}

LlnReport run_lln_experiment(const ExperimentConfig& config) {
  config.validate();
  const RhoSolution sol = solve_rho(config.kernel, config.profile);
  LlnReport report;
  report.supercritical = sol.supercritical;
  report.target = config.profile.mu.cwiseProduct(sol.rho);
  const auto R = config.replicas;

  for (auto n : config.n_list) {
    const TypeProfile prof = config.profile.at_size(n);
    const double N = static_cast<double>(prof.total());
    std::vector<double> deviation(R);
    std::vector<double> fraction(R);
    std::vector<std::int64_t> second(R);
    parallel_for(R, config.threads, [&](std::int64_t r) {
      const GraphSample s = sample_sbm(config.kernel, prof, replica_seed(config.base_seed, n, r));
      const auto& giant = s.components.front();
      double dev = 0.0;
      for (int k = 0; k < prof.dim(); ++k)
        dev = std::max(dev, std::abs(static_cast<double>(giant.counts[k]) / N - report.target[k]));
      deviation[r] = dev;
      fraction[r] = static_cast<double>(giant.size) / N;
      const auto* c2 = second_component(s);
      second[r] = c2 ? c2->size : 0;
    });

    LlnLevel level;
    level.n = n;
    level.N = prof.total();
    for (double x : deviation) level.mean_deviation += x;
    level.mean_deviation /= R;
    level.q99_deviation = quantile(deviation, 0.99);
    level.coverage = static_cast<double>(std::count_if(deviation.begin(), deviation.end(),
                                                       [](double x) { return x < kLlnDeviation; })) /
                     R;
    level.max_second = *std::max_element(second.begin(), second.end());
    level.second_bound = kSecondComponentLogFactor * std::log(N);
    double mean = 0.0;
    for (double x : fraction) mean += x;
    mean /= R;
    double ss = 0.0;
    for (double x : fraction) ss += (x - mean) * (x - mean);
    level.giant_fraction_variance = ss / (R - 1);
    level.max_giant_fraction = *std::max_element(fraction.begin(), fraction.end());
    report.levels.push_back(level);
  }

  report.coverage_ok = report.levels.back().coverage >= kLlnCoverage;
  report.shrink_ok = true;
  report.second_ok = true;
  for (std::size_t k = 0; k < report.levels.size(); ++k) {
    if (k > 0 && report.levels[k].q99_deviation > report.levels[k - 1].q99_deviation)
      report.shrink_ok = false;
    if (static_cast<double>(report.levels[k].max_second) > report.levels[k].second_bound)
      report.second_ok = false;
  }
  report.pass = report.coverage_ok && report.shrink_ok && report.second_ok;
  return report;
}

WalkIdentityReport run_walk_identity_test(const ExperimentConfig& config) {
  config.validate();
  const std::int64_t n = config.n_list.back();
  const TypeProfile prof = config.profile.at_size(n);
  const Matrix kernel_n = realize_kernel_n(config.kernel, prof.total());
  const Vector a = perron(config.kernel.rates * config.profile.mu.asDiagonal(), config.profile.mu).vec;
  const auto R = config.replicas;
  const int d = prof.dim();

  WalkIdentityReport report;
  report.N = prof.total();
  report.v = a;
  report.y0 = config.y0 > 0.0 ? config.y0 : auto_y0(config.kernel, config.profile, a, report.N);

  std::vector<HittingPath> walk(R);
  std::vector<HittingPath> graph(R);
  std::vector<HittingPath> null(R);
  parallel_for(R, config.threads, [&](std::int64_t r) {
    const auto seed = replica_seed(config.base_seed, n, r);
    walk[r] = hitting_path(sample_clocks(prof, derive_seed({seed, kWalkRole})), kernel_n, a);
    const auto gseed = derive_seed({seed, kGraphRole});
    graph[r] = graph_side_path(sample_sbm(config.kernel, prof, gseed), kernel_n, a, gseed);
    null[r] = hitting_path(sample_clocks(prof, derive_seed({seed, kNullRole})), kernel_n, a);
  });

  const WalkFunctionals fw = functionals(walk, report.y0);
  const WalkFunctionals fg = functionals(graph, report.y0);
  const WalkFunctionals fn = functionals(null, report.y0);
  report.walk_vs_graph = ks_battery(fw, fg, d);
  report.null_control = ks_battery(fw, fn, d);

  const MomentSummary sw = summarize(fw.largest);
  const MomentSummary sg = summarize(fg.largest);
  report.mean_largest_walk = sw.sample_mean;
  report.mean_largest_graph = sg.sample_mean;
  report.se_difference = (sw.standard_errors.cwiseAbs2() + sg.standard_errors.cwiseAbs2()).cwiseSqrt();
  report.jump_match_ok = true;
  for (int k = 0; k < d; ++k)
    if (std::abs(sw.sample_mean[k] - sg.sample_mean[k]) > 3.0 * report.se_difference[k])
      report.jump_match_ok = false;
  report.pass = report.walk_vs_graph.pass && report.null_control.pass && report.jump_match_ok;
  return report;
}

FluctuationReport run_fluctuation_check(const ExperimentConfig& config) {
  config.validate();
  if (config.grid.empty()) throw DomainError("fluctuation check: empty time grid");
  const std::int64_t n = config.n_list.back();
  const TypeProfile prof = config.profile.at_size(n);
  const Matrix kernel_n = realize_kernel_n(config.kernel, prof.total());
  const int d = prof.dim();
  const auto m = static_cast<int>(config.grid.size());
  const double N = static_cast<double>(prof.total());
  const auto R = config.replicas;

  std::vector<double> grid = config.grid;
  std::sort(grid.begin(), grid.end());
  std::vector<double> s(m);
  for (int k = 0; k < m; ++k) s[k] = -std::expm1(-grid[k]);

  // bridge[r][j] = sqrt(N) (N^{-1} #{xi_j <= t_k} - (n_j / N) s_k), k = 0..m-1
  std::vector<std::vector<Vector>> bridge(R, std::vector<Vector>(d));
  parallel_for(R, config.threads, [&](std::int64_t r) {
    const auto counts = clock_counts(prof, replica_seed(config.base_seed, n, r), grid);
    for (int j = 0; j < d; ++j) {
      Vector b(m);
      const double share = static_cast<double>(prof.block_sizes[j]) / N;
      for (int k = 0; k < m; ++k)
        b[k] = std::sqrt(N) * (static_cast<double>(counts[j][k]) / N - share * s[k]);
      bridge[r][j] = std::move(b);
    }
  });

  FluctuationReport report;
  report.N = prof.total();
  report.grid = grid;
  std::vector<Matrix> type_cov(d);
  for (int j = 0; j < d; ++j) {
    std::vector<Vector> xs;
    xs.reserve(R);
    for (const auto& rep : bridge) xs.push_back(rep[j]);
    type_cov[j] = summarize(xs).sample_cov;
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double kappa_n = kernel_n(i, j);
      const double kappa = config.kernel.rates(i, j);
      if (!(kappa > 0.0)) continue;
      FluctuationBlock block;
      block.i = i;
      block.j = j;
      block.empirical = kappa_n * kappa_n * type_cov[j];
      block.theory.resize(m, m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          block.theory(a, b) = kappa * kappa * config.profile.mu[j] * (std::min(s[a], s[b]) - s[a] * s[b]);
      block.max_rel_error =
          ((block.empirical - block.theory).array() / block.theory.array()).abs().maxCoeff();
      report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
      report.blocks.push_back(std::move(block));
    }

  for (int j = 0; j < d; ++j)
    for (int jp = j + 1; jp < d; ++jp)
      for (int k = 0; k < m; ++k) {
        std::vector<Vector> pair;
        pair.reserve(R);
        for (const auto& rep : bridge) pair.push_back(Vector{{rep[j][k], rep[jp][k]}});
        const Matrix c = summarize(pair).sample_cov;
        const double se = std::sqrt(c(0, 0) * c(1, 1) / static_cast<double>(R));
        const double z = se > 0.0 ? std::abs(c(0, 1)) / se : 0.0;
        report.max_cross_type_z = std::max(report.max_cross_type_z, z);
      }
  report.cross_type_ok = report.max_cross_type_z <= kMeanSeMultiple;
  report.pass = report.max_rel_error < kFluctuationTolerance && report.cross_type_ok;
  return report;
}

ErReport er_baseline(double c, const std::vector<std::int64_t>& n_list, int replicas,
                     std::uint64_t seed, int threads) {
  if (!(c > 1.0)) throw SubcriticalError("er_baseline: c must be > 1");
  ExperimentConfig config;
  config.kernel = Kernel::make(Matrix::Constant(1, 1, c));
  config.profile = TypeProfile::make(Vector::Ones(1));
  config.n_list = n_list;
  config.replicas = replicas;
  config.base_seed = seed;
  config.validate();

  ErReport report;
  report.c = c;
  report.rho = solve_rho(config.kernel, config.profile).rho[0];
  report.sigma2 = stepanov_sigma2(c);
  for (auto n : n_list) {
    const TypeProfile prof = config.profile.at_size(n);
    const double N = static_cast<double>(prof.total());
    std::vector<double> fraction(replicas);
    parallel_for(replicas, threads, [&](std::int64_t r) {
      const GraphSample s = sample_sbm(config.kernel, prof, replica_seed(seed, n, r));
      fraction[r] = static_cast<double>(s.components.front().size) / N;
    });
    ErLevel level;
    level.n = n;
    for (double x : fraction) level.mean_fraction += x;
    level.mean_fraction /= replicas;
    double ss = 0.0;
    for (double x : fraction) ss += (x - level.mean_fraction) * (x - level.mean_fraction);
    const double var_fraction = ss / (replicas - 1);
    level.se_fraction = std::sqrt(var_fraction / replicas);
    level.variance = N * var_fraction;
    level.variance_rel_error = std::abs(level.variance - report.sigma2) / report.sigma2;
    report.levels.push_back(level);
  }
  const ErLevel& last = report.levels.back();
  report.mean_ok = std::abs(last.mean_fraction - report.rho) <= kMeanSeMultiple * last.se_fraction;
  report.variance_ok = last.variance_rel_error <= kErVarianceTolerance;
  report.pass = report.mean_ok && report.variance_ok;
  return report;
}

}  // namespace sbmclt
