#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbmclt/model.hpp"
#include "sbmclt/spectral.hpp"
#include "sbmclt/stats.hpp"

namespace sbmclt {

struct ExperimentConfig {
  Kernel kernel;
  TypeProfile profile;  // asymptotic; realized per n
  std::vector<std::int64_t> n_list;
  int replicas = 1000;
  std::uint64_t base_seed = 0;
  Frame frame = Frame::KWeighted;
  double y0 = 0.0;            // walk tests; <= 0 picks ln 2 / (N a^T M rho)
  std::vector<double> grid;   // fluctuation times t
  int threads = 0;            // 0: hardware concurrency

  /// Throws DomainError unless replicas >= 100 and n_list is non-empty and ascending.
  void validate() const;
};

/// Seed of replica r at size n.
std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t n, std::int64_t replica);

/// Runs fn(0..count-1) on a pool of worker threads. fn must only write to
/// per-index storage.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

// Tolerances shared by the harnesses and the acceptance suite.
inline constexpr double kMeanSeMultiple = 4.0;
inline constexpr double kCovFrobeniusTolerance = 0.15;
inline constexpr double kSkewTolerance = 0.15;
inline constexpr double kExcessKurtosisTolerance = 0.3;
inline constexpr double kKsAlpha = 0.01;
inline constexpr double kFluctuationTolerance = 0.10;
inline constexpr double kLlnDeviation = 0.01;
inline constexpr double kLlnCoverage = 0.99;
inline constexpr double kSecondComponentLogFactor = 30.0;
/// Allowed rise of the covariance error between consecutive sizes, in
/// bootstrap standard errors of the difference.
inline constexpr double kMonotoneNoiseAllowance = 2.0;

struct CltLevel {
  std::int64_t n = 0;
  std::int64_t N = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<Vector> statistics;  // in the experiment frame
  MomentSummary summary;
  double mean_error = 0.0;       // sup-norm |mean_emp - mean_theory|
  double max_se = 0.0;
  double cov_rel_error = 0.0;    // ||cov_emp - cov_theory||_F / ||cov_theory||_F
  double cov_rel_error_se = 0.0; // bootstrap
};

struct CltReport {
  Frame frame = Frame::KWeighted;
  LimitLaw theory;
  std::vector<CltLevel> levels;
  bool mean_ok = false;
  bool cov_ok = false;
  bool monotone_ok = false;
  bool normality_ok = false;  // reported, not part of the verdict
  bool pass = false;
  /// Which reading of J^{-1} K D K^T J^{-T} fits the data at the largest n:
  /// "k_weighted" (law of K C), "raw" (law of C), "both" or "none".
  std::string frame_arbitration;
  double arbitration_error_k_weighted = 0.0;
  double arbitration_error_raw = 0.0;
};

CltReport run_clt_experiment(const ExperimentConfig& config);

struct LlnLevel {
  std::int64_t n = 0;
  std::int64_t N = 0;
  double mean_deviation = 0.0;
  double q99_deviation = 0.0;
  double coverage = 0.0;  // fraction of replicas with deviation < kLlnDeviation
  std::int64_t max_second = 0;
  double second_bound = 0.0;  // kSecondComponentLogFactor * ln N
  double giant_fraction_variance = 0.0;  // variance of #C(1) / N
  double max_giant_fraction = 0.0;
};

struct LlnReport {
  Vector target;  // M rho
  bool supercritical = false;
  std::vector<LlnLevel> levels;
  bool coverage_ok = false;
  bool shrink_ok = false;
  bool second_ok = false;
  bool pass = false;
};

LlnReport run_lln_experiment(const ExperimentConfig& config);

struct KsLine {
  std::string name;
  KsResult ks;
};

struct KsReport {
  std::vector<KsLine> tests;
  double alpha = kKsAlpha;
  bool pass = false;
};

struct WalkIdentityReport {
  std::int64_t N = 0;
  Vector v;
  double y0 = 0.0;
  KsReport walk_vs_graph;
  KsReport null_control;  // walk vs independent walk
  Vector mean_largest_walk;
  Vector mean_largest_graph;
  Vector se_difference;
  bool jump_match_ok = false;
  bool pass = false;
};

/// Uses the largest n in config.n_list.
WalkIdentityReport run_walk_identity_test(const ExperimentConfig& config);

struct FluctuationBlock {
  int i = 0;
  int j = 0;
  Matrix empirical;
  Matrix theory;
  double max_rel_error = 0.0;
};

struct FluctuationReport {
  std::int64_t N = 0;
  std::vector<double> grid;
  std::vector<FluctuationBlock> blocks;
  double max_rel_error = 0.0;
  double max_cross_type_z = 0.0;  // |cov| / SE between distinct types, same t
  bool cross_type_ok = true;
  bool pass = false;
};

/// Uses the largest n in config.n_list and config.grid (t values).
FluctuationReport run_fluctuation_check(const ExperimentConfig& config);

struct ErLevel {
  std::int64_t n = 0;
  double mean_fraction = 0.0;
  double se_fraction = 0.0;
  double variance = 0.0;  // of sqrt(n)(n^{-1} #C(1) - rho)
  double variance_rel_error = 0.0;
};

struct ErReport {
  double c = 0.0;
  double rho = 0.0;
  double sigma2 = 0.0;
  std::vector<ErLevel> levels;
  bool mean_ok = false;
  bool variance_ok = false;
  bool pass = false;
};

inline constexpr double kErVarianceTolerance = 0.10;

ErReport er_baseline(double c, const std::vector<std::int64_t>& n_list, int replicas,
                     std::uint64_t seed, int threads = 0);

}  // namespace sbmclt
