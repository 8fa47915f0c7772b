#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "sbmclt/model.hpp"
#include "sbmclt/spectral.hpp"

namespace sbmclt {

/// Per-type vertex counts of one connected component.
struct ComponentTally {
  std::vector<std::int64_t> counts;
  std::int64_t size = 0;

  friend bool operator==(const ComponentTally&, const ComponentTally&) = default;
};

/// One sampled block-model graph reduced to its component tallies, sorted by
/// decreasing size (ties: lexicographically larger counts first).
struct GraphSample {
  TypeProfile profile;
  std::vector<ComponentTally> components;
  std::uint64_t seed = 0;
  std::int64_t num_edges = 0;

  friend bool operator==(const GraphSample& a, const GraphSample& b) {
    return a.profile.block_sizes == b.profile.block_sizes && a.components == b.components &&
           a.seed == b.seed && a.num_edges == b.num_edges;
  }
};

/// Global vertex ids: block j occupies [offset_j, offset_j + n_j).
using Edge = std::pair<std::int64_t, std::int64_t>;
using EdgeSink = std::function<void(std::int64_t, std::int64_t)>;

/// p = 1 - exp(-kappa / n), evaluated as -expm1(-kappa / n).
double edge_prob(double kappa, std::int64_t n);

/// K^(n) = K + n^{-1/2} Lambda. Throws NegativeRateError if an entry is < 0.
Matrix realize_kernel_n(const Kernel& kernel, std::int64_t n);

/// Samples SBM_N(n_1..n_d, P) with p_ij = 1 - exp(-K^(N)_ij / N) by geometric
/// skipping per block pair, reducing to component tallies with union-find.
/// profile must be realized. When edge_sink is set it receives every edge.
GraphSample sample_sbm(const Kernel& kernel, const TypeProfile& profile, std::uint64_t seed,
                       const EdgeSink& edge_sink = {});

/// Same as sample_sbm but with an explicit rate matrix (used as K^(N)).
GraphSample sample_sbm_rates(const Matrix& rates, const TypeProfile& profile, std::uint64_t seed,
                             const EdgeSink& edge_sink = {});

/// Component tallies of the graph on the profile's vertices with the given
/// edges. Used for injected micro-instances and edge-stream replays.
std::vector<ComponentTally> tally_components(const TypeProfile& profile,
                                             const std::vector<Edge>& edges);

/// Reads "u v" lines (blank lines and '#' comments skipped).
std::vector<Edge> read_edge_stream(std::istream& in);

/// sqrt(N) (N^{-1} K C(1) - K M rho) for KWeighted, sqrt(N) (N^{-1} C(1) - M rho)
/// for Raw, where C(1) is the largest component's tally.
Vector giant_statistic(const GraphSample& sample, const Kernel& kernel, const Vector& rho,
                       Frame frame);

/// Convenience overload that solves for rho; throws SubcriticalError.
Vector giant_statistic(const GraphSample& sample, const Kernel& kernel, Frame frame);

}  // namespace sbmclt
