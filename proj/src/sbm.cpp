#include "sbmclt/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "sbmclt/errors.hpp"
#include "sbmclt/rng.hpp"

namespace sbmclt {

namespace {

/// Union-find over vertex ids with per-root type tallies.
class TallyForest {
 public:
  TallyForest(const std::vector<std::int64_t>& block_sizes)
      : d_(block_sizes.size()), parent_(), size_(), tally_() {
    std::int64_t n = 0;
    for (auto s : block_sizes) n += s;
    if (n >= std::numeric_limits<std::uint32_t>::max())
      throw DomainError("graph too large: N must be < 2^32");
    parent_.resize(n);
    size_.assign(n, 1);
    tally_.assign(n * d_, 0);
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < d_; ++j)
      for (std::int64_t k = 0; k < block_sizes[j]; ++k, ++v) {
        parent_[v] = v;
        tally_[static_cast<std::size_t>(v) * d_ + j] = 1;
      }
  }

  std::uint32_t find(std::uint32_t v) {
    std::uint32_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
      const std::uint32_t next = parent_[v];
      parent_[v] = root;
      v = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    for (std::size_t k = 0; k < d_; ++k) tally_[a * d_ + k] += tally_[b * d_ + k];
  }

  std::vector<ComponentTally> components() {
    std::vector<ComponentTally> out;
    for (std::uint32_t v = 0; v < parent_.size(); ++v) {
      if (parent_[v] != v) continue;
      ComponentTally c;
      c.counts.resize(d_);
      for (std::size_t k = 0; k < d_; ++k) c.counts[k] = tally_[static_cast<std::size_t>(v) * d_ + k];
      c.size = size_[v];
      out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const ComponentTally& x, const ComponentTally& y) {
      if (x.size != y.size) return x.size > y.size;
      return x.counts > y.counts;
    });
    return out;
  }

 private:
  std::size_t d_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::vector<std::uint32_t> tally_;
};

std::vector<std::int64_t> offsets_of(const std::vector<std::int64_t>& block_sizes) {
  std::vector<std::int64_t> off(block_sizes.size() + 1, 0);
  for (std::size_t j = 0; j < block_sizes.size(); ++j) off[j + 1] = off[j] + block_sizes[j];
  return off;
}

// With p = 1 - exp(-rate), the number of failures before a success is
// floor(E / rate) for E ~ Exp(1). Capped so the cast cannot overflow.
std::int64_t geometric_skip(Rng& rng, double inv_rate, double cap) {
  const double skip = std::floor(rng.exponential() * inv_rate);
  return static_cast<std::int64_t>(std::min(skip, cap));
}

}  // namespace

double edge_prob(double kappa, std::int64_t n) {
  return -std::expm1(-kappa / static_cast<double>(n));
}

Matrix realize_kernel_n(const Kernel& kernel, std::int64_t n) {
  if (n < 1) throw DomainError("realize_kernel_n: n must be >= 1");
  Matrix out = kernel.rates + kernel.perturbation / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (out(i, j) < 0.0)
        throw NegativeRateError("K^(n)[" + std::to_string(i) + "][" + std::to_string(j) + "] = " +
                                std::to_string(out(i, j)) + " < 0 at n=" + std::to_string(n));
  return out;
}

GraphSample sample_sbm(const Kernel& kernel, const TypeProfile& profile, std::uint64_t seed,
                       const EdgeSink& edge_sink) {
  check_compatible(kernel, profile);
  if (!profile.realized()) throw DomainError("sample_sbm: profile has no block sizes");
  return sample_sbm_rates(realize_kernel_n(kernel, profile.total()), profile, seed, edge_sink);
}

GraphSample sample_sbm_rates(const Matrix& rates, const TypeProfile& profile, std::uint64_t seed,
                             const EdgeSink& edge_sink) {
  const auto d = profile.dim();
  if (rates.rows() != d || rates.cols() != d) throw DimensionError("sample_sbm: rate matrix size");
  if (!profile.realized()) throw DomainError("sample_sbm: profile has no block sizes");
  const std::int64_t total = profile.total();
  const auto& sizes = profile.block_sizes;
  const auto off = offsets_of(sizes);
  const double n_real = static_cast<double>(total);

  TallyForest forest(sizes);
  std::int64_t edges = 0;
  auto add_edge = [&](std::int64_t u, std::int64_t v) {
    ++edges;
    if (edge_sink) edge_sink(u, v);
    forest.unite(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  };

  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double kappa = rates(i, j);
      if (!(kappa > 0.0)) continue;
      Rng rng(derive_seed({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
      const double inv_rate = n_real / kappa;
      if (i == j) {
        // Unordered pairs (w, v) with w < v inside block i.
        const std::int64_t n = sizes[i];
        const double cap = static_cast<double>(n) * static_cast<double>(n);
        std::int64_t v = 1;
        std::int64_t w = -1;
        while (v < n) {
          w += 1 + geometric_skip(rng, inv_rate, cap);
          while (w >= v && v < n) {
            w -= v;
            ++v;
          }
          if (v < n) add_edge(off[i] + w, off[i] + v);
        }
      } else {
        const std::int64_t ni = sizes[i];
        const std::int64_t nj = sizes[j];
        const std::int64_t pairs = ni * nj;
        const double cap = static_cast<double>(pairs);
        std::int64_t k = -1;
        while (true) {
          k += 1 + geometric_skip(rng, inv_rate, cap);
          if (k >= pairs) break;
          add_edge(off[i] + k / nj, off[j] + k % nj);
        }
      }
    }
  }

  GraphSample out;
  out.profile = profile;
  out.components = forest.components();
  out.seed = seed;
  out.num_edges = edges;
  return out;
}

std::vector<ComponentTally> tally_components(const TypeProfile& profile,
                                             const std::vector<Edge>& edges) {
  if (!profile.realized()) throw DomainError("tally_components: profile has no block sizes");
  const std::int64_t total = profile.total();
  TallyForest forest(profile.block_sizes);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= total || v >= total)
      throw DomainError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") out of range");
    forest.unite(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  return forest.components();
}

std::vector<Edge> read_edge_stream(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::int64_t u = 0;
    std::int64_t v = 0;
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw DomainError("edge stream line " + std::to_string(lineno) + ": expected 'u v'");
    edges.emplace_back(u, v);
  }
  return edges;
}

Vector giant_statistic(const GraphSample& sample, const Kernel& kernel, const Vector& rho,
                       Frame frame) {
  const auto& profile = sample.profile;
  check_compatible(kernel, profile);
  if (!(rho.array() > 0.0).all()) throw SubcriticalError("giant_statistic: model is subcritical");
  if (sample.components.empty()) throw DomainError("giant_statistic: empty sample");
  const double n = static_cast<double>(profile.total());
  const auto d = profile.dim();
  Vector fraction(d);
  for (int k = 0; k < d; ++k)
    fraction[k] = static_cast<double>(sample.components.front().counts[k]) / n;
  const Vector raw = std::sqrt(n) * (fraction - profile.mu.cwiseProduct(rho));
  return frame == Frame::Raw ? raw : Vector(kernel.rates * raw);
}

Vector giant_statistic(const GraphSample& sample, const Kernel& kernel, Frame frame) {
  const RhoSolution sol = solve_rho(kernel, sample.profile);
  if (!sol.supercritical) throw SubcriticalError("giant_statistic: model is subcritical");
  return giant_statistic(sample, kernel, sol.rho, frame);
}

}  // namespace sbmclt
