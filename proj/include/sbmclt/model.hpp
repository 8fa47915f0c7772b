#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sbmclt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Connectivity law of a d-type block model: the limiting rate matrix K and
/// its n^{-1/2} perturbation Lambda. Construct through make(), which enforces
/// symmetry, nonnegativity, positive diagonal and irreducibility of K.
struct Kernel {
  Matrix rates;
  Matrix perturbation;

  int dim() const { return static_cast<int>(rates.rows()); }

  /// Lambda defaults to zeros when empty.
  static Kernel make(Matrix K, Matrix Lambda = Matrix());
};

/// Vertex-type law. An asymptotic profile (n == 0) carries only mu and beta;
/// at_size(n) realizes block sizes for a concrete graph.
struct TypeProfile {
  Vector mu;
  Vector beta;
  std::int64_t n = 0;
  std::vector<std::int64_t> block_sizes;

  int dim() const { return static_cast<int>(mu.size()); }

  /// Realized vertex count N = sum of block sizes; zero for asymptotic profiles.
  std::int64_t total() const;

  bool realized() const { return !block_sizes.empty(); }

  /// block_sizes[j] = round_half_up(mu_j n + beta_j sqrt(n)), clamped to >= 1.
  TypeProfile at_size(std::int64_t n) const;

  /// beta defaults to zeros when empty.
  static TypeProfile make(Vector mu, Vector beta = Vector());
};

/// Support digraph of A (entries > 0) is strongly connected.
bool is_irreducible(const Matrix& A);

/// Throws DimensionError unless the kernel and profile agree on d.
void check_compatible(const Kernel& kernel, const TypeProfile& profile);

}  // namespace sbmclt
