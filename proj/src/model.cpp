#include "sbmclt/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sbmclt/errors.hpp"

namespace sbmclt {

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }

bool symmetric(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) return false;
    }
  return true;
}

}  // namespace

bool is_irreducible(const Matrix& A) {
  const auto d = A.rows();
  for (Eigen::Index start = 0; start < d; ++start) {
    std::vector<char> seen(d, 0);
    std::vector<Eigen::Index> stack{start};
    seen[start] = 1;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < d; ++v)
        if (A(u, v) > 0.0 && !seen[v]) {
          seen[v] = 1;
          ++reached;
          stack.push_back(v);
        }
    }
    if (reached != d) return false;
  }
  return true;
}

Kernel Kernel::make(Matrix K, Matrix Lambda) {
  if (K.rows() == 0 || K.rows() != K.cols())
    throw ModelError("kernel: K must be a non-empty square matrix");
  const auto d = K.rows();
  if (Lambda.size() == 0) Lambda = Matrix::Zero(d, d);
  if (Lambda.rows() != d || Lambda.cols() != d)
    throw DimensionError("kernel: Lambda must be " + std::to_string(d) + "x" + std::to_string(d));
  if (!finite(K) || !finite(Lambda)) throw ModelError("kernel: entries must be finite");
  if ((K.array() < 0.0).any()) throw ModelError("kernel: K must be nonnegative");
  if (!symmetric(K)) throw ModelError("kernel: K must be symmetric");
  if (!symmetric(Lambda)) throw ModelError("kernel: Lambda must be symmetric");
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(K(i, i) > 0.0))
      throw ModelError("kernel: diagonal entry K[" + std::to_string(i) + "][" + std::to_string(i) +
                       "] must be > 0");
  if (!is_irreducible(K)) throw IrreducibilityError("kernel: K must be irreducible");
  return Kernel{std::move(K), std::move(Lambda)};
}

std::int64_t TypeProfile::total() const {
  std::int64_t sum = 0;
  for (auto s : block_sizes) sum += s;
  return sum;
}

TypeProfile TypeProfile::at_size(std::int64_t size) const {
  if (size < 1) throw DomainError("profile: n must be >= 1");
  TypeProfile out = *this;
  out.n = size;
  out.block_sizes.resize(mu.size());
  const double root = std::sqrt(static_cast<double>(size));
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double target = mu[j] * static_cast<double>(size) + beta[j] * root;
    const auto rounded = static_cast<std::int64_t>(std::floor(target + 0.5));
    out.block_sizes[j] = std::max<std::int64_t>(rounded, 1);
  }
  return out;
}

TypeProfile TypeProfile::make(Vector mu, Vector beta) {
  if (mu.size() == 0) throw ModelError("profile: mu must be non-empty");
  if (beta.size() == 0) beta = Vector::Zero(mu.size());
  if (beta.size() != mu.size()) throw DimensionError("profile: beta and mu lengths differ");
  if (!mu.allFinite() || !beta.allFinite()) throw ModelError("profile: entries must be finite");
  if ((mu.array() <= 0.0).any()) throw ModelError("profile: mu entries must be > 0");
  if (std::abs(mu.sum() - 1.0) > 1e-12) throw ModelError("profile: mu must sum to 1");
  TypeProfile p;
  p.mu = std::move(mu);
  p.beta = std::move(beta);
  return p;
}

void check_compatible(const Kernel& kernel, const TypeProfile& profile) {
  if (kernel.dim() != profile.dim())
    throw DimensionError("kernel has d=" + std::to_string(kernel.dim()) + " but profile has d=" +
                         std::to_string(profile.dim()));
}

}  // namespace sbmclt
