#include "sbmclt/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include "sbmclt/errors.hpp"

namespace sbmclt {

namespace {

void require_dim(const Kernel& kernel, const TypeProfile& profile, const Vector& f,
                 const char* what) {
  check_compatible(kernel, profile);
  if (f.size() != kernel.dim())
    throw DimensionError(std::string(what) + ": expected vector of length " +
                         std::to_string(kernel.dim()) + ", got " + std::to_string(f.size()));
}

Matrix km(const Kernel& kernel, const TypeProfile& profile) {
  return kernel.rates * profile.mu.asDiagonal();
}

std::string fmt2(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x;
  return os.str();
}

Matrix solve_lu(const Matrix& A, const Matrix& B, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(A);
  if (std::abs(lu.determinant()) < 1e-14)
    throw SingularMatrixError(std::string(what) + " is singular (|det| < 1e-14)");
  return lu.solve(B);
}

}  // namespace

std::string_view to_string(Frame frame) {
  return frame == Frame::KWeighted ? "k_weighted" : "raw";
}

Frame parse_frame(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "k_weighted" || lower == "k-weighted" || lower == "kweighted") return Frame::KWeighted;
  if (lower == "raw") return Frame::Raw;
  throw DomainError("unknown frame '" + std::string(text) + "' (expected k_weighted or raw)");
}

Matrix type_weights(const TypeProfile& profile) { return profile.mu.asDiagonal(); }

Vector apply_tk(const Kernel& kernel, const TypeProfile& profile, const Vector& f) {
  require_dim(kernel, profile, f, "apply_tk");
  return kernel.rates * profile.mu.cwiseProduct(f);
}

Vector apply_phik(const Kernel& kernel, const TypeProfile& profile, const Vector& f) {
  require_dim(kernel, profile, f, "apply_phik");
  if ((f.array() < 0.0).any()) throw DomainError("apply_phik: input must be componentwise >= 0");
  Vector tk = kernel.rates * profile.mu.cwiseProduct(f);
  return tk.unaryExpr([](double x) { return -std::expm1(-x); });
}

PerronPair perron(const Matrix& A, const Vector& weights, int max_iterations) {
  if (A.rows() == 0 || A.rows() != A.cols()) throw DimensionError("perron: matrix must be square");
  const auto d = A.rows();
  if (weights.size() != 0 && weights.size() != d)
    throw DimensionError("perron: weights length mismatch");
  if ((A.array() < 0.0).any()) throw DomainError("perron: matrix must be nonnegative");
  if (!is_irreducible(A)) throw IrreducibilityError("perron: matrix is reducible");

  // A positive diagonal makes an irreducible matrix primitive; otherwise
  // iterate on A + I, which has the same Perron vector.
  const double shift = (A.diagonal().array() > 0.0).all() ? 0.0 : 1.0;
  const double scale = std::max(A.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);

  Vector x = Vector::Ones(d);
  PerronPair out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector ax = A * x;
    const Vector y = ax + shift * x;
    const Vector ratio = y.cwiseQuotient(x);
    // Collatz-Wielandt bracket: min ratio <= lambda1 + shift <= max ratio.
    const double lambda = 0.5 * (ratio.minCoeff() + ratio.maxCoeff()) - shift;
    const double residual = (ax - lambda * x).cwiseAbs().maxCoeff();
    if (residual <= 1e-12 * scale) {
      out.lambda1 = lambda;
      out.vec = x;
      out.iterations = it;
      break;
    }
    x = y / y.maxCoeff();
    if (it == max_iterations)
      throw ConvergenceError("perron: no convergence after " + std::to_string(max_iterations) +
                             " iterations");
  }
  const double norm = weights.size() == 0 ? out.vec.sum() : out.vec.dot(weights);
  out.vec /= norm;
  return out;
}

RhoSolution solve_rho(const Kernel& kernel, const TypeProfile& profile, double tol,
                      int max_iterations, const std::function<void(const Vector&)>& observer) {
  check_compatible(kernel, profile);
  if (!(tol > 0.0)) throw DomainError("solve_rho: tol must be > 0");
  const Matrix a = km(kernel, profile);
  const double lambda1 = perron(a).lambda1;
  if (std::abs(lambda1 - 1.0) <= kCriticalWindow)
    throw NearCriticalWarning("solve_rho: lambda1 = " + std::to_string(lambda1) +
                              " is within 1e-10 of criticality");

  RhoSolution sol;
  sol.lambda1 = lambda1;
  const auto d = kernel.dim();
  if (lambda1 < 1.0) {
    sol.rho = Vector::Zero(d);
    return sol;
  }

  Vector f = Vector::Ones(d);
  if (observer) observer(f);
  for (int it = 1;; ++it) {
    Vector next = apply_phik(kernel, profile, f);
    const double step = (next - f).cwiseAbs().maxCoeff();
    f = std::move(next);
    if (observer) observer(f);
    if (step < tol) {
      sol.iterations = it;
      break;
    }
    if (it >= max_iterations)
      throw ConvergenceError("solve_rho: iteration budget of " + std::to_string(max_iterations) +
                             " exhausted (near-critical kernel?)");
  }
  sol.rho = f;
  sol.residual = (apply_phik(kernel, profile, f) - f).cwiseAbs().maxCoeff();
  sol.supercritical = true;
  return sol;
}

Vector phi_eval(const Kernel& kernel, const TypeProfile& profile, const Vector& t) {
  require_dim(kernel, profile, t, "phi_eval");
  const Vector s = t.unaryExpr([](double x) { return -std::expm1(-x); });
  return -t + kernel.rates * profile.mu.cwiseProduct(s);
}

Vector t_zero(const Kernel& kernel, const TypeProfile& profile, double tol) {
  const RhoSolution sol = solve_rho(kernel, profile, tol);
  if (!sol.supercritical)
    throw SubcriticalError("subcritical: lambda1=" + fmt2(sol.lambda1) + " ≤ 1");
  return apply_tk(kernel, profile, sol.rho);
}

Vector phi_level_set_min(const Kernel& kernel, const TypeProfile& profile, double y, double tol) {
  check_compatible(kernel, profile);
  if (!(y > 0.0)) throw DomainError("phi_level_set_min: y must be > 0");
  const Vector a = perron(km(kernel, profile), profile.mu).vec;
  // phi(t) = -y a  <=>  t = y a + K M (1 - e^{-t}); iterating from t = y a is
  // nondecreasing and stops at the coordinatewise-minimal solution.
  Vector t = y * a;
  for (int it = 0; it < kDefaultMaxIterations; ++it) {
    const Vector s = t.unaryExpr([](double x) { return -std::expm1(-x); });
    Vector next = y * a + kernel.rates * profile.mu.cwiseProduct(s);
    const double step = (next - t).cwiseAbs().maxCoeff();
    t = std::move(next);
    if (step < tol) return t;
  }
  throw ConvergenceError("phi_level_set_min: no convergence");
}

Matrix jacobian_j(const Kernel& kernel, const TypeProfile& profile, const Vector& rho) {
  require_dim(kernel, profile, rho, "jacobian_j");
  const auto d = kernel.dim();
  const Vector survive = Vector::Ones(d) - rho;
  Matrix J = km(kernel, profile) * survive.asDiagonal();
  J -= Matrix::Identity(d, d);
  if (std::abs(J.partialPivLu().determinant()) < 1e-14)
    throw SingularMatrixError("jacobian_j: J is singular (critical kernel?)");
  return J;
}

LimitLaw limit_law(const Kernel& kernel, const TypeProfile& profile, Frame frame) {
  const RhoSolution sol = solve_rho(kernel, profile);
  if (!sol.supercritical)
    throw SubcriticalError("subcritical: lambda1=" + fmt2(sol.lambda1) + " ≤ 1");
  const auto d = kernel.dim();
  const Vector& rho = sol.rho;
  const Matrix& K = kernel.rates;
  const Matrix& L = kernel.perturbation;
  const Matrix M = type_weights(profile);

  // Block sizes are measured against N = sum n_j, so only the part of beta
  // orthogonal to mu shifts the type proportions.
  const Vector beta = profile.beta - profile.mu * profile.beta.sum();

  LimitLaw law;
  law.frame = frame;
  law.J = jacobian_j(kernel, profile, rho);
  law.D = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) law.D(j, j) = profile.mu[j] * rho[j] * (1.0 - rho[j]);

  const Vector shift = (K * beta.asDiagonal() + L * M) * rho;
  law.mean = -solve_lu(law.J, shift, "J") - L * M * rho;
  const Matrix gain = solve_lu(law.J, K, "J");  // J^{-1} K
  law.covariance = gain * law.D * gain.transpose();

  if (frame == Frame::Raw) {
    law.mean = solve_lu(K, law.mean, "K");
    const Matrix kinv_cov = solve_lu(K, law.covariance, "K");
    law.covariance = solve_lu(K, kinv_cov.transpose(), "K");
  }
  law.covariance = (0.5 * (law.covariance + law.covariance.transpose())).eval();
  return law;
}

double stepanov_sigma2(double c) {
  if (!(c > 1.0)) throw SubcriticalError("subcritical: lambda1=" + fmt2(c) + " ≤ 1");
  const Kernel kernel = Kernel::make(Matrix::Constant(1, 1, c));
  const TypeProfile profile = TypeProfile::make(Vector::Ones(1));
  const double rho = solve_rho(kernel, profile).rho[0];
  const double denom = 1.0 - c * (1.0 - rho);
  return rho * (1.0 - rho) / (denom * denom);
}

ReductionResiduals reduce_d1_check(double c, double lambda) {
  if (!(c > 1.0)) throw SubcriticalError("subcritical: lambda1=" + fmt2(c) + " ≤ 1");
  const Kernel kernel =
      Kernel::make(Matrix::Constant(1, 1, c), Matrix::Constant(1, 1, lambda));
  const TypeProfile profile = TypeProfile::make(Vector::Ones(1), Vector::Zero(1));
  const LimitLaw law = limit_law(kernel, profile, Frame::Raw);
  const double rho = solve_rho(kernel, profile).rho[0];
  const double scalar_mean = lambda * rho * (1.0 - rho) / (1.0 - c * (1.0 - rho));
  return {std::abs(law.covariance(0, 0) - stepanov_sigma2(c)), std::abs(law.mean[0] - scalar_mean)};
}

}  // namespace sbmclt
