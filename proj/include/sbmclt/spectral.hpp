#pragma once

#include <functional>
#include <string_view>

#include "sbmclt/model.hpp"

namespace sbmclt {

/// Which random vector a limit law describes.
///   KWeighted: sqrt(n) (n^{-1} K C_n(1) - K M rho)
///   Raw:       sqrt(n) (n^{-1} C_n(1) - M rho)
enum class Frame { KWeighted, Raw };

std::string_view to_string(Frame frame);
/// Accepts "k_weighted" / "raw" (case-insensitive); throws DomainError otherwise.
Frame parse_frame(std::string_view text);

struct PerronPair {
  double lambda1 = 0.0;
  Vector vec;
  int iterations = 0;
};

struct RhoSolution {
  Vector rho;
  int iterations = 0;
  double residual = 0.0;
  bool supercritical = false;
  double lambda1 = 0.0;
};

struct LimitLaw {
  Vector mean;
  Matrix covariance;
  Matrix J;
  Matrix D;
  Frame frame = Frame::KWeighted;
};

struct ReductionResiduals {
  double variance = 0.0;
  double mean = 0.0;
};

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr int kDefaultMaxIterations = 1'000'000;
inline constexpr double kCriticalWindow = 1e-10;

/// M = diag(mu).
Matrix type_weights(const TypeProfile& profile);

/// T_K f = K M f.
Vector apply_tk(const Kernel& kernel, const TypeProfile& profile, const Vector& f);

/// Phi_K f = 1 - exp(-K M f); f must be componentwise >= 0.
Vector apply_phik(const Kernel& kernel, const TypeProfile& profile, const Vector& f);

/// Perron-Frobenius pair of a nonnegative irreducible matrix by power
/// iteration from the all-ones vector. The eigenvector is scaled so that
/// sum_i vec_i weights_i = 1 (weights default to all ones).
PerronPair perron(const Matrix& A, const Vector& weights = Vector(),
                  int max_iterations = kDefaultMaxIterations);

/// Largest fixed point of Phi_K. The observer, when given, sees every iterate.
RhoSolution solve_rho(const Kernel& kernel, const TypeProfile& profile,
                      double tol = kDefaultTolerance, int max_iterations = kDefaultMaxIterations,
                      const std::function<void(const Vector&)>& observer = {});

/// phi_i(t) = -t_i + sum_j K_ij mu_j (1 - exp(-t_j)).
Vector phi_eval(const Kernel& kernel, const TypeProfile& profile, const Vector& t);

/// Nontrivial zero t0 = K M rho of phi. Throws SubcriticalError when rho = 0.
Vector t_zero(const Kernel& kernel, const TypeProfile& profile, double tol = kDefaultTolerance);

/// Minimal solution of phi(t) = -y a, where a is the Perron vector of KM with
/// sum_i a_i mu_i = 1. Tends to t0 as y decreases to 0.
Vector phi_level_set_min(const Kernel& kernel, const TypeProfile& profile, double y,
                         double tol = kDefaultTolerance);

/// J = K M (I - diag(rho)) - I. Throws SingularMatrixError if |det J| < 1e-14.
Matrix jacobian_j(const Kernel& kernel, const TypeProfile& profile, const Vector& rho);

/// Gaussian limit of the centered giant-component vector in the given frame.
/// Requires a supercritical model; the Raw frame also requires K invertible.
LimitLaw limit_law(const Kernel& kernel, const TypeProfile& profile, Frame frame);

/// Erdos-Renyi giant-component variance rho(1-rho) / (1 - c(1-rho))^2.
double stepanov_sigma2(double c);

/// Runs the d = 1 instance of the general limit law against the scalar
/// formulas and returns |general - scalar| for the variance and the mean.
ReductionResiduals reduce_d1_check(double c, double lambda);

}  // namespace sbmclt
