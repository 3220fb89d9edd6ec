#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "corrx/optim.hpp"

namespace corrx::garch {

/// Asymmetric GARCH(1,1) parameters.
struct GjrParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// alpha + beta + gamma/2; < 1 is the stationarity region.
  double persistence() const { return alpha + beta + 0.5 * gamma; }
  /// omega / (1 - persistence), defined only when stationary.
  double unconditional_variance() const;
  /// Throws DomainError unless omega > 0, alpha/beta/gamma >= 0 and the
  /// process is stationary.
  void validate() const;
};

struct GarchFit {
  std::string asset;
  GjrParams params;
  Eigen::Vector4d se_robust = Eigen::Vector4d::Zero();  // omega alpha beta gamma
  Eigen::VectorXd variance_path;  // conditional variances h^2_t
  Eigen::VectorXd residuals;      // r_t / h_t
  double loglik = 0.0;
  double h0 = 0.0;                // initial variance actually used
  bool converged = false;
  int iterations = 0;
  bool variance_floor_active = false;  // 1e-12 guard hit at the optimum
};

struct GjrFitOptions {
  int min_obs = 50;
  bool demean = false;               // paper treats returns as zero-mean
  std::optional<double> h0;          // default: sample variance of the input
  optim::Options optimizer = {};
};

/// Conditional-variance recursion
///   h^2_t = omega + alpha r^2_{t-1} + beta h^2_{t-1}
///           + gamma r^2_{t-1} 1{r_{t-1} < 0},   h^2_1 = h0.
Eigen::VectorXd gjr_filter(const GjrParams& params,
                           const Eigen::VectorXd& returns, double h0);

/// Gaussian quasi log-likelihood -1/2 sum[log 2pi + log h^2_t + r^2_t/h^2_t].
double gjr_loglik(const GjrParams& params, const Eigen::VectorXd& returns,
                  double h0);

/// Per-observation log-likelihood contributions (sums to gjr_loglik).
/// Evaluates without the parameter-validity check so that finite-difference
/// probes just outside the boundary remain well-defined.
Eigen::VectorXd gjr_loglik_terms(const GjrParams& params,
                                 const Eigen::VectorXd& returns, double h0);

/// Quasi-maximum-likelihood fit with reparameterized BFGS, three
/// deterministic starts, and robust (sandwich) standard errors.
GarchFit fit_gjr(const Eigen::VectorXd& returns,
                 const GjrFitOptions& options = {});

/// Standardized residuals r_t / sqrt(h^2_t).
Eigen::VectorXd degarch(const Eigen::VectorXd& returns, const GarchFit& fit);

}  // namespace corrx::garch
