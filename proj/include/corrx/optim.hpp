#pragma once

#include <Eigen/Core>
#include <functional>

namespace corrx::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Per-observation log-likelihood contributions at a parameter vector.
using PerObsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct Options {
  int max_iterations = 400;
  /// Base gradient tolerance (inf-norm), scaled internally by the objective
  /// magnitude to stay above finite-difference noise.
  double gradient_tol = 1e-6;
  double step_tol = 1e-11;
  double f_tol = 1e-12;
  double fd_step = 1e-6;
};

struct Result {
  Eigen::VectorXd x;
  double fx = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

/// Central-difference gradient, O(h^2), step h_i = rel_step * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double rel_step = 1e-6);

/// Five-point stencil gradient, O(h^4); the independent cross-check used by
/// the gradient-agreement tests.
Eigen::VectorXd fd_gradient_refined(const Objective& f,
                                    const Eigen::VectorXd& x,
                                    double rel_step = 1e-4);

/// Central-difference Hessian (symmetric by construction).
Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                           double rel_step = 1e-3);

/// BFGS with backtracking Armijo line search and numerical gradients.
/// Fully deterministic for identical inputs. Throws DomainError if the
/// objective is not finite at x0.
Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                     const Options& opts = {});

/// White/QMLE sandwich standard errors A^{-1} B A^{-1} where A is the
/// numerical Hessian of the negative total log-likelihood and B the outer
/// product of per-observation scores. A tolerance-based pseudo-inverse keeps
/// boundary parameters from blowing up the whole covariance.
Eigen::VectorXd sandwich_se(const PerObsFn& per_obs,
                            const Eigen::VectorXd& theta);

}  // namespace corrx::optim
