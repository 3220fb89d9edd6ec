#include "corrx/optim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "corrx/errors.hpp"

namespace corrx::optim {

namespace {

double coord_step(double xi, double rel_step) {
  return rel_step * std::max(1.0, std::abs(xi));
}

// Backtracking Armijo search along d; returns the accepted step (0 on
// failure) and updates fx to the new value on success.
double line_search(const Objective& f, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& d, double g_dot_d, double& fx) {
  const double c1 = 1e-4;
  double alpha = 1.0;
  for (int k = 0; k < 60; ++k) {
    double trial = f(x + alpha * d);
    if (std::isfinite(trial) && trial <= fx + c1 * alpha * g_dot_d) {
      fx = trial;
      return alpha;
    }
    alpha *= 0.5;
  }
  return 0.0;
}

}  // namespace

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = coord_step(x(i), rel_step);
    xp(i) = x(i) + h;
    double fp = f(xp);
    xp(i) = x(i) - h;
    double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd fd_gradient_refined(const Objective& f,
                                    const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = coord_step(x(i), rel_step);
    double f1, f2, f3, f4;
    xp(i) = x(i) - 2.0 * h;
    f1 = f(xp);
    xp(i) = x(i) - h;
    f2 = f(xp);
    xp(i) = x(i) + h;
    f3 = f(xp);
    xp(i) = x(i) + 2.0 * h;
    f4 = f(xp);
    xp(i) = x(i);
    g(i) = (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                           double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd xp = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    double hi = coord_step(x(i), rel_step);
    xp(i) = x(i) + hi;
    double fp = f(xp);
    xp(i) = x(i) - hi;
    double fm = f(xp);
    xp(i) = x(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double hj = coord_step(x(j), rel_step);
      xp(i) = x(i) + hi;
      xp(j) = x(j) + hj;
      double fpp = f(xp);
      xp(j) = x(j) - hj;
      double fpm = f(xp);
      xp(i) = x(i) - hi;
      double fmm = f(xp);
      xp(j) = x(j) + hj;
      double fmp = f(xp);
      xp(i) = x(i);
      xp(j) = x(j);
      double v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                     const Options& opts) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = x0;
  res.fx = f(res.x);
  if (!std::isfinite(res.fx))
    throw DomainError("objective not finite at the starting point");
  Eigen::VectorXd g = fd_gradient(f, res.x, opts.fd_step);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);

  // At a numerical optimum the attainable gradient norm is limited by the
  // objective's own resolution: a stall happens once the remaining descent
  // |g|^2 / (2 lambda) drops below ulp(|f|), i.e. |g| ~ sqrt(lambda eps |f|).
  // Scaling the tolerance by sqrt(|f|) tracks that floor for likelihood-sized
  // objectives while staying tight for O(1) problems.
  auto grad_tol = [&](double fx) {
    return opts.gradient_tol * 2.0 * std::sqrt(std::max(1.0, std::abs(fx)));
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (g.lpNorm<Eigen::Infinity>() < grad_tol(res.fx)) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -hinv * g;
    double gd = g.dot(d);
    if (!(gd < 0.0)) {  // curvature info went bad, reset to steepest descent
      hinv.setIdentity();
      d = -g;
      gd = g.dot(d);
    }
    double fx_prev = res.fx;
    double alpha = line_search(f, res.x, d, gd, res.fx);
    if (alpha == 0.0) {
      hinv.setIdentity();
      d = -g;
      gd = g.dot(d);
      res.fx = fx_prev;
      alpha = line_search(f, res.x, d, gd, res.fx);
      if (alpha == 0.0) break;  // no descent along the gradient either
    }
    Eigen::VectorXd x_new = res.x + alpha * d;
    Eigen::VectorXd g_new = fd_gradient(f, x_new, opts.fd_step);
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      // Standard BFGS inverse-Hessian update.
      double rho = 1.0 / sy;
      Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      hinv = (eye - rho * s * y.transpose()) * hinv *
                 (eye - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    bool tiny_step = s.lpNorm<Eigen::Infinity>() < opts.step_tol;
    bool tiny_df =
        std::abs(fx_prev - res.fx) < opts.f_tol * (1.0 + std::abs(fx_prev));
    res.x = x_new;
    g = g_new;
    if (tiny_step || tiny_df) {
      res.converged = g.lpNorm<Eigen::Infinity>() < grad_tol(res.fx);
      break;
    }
  }
  if (!res.converged && g.lpNorm<Eigen::Infinity>() < grad_tol(res.fx))
    res.converged = true;
  res.gradient = g;
  return res;
}

Eigen::VectorXd sandwich_se(const PerObsFn& per_obs,
                            const Eigen::VectorXd& theta) {
  const Eigen::Index p = theta.size();

  auto total = [&](const Eigen::VectorXd& th) { return -per_obs(th).sum(); };
  Eigen::MatrixXd a = fd_hessian(total, theta, 1e-4);

  // Per-observation scores by central differences, one parameter at a time.
  Eigen::VectorXd base = per_obs(theta);
  const Eigen::Index t_obs = base.size();
  Eigen::MatrixXd scores(t_obs, p);
  Eigen::VectorXd th = theta;
  for (Eigen::Index i = 0; i < p; ++i) {
    double h = 1e-5 + 1e-5 * std::abs(theta(i));
    th(i) = theta(i) + h;
    Eigen::VectorXd lp = per_obs(th);
    th(i) = theta(i) - h;
    Eigen::VectorXd lm = per_obs(th);
    th(i) = theta(i);
    scores.col(i) = (lp - lm) / (2.0 * h);
  }
  Eigen::MatrixXd b = scores.transpose() * scores;

  // Pseudo-inverse of A: eigenvalues below tol are treated as boundary
  // directions and zeroed instead of amplified.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd ev = es.eigenvalues();
  double emax = ev.cwiseAbs().maxCoeff();
  double tol = std::max(emax, 1.0) * 1e-10;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (std::abs(ev(i)) > tol) inv(i) = 1.0 / ev(i);
  Eigen::MatrixXd a_inv =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

  Eigen::MatrixXd cov = a_inv * b * a_inv;
  Eigen::VectorXd se(p);
  for (Eigen::Index i = 0; i < p; ++i)
    se(i) = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : 0.0;
  return se;
}

}  // namespace corrx::optim
