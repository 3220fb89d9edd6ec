#include "corrx/garch.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "corrx/errors.hpp"
#include "corrx/log.hpp"
#include "corrx/stats.hpp"

namespace corrx::garch {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kVarianceFloor = 1e-12;

/// Natural -> unconstrained: omega = exp(u0); (alpha, beta, gamma/2) live on
/// the open simplex {a,b,g >= 0, a+b+g < 1} via a logistic map.
Eigen::VectorXd to_unconstrained(const GjrParams& p) {
  const double a = std::max(p.alpha, 1e-8);
  const double b = std::max(p.beta, 1e-8);
  const double g = std::max(0.5 * p.gamma, 1e-8);
  const double rest = 1.0 - (a + b + g);
  Eigen::VectorXd u(4);
  u[0] = std::log(p.omega);
  u[1] = std::log(a / rest);
  u[2] = std::log(b / rest);
  u[3] = std::log(g / rest);
  return u;
}

GjrParams to_natural(const Eigen::VectorXd& u) {
  GjrParams p;
  p.omega = std::exp(std::clamp(u[0], -60.0, 60.0));
  const double m = std::max({0.0, u[1], u[2], u[3]});
  const double e0 = std::exp(-m);
  const double e1 = std::exp(std::min(u[1] - m, 50.0));
  const double e2 = std::exp(std::min(u[2] - m, 50.0));
  const double e3 = std::exp(std::min(u[3] - m, 50.0));
  const double denom = e0 + e1 + e2 + e3;
  p.alpha = e1 / denom;
  p.beta = e2 / denom;
  p.gamma = 2.0 * e3 / denom;
  return p;
}

void filter_into(const GjrParams& p, const Eigen::VectorXd& r, double h0,
                 Eigen::VectorXd& h2) {
  const Eigen::Index T = r.size();
  h2.resize(T);
  double prev_h2 = h0;
  double prev_r = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t == 0) {
      h2[t] = h0;
    } else {
      const double r2 = prev_r * prev_r;
      h2[t] = p.omega + p.alpha * r2 + p.beta * prev_h2 +
              (prev_r < 0.0 ? p.gamma * r2 : 0.0);
    }
    prev_h2 = h2[t];
    prev_r = r[t];
  }
}

}  // namespace

double GjrParams::unconditional_variance() const {
  const double s = persistence();
  if (s >= 1.0) throw DomainError("unconditional variance undefined: "
                                  "persistence >= 1");
  return omega / (1.0 - s);
}

void GjrParams::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("gjr params: omega must be strictly positive");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw DomainError("gjr params: alpha, beta, gamma must be non-negative");
  if (!(persistence() < 1.0))
    throw DomainError("gjr params: alpha + beta + gamma/2 must be below 1");
}

Eigen::VectorXd gjr_filter(const GjrParams& params,
                           const Eigen::VectorXd& returns, double h0) {
  params.validate();
  if (!(h0 > 0.0) || !std::isfinite(h0))
    throw DomainError("gjr filter: initial variance must be positive");
  if (!returns.allFinite())
    throw DomainError("gjr filter: returns must be finite");
  Eigen::VectorXd h2;
  filter_into(params, returns, h0, h2);
  return h2;
}

Eigen::VectorXd gjr_loglik_terms(const GjrParams& params,
                                 const Eigen::VectorXd& returns, double h0) {
  Eigen::VectorXd h2;
  filter_into(params, returns, h0, h2);
  Eigen::VectorXd terms(returns.size());
  for (Eigen::Index t = 0; t < returns.size(); ++t) {
    const double v = std::max(h2[t], kVarianceFloor);
    terms[t] = -0.5 * (kLog2Pi + std::log(v) + returns[t] * returns[t] / v);
  }
  return terms;
}

double gjr_loglik(const GjrParams& params, const Eigen::VectorXd& returns,
                  double h0) {
  params.validate();
  if (!(h0 > 0.0) || !std::isfinite(h0))
    throw DomainError("gjr loglik: initial variance must be positive");
  if (!returns.allFinite())
    throw DomainError("gjr loglik: returns must be finite");
  return gjr_loglik_terms(params, returns, h0).sum();
}

GarchFit fit_gjr(const Eigen::VectorXd& returns, const GjrFitOptions& options) {
  if (returns.size() < options.min_obs)
    throw DomainError("gjr fit: need at least " +
                      std::to_string(options.min_obs) + " observations, got " +
                      std::to_string(returns.size()));
  if (!returns.allFinite())
    throw DomainError("gjr fit: returns must be finite");

  Eigen::VectorXd r = returns;
  if (options.demean) r.array() -= r.mean();

  const double sample_var =
      variance(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  // Relative guard: a constant series can carry rounding dust instead of an
  // exact zero variance.
  const double mean_sq = r.squaredNorm() / static_cast<double>(r.size());
  if (!(sample_var > 1e-14 * std::max(mean_sq, 1e-300)))
    throw DomainError("gjr fit: input series has zero variance");
  const double h0 = options.h0.value_or(sample_var);

  Eigen::VectorXd work;
  auto negloglik_u = [&](const Eigen::VectorXd& u) {
    const GjrParams p = to_natural(u);
    filter_into(p, r, h0, work);
    double acc = 0.0;
    for (Eigen::Index t = 0; t < r.size(); ++t) {
      const double v = std::max(work[t], kVarianceFloor);
      acc += kLog2Pi + std::log(v) + r[t] * r[t] / v;
    }
    return 0.5 * acc;
  };

  // Three deterministic starts; omega targets the sample variance.
  const double starts[3][3] = {
      {0.05, 0.90, 0.02}, {0.10, 0.80, 0.10}, {0.02, 0.94, 0.02}};
  optim::Result best;
  bool have_best = false;
  double best_norm = 0.0;
  for (const auto& s : starts) {
    GjrParams p0;
    p0.alpha = s[0];
    p0.beta = s[1];
    p0.gamma = s[2];
    p0.omega = sample_var * (1.0 - p0.persistence());
    optim::Result res =
        optim::minimize_bfgs(negloglik_u, to_unconstrained(p0),
                             options.optimizer);
    const double norm = res.x.norm();
    const bool better =
        !have_best || res.fx < best.fx - 1e-12 ||
        (std::abs(res.fx - best.fx) <= 1e-12 && norm < best_norm);
    if (better) {
      best = res;
      best_norm = norm;
      have_best = true;
    }
  }

  // Retry schedule: restart from the incumbent with a fresh Hessian.
  for (int retry = 0; retry < 2 && !best.converged; ++retry) {
    optim::Result res = optim::minimize_bfgs(negloglik_u, best.x,
                                             options.optimizer);
    if (res.fx <= best.fx) best = res;
    if (best.converged) break;
  }

  GarchFit fit;
  fit.params = to_natural(best.x);
  fit.h0 = h0;
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  fit.variance_path = gjr_filter(fit.params, r, h0);
  fit.loglik = gjr_loglik_terms(fit.params, r, h0).sum();
  fit.residuals = r.array() / fit.variance_path.array().sqrt();
  fit.variance_floor_active = (fit.variance_path.minCoeff() <= kVarianceFloor);
  if (fit.variance_floor_active)
    log_info("gjr fit: variance floor active at the optimum");

  auto per_obs = [&](const Eigen::VectorXd& th) {
    GjrParams p;
    p.omega = th[0];
    p.alpha = th[1];
    p.beta = th[2];
    p.gamma = th[3];
    return gjr_loglik_terms(p, r, h0);
  };
  Eigen::VectorXd theta(4);
  theta << fit.params.omega, fit.params.alpha, fit.params.beta,
      fit.params.gamma;
  fit.se_robust = optim::sandwich_se(per_obs, theta);
  return fit;
}

Eigen::VectorXd degarch(const Eigen::VectorXd& returns, const GarchFit& fit) {
  if (returns.size() != fit.variance_path.size())
    throw DomainError("degarch: returns and variance path differ in length");
  return returns.array() / fit.variance_path.array().sqrt();
}

}  // namespace corrx::garch
