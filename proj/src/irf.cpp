#include "corrx/irf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "corrx/errors.hpp"
#include "corrx/rng.hpp"
#include "corrx/stats.hpp"

namespace corrx::irf {

namespace {

double pair_rho(const Eigen::MatrixXd& q, int i, int j, const char* who,
                int h) {
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success)
    throw PdError(h, std::string("impulse_response: ") + who +
                         " path lost positive definiteness at horizon " +
                         std::to_string(h));
  return q(i, j) / std::sqrt(q(i, i) * q(j, j));
}

/// One step of the expectation-form recursion
///   Q_{h+1} = c0 Qbar + (theta1 + theta2) Q_h + drive * M.
Eigen::MatrixXd expectation_step(const dcc::DccFit& fit, double c0,
                                 const Eigen::MatrixXd& q, double drive) {
  const dcc::DccParams& p = fit.params;
  Eigen::MatrixXd next = c0 * fit.qbar + (p.theta1 + p.theta2) * q;
  if (fit.style == dcc::ExogStyle::ones)
    next.array() += drive;
  else
    next.noalias() += drive * fit.qbar;
  return next;
}

/// One step of the literal recursion with supplied standardized innovations.
Eigen::MatrixXd news_step(const dcc::DccFit& fit, double c0,
                          const Eigen::MatrixXd& q, const Eigen::VectorXd& eps,
                          double drive) {
  const dcc::DccParams& p = fit.params;
  const Eigen::Index N = q.rows();
  Eigen::VectorXd se(N);
  for (Eigen::Index i = 0; i < N; ++i) se[i] = std::sqrt(q(i, i)) * eps[i];
  Eigen::MatrixXd next = c0 * fit.qbar + p.theta2 * q;
  next.noalias() += p.theta1 * (se * se.transpose());
  if (fit.style == dcc::ExogStyle::ones)
    next.array() += drive;
  else
    next.noalias() += drive * fit.qbar;
  return next;
}

}  // namespace

IrfResult impulse_response(const dcc::DccFit& fit, const std::string& name,
                           int asset_i, int asset_j, int horizon,
                           double shock, const IrfOptions& options) {
  const auto N = static_cast<int>(fit.qbar.rows());
  if (asset_i == asset_j || asset_i < 0 || asset_j < 0 || asset_i >= N ||
      asset_j >= N)
    throw DomainError("impulse_response: pair must be two distinct assets");
  if (horizon < 1)
    throw DomainError("impulse_response: horizon must be at least 1");

  const auto& regs = fit.spec.regressors;
  const auto it = std::find(regs.begin(), regs.end(), name);
  if (it == regs.end())
    throw DomainError("impulse_response: regressor '" + name +
                      "' is not in the fitted spec");
  const auto k = static_cast<Eigen::Index>(it - regs.begin());

  const dcc::DccParams& p = fit.params;
  const double c0 = p.intercept_coefficient(fit.exog_means);
  const double scale =
      fit.exog_scales.size() == p.theta_x.size() ? fit.exog_scales[k] : 1.0;
  const double base_drive = p.theta_x.dot(fit.exog_means);
  const double shock_drive = p.theta_x[k] * (shock / scale);

  // Baseline fixed point of the expectation-form recursion at x = xbar:
  // (1 - theta1 - theta2) Q* = c0 Qbar + base_drive M.
  const double persist = p.theta1 + p.theta2;
  Eigen::MatrixXd qstar = c0 * fit.qbar;
  if (fit.style == dcc::ExogStyle::ones)
    qstar.array() += base_drive;
  else
    qstar.noalias() += base_drive * fit.qbar;
  qstar /= (1.0 - persist);

  IrfResult out;
  out.shock_size = shock;
  out.asset_i = asset_i;
  out.asset_j = asset_j;
  out.regressor = name;
  out.horizons.resize(static_cast<std::size_t>(horizon) + 1);
  for (int h = 0; h <= horizon; ++h)
    out.horizons[static_cast<std::size_t>(h)] = h;
  out.delta_rho.setZero(horizon + 1);
  out.delta_q.setZero(horizon + 1);
  out.baseline_rho.setZero(horizon + 1);

  if (!options.stochastic) {
    out.news = "expectation";
    Eigen::MatrixXd qb = qstar, qs = qstar;
    out.baseline_rho[0] = pair_rho(qb, asset_i, asset_j, "baseline", 0);
    pair_rho(qs, asset_i, asset_j, "shocked", 0);
    for (int h = 1; h <= horizon; ++h) {
      qb = expectation_step(fit, c0, qb, base_drive);
      // The shock enters the h = 1 update only (x reverts immediately).
      qs = expectation_step(fit, c0, qs,
                            base_drive + (h == 1 ? shock_drive : 0.0));
      const double rb = pair_rho(qb, asset_i, asset_j, "baseline", h);
      const double rs = pair_rho(qs, asset_i, asset_j, "shocked", h);
      out.baseline_rho[h] = rb;
      out.delta_rho[h] = 100.0 * (rs - rb);
      out.delta_q[h] = qs(asset_i, asset_j) - qb(asset_i, asset_j);
    }
  } else {
    out.news = "stochastic";
    if (options.draws < 1)
      throw DomainError("impulse_response: need at least 1 draw");
    Rng master(options.seed);
    for (int d = 0; d < options.draws; ++d) {
      Rng rng = master.substream(static_cast<std::uint64_t>(d));
      Eigen::MatrixXd qb = qstar, qs = qstar;
      out.baseline_rho[0] +=
          pair_rho(qb, asset_i, asset_j, "baseline", 0);
      for (int h = 1; h <= horizon; ++h) {
        // Common random numbers: one z per step, mapped through each
        // path's own correlation factor.
        Eigen::VectorXd z(N);
        for (int i = 0; i < N; ++i) z[i] = rng.normal();
        auto eps_for = [&](const Eigen::MatrixXd& q) {
          Eigen::VectorXd dinv(N);
          for (int i = 0; i < N; ++i) dinv[i] = 1.0 / std::sqrt(q(i, i));
          Eigen::MatrixXd r = dinv.asDiagonal() * q * dinv.asDiagonal();
          Eigen::LLT<Eigen::MatrixXd> llt(r);
          if (llt.info() != Eigen::Success)
            throw PdError(h, "impulse_response: stochastic path lost "
                             "positive definiteness at horizon " +
                                 std::to_string(h));
          return Eigen::VectorXd(llt.matrixL() * z);
        };
        const Eigen::VectorXd eb = eps_for(qb);
        const Eigen::VectorXd es = eps_for(qs);
        qb = news_step(fit, c0, qb, eb, base_drive);
        qs = news_step(fit, c0, qs, es,
                       base_drive + (h == 1 ? shock_drive : 0.0));
        const double rb = pair_rho(qb, asset_i, asset_j, "baseline", h);
        const double rs = pair_rho(qs, asset_i, asset_j, "shocked", h);
        out.baseline_rho[h] += rb;
        out.delta_rho[h] += 100.0 * (rs - rb);
        out.delta_q[h] += qs(asset_i, asset_j) - qb(asset_i, asset_j);
      }
    }
    const double inv = 1.0 / static_cast<double>(options.draws);
    out.baseline_rho *= inv;
    out.delta_rho *= inv;
    out.delta_q *= inv;
  }

  Eigen::Index peak = 0;
  out.delta_rho.cwiseAbs().maxCoeff(&peak);
  if (shock != 0.0)
    out.normalized_sensitivity = out.delta_rho[peak] / shock;
  return out;
}

IrfResult impulse_response(const dcc::DccFit& fit,
                           const ingest::AlignedDataset& dataset,
                           const std::string& name, int asset_i, int asset_j,
                           int horizon, const IrfOptions& options) {
  const Eigen::Index col = dataset.exog_index(name);
  const Eigen::VectorXd& x = dataset.exog[static_cast<std::size_t>(col)].values;
  const double sd =
      stddev({x.data(), static_cast<std::size_t>(x.size())});
  return impulse_response(fit, name, asset_i, asset_j, horizon, sd, options);
}

}  // namespace corrx::irf
