#include "corrx/forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "corrx/errors.hpp"
#include "corrx/log.hpp"
#include "corrx/parallel.hpp"

namespace corrx::forecast {

namespace {

std::string compact(Date d) {
  std::string s = d.to_string();
  std::erase(s, '-');
  return s;
}

/// Index of the last row dated <= split_date; -1 when none.
Eigen::Index split_index(const std::vector<Date>& dates, Date split_date) {
  auto it = std::upper_bound(dates.begin(), dates.end(), split_date);
  return static_cast<Eigen::Index>(it - dates.begin()) - 1;
}

Eigen::VectorXd fit_scales(const dcc::DccFit& fit, Eigen::Index K) {
  if (fit.exog_scales.size() == K) return fit.exog_scales;
  return Eigen::VectorXd::Ones(K);
}

/// State at the last row of an in-sample fit.
ForecastState terminal_state(const dcc::ModelFit& fit) {
  const auto N = static_cast<Eigen::Index>(fit.garch_fits.size());
  ForecastState st;
  st.h2.resize(N);
  st.eps.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& g = fit.garch_fits[static_cast<std::size_t>(i)];
    st.h2[i] = g.variance_path[g.variance_path.size() - 1];
    st.eps[i] = g.residuals[g.residuals.size() - 1];
  }
  st.q = fit.dcc_fit.path.Q.back();
  return st;
}

}  // namespace

std::string spec_label(const dcc::DccSpec& spec) {
  std::string label = "dcc";
  if (!spec.regressors.empty()) {
    label = "dccx-";
    for (std::size_t k = 0; k < spec.regressors.size(); ++k) {
      if (k > 0) label += '+';
      label += spec.regressors[k];
    }
  }
  if (spec.has_break()) label += "-break" + compact(*spec.break_date);
  return label;
}

CovarianceForecast forecast_step(const dcc::ModelFit& fit,
                                 const ForecastState& state,
                                 const Eigen::VectorXd& next_exog,
                                 Date next_date, ForecastState* next_state) {
  const auto N = static_cast<Eigen::Index>(fit.garch_fits.size());
  const Eigen::Index K = fit.dcc_fit.params.theta_x.size();
  if (state.h2.size() != N || state.eps.size() != N ||
      state.q.rows() != N || state.q.cols() != N)
    throw DomainError("forecast_step: state does not match the fit's assets");
  if (next_exog.size() != K)
    throw DomainError("forecast_step: expected " + std::to_string(K) +
                      " exogenous values, got " +
                      std::to_string(next_exog.size()));

  // Univariate GJR updates on the reconstructed returns r_t = eps_t h_t.
  Eigen::VectorXd h2_next(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& g = fit.garch_fits[static_cast<std::size_t>(i)].params;
    const double r = state.eps[i] * std::sqrt(state.h2[i]);
    h2_next[i] = g.omega + g.alpha * r * r + g.beta * state.h2[i] +
                 (r < 0.0 ? g.gamma * r * r : 0.0);
  }

  const dcc::DccParams& p = fit.dcc_fit.params;
  const double c0 = p.intercept_coefficient(fit.dcc_fit.exog_means);
  const Eigen::VectorXd xs =
      next_exog.cwiseQuotient(fit_scales(fit.dcc_fit, K));

  Eigen::VectorXd se(N);
  for (Eigen::Index i = 0; i < N; ++i)
    se[i] = std::sqrt(state.q(i, i)) * state.eps[i];
  Eigen::MatrixXd q_next = c0 * fit.dcc_fit.qbar;
  q_next.noalias() += p.theta1 * (se * se.transpose());
  q_next.noalias() += p.theta2 * state.q;
  if (K > 0) {
    const double drive = p.theta_x.dot(xs);
    if (fit.dcc_fit.style == dcc::ExogStyle::ones)
      q_next.array() += drive;
    else
      q_next.noalias() += drive * fit.dcc_fit.qbar;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(q_next);
  if (llt.info() != Eigen::Success)
    throw PdError(-1, "forecast_step: forecast Q is not positive definite "
                      "for " + next_date.to_string());

  Eigen::VectorXd d(N);
  for (Eigen::Index i = 0; i < N; ++i) d[i] = 1.0 / std::sqrt(q_next(i, i));

  CovarianceForecast out;
  out.date = next_date;
  out.H.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    out.H(i, i) = h2_next[i];
    for (Eigen::Index j = i + 1; j < N; ++j) {
      const double rho = q_next(i, j) * d[i] * d[j];
      const double cov = rho * std::sqrt(h2_next[i] * h2_next[j]);
      out.H(i, j) = cov;
      out.H(j, i) = cov;
    }
  }

  if (next_state) {
    next_state->h2 = std::move(h2_next);
    next_state->q = std::move(q_next);
    next_state->eps.resize(0);
  }
  return out;
}

std::vector<ForecastSet> OosRun::forecast_sets() const {
  std::vector<ForecastSet> out;
  for (const auto& m : models)
    if (m.ok) out.push_back(m.forecasts);
  return out;
}

OosRun oos_run(const ingest::AlignedDataset& dataset, Date split_date,
               const std::vector<dcc::DccSpec>& specs,
               const OosOptions& options) {
  const auto& dates = dataset.dates();
  const auto T = static_cast<Eigen::Index>(dates.size());
  const Eigen::Index split = split_index(dates, split_date);
  if (split < 0)
    throw DomainError("oos_run: split date " + split_date.to_string() +
                      " precedes the sample");
  if (split >= T - 1)
    throw DomainError("oos_run: split date " + split_date.to_string() +
                      " leaves no hold-out data");

  OosRun run;
  run.split_date = split_date;
  run.holdout_dates.assign(dates.begin() + split + 1, dates.end());
  run.models.resize(specs.size());

  parallel_for(specs.size(), options.jobs, [&](std::size_t m) {
    OosModel& model = run.models[m];
    model.spec = specs[m];
    model.name = spec_label(specs[m]);
    try {
      // Break columns are generated over the full span so hold-out rows have
      // them too; the expanded spec then names plain regressors only.
      ingest::AlignedDataset full =
          dcc::materialize_break(dataset, specs[m]);
      dcc::DccSpec espec = dcc::expand_break_spec(specs[m], full.dates());
      ingest::AlignedDataset in_sample = ingest::slice(full, 0, split + 1);

      dcc::ModelFit fit = dcc::two_step_fit(in_sample, espec, options.fit);

      const Eigen::MatrixXd x_full = full.exog_matrix(espec.regressors);
      const auto N = static_cast<Eigen::Index>(fit.garch_fits.size());
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(N);
      if (options.fit.garch.demean)
        mu = in_sample.returns.values.colwise().mean().transpose();

      ForecastState state = terminal_state(fit);
      const Eigen::Index T_h = T - split - 1;
      model.forecasts.model_name = model.name;
      model.forecasts.forecasts.reserve(static_cast<std::size_t>(T_h));

      for (Eigen::Index s = 0; s < T_h; ++s) {
        if (options.refit_every > 0 && s > 0 &&
            s % options.refit_every == 0) {
          dcc::TwoStepOptions refit_opts = options.fit;
          refit_opts.dcc.warm_start = fit.dcc_fit.params;
          fit = dcc::two_step_fit(
              ingest::slice(full, 0, split + 1 + s), espec, refit_opts);
          state = terminal_state(fit);
          if (options.fit.garch.demean)
            mu = ingest::slice(full, 0, split + 1 + s)
                     .returns.values.colwise().mean().transpose();
        }

        const Eigen::Index t_next = split + 1 + s;
        ForecastState next;
        CovarianceForecast f = forecast_step(
            fit, state, x_full.row(t_next - 1).transpose(), dates[
                static_cast<std::size_t>(t_next)], &next);
        model.forecasts.forecasts.push_back(std::move(f));

        next.eps.resize(N);
        for (Eigen::Index i = 0; i < N; ++i) {
          const double r = full.returns.values(t_next, i) - mu[i];
          next.eps[i] = r / std::sqrt(next.h2[i]);
        }
        state = std::move(next);
      }
      model.fit = std::move(fit);
      model.ok = true;
    } catch (const std::exception& e) {
      model.ok = false;
      model.error = e.what();
      log_info("oos_run: model %s failed: %s", model.name.c_str(), e.what());
    }
  });
  return run;
}

}  // namespace corrx::forecast
