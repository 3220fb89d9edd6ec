#include "corrx/dcc.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "corrx/errors.hpp"
#include "corrx/log.hpp"
#include "corrx/parallel.hpp"
#include "corrx/stats.hpp"

namespace corrx::dcc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string compact_date(Date d) {
  std::string s = d.to_string();  // YYYY-MM-DD
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

void check_filter_inputs(const DccParams& params,
                         const Eigen::MatrixXd& residuals,
                         const Eigen::MatrixXd& exog,
                         const Eigen::MatrixXd& qbar,
                         const Eigen::VectorXd& exog_means) {
  const Eigen::Index K = params.theta_x.size();
  if (exog.cols() != K || exog_means.size() != K)
    throw DomainError("dcc filter: regressor count mismatch between "
                      "parameters, exog matrix and exog means");
  if (exog.rows() != residuals.rows() && K > 0)
    throw DomainError("dcc filter: residuals and exog differ in length");
  if (qbar.rows() != residuals.cols() || qbar.cols() != residuals.cols())
    throw DomainError("dcc filter: Qbar dimension does not match the panel");
  if (!residuals.allFinite())
    throw DomainError("dcc filter: residuals must be finite");
}

/// One pass of the Q/R recursion. Always returns the total log-likelihood;
/// optionally stores per-date matrices and per-observation contributions.
/// Throws PdError with the first offending time index.
double run_filter(const DccParams& params, const Eigen::MatrixXd& residuals,
                  const Eigen::MatrixXd& exog, const Eigen::MatrixXd& qbar,
                  const Eigen::VectorXd& exog_means, ExogStyle style,
                  DccPath* path_out, Eigen::VectorXd* terms_out) {
  const Eigen::Index T = residuals.rows();
  const Eigen::Index N = residuals.cols();
  const Eigen::Index K = params.theta_x.size();
  const double c0 = params.intercept_coefficient(exog_means);

  Eigen::MatrixXd q = qbar;
  Eigen::MatrixXd q_next(N, N);
  Eigen::MatrixXd r(N, N);
  Eigen::VectorXd scaled_eps(N);
  Eigen::VectorXd inv_sd(N);
  Eigen::VectorXd solved(N);
  Eigen::LLT<Eigen::MatrixXd> llt(N);

  if (path_out) {
    path_out->Q.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
    path_out->R.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
  }
  if (terms_out) terms_out->resize(T);

  double total = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      // News term uses the previous Q's diagonal: sqrt(q_ii q_jj) e_i e_j.
      for (Eigen::Index i = 0; i < N; ++i) {
        const double qii = q(i, i);
        if (!(qii > 0.0))
          throw PdError(t, "dcc filter: Q diagonal non-positive at t=" +
                               std::to_string(t));
        scaled_eps[i] = std::sqrt(qii) * residuals(t - 1, i);
      }
      q_next.noalias() = c0 * qbar;
      q_next.noalias() += params.theta1 * (scaled_eps * scaled_eps.transpose());
      q_next.noalias() += params.theta2 * q;
      if (K > 0) {
        double drive = 0.0;
        for (Eigen::Index k = 0; k < K; ++k)
          drive += params.theta_x[k] * exog(t - 1, k);
        if (style == ExogStyle::ones)
          q_next.array() += drive;
        else
          q_next.noalias() += drive * qbar;
      }
      q.swap(q_next);
    }

    for (Eigen::Index i = 0; i < N; ++i) {
      const double qii = q(i, i);
      if (!(qii > 0.0))
        throw PdError(t, "dcc filter: Q diagonal non-positive at t=" +
                             std::to_string(t));
      inv_sd[i] = 1.0 / std::sqrt(qii);
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      r(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < N; ++j) {
        const double v = q(i, j) * inv_sd[i] * inv_sd[j];
        r(i, j) = v;
        r(j, i) = v;
      }
    }

    llt.compute(r);
    if (llt.info() != Eigen::Success)
      throw PdError(t, "dcc filter: R_t not positive definite at t=" +
                           std::to_string(t) + " (theta1=" +
                           std::to_string(params.theta1) + ", theta2=" +
                           std::to_string(params.theta2) + ")");

    double logdet = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
      logdet += std::log(llt.matrixLLT()(i, i));
    logdet *= 2.0;

    solved = llt.solve(residuals.row(t).transpose());
    const double quad = residuals.row(t).dot(solved);
    const double term =
        -0.5 * (static_cast<double>(N) * kLog2Pi + logdet + quad);
    total += term;
    if (terms_out) (*terms_out)[t] = term;
    if (path_out) {
      path_out->Q[static_cast<std::size_t>(t)] = q;
      path_out->R[static_cast<std::size_t>(t)] = r;
    }
  }
  return total;
}

}  // namespace

const char* exog_style_name(ExogStyle s) {
  return s == ExogStyle::ones ? "ones" : "qbar";
}

ExogStyle parse_exog_style(const std::string& name) {
  if (name == "ones") return ExogStyle::ones;
  if (name == "qbar") return ExogStyle::qbar;
  throw DomainError("unknown exog style '" + name + "' (expected ones|qbar)");
}

void DccSpec::validate() const {
  if (break_date.has_value()) {
    if (!break_target.has_value())
      throw DomainError("dcc spec: break date set without a target regressor");
    if (std::find(regressors.begin(), regressors.end(), *break_target) ==
        regressors.end())
      throw DomainError("dcc spec: break target '" + *break_target +
                        "' is not one of the regressors");
  }
}

std::string break_regressor_name(const std::string& target, Date break_date) {
  return target + "_post" + compact_date(break_date);
}

DccSpec expand_break_spec(const DccSpec& spec, const std::vector<Date>& dates) {
  spec.validate();
  if (!spec.has_break()) return spec;
  if (dates.empty()) throw DomainError("expand_break_spec: empty date index");
  if (*spec.break_date < dates.front() || *spec.break_date > dates.back())
    throw DomainError("break date " + spec.break_date->to_string() +
                      " lies outside the sample span " +
                      dates.front().to_string() + ".." +
                      dates.back().to_string());
  DccSpec out;
  out.regressors = spec.regressors;
  out.regressors.push_back(
      break_regressor_name(*spec.break_target, *spec.break_date));
  return out;
}

ingest::AlignedDataset materialize_break(const ingest::AlignedDataset& dataset,
                                         const DccSpec& spec) {
  spec.validate();
  if (!spec.has_break()) return dataset;
  const auto& dates = dataset.dates();
  const Eigen::Index target =
      dataset.exog_index(*spec.break_target);  // throws if unknown

  ingest::ExogenousSeries post;
  post.name = break_regressor_name(*spec.break_target, *spec.break_date);
  post.kind = ingest::ExogKind::interaction;
  post.dates = dates;
  post.values.resize(static_cast<Eigen::Index>(dates.size()));
  for (std::size_t t = 0; t < dates.size(); ++t) {
    const bool after = dates[t] >= *spec.break_date;
    post.values[static_cast<Eigen::Index>(t)] =
        after ? dataset.exog[static_cast<std::size_t>(target)]
                    .values[static_cast<Eigen::Index>(t)]
              : 0.0;
  }
  return dataset.with_extra_exog(std::move(post));
}

double DccParams::intercept_coefficient(
    const Eigen::VectorXd& exog_means) const {
  return 1.0 - theta1 - theta2 - theta_x.dot(exog_means);
}

void DccParams::validate(const Eigen::VectorXd& exog_means) const {
  if (theta1 < 0.0 || theta2 < 0.0)
    throw DomainError("dcc params: theta1 and theta2 must be non-negative");
  if (!(theta1 + theta2 < 1.0))
    throw DomainError("dcc params: theta1 + theta2 must be below 1");
  if (theta_x.size() != exog_means.size())
    throw DomainError("dcc params: theta_x and exog means differ in length");
  if (!(intercept_coefficient(exog_means) > 0.0))
    throw DomainError("dcc params: intercept coefficient "
                      "1 - theta1 - theta2 - theta_x.xbar must be positive");
}

DccPath dcc_filter(const DccParams& params, const Eigen::MatrixXd& residuals,
                   const Eigen::MatrixXd& exog, const Eigen::MatrixXd& qbar,
                   const Eigen::VectorXd& exog_means, ExogStyle style) {
  params.validate(exog_means);
  check_filter_inputs(params, residuals, exog, qbar, exog_means);
  DccPath path;
  run_filter(params, residuals, exog, qbar, exog_means, style, &path, nullptr);
  return path;
}

double dcc_loglik(const DccParams& params, const Eigen::MatrixXd& residuals,
                  const Eigen::MatrixXd& exog, const Eigen::MatrixXd& qbar,
                  const Eigen::VectorXd& exog_means, ExogStyle style) {
  params.validate(exog_means);
  check_filter_inputs(params, residuals, exog, qbar, exog_means);
  return run_filter(params, residuals, exog, qbar, exog_means, style, nullptr,
                    nullptr);
}

Eigen::VectorXd dcc_loglik_terms(const DccParams& params,
                                 const Eigen::MatrixXd& residuals,
                                 const Eigen::MatrixXd& exog,
                                 const Eigen::MatrixXd& qbar,
                                 const Eigen::VectorXd& exog_means,
                                 ExogStyle style) {
  Eigen::VectorXd terms;
  run_filter(params, residuals, exog, qbar, exog_means, style, nullptr,
             &terms);
  return terms;
}

namespace {

Eigen::VectorXd dcc_to_unconstrained(const DccParams& p) {
  const double t1 = std::max(p.theta1, 1e-8);
  const double t2 = std::max(p.theta2, 1e-8);
  const double rest = 1.0 - t1 - t2;
  Eigen::VectorXd u(2 + p.theta_x.size());
  u[0] = std::log(t1 / rest);
  u[1] = std::log(t2 / rest);
  u.tail(p.theta_x.size()) = p.theta_x;
  return u;
}

DccParams dcc_to_natural(const Eigen::VectorXd& u) {
  DccParams p;
  const double m = std::max({0.0, u[0], u[1]});
  const double e0 = std::exp(-m);
  const double e1 = std::exp(std::min(u[0] - m, 50.0));
  const double e2 = std::exp(std::min(u[1] - m, 50.0));
  const double denom = e0 + e1 + e2;
  p.theta1 = e1 / denom;
  p.theta2 = e2 / denom;
  p.theta_x = u.tail(u.size() - 2);
  return p;
}

}  // namespace

DccFit fit_dcc(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& exog,
               const DccSpec& spec, const DccFitOptions& options) {
  spec.validate();
  if (spec.has_break())
    throw DomainError("fit_dcc: spec must be expanded first "
                      "(see expand_break_spec)");
  const Eigen::Index T = residuals.rows();
  const Eigen::Index K = static_cast<Eigen::Index>(spec.regressors.size());
  if (exog.cols() != K)
    throw DomainError("fit_dcc: exog matrix has " +
                      std::to_string(exog.cols()) + " columns but the spec "
                      "names " + std::to_string(K) + " regressors");
  if (K > 0 && exog.rows() != T)
    throw DomainError("fit_dcc: residuals and exog differ in length");
  if (T < 20)
    throw DomainError("fit_dcc: need at least 20 observations");

  Eigen::MatrixXd x = exog;
  Eigen::VectorXd exog_scales = Eigen::VectorXd::Ones(K);
  if (options.standardize_exog) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double sd = std::sqrt(
          (x.col(k).array() - x.col(k).mean()).square().sum() /
          static_cast<double>(T - 1));
      if (!(sd > 0.0))
        throw DomainError("fit_dcc: regressor '" + spec.regressors[
                              static_cast<std::size_t>(k)] +
                          "' has zero variance, cannot standardize");
      x.col(k) /= sd;
      exog_scales[k] = sd;
    }
  }
  const Eigen::VectorXd exog_means =
      K > 0 ? Eigen::VectorXd(x.colwise().mean()) : Eigen::VectorXd(0);

  const Eigen::MatrixXd qbar = sample_correlation(residuals);

  auto objective = [&](const Eigen::VectorXd& u) {
    const DccParams p = dcc_to_natural(u);
    const double c0 = p.intercept_coefficient(exog_means);
    if (!(c0 > 0.0)) return 1e10 * (1.0 - c0);
    try {
      return -run_filter(p, residuals, x, qbar, exog_means, options.style,
                         nullptr, nullptr);
    } catch (const PdError& e) {
      // Earlier violations are graded as worse so the search is pushed back
      // toward the feasible region instead of hitting a flat wall.
      return 1e9 * (2.0 - static_cast<double>(e.t_index) /
                             static_cast<double>(T));
    }
  };

  std::vector<DccParams> starts;
  for (auto [a, b] : {std::pair{0.05, 0.90}, {0.02, 0.95}, {0.10, 0.85}}) {
    DccParams p;
    p.theta1 = a;
    p.theta2 = b;
    p.theta_x = Eigen::VectorXd::Zero(K);
    starts.push_back(p);
  }
  if (options.warm_start) {
    if (options.warm_start->theta_x.size() != K)
      throw DomainError("fit_dcc: warm start has wrong regressor count");
    starts.push_back(*options.warm_start);
  }

  optim::Result best;
  bool have_best = false;
  double best_norm = 0.0;
  for (const auto& p0 : starts) {
    optim::Result res = optim::minimize_bfgs(
        objective, dcc_to_unconstrained(p0), options.optimizer);
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
  for (int retry = 0; retry < 2 && !best.converged; ++retry) {
    optim::Result res =
        optim::minimize_bfgs(objective, best.x, options.optimizer);
    if (res.fx <= best.fx) best = res;
  }
  if (best.fx >= 1e9)
    throw ConvergenceError(
        "fit_dcc: no positive-definite parameter point found");

  DccFit fit;
  fit.spec = spec;
  fit.params = dcc_to_natural(best.x);
  fit.params.validate(exog_means);  // PD violation at the optimum -> throw
  fit.qbar = qbar;
  fit.exog_means = exog_means;
  fit.exog_scales = exog_scales;
  fit.style = options.style;
  fit.converged = best.converged;
  fit.iterations = best.iterations;

  Eigen::VectorXd terms;
  fit.loglik = run_filter(fit.params, residuals, x, qbar, exog_means,
                          options.style, &fit.path, &terms);
  const double p_count = static_cast<double>(2 + K);
  fit.aic = -2.0 * fit.loglik + 2.0 * p_count;
  fit.bic = -2.0 * fit.loglik + p_count * std::log(static_cast<double>(T));

  auto per_obs = [&](const Eigen::VectorXd& th) {
    DccParams p;
    p.theta1 = th[0];
    p.theta2 = th[1];
    p.theta_x = th.tail(K);
    return dcc_loglik_terms(p, residuals, x, qbar, exog_means, options.style);
  };
  Eigen::VectorXd theta(2 + K);
  theta[0] = fit.params.theta1;
  theta[1] = fit.params.theta2;
  theta.tail(K) = fit.params.theta_x;
  try {
    fit.se_robust = optim::sandwich_se(per_obs, theta);
  } catch (const Error& e) {
    // The FD perturbations behind the sandwich can step over the PD boundary
    // when the optimum sits close to it; the point estimate is still valid,
    // so report the fit with unavailable standard errors instead of failing.
    fit.se_robust = Eigen::VectorXd::Constant(
        2 + K, std::numeric_limits<double>::quiet_NaN());
    log_info("fit_dcc: standard errors unavailable near the PD boundary (%s)",
             e.what());
  }

  std::uint64_t h = fnv1a_doubles(
      {residuals.data(), static_cast<std::size_t>(residuals.size())},
      0xcbf29ce484222325ULL);
  fit.residuals_fingerprint =
      fnv1a_doubles({qbar.data(), static_cast<std::size_t>(qbar.size())}, h);
  return fit;
}

LrResult lr_test(const DccFit& restricted, const DccFit& unrestricted) {
  if (restricted.residuals_fingerprint != unrestricted.residuals_fingerprint)
    throw DomainError("lr_test: fits were estimated on different residuals");
  for (const auto& name : restricted.spec.regressors)
    if (std::find(unrestricted.spec.regressors.begin(),
                  unrestricted.spec.regressors.end(),
                  name) == unrestricted.spec.regressors.end())
      throw DomainError("lr_test: specs are not nested (regressor '" + name +
                        "' missing from the unrestricted model)");

  LrResult out;
  out.df = static_cast<int>(unrestricted.spec.regressors.size() -
                            restricted.spec.regressors.size());
  double stat = 2.0 * (unrestricted.loglik - restricted.loglik);
  const double tol = 1e-4 * (1.0 + std::abs(unrestricted.loglik));
  if (stat < -tol)
    throw DomainError("lr_test: unrestricted likelihood below restricted "
                      "beyond optimizer tolerance; refit before testing");
  stat = std::max(stat, 0.0);
  out.stat = stat;
  if (out.df == 0)
    out.pvalue = 1.0;
  else
    out.pvalue = chi_squared_sf(stat, out.df);
  return out;
}

ModelFit two_step_fit(const ingest::AlignedDataset& dataset,
                      const DccSpec& spec, const TwoStepOptions& options) {
  spec.validate();
  const ingest::AlignedDataset data = materialize_break(dataset, spec);
  const DccSpec expanded = expand_break_spec(spec, data.dates());
  const Eigen::MatrixXd x = data.exog_matrix(expanded.regressors);

  const Eigen::Index N = data.returns.values.cols();
  const Eigen::Index T = data.returns.values.rows();

  ModelFit out;
  out.dataset_fingerprint = data.fingerprint();
  out.garch_fits.resize(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), options.jobs, [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    try {
      out.garch_fits[i] =
          garch::fit_gjr(data.returns.values.col(col), options.garch);
      out.garch_fits[i].asset = data.returns.asset_names[i];
    } catch (const Error& e) {
      throw Error("first step, asset '" + data.returns.asset_names[i] +
                  "': " + e.what());
    }
    if (!out.garch_fits[i].converged)
      log_info("first step: asset '%s' flagged non-converged",
               data.returns.asset_names[i].c_str());
  });

  Eigen::MatrixXd residuals(T, N);
  for (Eigen::Index j = 0; j < N; ++j)
    residuals.col(j) = out.garch_fits[static_cast<std::size_t>(j)].residuals;

  try {
    out.dcc_fit = fit_dcc(residuals, x, expanded, options.dcc);
  } catch (const PdError&) {
    throw;
  } catch (const Error& e) {
    throw Error(std::string("second step: ") + e.what());
  }
  return out;
}

}  // namespace corrx::dcc
