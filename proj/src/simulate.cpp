#include "corrx/simulate.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "corrx/errors.hpp"
#include "corrx/stats.hpp"

namespace corrx::simulate {

namespace {

constexpr std::uint64_t kExogStreamBase = 1000;
constexpr std::uint64_t kPanelStream = 1;

/// AR(1) log path of the requested length, started at the stationary mean
/// with a stationary-scale first draw.
Eigen::VectorXd ar1_exog_path(const ExogModel& m, Eigen::Index length,
                              Rng rng) {
  Eigen::VectorXd x(length);
  const double phi = m.persistence;
  const double stat_sd =
      m.innovation_sd / std::sqrt(std::max(1.0 - phi * phi, 1e-12));
  double z = m.log_mean + (m.innovation_sd > 0.0 ? stat_sd * rng.normal() : 0.0);
  for (Eigen::Index t = 0; t < length; ++t) {
    if (t > 0)
      z = m.log_mean + phi * (z - m.log_mean) + m.innovation_sd * rng.normal();
    x[t] = std::exp(z);
  }
  return x;
}

Eigen::VectorXd full_exog_path(const ExogModel& m, Eigen::Index burn_in,
                               Eigen::Index T, Rng rng) {
  m.validate();
  const Eigen::Index total = burn_in + T;
  if (!m.fixed_path) return ar1_exog_path(m, total, rng);

  const auto& fp = *m.fixed_path;
  if (fp.size() == total) return fp;
  if (fp.size() == T) {
    Eigen::VectorXd x(total);
    x.head(burn_in).setConstant(fp.size() > 0 ? fp[0] : 0.0);
    x.tail(T) = fp;
    return x;
  }
  throw DomainError("exog fixed path must have length T or burn_in + T");
}

}  // namespace

void ExogModel::validate() const {
  if (!(persistence >= 0.0 && persistence < 1.0))
    throw DomainError("exog model '" + name +
                      "': persistence must lie in [0, 1)");
  if (innovation_sd < 0.0)
    throw DomainError("exog model '" + name +
                      "': innovation sd must be non-negative");
  if (fixed_path && !fixed_path->allFinite())
    throw DomainError("exog model '" + name + "': fixed path must be finite");
}

ExogModel calibrate_exog(double target_mean, double target_sd,
                         double persistence, const std::string& name) {
  if (!(target_mean > 0.0))
    throw DomainError("calibrate_exog: target mean must be positive");
  if (target_sd < 0.0)
    throw DomainError("calibrate_exog: target sd must be non-negative");
  ExogModel m;
  m.name = name;
  m.persistence = persistence;
  // Lognormal moment matching: if z ~ N(mu, s2) then
  // E[e^z] = exp(mu + s2/2) and Var[e^z] = (e^{s2}-1) e^{2mu+s2}.
  const double ratio = target_sd / target_mean;
  const double s2_stationary = std::log1p(ratio * ratio);
  m.log_mean = std::log(target_mean) - 0.5 * s2_stationary;
  m.innovation_sd =
      std::sqrt(s2_stationary * (1.0 - persistence * persistence));
  return m;
}

void SimConfig::validate() const {
  if (T < 1) throw DomainError("sim config: T must be positive");
  if (N < 1) throw DomainError("sim config: N must be positive");
  if (burn_in < 0) throw DomainError("sim config: burn-in must be >= 0");
  if (static_cast<Eigen::Index>(gjr.size()) != N)
    throw DomainError("sim config: need one GJR parameter set per asset");
  for (const auto& g : gjr) g.validate();
  const auto K = static_cast<std::size_t>(dcc_params.theta_x.size());
  if (exog.size() != K)
    throw DomainError("sim config: theta_x and exog model counts differ");
  if (!regressor_names.empty() && regressor_names.size() != K)
    throw DomainError("sim config: regressor names and theta_x counts differ");
  if (qbar.rows() != N || qbar.cols() != N)
    throw DomainError("sim config: qbar must be N x N");
  for (Eigen::Index i = 0; i < N; ++i) {
    if (std::abs(qbar(i, i) - 1.0) > 1e-12)
      throw DomainError("sim config: qbar diagonal must be 1");
    for (Eigen::Index j = 0; j < N; ++j)
      if (std::abs(qbar(i, j) - qbar(j, i)) > 1e-12)
        throw DomainError("sim config: qbar must be symmetric");
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qbar);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw DomainError("sim config: qbar must be positive definite");
  }
  if (dcc_params.theta1 < 0.0 || dcc_params.theta2 < 0.0 ||
      !(dcc_params.theta1 + dcc_params.theta2 < 1.0))
    throw DomainError("sim config: invalid (theta1, theta2)");
  if (break_config) {
    if (break_config->at_index < 0 || break_config->at_index >= T)
      throw DomainError("sim config: break index outside [0, T)");
    if (break_config->target >= exog.size())
      throw DomainError("sim config: break target regressor out of range");
  }
  if (!asset_names.empty() &&
      static_cast<Eigen::Index>(asset_names.size()) != N)
    throw DomainError("sim config: asset names and N differ");
  for (const auto& m : exog) m.validate();
}

ingest::ExogenousSeries simulate_exog(const SimConfig& config, std::size_t k) {
  config.validate();
  if (k >= config.exog.size())
    throw DomainError("simulate_exog: regressor index out of range");
  Rng rng = Rng(config.seed).substream(kExogStreamBase + k);
  const Eigen::VectorXd path =
      full_exog_path(config.exog[k], config.burn_in, config.T, rng);

  ingest::ExogenousSeries out;
  out.name = config.regressor_names.empty() ? config.exog[k].name
                                            : config.regressor_names[k];
  out.kind = ingest::ExogKind::continuous;
  out.dates = weekday_range(config.start_date,
                            static_cast<std::size_t>(config.T));
  out.values = path.tail(config.T);
  out.validate();
  return out;
}

SimResult simulate_panel(const SimConfig& config) {
  config.validate();
  const Eigen::Index T = config.T;
  const Eigen::Index N = config.N;
  const Eigen::Index burn = config.burn_in;
  const Eigen::Index total = burn + T;
  const auto K = static_cast<Eigen::Index>(config.exog.size());

  // Exogenous paths over burn-in + sample, one substream each.
  Eigen::MatrixXd x(total, K);
  for (Eigen::Index k = 0; k < K; ++k)
    x.col(k) = full_exog_path(config.exog[static_cast<std::size_t>(k)], burn,
                              T, Rng(config.seed).substream(
                                  kExogStreamBase +
                                  static_cast<std::uint64_t>(k)));

  // Break dummy (zero during burn-in, steps up inside the sample window).
  Eigen::VectorXd dummy = Eigen::VectorXd::Zero(total);
  if (config.break_config)
    for (Eigen::Index t = burn + config.break_config->at_index; t < total; ++t)
      dummy[t] = 1.0;

  // Intercept targets the sample-window means, mirroring the estimator's
  // correlation targeting so that estimation on simulated data is coherent.
  double c0 = 1.0 - config.dcc_params.theta1 - config.dcc_params.theta2;
  for (Eigen::Index k = 0; k < K; ++k)
    c0 -= config.dcc_params.theta_x[k] * x.col(k).tail(T).mean();
  if (config.break_config) {
    const auto bk = static_cast<Eigen::Index>(config.break_config->target);
    const double post_mean =
        x.col(bk).tail(T).cwiseProduct(dummy.tail(T)).mean();
    c0 -= config.break_config->delta * post_mean;
  }
  if (!(c0 > 0.0))
    throw DomainError("sim config: intercept coefficient is not positive "
                      "under the sample-mean targeting");

  Rng z_rng = Rng(config.seed).substream(kPanelStream);

  SimResult res;
  res.h2_true.resize(T, N);
  res.truth.Q.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
  res.truth.R.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
  Eigen::MatrixXd returns(T, N);

  Eigen::VectorXd h2(N);
  for (Eigen::Index i = 0; i < N; ++i)
    h2[i] = config.gjr[static_cast<std::size_t>(i)].unconditional_variance();
  Eigen::VectorXd r_prev = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd eps_prev = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd q = config.qbar;
  Eigen::MatrixXd q_next(N, N);
  Eigen::MatrixXd r_mat(N, N);
  Eigen::MatrixXd h_mat(N, N);
  Eigen::VectorXd z(N);

  for (Eigen::Index t = 0; t < total; ++t) {
    if (t > 0) {
      // Univariate GJR updates.
      for (Eigen::Index i = 0; i < N; ++i) {
        const auto& g = config.gjr[static_cast<std::size_t>(i)];
        const double r2 = r_prev[i] * r_prev[i];
        h2[i] = g.omega + g.alpha * r2 + g.beta * h2[i] +
                (r_prev[i] < 0.0 ? g.gamma * r2 : 0.0);
      }
      // Correlation recursion on the true standardized innovations.
      Eigen::VectorXd se(N);
      for (Eigen::Index i = 0; i < N; ++i)
        se[i] = std::sqrt(q(i, i)) * eps_prev[i];
      q_next.noalias() = c0 * config.qbar;
      q_next.noalias() += config.dcc_params.theta1 * (se * se.transpose());
      q_next.noalias() += config.dcc_params.theta2 * q;
      double drive = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        double coeff = config.dcc_params.theta_x[k];
        if (config.break_config &&
            static_cast<Eigen::Index>(config.break_config->target) == k)
          coeff += config.break_config->delta * dummy[t - 1];
        drive += coeff * x(t - 1, k);
      }
      if (K > 0) {
        if (config.style == dcc::ExogStyle::ones)
          q_next.array() += drive;
        else
          q_next.noalias() += drive * config.qbar;
      }
      q.swap(q_next);
    }

    Eigen::VectorXd d(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!(q(i, i) > 0.0))
        throw PdError(t, "simulate_panel: Q diagonal non-positive at t=" +
                             std::to_string(t));
      d[i] = 1.0 / std::sqrt(q(i, i));
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      r_mat(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < N; ++j) {
        const double v = q(i, j) * d[i] * d[j];
        r_mat(i, j) = v;
        r_mat(j, i) = v;
      }
    }

    // H_t = S_t R_t S_t and its symmetric square root.
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j)
        h_mat(i, j) = r_mat(i, j) * std::sqrt(h2[i] * h2[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_mat);
    if (es.eigenvalues().minCoeff() < 1e-12)
      throw PdError(t, "simulate_panel: H_t eigenvalue below 1e-12 at t=" +
                           std::to_string(t));

    for (Eigen::Index i = 0; i < N; ++i) z[i] = z_rng.normal();
    const Eigen::VectorXd r_t =
        es.eigenvectors() *
        (es.eigenvalues().cwiseSqrt().asDiagonal() *
         (es.eigenvectors().transpose() * z));

    r_prev = r_t;
    for (Eigen::Index i = 0; i < N; ++i) eps_prev[i] = r_t[i] / std::sqrt(h2[i]);

    if (t >= burn) {
      const Eigen::Index s = t - burn;
      returns.row(s) = r_t.transpose();
      res.h2_true.row(s) = h2.transpose();
      res.truth.Q[static_cast<std::size_t>(s)] = q;
      res.truth.R[static_cast<std::size_t>(s)] = r_mat;
    }
  }

  res.returns.dates = weekday_range(config.start_date,
                                    static_cast<std::size_t>(T));
  res.returns.values = returns;
  if (config.asset_names.empty()) {
    for (Eigen::Index i = 0; i < N; ++i)
      res.returns.asset_names.push_back("A" + std::to_string(i + 1));
  } else {
    res.returns.asset_names = config.asset_names;
  }
  res.returns.validate();

  for (Eigen::Index k = 0; k < K; ++k) {
    ingest::ExogenousSeries s;
    s.name = config.regressor_names.empty()
                 ? config.exog[static_cast<std::size_t>(k)].name
                 : config.regressor_names[static_cast<std::size_t>(k)];
    s.kind = ingest::ExogKind::continuous;
    s.dates = res.returns.dates;
    s.values = x.col(k).tail(T);
    s.validate();
    res.exog.push_back(std::move(s));
  }

  if (config.break_config)
    res.break_date =
        res.returns.dates[static_cast<std::size_t>(config.break_config->at_index)];
  return res;
}

ingest::AlignedDataset SimResult::dataset() const {
  return ingest::align(returns, exog);
}

}  // namespace corrx::simulate
