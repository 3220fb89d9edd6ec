#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/garch.hpp"
#include "corrx/optim.hpp"

namespace corrx::dcc {

/// How the exogenous term theta_k * x_{k,t-1} enters Q_t: added to every
/// entry (all-ones matrix) or scaling the unconditional correlation target.
enum class ExogStyle { ones, qbar };

const char* exog_style_name(ExogStyle s);
ExogStyle parse_exog_style(const std::string& name);

/// Which correlation model to estimate: the regressor list (empty = plain
/// DCC) plus an optional one-time structural break in one coefficient.
struct DccSpec {
  std::vector<std::string> regressors;
  std::optional<Date> break_date;
  std::optional<std::string> break_target;

  bool has_break() const { return break_date.has_value(); }
  /// Throws DomainError if a break date is set without naming a target
  /// regressor from the list.
  void validate() const;
};

/// Name of the regressor generated for a coefficient break:
/// target + "_post" + YYYYMMDD.
std::string break_regressor_name(const std::string& target, Date break_date);

/// Realizes (theta + delta D_t) x_t as theta x_t + delta (D_t x_t): the break
/// becomes one extra regressor whose coefficient is delta. Throws DomainError
/// when the break date lies outside the date span.
DccSpec expand_break_spec(const DccSpec& spec, const std::vector<Date>& dates);

/// Appends the D_t * x_t break regressor column to the dataset (no-op for
/// break-free specs).
ingest::AlignedDataset materialize_break(const ingest::AlignedDataset& dataset,
                                         const DccSpec& spec);

struct DccParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Eigen::VectorXd theta_x;  // K coefficients, ordered as the spec's regressors

  /// 1 - theta1 - theta2 - sum_k theta_k xbar_k.
  double intercept_coefficient(const Eigen::VectorXd& exog_means) const;
  /// Throws DomainError unless theta1, theta2 >= 0, theta1 + theta2 < 1 and
  /// the intercept coefficient is strictly positive.
  void validate(const Eigen::VectorXd& exog_means) const;
};

/// Pseudo-correlation and correlation paths, one N x N matrix per date.
struct DccPath {
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> R;
};

/// Correlation recursion
///   Q_t = (1 - th1 - th2 - sum th_k xbar_k) Qbar
///         + th1 * Qt~_{t-1} e_{t-1} e'_{t-1} Qt~_{t-1} + th2 * Q_{t-1}
///         + sum_k th_k x_{k,t-1} * M,
/// with Qt~ = diag(sqrt(diag(Q))), M = ones (or Qbar), Q_1 = Qbar, and
/// R_t = Qt~_t^{-1} Q_t Qt~_t^{-1}. Throws PdError (with the offending t)
/// if any Q_t stops being positive definite.
DccPath dcc_filter(const DccParams& params, const Eigen::MatrixXd& residuals,
                   const Eigen::MatrixXd& exog, const Eigen::MatrixXd& qbar,
                   const Eigen::VectorXd& exog_means,
                   ExogStyle style = ExogStyle::ones);

/// Second-step Gaussian quasi log-likelihood
///   L = -(TN/2) log 2pi - 1/2 sum_t [log|R_t| + e_t' R_t^{-1} e_t].
double dcc_loglik(const DccParams& params, const Eigen::MatrixXd& residuals,
                  const Eigen::MatrixXd& exog, const Eigen::MatrixXd& qbar,
                  const Eigen::VectorXd& exog_means,
                  ExogStyle style = ExogStyle::ones);

/// Per-observation contributions to dcc_loglik (no parameter validation, so
/// finite-difference probes just over the boundary stay evaluable).
Eigen::VectorXd dcc_loglik_terms(const DccParams& params,
                                 const Eigen::MatrixXd& residuals,
                                 const Eigen::MatrixXd& exog,
                                 const Eigen::MatrixXd& qbar,
                                 const Eigen::VectorXd& exog_means,
                                 ExogStyle style = ExogStyle::ones);

struct DccFit {
  DccSpec spec;
  DccParams params;
  Eigen::VectorXd se_robust;  // 2 + K entries: theta1, theta2, theta_x
  Eigen::MatrixXd qbar;
  DccPath path;
  Eigen::VectorXd exog_means;
  /// Per-regressor divisors applied before estimation (all ones unless
  /// standardize_exog was set); out-of-sample data must be divided by the
  /// same scales before entering the recursion.
  Eigen::VectorXd exog_scales;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  ExogStyle style = ExogStyle::ones;
  std::uint64_t residuals_fingerprint = 0;
};

struct DccFitOptions {
  optim::Options optimizer = {};
  ExogStyle style = ExogStyle::ones;
  /// Divide each regressor by its standard deviation before estimation
  /// (coefficients are then reported on the scaled columns). Conditioning
  /// aid only; off by default to keep the marginal-effect interpretation.
  bool standardize_exog = false;
  /// Optional warm start (previous window's optimum, say); still competes
  /// against the deterministic default starts.
  std::optional<DccParams> warm_start;
};

/// Maximizes the second-step likelihood over (theta1, theta2, theta_x).
/// `exog` columns must follow spec.regressors order; the spec must already
/// be expanded (no raw break date). Qbar is computed internally as the
/// sample correlation of the residuals.
DccFit fit_dcc(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& exog,
               const DccSpec& spec, const DccFitOptions& options = {});

struct LrResult {
  double stat = 0.0;
  int df = 0;
  double pvalue = 1.0;
};

/// Likelihood-ratio test of nested specs estimated on identical residuals.
LrResult lr_test(const DccFit& restricted, const DccFit& unrestricted);

/// First step + second step bundled.
struct ModelFit {
  std::vector<garch::GarchFit> garch_fits;
  DccFit dcc_fit;
  std::uint64_t dataset_fingerprint = 0;
};

struct TwoStepOptions {
  garch::GjrFitOptions garch = {};
  DccFitOptions dcc = {};
  int jobs = 1;  // first-step fits run one-per-asset in parallel
};

/// Per-asset GJR fits, de-GARCHing, residual sample correlation, then the
/// second-step DCC(-X) fit. Stage failures are annotated with the stage and
/// asset.
ModelFit two_step_fit(const ingest::AlignedDataset& dataset,
                      const DccSpec& spec, const TwoStepOptions& options = {});

}  // namespace corrx::dcc
