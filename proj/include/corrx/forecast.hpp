#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/dcc.hpp"

namespace corrx::forecast {

/// One-step-ahead conditional covariance H_{t+1} = S R S for a single date.
struct CovarianceForecast {
  Date date;
  Eigen::MatrixXd H;  // N x N, symmetric PD
};

/// The full hold-out forecast path of one model.
struct ForecastSet {
  std::string model_name;
  std::vector<CovarianceForecast> forecasts;
};

/// Filter state at time t, sufficient to forecast t+1: per-asset conditional
/// variances, the pseudo-correlation matrix and the standardized residuals.
struct ForecastState {
  Eigen::VectorXd h2;   // h^2_t, N entries
  Eigen::MatrixXd q;    // Q_t, N x N
  Eigen::VectorXd eps;  // de-GARCHed residuals at t, N entries
};

/// Short, file-safe label for a spec: "dcc" for no regressors, otherwise
/// "dccx-<r1>+<r2>..." with an "-break<YYYYMMDD>" suffix when one is set.
std::string spec_label(const dcc::DccSpec& spec);

/// Advances the fitted model one step: h^2_{t+1} from the GJR recursion on
/// r_t = eps_t * h_t, Q_{t+1} from the DCC-X recursion with x_t = next_exog
/// in the exogenous term, and H_{t+1} = S_{t+1} R_{t+1} S_{t+1}.
/// `next_exog` is in raw units; the fit's standardization scale is applied
/// internally. If `next_state` is non-null it receives h2 and Q advanced to
/// t+1 with eps left empty (fill it once r_{t+1} is observed). Throws
/// PdError if Q_{t+1} is not positive definite.
CovarianceForecast forecast_step(const dcc::ModelFit& fit,
                                 const ForecastState& state,
                                 const Eigen::VectorXd& next_exog,
                                 Date next_date,
                                 ForecastState* next_state = nullptr);

struct OosOptions {
  dcc::TwoStepOptions fit = {};
  /// Re-estimate on an expanding window every k hold-out steps (0 = never;
  /// the default fixed-parameter scheme estimates once on the in-sample
  /// span only).
  int refit_every = 0;
  int jobs = 1;  // specs forecast independently in parallel
};

/// One model's outcome inside an out-of-sample run.
struct OosModel {
  dcc::DccSpec spec;
  std::string name;           // spec_label(spec)
  bool ok = false;
  std::string error;          // failure message when !ok
  dcc::ModelFit fit;          // in-sample fit (valid when ok)
  ForecastSet forecasts;      // one entry per hold-out date (valid when ok)
};

struct OosRun {
  Date split_date;
  std::vector<Date> holdout_dates;
  std::vector<OosModel> models;

  /// Forecast sets of the successful models, in spec order.
  std::vector<ForecastSet> forecast_sets() const;
};

/// Fits every spec on data dated <= split_date, then walks the hold-out
/// span updating states with realized returns and exogenous values, one
/// covariance forecast per hold-out date per model. Estimation failures are
/// recorded per model; the remaining specs still run. Throws DomainError if
/// the split leaves no in-sample or no hold-out data.
OosRun oos_run(const ingest::AlignedDataset& dataset, Date split_date,
               const std::vector<dcc::DccSpec>& specs,
               const OosOptions& options = {});

}  // namespace corrx::forecast
