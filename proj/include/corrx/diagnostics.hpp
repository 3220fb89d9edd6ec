#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/dcc.hpp"

namespace corrx::diagnostics {

struct LjungBoxResult {
  double statistic = 0.0;
  int lags = 0;
  double pvalue = 1.0;
};

/// Portmanteau test Q = T (T+2) sum_{k=1..lags} acf_k^2 / (T - k) with a
/// chi-square(lags) upper-tail p-value. With `squared` the test runs on the
/// squared series (ARCH-flavored variant). Throws DomainError for short or
/// zero-variance input.
LjungBoxResult ljung_box(std::span<const double> series, int lags = 1,
                         bool squared = false);

/// Trailing-window statistic path with a constant exceedance threshold.
struct RollingSeries {
  std::vector<Date> dates;         // window-end dates
  Eigen::VectorXd values;          // NaN where a window was degenerate
  double threshold = 0.0;          // one sd of the finite values
  std::vector<bool> exceed_flags;  // value > threshold (false for NaN)
};

/// Pearson correlation over each trailing window of `window` observations.
/// Zero-variance windows yield NaN and never raise the exceed flag. The
/// threshold is one standard deviation of the rolling series itself,
/// computed once over the full sample.
RollingSeries rolling_correlation(std::span<const double> x,
                                  std::span<const double> y,
                                  std::span<const Date> dates,
                                  int window = 60);

/// Rolling re-estimates of the first exogenous coefficient.
struct RollingCoef {
  std::vector<Date> dates;      // window-end dates
  Eigen::VectorXd theta3;       // NaN where the window's estimation threw
  std::vector<bool> converged;  // optimizer flag (false for thrown windows)
};

/// Re-estimates the two-step model over [s, s + window) for s = 0, step,
/// 2*step, ... and records the first regressor's coefficient, dated by the
/// window's last observation. Workers process contiguous chunks of windows;
/// within a chunk each fit warm-starts from the previous window's optimum.
/// Throws DomainError for specs without regressors or T < window.
RollingCoef rolling_dccx(const ingest::AlignedDataset& dataset,
                         const dcc::DccSpec& spec, int window = 750,
                         int step = 1,
                         const dcc::TwoStepOptions& options = {},
                         int jobs = 1);

}  // namespace corrx::diagnostics
