#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dcc.hpp"

namespace corrx::irf {

struct IrfOptions {
  /// Replace the news term by simulated innovations (averaged over draws
  /// with common random numbers) instead of its conditional expectation.
  bool stochastic = false;
  int draws = 500;
  std::uint64_t seed = 1;
};

struct IrfResult {
  std::vector<int> horizons;     // 0..H
  Eigen::VectorXd delta_rho;     // shocked minus baseline, percentage points
  Eigen::VectorXd delta_q;       // Q_ij deviation (recursion-space path)
  Eigen::VectorXd baseline_rho;  // baseline correlation path (constant for
                                 // the deterministic news convention)
  double shock_size = 0.0;       // raw regressor units
  int asset_i = 0;
  int asset_j = 0;
  std::string regressor;
  double normalized_sensitivity = 0.0;  // signed peak / shock
  std::string news;  // "expectation" or "stochastic"
};

/// Twin deterministic recursions for the correlation response of one pair to
/// a one-period exogenous shock. Both paths start at the baseline fixed
/// point; the news term uses its conditional expectation (so deviations obey
/// delta Q_{h+1} = (theta1 + theta2) delta Q_h exactly); the shocked path
/// raises regressor `name` by `shock` raw units at h = 0 only. Responses are
/// reported in percentage points of correlation. Throws DomainError for an
/// unknown regressor or bad pair, PdError if either path loses positive
/// definiteness.
IrfResult impulse_response(const dcc::DccFit& fit, const std::string& name,
                           int asset_i, int asset_j, int horizon,
                           double shock, const IrfOptions& options = {});

/// Same, with the shock defaulting to the in-sample standard deviation of
/// the raw regressor column in `dataset`.
IrfResult impulse_response(const dcc::DccFit& fit,
                           const ingest::AlignedDataset& dataset,
                           const std::string& name, int asset_i, int asset_j,
                           int horizon, const IrfOptions& options = {});

}  // namespace corrx::irf
