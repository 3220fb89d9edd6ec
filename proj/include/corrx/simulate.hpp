#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/dcc.hpp"
#include "corrx/garch.hpp"
#include "corrx/rng.hpp"

namespace corrx::simulate {

/// Exogenous driver: x_t = exp(z_t) with z_t a Gaussian AR(1)
///   z_t = log_mean + persistence (z_{t-1} - log_mean) + innovation_sd e_t,
/// or a caller-supplied fixed path.
struct ExogModel {
  std::string name = "X1";
  double log_mean = -2.8;
  double persistence = 0.95;
  double innovation_sd = 0.25;
  std::optional<Eigen::VectorXd> fixed_path;  // overrides the AR(1)

  void validate() const;  // persistence in [0,1), sd >= 0
};

/// Chooses log-space parameters so the stationary lognormal matches a target
/// level mean and standard deviation at the given persistence.
ExogModel calibrate_exog(double target_mean, double target_sd,
                         double persistence, const std::string& name = "X1");

/// One-time coefficient shift: theta_x[target] gains `delta` from
/// observation `at_index` (post burn-in indexing) onward.
struct BreakConfig {
  Eigen::Index at_index = 0;
  double delta = 0.0;
  std::size_t target = 0;
};

struct SimConfig {
  Eigen::Index T = 1000;
  Eigen::Index N = 2;
  std::vector<garch::GjrParams> gjr;      // one per asset
  dcc::DccParams dcc_params;              // theta_x sized like exog
  std::vector<std::string> regressor_names;
  Eigen::MatrixXd qbar;
  std::vector<ExogModel> exog;
  std::optional<BreakConfig> break_config;
  std::uint64_t seed = 1;
  dcc::ExogStyle style = dcc::ExogStyle::ones;
  Eigen::Index burn_in = 500;
  Date start_date = Date::from_ymd(2015, 1, 5);
  std::vector<std::string> asset_names;   // defaults to A1..AN

  void validate() const;
};

struct SimResult {
  ingest::ReturnPanel returns;
  std::vector<ingest::ExogenousSeries> exog;
  Eigen::MatrixXd h2_true;  // T x N conditional variances
  dcc::DccPath truth;       // true Q and R paths, post burn-in
  std::optional<Date> break_date;

  /// Returns and exogenous series bundled on the shared date index.
  ingest::AlignedDataset dataset() const;
};

/// The exogenous path exactly as simulate_panel would generate it (same
/// substream), without simulating returns.
ingest::ExogenousSeries simulate_exog(const SimConfig& config,
                                      std::size_t k = 0);

/// Runs Eq-style GJR + DCC-X recursions forward with Gaussian innovations,
/// drawing r_t ~ N(0, H_t) through the symmetric square root of H_t.
/// Deterministic for a given seed. Throws PdError if any H_t eigenvalue
/// drops below 1e-12.
SimResult simulate_panel(const SimConfig& config);

}  // namespace corrx::simulate
