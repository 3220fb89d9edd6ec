#include "corrx/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "corrx/errors.hpp"
#include "corrx/log.hpp"
#include "corrx/parallel.hpp"
#include "corrx/stats.hpp"

namespace corrx::diagnostics {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

LjungBoxResult ljung_box(std::span<const double> series, int lags,
                        bool squared) {
  const auto T = static_cast<long>(series.size());
  if (lags < 1) throw DomainError("ljung_box: need at least 1 lag");
  if (T <= lags + 1)
    throw DomainError("ljung_box: series too short for " +
                      std::to_string(lags) + " lags");

  std::vector<double> xs(series.begin(), series.end());
  if (squared)
    for (double& v : xs) v *= v;

  LjungBoxResult res;
  res.lags = lags;
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    const double rho = autocorrelation(xs, k);  // throws on zero variance
    q += rho * rho / static_cast<double>(T - k);
  }
  res.statistic = static_cast<double>(T) * static_cast<double>(T + 2) * q;
  res.pvalue = chi_squared_sf(res.statistic, static_cast<double>(lags));
  return res;
}

RollingSeries rolling_correlation(std::span<const double> x,
                                  std::span<const double> y,
                                  std::span<const Date> dates, int window) {
  const auto T = static_cast<long>(x.size());
  if (static_cast<long>(y.size()) != T ||
      static_cast<long>(dates.size()) != T)
    throw DomainError("rolling_correlation: input lengths differ");
  if (window < 2) throw DomainError("rolling_correlation: window too small");
  if (T < window)
    throw DomainError("rolling_correlation: series shorter than the window");

  RollingSeries out;
  const long n_windows = T - window + 1;
  out.values.resize(n_windows);
  out.dates.reserve(static_cast<std::size_t>(n_windows));
  for (long s = 0; s < n_windows; ++s) {
    const long end = s + window - 1;
    out.dates.push_back(dates[static_cast<std::size_t>(end)]);
    double mx = 0.0, my = 0.0;
    for (long t = s; t <= end; ++t) {
      mx += x[static_cast<std::size_t>(t)];
      my += y[static_cast<std::size_t>(t)];
    }
    mx /= window;
    my /= window;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (long t = s; t <= end; ++t) {
      const double dx = x[static_cast<std::size_t>(t)] - mx;
      const double dy = y[static_cast<std::size_t>(t)] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    out.values[s] =
        (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : kNaN;
  }

  // Constant threshold: one sd of the rolling path over the full sample.
  double sum = 0.0, sum2 = 0.0;
  long n_finite = 0;
  for (long s = 0; s < n_windows; ++s)
    if (std::isfinite(out.values[s])) {
      sum += out.values[s];
      sum2 += out.values[s] * out.values[s];
      ++n_finite;
    }
  if (n_finite >= 2) {
    const double m = sum / static_cast<double>(n_finite);
    const double var =
        (sum2 - static_cast<double>(n_finite) * m * m) /
        static_cast<double>(n_finite - 1);
    out.threshold = std::sqrt(std::max(var, 0.0));
  }
  out.exceed_flags.resize(static_cast<std::size_t>(n_windows));
  for (long s = 0; s < n_windows; ++s)
    out.exceed_flags[static_cast<std::size_t>(s)] =
        std::isfinite(out.values[s]) && out.values[s] > out.threshold;
  return out;
}

RollingCoef rolling_dccx(const ingest::AlignedDataset& dataset,
                         const dcc::DccSpec& spec, int window, int step,
                         const dcc::TwoStepOptions& options, int jobs) {
  if (spec.regressors.empty())
    throw DomainError("rolling_dccx: spec names no regressors");
  if (window < 20) throw DomainError("rolling_dccx: window too small");
  if (step < 1) throw DomainError("rolling_dccx: step must be positive");
  const auto T = static_cast<Eigen::Index>(dataset.dates().size());
  if (T < window)
    throw DomainError("rolling_dccx: dataset shorter than the window");

  // Break columns depend on the full calendar, so generate them once.
  const ingest::AlignedDataset full = dcc::materialize_break(dataset, spec);
  const dcc::DccSpec espec = dcc::expand_break_spec(spec, full.dates());

  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s + window <= T; s += step) starts.push_back(s);
  const std::size_t W = starts.size();

  RollingCoef out;
  out.dates.resize(W);
  out.theta3 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(W), kNaN);
  out.converged.assign(W, false);

  // One task per contiguous chunk so the warm-start chain stays local to a
  // worker and results do not depend on scheduling.
  const int workers = std::min<std::size_t>(resolve_jobs(jobs), W ? W : 1);
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const std::size_t lo = W * w / static_cast<std::size_t>(workers);
    const std::size_t hi = W * (w + 1) / static_cast<std::size_t>(workers);
    dcc::TwoStepOptions opts = options;
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::Index s = starts[i];
      out.dates[i] = full.dates()[static_cast<std::size_t>(s + window - 1)];
      try {
        dcc::ModelFit fit = dcc::two_step_fit(
            ingest::slice(full, s, s + window), espec, opts);
        out.theta3[static_cast<Eigen::Index>(i)] =
            fit.dcc_fit.params.theta_x[0];
        out.converged[i] = fit.dcc_fit.converged;
        opts.dcc.warm_start = fit.dcc_fit.params;
      } catch (const std::exception& e) {
        log_info("rolling_dccx: window ending %s failed: %s",
                 out.dates[i].to_string().c_str(), e.what());
        opts.dcc.warm_start = options.dcc.warm_start;  // fall back
      }
    }
  });
  return out;
}

}  // namespace corrx::diagnostics
