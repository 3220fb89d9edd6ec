#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrx/dates.hpp"

namespace corrx::ingest {

/// Date-indexed panel of raw levels (prices, yields, index values).
/// Missing cells are stored as NaN and surfaced, never silently filled.
struct RawPanel {
  std::vector<Date> dates;
  std::vector<std::string> columns;  // header order, date column excluded
  Eigen::MatrixXd values;            // T x C, NaN = missing

  Eigen::Index col_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// A dated numeric column (a transformed return series, typically).
struct Series {
  std::string name;
  std::vector<Date> dates;
  Eigen::VectorXd values;
};

enum class ExogKind { continuous, dummy, interaction };

const char* exog_kind_name(ExogKind k);

/// Exogenous driver of the correlation dynamics.
struct ExogenousSeries {
  std::string name;
  std::vector<Date> dates;
  Eigen::VectorXd values;
  ExogKind kind = ExogKind::continuous;

  /// Enforces the per-kind invariants (dummy in {0,1}, continuous >= 0,
  /// everything finite). Throws DomainError.
  void validate() const;
};

/// T x N matrix of transformed returns on a strictly increasing date index.
struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<std::string> asset_names;
  Eigen::MatrixXd values;  // T x N

  Eigen::Index asset_index(const std::string& name) const;
  void validate() const;
};

/// Returns and exogenous series on one shared date index.
struct AlignedDataset {
  ReturnPanel returns;
  std::vector<ExogenousSeries> exog;
  std::size_t dropped_rows = 0;  // rows discarded while intersecting

  const std::vector<Date>& dates() const { return returns.dates; }
  Eigen::Index exog_index(const std::string& name) const;
  /// T x K matrix for the named regressors; throws DomainError naming the
  /// first unknown column.
  Eigen::MatrixXd exog_matrix(const std::vector<std::string>& names) const;
  /// Dataset with one more exogenous column appended (same date index).
  AlignedDataset with_extra_exog(ExogenousSeries s) const;
  /// Order-sensitive content hash of dates, names and values.
  std::uint64_t fingerprint() const;
};

struct StatsRow {
  double mean = 0.0;
  double std = 0.0;       // sample, divisor T-1
  double skewness = 0.0;  // m3 / m2^{3/2}
  double kurtosis = 0.0;  // m4 / m2^2, normal = 3
};

/// Closed calendar interval; an empty end means open-ended.
struct DateInterval {
  Date start;
  std::optional<Date> end;
};

/// Loads a CSV panel whose `date_column` holds ISO-8601 dates. Rows are
/// sorted by date; duplicate dates, ragged rows and unparseable fields each
/// raise their own error type. Blank cells become missing values.
RawPanel load_raw_panel(const std::string& path,
                        const std::string& date_column = "date");

/// Forward-fills interior missing cells column by column (leading gaps stay
/// missing). Backing for the --ffill flag.
RawPanel forward_fill(RawPanel panel);

/// r_t = scale * ln(P_t / P_{t-1}) over the column's non-missing span.
/// Output is dated by the later date of each pair.
Series log_returns(const RawPanel& panel, const std::string& column,
                   double scale = 100.0);

/// First differences scale * (y_t - y_{t-1}); scale=100 expresses a
/// percentage-point yield change in basis points.
Series yield_changes(const RawPanel& panel, const std::string& column,
                     double scale = 1.0);

/// 1 on dates inside any interval, 0 elsewhere. Intervals must be
/// non-overlapping and in order; only the last may be open-ended.
ExogenousSeries regime_dummy(const std::vector<Date>& dates,
                             const std::vector<DateInterval>& intervals,
                             const std::string& name = "DUMMY");

/// Elementwise product of a series with a dummy; kind = interaction.
ExogenousSeries interaction(const ExogenousSeries& x, const ExogenousSeries& d);

/// Extracts one column of a raw panel as an exogenous series (values must
/// all be present over the panel's span).
ExogenousSeries exog_from_panel(const RawPanel& panel,
                                const std::string& column,
                                ExogKind kind = ExogKind::continuous);

/// Stacks dated columns into a ReturnPanel on the intersection of their
/// date indices.
ReturnPanel build_return_panel(const std::vector<Series>& columns);

/// Intersects the return panel's dates with every exogenous series' dates.
/// Throws AlignmentError when the intersection is empty.
AlignedDataset align(const ReturnPanel& returns,
                     const std::vector<ExogenousSeries>& exog);

/// Row range [lo, hi) of an aligned dataset (returns and every exogenous
/// series). Throws DomainError for an empty or out-of-range window.
AlignedDataset slice(const AlignedDataset& dataset, Eigen::Index lo,
                     Eigen::Index hi);

/// Mean / sample std / skewness / kurtosis. Needs T >= 4 and nonzero
/// variance.
StatsRow descriptive_stats(std::span<const double> series);

/// Shipped default regime intervals (two four-year administrations, the
/// second open-ended).
std::vector<DateInterval> default_regime_intervals();

}  // namespace corrx::ingest
