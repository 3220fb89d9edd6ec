#include "corrx/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <utility>

#include "corrx/csv.hpp"
#include "corrx/errors.hpp"
#include "corrx/stats.hpp"

namespace corrx::ingest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const std::string& column,
                  const Date& date) {
  const std::string cell = trimmed(raw);
  if (cell.empty()) return kNaN;
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError("column '" + column + "' on " + date.to_string() +
                     ": cannot parse numeric value '" + cell + "'");
  return v;
}

void require_increasing(const std::vector<Date>& dates, const char* what) {
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (dates[t] <= dates[t - 1])
      throw DomainError(std::string(what) + ": date index must be strictly "
                        "increasing (violated at " + dates[t].to_string() + ")");
  }
}

}  // namespace

Eigen::Index RawPanel::col_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<Eigen::Index>(j);
  throw DomainError("unknown column '" + name + "'");
}

bool RawPanel::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const char* exog_kind_name(ExogKind k) {
  switch (k) {
    case ExogKind::continuous: return "continuous";
    case ExogKind::dummy: return "dummy";
    case ExogKind::interaction: return "interaction";
  }
  return "unknown";
}

void ExogenousSeries::validate() const {
  if (static_cast<std::size_t>(values.size()) != dates.size())
    throw DomainError("exogenous series '" + name +
                      "': dates and values differ in length");
  require_increasing(dates, name.c_str());
  for (Eigen::Index t = 0; t < values.size(); ++t) {
    const double v = values[t];
    if (!std::isfinite(v))
      throw DomainError("exogenous series '" + name + "' on " +
                        dates[static_cast<std::size_t>(t)].to_string() +
                        ": value is not finite");
    if (kind == ExogKind::dummy && v != 0.0 && v != 1.0)
      throw DomainError("dummy series '" + name + "' on " +
                        dates[static_cast<std::size_t>(t)].to_string() +
                        ": value must be 0 or 1");
    if (kind == ExogKind::continuous && v < 0.0)
      throw DomainError("continuous series '" + name + "' on " +
                        dates[static_cast<std::size_t>(t)].to_string() +
                        ": value must be non-negative");
  }
}

Eigen::Index ReturnPanel::asset_index(const std::string& name) const {
  for (std::size_t j = 0; j < asset_names.size(); ++j)
    if (asset_names[j] == name) return static_cast<Eigen::Index>(j);
  throw DomainError("unknown asset '" + name + "'");
}

void ReturnPanel::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(dates.size()))
    throw DomainError("return panel: dates and rows differ in length");
  if (values.cols() != static_cast<Eigen::Index>(asset_names.size()))
    throw DomainError("return panel: asset names and columns differ");
  require_increasing(dates, "return panel");
  if (!values.allFinite())
    throw DomainError("return panel: values must all be finite");
}

Eigen::Index AlignedDataset::exog_index(const std::string& name) const {
  for (std::size_t k = 0; k < exog.size(); ++k)
    if (exog[k].name == name) return static_cast<Eigen::Index>(k);
  throw DomainError("unknown exogenous series '" + name + "'");
}

Eigen::MatrixXd AlignedDataset::exog_matrix(
    const std::vector<std::string>& names) const {
  const auto T = static_cast<Eigen::Index>(dates().size());
  Eigen::MatrixXd X(T, static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k)
    X.col(static_cast<Eigen::Index>(k)) = exog[static_cast<std::size_t>(
        exog_index(names[k]))].values;
  return X;
}

AlignedDataset AlignedDataset::with_extra_exog(ExogenousSeries s) const {
  if (s.dates != dates())
    throw AlignmentError("extra exogenous series '" + s.name +
                         "' is not on the dataset's date index");
  s.validate();
  AlignedDataset out = *this;
  out.exog.push_back(std::move(s));
  return out;
}

namespace {

std::uint64_t hash_string(const std::string& s, std::uint64_t h) {
  const std::uint64_t n = s.size();
  h = fnv1a(&n, sizeof(n), h);
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace

std::uint64_t AlignedDataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& d : dates()) h = fnv1a(&d.days, sizeof(d.days), h);
  for (const auto& a : returns.asset_names) h = hash_string(a, h);
  h = fnv1a_doubles({returns.values.data(),
                     static_cast<std::size_t>(returns.values.size())}, h);
  for (const auto& x : exog) {
    h = hash_string(x.name, h);
    const int kind = static_cast<int>(x.kind);
    h = fnv1a(&kind, sizeof(kind), h);
    h = fnv1a_doubles({x.values.data(),
                       static_cast<std::size_t>(x.values.size())}, h);
  }
  return h;
}

RawPanel load_raw_panel(const std::string& path,
                        const std::string& date_column) {
  const CsvTable table = read_csv(path);
  if (table.header.empty())
    throw ParseError(path + ": empty header row");

  std::size_t date_col = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (trimmed(table.header[j]) == date_column) { date_col = j; break; }
  if (date_col == table.header.size())
    throw ParseError(path + ": date column '" + date_column + "' not found");

  RawPanel panel;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (j != date_col) panel.columns.push_back(trimmed(table.header[j]));

  const auto T = table.rows.size();
  const auto C = panel.columns.size();
  std::vector<Date> raw_dates(T);
  for (std::size_t i = 0; i < T; ++i)
    raw_dates[i] = Date::parse(trimmed(table.rows[i][date_col]));

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return raw_dates[a] < raw_dates[b];
                   });
  for (std::size_t i = 1; i < T; ++i)
    if (raw_dates[order[i]] == raw_dates[order[i - 1]])
      throw DuplicateDateError(path + ": duplicate date " +
                               raw_dates[order[i]].to_string());

  panel.dates.resize(T);
  panel.values.resize(static_cast<Eigen::Index>(T),
                      static_cast<Eigen::Index>(C));
  for (std::size_t i = 0; i < T; ++i) {
    const auto& row = table.rows[order[i]];
    panel.dates[i] = raw_dates[order[i]];
    std::size_t c = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == date_col) continue;
      panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          parse_cell(row[j], panel.columns[c], panel.dates[i]);
      ++c;
    }
  }
  return panel;
}

RawPanel forward_fill(RawPanel panel) {
  for (Eigen::Index j = 0; j < panel.values.cols(); ++j) {
    double last = kNaN;
    for (Eigen::Index t = 0; t < panel.values.rows(); ++t) {
      double& v = panel.values(t, j);
      if (std::isnan(v)) {
        if (!std::isnan(last)) v = last;
      } else {
        last = v;
      }
    }
  }
  return panel;
}

namespace {

/// [first, last] span of non-missing values; interior gaps are an error.
std::pair<Eigen::Index, Eigen::Index> contiguous_span(
    const RawPanel& panel, Eigen::Index col, const std::string& column) {
  const auto T = panel.values.rows();
  Eigen::Index first = -1;
  Eigen::Index last = -1;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (!std::isnan(panel.values(t, col))) {
      if (first < 0) first = t;
      last = t;
    }
  }
  if (first < 0)
    throw DomainError("column '" + column + "' has no observations");
  for (Eigen::Index t = first; t <= last; ++t)
    if (std::isnan(panel.values(t, col)))
      throw MissingCellError(
          "column '" + column + "' is missing on " +
          panel.dates[static_cast<std::size_t>(t)].to_string() +
          " (inside its observed span; consider forward filling)");
  return {first, last};
}

}  // namespace

Series log_returns(const RawPanel& panel, const std::string& column,
                   double scale) {
  const Eigen::Index col = panel.col_index(column);
  const auto [first, last] = contiguous_span(panel, col, column);
  if (last - first < 1)
    throw DomainError("column '" + column +
                      "': need at least two observations for returns");
  Series out;
  out.name = column;
  const Eigen::Index T = last - first;
  out.dates.resize(static_cast<std::size_t>(T));
  out.values.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double prev = panel.values(first + t, col);
    const double curr = panel.values(first + t + 1, col);
    if (prev <= 0.0 || curr <= 0.0)
      throw DomainError(
          "column '" + column + "' on " +
          panel.dates[static_cast<std::size_t>(first + t + 1)].to_string() +
          ": log returns need strictly positive levels");
    out.values[t] = scale * std::log(curr / prev);
    out.dates[static_cast<std::size_t>(t)] =
        panel.dates[static_cast<std::size_t>(first + t + 1)];
  }
  return out;
}

Series yield_changes(const RawPanel& panel, const std::string& column,
                     double scale) {
  const Eigen::Index col = panel.col_index(column);
  const auto [first, last] = contiguous_span(panel, col, column);
  if (last - first < 1)
    throw DomainError("column '" + column +
                      "': need at least two observations for changes");
  Series out;
  out.name = column;
  const Eigen::Index T = last - first;
  out.dates.resize(static_cast<std::size_t>(T));
  out.values.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    out.values[t] =
        scale * (panel.values(first + t + 1, col) - panel.values(first + t, col));
    out.dates[static_cast<std::size_t>(t)] =
        panel.dates[static_cast<std::size_t>(first + t + 1)];
  }
  return out;
}

ExogenousSeries regime_dummy(const std::vector<Date>& dates,
                             const std::vector<DateInterval>& intervals,
                             const std::string& name) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (iv.end && *iv.end < iv.start)
      throw DomainError("regime interval ends (" + iv.end->to_string() +
                        ") before it starts (" + iv.start.to_string() + ")");
    if (i > 0) {
      const auto& prev = intervals[i - 1];
      if (!prev.end)
        throw DomainError("open-ended regime interval must be the last one");
      if (iv.start <= *prev.end)
        throw DomainError("regime intervals overlap at " +
                          iv.start.to_string());
    }
  }
  ExogenousSeries out;
  out.name = name;
  out.dates = dates;
  out.kind = ExogKind::dummy;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dates.size()));
  for (std::size_t t = 0; t < dates.size(); ++t) {
    for (const auto& iv : intervals) {
      const bool inside =
          dates[t] >= iv.start && (!iv.end || dates[t] <= *iv.end);
      if (inside) { out.values[static_cast<Eigen::Index>(t)] = 1.0; break; }
    }
  }
  out.validate();
  return out;
}

ExogenousSeries interaction(const ExogenousSeries& x,
                            const ExogenousSeries& d) {
  if (d.kind != ExogKind::dummy)
    throw DomainError("interaction: second series '" + d.name +
                      "' must be a dummy");
  if (x.dates != d.dates)
    throw AlignmentError("interaction: '" + x.name + "' and '" + d.name +
                         "' are on different date indices");
  ExogenousSeries out;
  out.name = x.name + "x" + d.name;
  out.dates = x.dates;
  out.values = x.values.cwiseProduct(d.values);
  out.kind = ExogKind::interaction;
  out.validate();
  return out;
}

ExogenousSeries exog_from_panel(const RawPanel& panel,
                                const std::string& column, ExogKind kind) {
  const Eigen::Index col = panel.col_index(column);
  const auto [first, last] = contiguous_span(panel, col, column);
  ExogenousSeries out;
  out.name = column;
  out.kind = kind;
  const Eigen::Index T = last - first + 1;
  out.dates.assign(panel.dates.begin() + first, panel.dates.begin() + last + 1);
  out.values = panel.values.col(col).segment(first, T);
  out.validate();
  return out;
}

ReturnPanel build_return_panel(const std::vector<Series>& columns) {
  if (columns.empty()) throw DomainError("return panel needs at least one asset");
  std::vector<Date> common = columns.front().dates;
  for (std::size_t j = 1; j < columns.size(); ++j) {
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(),
                          columns[j].dates.begin(), columns[j].dates.end(),
                          std::back_inserter(next));
    common.swap(next);
  }
  if (common.empty())
    throw AlignmentError("return series share no common dates");

  ReturnPanel panel;
  panel.dates = common;
  panel.values.resize(static_cast<Eigen::Index>(common.size()),
                      static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    panel.asset_names.push_back(columns[j].name);
    std::size_t src = 0;
    for (std::size_t t = 0; t < common.size(); ++t) {
      while (columns[j].dates[src] < common[t]) ++src;
      panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
          columns[j].values[static_cast<Eigen::Index>(src)];
    }
  }
  panel.validate();
  return panel;
}

AlignedDataset align(const ReturnPanel& returns,
                     const std::vector<ExogenousSeries>& exog) {
  returns.validate();
  for (const auto& x : exog) x.validate();

  std::vector<Date> common = returns.dates;
  for (const auto& x : exog) {
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), x.dates.begin(),
                          x.dates.end(), std::back_inserter(next));
    common.swap(next);
  }
  if (common.empty())
    throw AlignmentError("returns and exogenous series share no common dates");

  std::size_t dropped = returns.dates.size() - common.size();
  for (const auto& x : exog) dropped += x.dates.size() - common.size();

  AlignedDataset out;
  out.dropped_rows = dropped;
  out.returns.asset_names = returns.asset_names;
  out.returns.dates = common;
  out.returns.values.resize(static_cast<Eigen::Index>(common.size()),
                            returns.values.cols());
  {
    std::size_t src = 0;
    for (std::size_t t = 0; t < common.size(); ++t) {
      while (returns.dates[src] < common[t]) ++src;
      out.returns.values.row(static_cast<Eigen::Index>(t)) =
          returns.values.row(static_cast<Eigen::Index>(src));
    }
  }
  for (const auto& x : exog) {
    ExogenousSeries cut;
    cut.name = x.name;
    cut.kind = x.kind;
    cut.dates = common;
    cut.values.resize(static_cast<Eigen::Index>(common.size()));
    std::size_t src = 0;
    for (std::size_t t = 0; t < common.size(); ++t) {
      while (x.dates[src] < common[t]) ++src;
      cut.values[static_cast<Eigen::Index>(t)] =
          x.values[static_cast<Eigen::Index>(src)];
    }
    out.exog.push_back(std::move(cut));
  }
  out.returns.validate();
  return out;
}

AlignedDataset slice(const AlignedDataset& dataset, Eigen::Index lo,
                     Eigen::Index hi) {
  const auto T = static_cast<Eigen::Index>(dataset.dates().size());
  if (lo < 0 || hi > T || lo >= hi)
    throw DomainError("slice: window [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ") invalid for " +
                      std::to_string(T) + " rows");

  AlignedDataset out;
  out.returns.asset_names = dataset.returns.asset_names;
  out.returns.dates.assign(
      dataset.returns.dates.begin() + lo, dataset.returns.dates.begin() + hi);
  out.returns.values = dataset.returns.values.middleRows(lo, hi - lo);
  for (const auto& x : dataset.exog) {
    ExogenousSeries cut;
    cut.name = x.name;
    cut.kind = x.kind;
    cut.dates = out.returns.dates;
    cut.values = x.values.segment(lo, hi - lo);
    out.exog.push_back(std::move(cut));
  }
  out.returns.validate();
  return out;
}

StatsRow descriptive_stats(std::span<const double> series) {
  if (series.size() < 4)
    throw DomainError("descriptive statistics need at least 4 observations");
  StatsRow row;
  row.mean = corrx::mean(series);
  row.std = corrx::stddev(series);
  row.skewness = corrx::skewness(series);
  row.kurtosis = corrx::kurtosis(series);
  return row;
}

std::vector<DateInterval> default_regime_intervals() {
  return {
      {Date::from_ymd(2017, 1, 20), Date::from_ymd(2021, 1, 19)},
      {Date::from_ymd(2025, 1, 20), std::nullopt},
  };
}

}  // namespace corrx::ingest
