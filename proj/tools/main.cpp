// corrx: command-line front end for the time-varying correlation toolkit.
//
// Subcommands: stats, estimate, forecast, evaluate, irf, break-test, roll,
// simulate. Every command is deterministic given its configuration and
// --seed; reruns produce byte-identical outputs. Exit codes: 0 on success,
// 1 when a computation fails, 2 for input or configuration errors.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrx/csv.hpp"
#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/dcc.hpp"
#include "corrx/diagnostics.hpp"
#include "corrx/errors.hpp"
#include "corrx/evaluation.hpp"
#include "corrx/forecast.hpp"
#include "corrx/garch.hpp"
#include "corrx/irf.hpp"
#include "corrx/log.hpp"
#include "corrx/serialize.hpp"
#include "corrx/simulate.hpp"

namespace {

using corrx::Date;
using corrx::DomainError;
using corrx::serialize::json;
namespace fs = std::filesystem;
namespace ingest = corrx::ingest;
namespace dcc = corrx::dcc;

constexpr int kOk = 0;
constexpr int kComputeError = 1;
constexpr int kInputError = 2;

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct Opts {
  std::string input;
  std::string exog;
  std::string config;
  std::string out_dir = ".";
  std::string spec = "none";
  std::string regressors;  // comma list, for --spec custom
  std::string split;
  std::vector<std::string> break_dates;
  std::string break_target;
  std::string exog_style = "ones";
  std::string loss = "all";
  std::string manifest;
  std::string pair;       // "A,B" for irf
  std::string regressor;  // irf regressor (default: first of the spec)
  std::string sim_config;
  double alpha = 0.05;
  double shock = 0.0;  // 0 = in-sample standard deviation
  int bootstrap_reps = 5000;
  int block_length = 0;  // 0 = ceil(T^{1/3})
  int window = 750;
  int step = 21;
  int corr_window = 60;
  int horizon = 250;
  int refit_every = 0;
  int draws = 500;
  int lb_lags = 10;
  long long T_override = 0;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool ffill = false;
  bool stochastic = false;
};

bool flag_given(const CLI::App* sub, const std::string& flag) {
  const CLI::Option* opt = sub->get_option_no_throw(flag);
  return opt != nullptr && opt->count() > 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Merges a JSON config file under the explicitly given flags (flags win).
/// Keys mirror the long flag names with underscores.
void apply_config(const CLI::App* sub, Opts& o) {
  if (o.config.empty()) return;
  const json doc = corrx::serialize::load_json(o.config);
  if (!doc.is_object())
    throw DomainError("config file " + o.config + " must hold a JSON object");

  auto unset = [&](const char* flag) { return !flag_given(sub, flag); };
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "input") {
        if (unset("--input")) o.input = value.get<std::string>();
      } else if (key == "exog") {
        if (unset("--exog")) o.exog = value.get<std::string>();
      } else if (key == "out_dir") {
        if (unset("--out-dir")) o.out_dir = value.get<std::string>();
      } else if (key == "spec") {
        if (unset("--spec")) o.spec = value.get<std::string>();
      } else if (key == "regressors") {
        if (unset("--regressors")) {
          if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) {
              if (!joined.empty()) joined += ',';
              joined += v.get<std::string>();
            }
            o.regressors = joined;
          } else {
            o.regressors = value.get<std::string>();
          }
        }
      } else if (key == "split") {
        if (unset("--split")) o.split = value.get<std::string>();
      } else if (key == "break_dates") {
        if (unset("--break-date"))
          o.break_dates = value.get<std::vector<std::string>>();
      } else if (key == "break_target") {
        if (unset("--break-target")) o.break_target = value.get<std::string>();
      } else if (key == "exog_style") {
        if (unset("--exog-style")) o.exog_style = value.get<std::string>();
      } else if (key == "loss") {
        if (unset("--loss")) o.loss = value.get<std::string>();
      } else if (key == "manifest") {
        if (unset("--manifest")) o.manifest = value.get<std::string>();
      } else if (key == "pair") {
        if (unset("--pair")) o.pair = value.get<std::string>();
      } else if (key == "regressor") {
        if (unset("--regressor")) o.regressor = value.get<std::string>();
      } else if (key == "sim_config") {
        if (unset("--sim-config")) o.sim_config = value.get<std::string>();
      } else if (key == "alpha") {
        if (unset("--alpha")) o.alpha = value.get<double>();
      } else if (key == "shock") {
        if (unset("--shock")) o.shock = value.get<double>();
      } else if (key == "bootstrap_reps") {
        if (unset("--bootstrap-reps")) o.bootstrap_reps = value.get<int>();
      } else if (key == "block_length") {
        if (unset("--block-length")) o.block_length = value.get<int>();
      } else if (key == "window") {
        if (unset("--window")) o.window = value.get<int>();
      } else if (key == "step") {
        if (unset("--step")) o.step = value.get<int>();
      } else if (key == "corr_window") {
        if (unset("--corr-window")) o.corr_window = value.get<int>();
      } else if (key == "horizon") {
        if (unset("--horizon")) o.horizon = value.get<int>();
      } else if (key == "refit_every") {
        if (unset("--refit-every")) o.refit_every = value.get<int>();
      } else if (key == "draws") {
        if (unset("--draws")) o.draws = value.get<int>();
      } else if (key == "lb_lags") {
        if (unset("--lb-lags")) o.lb_lags = value.get<int>();
      } else if (key == "T") {
        if (unset("--T")) o.T_override = value.get<long long>();
      } else if (key == "seed") {
        if (unset("--seed")) o.seed = value.get<std::uint64_t>();
      } else if (key == "jobs") {
        if (unset("--jobs")) o.jobs = value.get<int>();
      } else if (key == "ffill") {
        if (unset("--ffill")) o.ffill = value.get<bool>();
      } else if (key == "stochastic") {
        if (unset("--stochastic")) o.stochastic = value.get<bool>();
      } else {
        throw DomainError("unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("config key '" + key + "': " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Data pipeline
// ---------------------------------------------------------------------------

/// Treats every input column as an already-transformed return series; rows
/// missing in one column are dropped from the shared index (strict
/// intersection, no interpolation).
ingest::ReturnPanel load_returns(const Opts& o) {
  if (o.input.empty()) throw DomainError("this command requires --input");
  ingest::RawPanel raw = ingest::load_raw_panel(o.input);
  if (o.ffill) raw = ingest::forward_fill(std::move(raw));
  std::vector<ingest::Series> columns;
  for (const auto& name : raw.columns) {
    ingest::Series s;
    s.name = name;
    const Eigen::Index c = raw.col_index(name);
    std::vector<Date> dates;
    std::vector<double> values;
    for (std::size_t t = 0; t < raw.dates.size(); ++t) {
      const double v = raw.values(static_cast<Eigen::Index>(t), c);
      if (std::isnan(v)) continue;
      dates.push_back(raw.dates[t]);
      values.push_back(v);
    }
    s.dates = std::move(dates);
    s.values = Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
    columns.push_back(std::move(s));
  }
  return ingest::build_return_panel(columns);
}

ingest::ExogKind infer_kind(const Eigen::VectorXd& values) {
  for (Eigen::Index t = 0; t < values.size(); ++t)
    if (values[t] != 0.0 && values[t] != 1.0) return ingest::ExogKind::continuous;
  return ingest::ExogKind::dummy;
}

std::vector<ingest::ExogenousSeries> load_exog_columns(const Opts& o) {
  std::vector<ingest::ExogenousSeries> out;
  if (o.exog.empty()) return out;
  ingest::RawPanel raw = ingest::load_raw_panel(o.exog);
  if (o.ffill) raw = ingest::forward_fill(std::move(raw));
  for (const auto& name : raw.columns) {
    ingest::ExogenousSeries probe =
        ingest::exog_from_panel(raw, name, ingest::ExogKind::continuous);
    const ingest::ExogKind kind = infer_kind(probe.values);
    if (kind == ingest::ExogKind::dummy) probe.kind = kind;
    probe.validate();
    out.push_back(std::move(probe));
  }
  return out;
}

ingest::ExogenousSeries restrict_series(const ingest::ExogenousSeries& s,
                                        const std::vector<Date>& keep) {
  ingest::ExogenousSeries out;
  out.name = s.name;
  out.kind = s.kind;
  out.dates = keep;
  out.values.resize(static_cast<Eigen::Index>(keep.size()));
  std::size_t src = 0;
  for (std::size_t t = 0; t < keep.size(); ++t) {
    while (src < s.dates.size() && s.dates[src] < keep[t]) ++src;
    if (src >= s.dates.size() || s.dates[src] != keep[t])
      throw corrx::AlignmentError("series '" + s.name + "' is missing date " +
                                  keep[t].to_string());
    out.values[static_cast<Eigen::Index>(t)] =
        s.values[static_cast<Eigen::Index>(src)];
  }
  return out;
}

/// Owns the exogenous columns plus any derived regime dummy / interaction
/// series the requested specs need.
class ExogPool {
 public:
  ExogPool(std::vector<ingest::ExogenousSeries> file_series,
           const ingest::ReturnPanel& returns)
      : series_(std::move(file_series)), returns_(&returns) {}

  const std::vector<ingest::ExogenousSeries>& series() const { return series_; }

  const ingest::ExogenousSeries* find(const std::string& name) const {
    for (const auto& s : series_)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::string driver() const {
    for (const auto& s : series_)
      if (s.kind == ingest::ExogKind::continuous) return s.name;
    throw DomainError(
        "this spec needs a continuous exogenous column; supply one with "
        "--exog");
  }

  std::string dummy() {
    for (const auto& s : series_)
      if (s.kind == ingest::ExogKind::dummy) return s.name;
    series_.push_back(ingest::regime_dummy(
        returns_->dates, ingest::default_regime_intervals(), "DUMMY"));
    return "DUMMY";
  }

  std::string interaction() {
    const std::string xn = driver();
    const std::string dn = dummy();
    const std::string name = xn + "x" + dn;
    if (find(name) != nullptr) return name;
    const ingest::ExogenousSeries* x = find(xn);
    const ingest::ExogenousSeries* d = find(dn);
    std::vector<Date> common;
    std::set_intersection(x->dates.begin(), x->dates.end(), d->dates.begin(),
                          d->dates.end(), std::back_inserter(common));
    if (common.empty())
      throw corrx::AlignmentError("'" + xn + "' and '" + dn +
                                  "' share no common dates");
    series_.push_back(ingest::interaction(restrict_series(*x, common),
                                          restrict_series(*d, common)));
    return name;
  }

 private:
  std::vector<ingest::ExogenousSeries> series_;
  const ingest::ReturnPanel* returns_;
};

/// Resolves one --spec selection token into a regressor list.
dcc::DccSpec resolve_selection(const std::string& token, ExogPool& pool,
                               const Opts& o) {
  dcc::DccSpec spec;
  if (token == "none") {
    return spec;
  } else if (token == "tpu") {
    spec.regressors = {pool.driver()};
  } else if (token == "dummy") {
    spec.regressors = {pool.dummy()};
  } else if (token == "interaction") {
    spec.regressors = {pool.interaction()};
  } else if (token == "full") {
    spec.regressors = {pool.driver(), pool.dummy(), pool.interaction()};
  } else if (token == "custom") {
    const std::vector<std::string> names = split_list(o.regressors);
    if (names.empty())
      throw DomainError("--spec custom requires --regressors name[,name...]");
    for (const auto& n : names) {
      if (pool.find(n) == nullptr)
        throw DomainError("unknown regressor '" + n +
                          "' (not a column of the --exog file)");
      spec.regressors.push_back(n);
    }
  } else {
    throw DomainError(
        "unknown spec '" + token +
        "' (expected none|tpu|dummy|interaction|full|custom)");
  }
  return spec;
}

struct SpecRequest {
  std::string selection;
  dcc::DccSpec spec;
  std::string label;
};

struct Workspace {
  ingest::AlignedDataset dataset;
  std::vector<SpecRequest> requests;
};

/// Loads returns and exogenous data, resolves every requested spec (deriving
/// dummy/interaction series as needed), applies an optional break, and
/// aligns everything on one shared date index.
Workspace build_workspace(const Opts& o, bool allow_empty_spec = true) {
  ingest::ReturnPanel returns = load_returns(o);
  ExogPool pool(load_exog_columns(o), returns);

  std::vector<SpecRequest> requests;
  const std::vector<std::string> tokens = split_list(o.spec);
  if (tokens.empty()) throw DomainError("--spec must not be empty");
  for (const auto& token : tokens) {
    SpecRequest req;
    req.selection = token;
    req.spec = resolve_selection(token, pool, o);
    if (!allow_empty_spec && req.spec.regressors.empty())
      throw DomainError("spec '" + token +
                        "' has no regressors; this command needs at least "
                        "one");
    requests.push_back(std::move(req));
  }

  Workspace ws;
  ws.dataset = ingest::align(returns, pool.series());
  if (ws.dataset.dropped_rows > 0)
    corrx::log_info("alignment dropped %zu rows outside the shared date span",
                    ws.dataset.dropped_rows);

  // Breaks become part of the request; two_step_fit expands them.
  if (!o.break_dates.empty()) {
    bool applied = false;
    for (auto& req : requests) {
      if (req.spec.regressors.empty()) continue;
      req.spec.break_date = Date::parse(o.break_dates.front());
      req.spec.break_target = o.break_target.empty()
                                  ? req.spec.regressors.front()
                                  : o.break_target;
      req.spec.validate();
      applied = true;
    }
    if (!applied)
      throw DomainError(
          "--break-date needs a spec with at least one regressor");
  }
  for (auto& req : requests) req.label = corrx::forecast::spec_label(req.spec);
  ws.requests = std::move(requests);
  return ws;
}

dcc::TwoStepOptions fit_options(const Opts& o) {
  dcc::TwoStepOptions options;
  options.dcc.style = dcc::parse_exog_style(o.exog_style);
  options.jobs = o.jobs;
  return options;
}

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

std::string fnum(double v, int prec) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

/// Coefficient with two-sided normal significance stars.
std::string starred(double est, double se, int prec = 4) {
  std::string out = fnum(est, prec);
  if (std::isfinite(se) && se > 0.0 && std::isfinite(est)) {
    const double t = std::abs(est / se);
    if (t > 2.576)
      out += "***";
    else if (t > 1.960)
      out += "**";
    else if (t > 1.645)
      out += "*";
  }
  return out;
}

std::string paren_se(double se, int prec = 4) {
  if (!std::isfinite(se)) return "(n/a)";
  return "(" + fnum(se, prec) + ")";
}

class TextTable {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t i = 0; i < r.size(); ++i)
        width[i] = std::max(width[i], r[i].size());
    }
    std::string out;
    for (const auto& r : rows_) {
      std::string line;
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i == 0) {
          line += r[i];
          line.append(width[0] - r[i].size(), ' ');
        } else {
          line += "  ";
          line.append(width[i] - r[i].size(), ' ');
          line += r[i];
        }
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line;
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

void emit(std::string& report, const std::string& text) {
  report += text;
  std::fputs(text.c_str(), stdout);
}

void note_written(const std::string& path) {
  std::printf("wrote %s\n", path.c_str());
}

/// Runs the computational body of a command; failures there are exit code 1,
/// unlike setup errors which surface as exit code 2 from main().
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const corrx::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kComputeError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kComputeError;
  }
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const Opts& o) {
  std::vector<std::pair<std::string, ingest::RawPanel>> sources;
  {
    ingest::RawPanel raw = ingest::load_raw_panel(o.input);
    if (o.ffill) raw = ingest::forward_fill(std::move(raw));
    sources.emplace_back("input", std::move(raw));
  }
  if (!o.exog.empty()) {
    ingest::RawPanel raw = ingest::load_raw_panel(o.exog);
    if (o.ffill) raw = ingest::forward_fill(std::move(raw));
    sources.emplace_back("exog", std::move(raw));
  }
  fs::create_directories(o.out_dir);

  return guarded([&]() -> int {
    std::vector<std::pair<std::string, ingest::StatsRow>> rows;
    for (const auto& [tag, raw] : sources) {
      for (const auto& name : raw.columns) {
        const Eigen::Index c = raw.col_index(name);
        std::vector<double> values;
        for (Eigen::Index t = 0; t < raw.values.rows(); ++t)
          if (!std::isnan(raw.values(t, c)))
            values.push_back(raw.values(t, c));
        rows.emplace_back(name, ingest::descriptive_stats(values));
      }
    }

    const std::string path = (fs::path(o.out_dir) / "stats.csv").string();
    corrx::serialize::write_stats_csv(path, rows);

    TextTable table;
    table.row({"series", "mean", "std", "skewness", "kurtosis"});
    for (const auto& [name, s] : rows)
      table.row({name, fnum(s.mean, 4), fnum(s.std, 4), fnum(s.skewness, 4),
                 fnum(s.kurtosis, 4)});
    std::fputs(table.str().c_str(), stdout);
    note_written(path);
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct FitOutcome {
  SpecRequest request;
  bool ok = false;
  std::string error;
  dcc::ModelFit fit;
  std::optional<dcc::LrResult> lr;  // vs the no-regressor baseline
};

int cmd_estimate(const Opts& o) {
  if (o.break_dates.size() > 1)
    throw DomainError(
        "estimate accepts one --break-date; use break-test for several "
        "event dates");
  Workspace ws = build_workspace(o);
  fs::create_directories(o.out_dir);
  const dcc::TwoStepOptions options = fit_options(o);

  return guarded([&]() -> int {
    // The no-regressor baseline anchors the likelihood-ratio rows; fit it
    // even when not requested (its files are only written when requested).
    std::optional<dcc::ModelFit> baseline;
    std::string baseline_error;
    try {
      baseline = dcc::two_step_fit(ws.dataset, dcc::DccSpec{}, options);
    } catch (const corrx::Error& e) {
      baseline_error = e.what();
    }

    std::vector<FitOutcome> outcomes;
    for (const auto& req : ws.requests) {
      FitOutcome out;
      out.request = req;
      try {
        if (req.spec.regressors.empty() && !req.spec.has_break()) {
          if (!baseline.has_value()) throw corrx::Error(baseline_error);
          out.fit = *baseline;
        } else {
          out.fit = dcc::two_step_fit(ws.dataset, req.spec, options);
        }
        out.ok = true;
        if (baseline.has_value() && !out.fit.dcc_fit.spec.regressors.empty()) {
          try {
            out.lr = dcc::lr_test(baseline->dcc_fit, out.fit.dcc_fit);
          } catch (const corrx::Error& e) {
            corrx::log_info("LR test unavailable for %s: %s",
                            req.label.c_str(), e.what());
          }
        }
      } catch (const corrx::Error& e) {
        out.error = e.what();
        std::fprintf(stderr, "spec %s failed: %s\n", req.label.c_str(),
                     e.what());
      }
      outcomes.push_back(std::move(out));
    }

    int succeeded = 0;
    for (const auto& out : outcomes) {
      if (!out.ok) continue;
      ++succeeded;
      const std::string base = (fs::path(o.out_dir) / ("fit_" + out.request.label)).string();
      corrx::serialize::write_validated_json(
          base + ".json",
          corrx::serialize::model_fit_json(out.fit, &out.request.spec),
          "model_fit");
      note_written(base + ".json");
      const std::string rpath =
          (fs::path(o.out_dir) / ("rpath_" + out.request.label + ".csv"))
              .string();
      corrx::serialize::write_r_path_csv(rpath, ws.dataset.dates(),
                                         out.fit.dcc_fit.path.R,
                                         ws.dataset.returns.asset_names);
      note_written(rpath);
    }
    if (succeeded == 0) {
      std::fprintf(stderr, "error: every requested spec failed\n");
      return kComputeError;
    }

    // -------------------- three-panel text report --------------------
    const FitOutcome* anchor = nullptr;
    for (const auto& out : outcomes)
      if (out.ok) {
        anchor = &out;
        break;
      }

    std::string report;
    emit(report, "Two-step estimation over " +
                     std::to_string(ws.dataset.dates().size()) +
                     " observations, " +
                     ws.dataset.dates().front().to_string() + " to " +
                     ws.dataset.dates().back().to_string() + "\n\n");

    emit(report, "Panel (a): first step, GJR-GARCH(1,1) per asset\n");
    {
      TextTable t;
      t.row({"asset", "omega", "alpha", "beta", "gamma", "loglik", "conv"});
      for (const auto& g : anchor->fit.garch_fits) {
        t.row({g.asset, starred(g.params.omega, g.se_robust[0]),
               starred(g.params.alpha, g.se_robust[1]),
               starred(g.params.beta, g.se_robust[2]),
               starred(g.params.gamma, g.se_robust[3]), fnum(g.loglik, 2),
               g.converged ? "yes" : "no"});
        t.row({"", paren_se(g.se_robust[0]), paren_se(g.se_robust[1]),
               paren_se(g.se_robust[2]), paren_se(g.se_robust[3]), "", ""});
      }
      emit(report, t.str());
    }

    emit(report, "\nPanel (b): second step, correlation dynamics\n");
    {
      // Column order: baseline first, then every requested, successful spec
      // that is not itself the baseline.
      std::vector<const FitOutcome*> cols;
      FitOutcome base_col;
      if (baseline.has_value()) {
        base_col.request.label = corrx::forecast::spec_label(dcc::DccSpec{});
        base_col.fit = *baseline;
        base_col.ok = true;
        cols.push_back(&base_col);
      }
      for (const auto& out : outcomes)
        if (out.ok && !(out.fit.dcc_fit.spec.regressors.empty() &&
                        baseline.has_value()))
          cols.push_back(&out);

      std::vector<std::string> coef_rows;  // union of regressor names
      for (const FitOutcome* c : cols)
        for (const auto& name : c->fit.dcc_fit.spec.regressors)
          if (std::find(coef_rows.begin(), coef_rows.end(), name) ==
              coef_rows.end())
            coef_rows.push_back(name);

      auto coef_cell = [](const FitOutcome* c, const std::string& name,
                         bool se_line) -> std::string {
        const auto& regs = c->fit.dcc_fit.spec.regressors;
        const auto it = std::find(regs.begin(), regs.end(), name);
        if (it == regs.end()) return "";
        const auto k = static_cast<Eigen::Index>(it - regs.begin());
        const dcc::DccFit& f = c->fit.dcc_fit;
        if (se_line) return paren_se(f.se_robust[2 + k]);
        return starred(f.params.theta_x[k], f.se_robust[2 + k]);
      };

      TextTable t;
      {
        std::vector<std::string> head = {""};
        for (const FitOutcome* c : cols) head.push_back(c->request.label);
        t.row(head);
      }
      auto param_row = [&](const std::string& label, auto value,
                          auto se_value) {
        std::vector<std::string> est = {label}, se = {""};
        for (const FitOutcome* c : cols) {
          est.push_back(starred(value(c), se_value(c)));
          se.push_back(paren_se(se_value(c)));
        }
        t.row(est);
        t.row(se);
      };
      param_row(
          "theta1",
          [](const FitOutcome* c) { return c->fit.dcc_fit.params.theta1; },
          [](const FitOutcome* c) { return c->fit.dcc_fit.se_robust[0]; });
      param_row(
          "theta2",
          [](const FitOutcome* c) { return c->fit.dcc_fit.params.theta2; },
          [](const FitOutcome* c) { return c->fit.dcc_fit.se_robust[1]; });
      for (const auto& name : coef_rows) {
        std::vector<std::string> est = {name}, se = {""};
        for (const FitOutcome* c : cols) {
          est.push_back(coef_cell(c, name, false));
          se.push_back(coef_cell(c, name, true));
        }
        t.row(est);
        t.row(se);
      }
      auto stat_row = [&](const std::string& label, auto value) {
        std::vector<std::string> r = {label};
        for (const FitOutcome* c : cols) r.push_back(value(c));
        t.row(r);
      };
      stat_row("loglik", [](const FitOutcome* c) {
        return fnum(c->fit.dcc_fit.loglik, 2);
      });
      stat_row("AIC", [](const FitOutcome* c) {
        return fnum(c->fit.dcc_fit.aic, 2);
      });
      stat_row("BIC", [](const FitOutcome* c) {
        return fnum(c->fit.dcc_fit.bic, 2);
      });
      stat_row("LR vs dcc", [](const FitOutcome* c) {
        return c->lr.has_value() ? fnum(c->lr->stat, 3) : std::string("");
      });
      stat_row("LR p-value", [](const FitOutcome* c) {
        return c->lr.has_value() ? fnum(c->lr->pvalue, 4) : std::string("");
      });
      emit(report, t.str());
      emit(report,
           "significance: * |t| > 1.645, ** |t| > 1.96, *** |t| > 2.576\n");
    }

    emit(report, "\nPanel (c): Ljung-Box on standardized residuals, lag " +
                     std::to_string(o.lb_lags) + "\n");
    {
      TextTable t;
      t.row({"asset", "Q(levels)", "p", "Q(squares)", "p"});
      for (const auto& g : anchor->fit.garch_fits) {
        const std::span<const double> eps(g.residuals.data(),
                                          static_cast<std::size_t>(
                                              g.residuals.size()));
        const auto lvl = corrx::diagnostics::ljung_box(eps, o.lb_lags, false);
        const auto sqr = corrx::diagnostics::ljung_box(eps, o.lb_lags, true);
        t.row({g.asset, fnum(lvl.statistic, 2), fnum(lvl.pvalue, 4),
               fnum(sqr.statistic, 2), fnum(sqr.pvalue, 4)});
      }
      emit(report, t.str());
    }

    const std::string report_path =
        (fs::path(o.out_dir) / "estimate_report.txt").string();
    {
      std::FILE* f = std::fopen(report_path.c_str(), "w");
      if (f == nullptr)
        throw corrx::FileError("cannot create " + report_path);
      std::fputs(report.c_str(), f);
      std::fclose(f);
    }
    note_written(report_path);
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

int cmd_forecast(const Opts& o) {
  Workspace ws = build_workspace(o);
  if (o.split.empty())
    throw DomainError("forecast requires --split YYYY-MM-DD");
  const Date split = Date::parse(o.split);
  fs::create_directories(o.out_dir);

  corrx::forecast::OosOptions options;
  options.fit = fit_options(o);
  options.refit_every = o.refit_every;
  options.jobs = o.jobs;

  return guarded([&]() -> int {
    std::vector<dcc::DccSpec> specs;
    for (const auto& req : ws.requests) specs.push_back(req.spec);
    const corrx::forecast::OosRun run =
        corrx::forecast::oos_run(ws.dataset, split, specs, options);

    std::vector<std::string> files(run.models.size());
    int succeeded = 0;
    for (std::size_t m = 0; m < run.models.size(); ++m) {
      const auto& model = run.models[m];
      if (!model.ok) {
        std::fprintf(stderr, "model %s failed: %s\n", model.name.c_str(),
                     model.error.c_str());
        continue;
      }
      ++succeeded;
      files[m] = "forecast_" + model.name + ".csv";
      const std::string path = (fs::path(o.out_dir) / files[m]).string();
      corrx::serialize::write_forecast_csv(path, model.forecasts,
                                           ws.dataset.returns.asset_names);
      note_written(path);
    }

    const std::string manifest_path =
        (fs::path(o.out_dir) / "forecast_manifest.json").string();
    corrx::serialize::write_validated_json(
        manifest_path,
        corrx::serialize::forecast_manifest_json(
            run, files, ws.dataset.returns.asset_names),
        "forecast_manifest");
    note_written(manifest_path);

    std::printf("split %s, %zu hold-out dates, %d/%zu models succeeded\n",
                run.split_date.to_string().c_str(), run.holdout_dates.size(),
                succeeded, run.models.size());
    return succeeded > 0 ? kOk : kComputeError;
  });
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(const Opts& o) {
  const std::string manifest_path =
      o.manifest.empty()
          ? (fs::path(o.out_dir) / "forecast_manifest.json").string()
          : o.manifest;
  const json manifest = corrx::serialize::load_json(manifest_path);
  corrx::serialize::validate_shipped(manifest, "forecast_manifest");
  const fs::path base = fs::path(manifest_path).parent_path();

  const auto assets = manifest.at("assets").get<std::vector<std::string>>();
  ingest::ReturnPanel realized;
  {
    const ingest::ReturnPanel panel = load_returns(o);
    realized.dates = panel.dates;
    realized.asset_names = assets;
    realized.values.resize(panel.values.rows(),
                           static_cast<Eigen::Index>(assets.size()));
    for (std::size_t a = 0; a < assets.size(); ++a)
      realized.values.col(static_cast<Eigen::Index>(a)) =
          panel.values.col(panel.asset_index(assets[a]));
  }

  std::vector<corrx::evaluation::LossKind> kinds;
  if (o.loss == "all") {
    kinds = {corrx::evaluation::LossKind::frobenius,
             corrx::evaluation::LossKind::qlike,
             corrx::evaluation::LossKind::gmv,
             corrx::evaluation::LossKind::rpv};
  } else {
    kinds = {corrx::evaluation::parse_loss_kind(o.loss)};
  }
  fs::create_directories(o.out_dir);

  return guarded([&]() -> int {
    std::vector<corrx::forecast::ForecastSet> sets;
    for (const auto& entry : manifest.at("models")) {
      if (!entry.at("ok").get<bool>() || entry.at("file").is_null()) continue;
      const std::string file = entry.at("file").get<std::string>();
      sets.push_back(corrx::serialize::read_forecast_csv(
          (base / file).string(), entry.at("name").get<std::string>()));
    }
    if (sets.size() < 2)
      throw DomainError("evaluate needs at least two successful forecast "
                        "sets in the manifest");

    corrx::evaluation::McsOptions mcs_options;
    mcs_options.replications = o.bootstrap_reps;
    mcs_options.block_length = o.block_length;
    mcs_options.seed = o.seed;
    mcs_options.jobs = o.jobs;

    TextTable summary;
    {
      std::vector<std::string> head = {"model"};
      for (const auto& kind : kinds)
        head.push_back(corrx::evaluation::loss_kind_name(kind));
      summary.row(head);
    }
    std::vector<std::vector<std::string>> pcols;
    std::vector<std::string> model_names;
    for (const auto& kind : kinds) {
      const corrx::evaluation::LossMatrix losses =
          corrx::evaluation::build_loss_matrix(sets, realized, kind, o.jobs);
      const std::string loss_name = losses.loss_name;
      const std::string loss_csv =
          (fs::path(o.out_dir) / ("losses_" + loss_name + ".csv")).string();
      corrx::serialize::write_losses_csv(loss_csv, losses);
      note_written(loss_csv);

      const corrx::evaluation::McsResult result =
          corrx::evaluation::mcs(losses, o.alpha, mcs_options);
      const std::string report_path =
          (fs::path(o.out_dir) / ("mcs_" + loss_name + ".json")).string();
      corrx::serialize::write_validated_json(
          report_path,
          corrx::serialize::mcs_report_json(result, loss_name, mcs_options),
          "mcs_report");
      note_written(report_path);

      if (model_names.empty()) model_names = result.model_names;
      std::vector<std::string> col;
      for (std::size_t m = 0; m < result.model_names.size(); ++m)
        col.push_back(fnum(result.pvalues[static_cast<Eigen::Index>(m)], 4));
      pcols.push_back(std::move(col));
    }
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      std::vector<std::string> row = {model_names[m]};
      for (const auto& col : pcols) row.push_back(col[m]);
      summary.row(row);
    }
    std::printf("MCS p-values (alpha %.2f, %d bootstrap replications)\n",
                o.alpha, o.bootstrap_reps);
    std::fputs(summary.str().c_str(), stdout);
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// irf
// ---------------------------------------------------------------------------

int cmd_irf(const Opts& o) {
  Workspace ws = build_workspace(o, /*allow_empty_spec=*/false);
  if (ws.requests.size() != 1)
    throw DomainError("irf takes exactly one spec selection");
  const SpecRequest& req = ws.requests.front();

  std::string regressor =
      o.regressor.empty() ? req.spec.regressors.front() : o.regressor;
  if (std::find(req.spec.regressors.begin(), req.spec.regressors.end(),
                regressor) == req.spec.regressors.end())
    throw DomainError("regressor '" + regressor +
                      "' is not part of the requested spec");

  const auto& names = ws.dataset.returns.asset_names;
  std::vector<std::pair<int, int>> pairs;
  if (o.pair.empty()) {
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  } else {
    const std::vector<std::string> parts = split_list(o.pair);
    if (parts.size() != 2)
      throw DomainError("--pair expects two asset names, e.g. --pair A,B");
    const int i =
        static_cast<int>(ws.dataset.returns.asset_index(parts[0]));
    const int j =
        static_cast<int>(ws.dataset.returns.asset_index(parts[1]));
    if (i == j) throw DomainError("--pair needs two distinct assets");
    pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  if (o.horizon < 1) throw DomainError("--horizon must be at least 1");
  fs::create_directories(o.out_dir);

  corrx::irf::IrfOptions irf_options;
  irf_options.stochastic = o.stochastic;
  irf_options.draws = o.draws;
  irf_options.seed = o.seed;

  return guarded([&]() -> int {
    const dcc::ModelFit fit =
        dcc::two_step_fit(ws.dataset, req.spec, fit_options(o));
    for (const auto& [i, j] : pairs) {
      const corrx::irf::IrfResult result =
          o.shock == 0.0
              ? corrx::irf::impulse_response(fit.dcc_fit, ws.dataset,
                                             regressor, i, j, o.horizon,
                                             irf_options)
              : corrx::irf::impulse_response(fit.dcc_fit, regressor, i, j,
                                             o.horizon, o.shock, irf_options);
      const std::string stem =
          "irf_" + names[static_cast<std::size_t>(i)] + "_" +
          names[static_cast<std::size_t>(j)];
      const std::string csv_path =
          (fs::path(o.out_dir) / (stem + ".csv")).string();
      corrx::serialize::write_irf_csv(csv_path, result);
      note_written(csv_path);
      const json summary = corrx::serialize::irf_summary_json(
          result, names[static_cast<std::size_t>(i)],
          names[static_cast<std::size_t>(j)]);
      const std::string json_path =
          (fs::path(o.out_dir) / (stem + ".json")).string();
      corrx::serialize::write_validated_json(json_path, summary,
                                             "irf_summary");
      note_written(json_path);

      const std::string half_life =
          summary.at("half_life_days").is_null()
              ? std::string("n/a")
              : std::to_string(summary.at("half_life_days").get<int>());
      std::printf(
          "%s-%s: shock %s on %s, peak %s pp, half-life %s days\n",
          names[static_cast<std::size_t>(i)].c_str(),
          names[static_cast<std::size_t>(j)].c_str(),
          fnum(result.shock_size, 4).c_str(), regressor.c_str(),
          fnum(summary.at("peak").get<double>(), 4).c_str(),
          half_life.c_str());
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// break-test
// ---------------------------------------------------------------------------

int cmd_break(const Opts& o) {
  Opts base = o;
  base.break_dates.clear();  // breaks are applied per event date below
  Workspace ws = build_workspace(base, /*allow_empty_spec=*/false);
  if (ws.requests.size() != 1)
    throw DomainError("break-test takes exactly one spec selection");
  if (o.break_dates.empty())
    throw DomainError("break-test requires --break-date YYYY-MM-DD "
                      "(repeatable)");
  const SpecRequest& req = ws.requests.front();
  const std::string target =
      o.break_target.empty() ? req.spec.regressors.front() : o.break_target;
  std::vector<Date> events;
  for (const auto& d : o.break_dates) events.push_back(Date::parse(d));
  fs::create_directories(o.out_dir);

  return guarded([&]() -> int {
    TextTable table;
    table.row({"break_date", "theta3", "", "delta", "", "loglik", "AIC",
               "BIC"});
    std::vector<std::vector<std::string>> csv_rows;
    int succeeded = 0;
    for (const Date event : events) {
      dcc::DccSpec spec = req.spec;
      spec.break_date = event;
      spec.break_target = target;
      spec.validate();
      try {
        const dcc::ModelFit fit =
            dcc::two_step_fit(ws.dataset, spec, fit_options(o));
        ++succeeded;
        const dcc::DccFit& f = fit.dcc_fit;

        // theta3 = coefficient on the target; delta = coefficient on the
        // materialized post-break regressor (always the last column).
        const auto& regs = f.spec.regressors;
        const auto it = std::find(regs.begin(), regs.end(), target);
        const auto k3 = static_cast<Eigen::Index>(it - regs.begin());
        const auto kd = static_cast<Eigen::Index>(regs.size()) - 1;
        const double theta3 = f.params.theta_x[k3];
        const double theta3_se = f.se_robust[2 + k3];
        const double delta = f.params.theta_x[kd];
        const double delta_se = f.se_robust[2 + kd];

        const std::string label = corrx::forecast::spec_label(spec);
        const std::string fit_path =
            (fs::path(o.out_dir) / ("fit_" + label + ".json")).string();
        corrx::serialize::write_validated_json(
            fit_path, corrx::serialize::model_fit_json(fit, &spec),
            "model_fit");
        note_written(fit_path);

        table.row({event.to_string(), starred(theta3, theta3_se),
                   paren_se(theta3_se), starred(delta, delta_se),
                   paren_se(delta_se), fnum(f.loglik, 2), fnum(f.aic, 2),
                   fnum(f.bic, 2)});
        csv_rows.push_back({event.to_string(),
                            corrx::format_sig(theta3, 12),
                            corrx::format_sig(theta3_se, 12),
                            corrx::format_sig(delta, 12),
                            corrx::format_sig(delta_se, 12),
                            corrx::format_sig(f.loglik, 12),
                            f.converged ? "1" : "0"});
      } catch (const corrx::Error& e) {
        std::fprintf(stderr, "break %s failed: %s\n",
                     event.to_string().c_str(), e.what());
        table.row({event.to_string(), "failed", "", "", "", "", "", ""});
        csv_rows.push_back(
            {event.to_string(), "nan", "nan", "nan", "nan", "nan", "0"});
      }
    }

    const std::string csv_path =
        (fs::path(o.out_dir) / "break_tests.csv").string();
    corrx::write_csv(csv_path,
                     {"break_date", "theta3", "theta3_se", "delta",
                      "delta_se", "loglik", "converged"},
                     csv_rows);
    note_written(csv_path);
    std::printf("Coefficient shift on %s (delta joins from the break date)\n",
                target.c_str());
    std::fputs(table.str().c_str(), stdout);
    std::fputs("significance: * |t| > 1.645, ** |t| > 1.96, *** |t| > 2.576\n",
               stdout);
    return succeeded > 0 ? kOk : kComputeError;
  });
}

// ---------------------------------------------------------------------------
// roll
// ---------------------------------------------------------------------------

int cmd_roll(const Opts& o) {
  Workspace ws = build_workspace(o);
  if (ws.requests.size() != 1)
    throw DomainError("roll takes exactly one spec selection");
  const SpecRequest& req = ws.requests.front();
  const auto T = static_cast<int>(ws.dataset.dates().size());
  if (!req.spec.regressors.empty() && T < o.window)
    throw DomainError("sample has " + std::to_string(T) +
                      " observations, fewer than --window " +
                      std::to_string(o.window));
  if (T < o.corr_window)
    throw DomainError("sample has " + std::to_string(T) +
                      " observations, fewer than --corr-window " +
                      std::to_string(o.corr_window));
  fs::create_directories(o.out_dir);

  return guarded([&]() -> int {
    const auto& names = ws.dataset.returns.asset_names;
    const auto& values = ws.dataset.returns.values;
    const std::span<const Date> dates(ws.dataset.dates().data(),
                                      ws.dataset.dates().size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        const auto ci = static_cast<Eigen::Index>(i);
        const auto cj = static_cast<Eigen::Index>(j);
        const std::span<const double> x(values.col(ci).data(),
                                        static_cast<std::size_t>(T));
        const std::span<const double> y(values.col(cj).data(),
                                        static_cast<std::size_t>(T));
        const corrx::diagnostics::RollingSeries series =
            corrx::diagnostics::rolling_correlation(x, y, dates,
                                                    o.corr_window);
        const std::string path =
            (fs::path(o.out_dir) /
             ("rolling_corr_" + names[i] + "_" + names[j] + ".csv"))
                .string();
        corrx::serialize::write_rolling_series_csv(path, series);
        note_written(path);
      }
    }

    if (!req.spec.regressors.empty()) {
      const corrx::diagnostics::RollingCoef coefs =
          corrx::diagnostics::rolling_dccx(ws.dataset, req.spec, o.window,
                                           o.step, fit_options(o), o.jobs);
      const std::string path =
          (fs::path(o.out_dir) / "rolling_theta3.csv").string();
      corrx::serialize::write_rolling_coef_csv(path, coefs);
      note_written(path);
      std::printf("estimated %zu rolling windows (window %d, step %d)\n",
                  coefs.dates.size(), o.window, o.step);
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

corrx::simulate::SimConfig default_sim_config() {
  corrx::simulate::SimConfig config;
  config.T = 1000;
  config.N = 2;
  config.gjr = {corrx::garch::GjrParams{0.05, 0.05, 0.85, 0.15},
                corrx::garch::GjrParams{0.05, 0.05, 0.85, 0.15}};
  config.dcc_params.theta1 = 0.05;
  config.dcc_params.theta2 = 0.93;
  config.dcc_params.theta_x = Eigen::VectorXd::Constant(1, 0.025);
  config.regressor_names = {"TPU"};
  config.qbar = Eigen::MatrixXd(2, 2);
  config.qbar << 1.0, 0.4, 0.4, 1.0;
  config.exog = {corrx::simulate::calibrate_exog(0.11, 0.15, 0.95, "TPU")};
  return config;
}

int cmd_simulate(const CLI::App* sub, const Opts& o) {
  corrx::simulate::SimConfig config =
      o.sim_config.empty()
          ? default_sim_config()
          : corrx::serialize::sim_config_from_json(
                corrx::serialize::load_json(o.sim_config));
  if (flag_given(sub, "--seed") || o.sim_config.empty()) config.seed = o.seed;
  if (o.T_override > 0) config.T = o.T_override;
  if (flag_given(sub, "--exog-style"))
    config.style = dcc::parse_exog_style(o.exog_style);
  config.validate();
  fs::create_directories(o.out_dir);

  return guarded([&]() -> int {
    const corrx::simulate::SimResult result =
        corrx::simulate::simulate_panel(config);

    const std::string returns_path =
        (fs::path(o.out_dir) / "returns.csv").string();
    corrx::serialize::write_panel_csv(returns_path, result.returns);
    note_written(returns_path);

    const std::string exog_path = (fs::path(o.out_dir) / "exog.csv").string();
    corrx::serialize::write_exog_csv(exog_path, result.exog);
    note_written(exog_path);

    const std::string rtrue_path =
        (fs::path(o.out_dir) / "r_true.csv").string();
    corrx::serialize::write_r_path_csv(rtrue_path, result.returns.dates,
                                       result.truth.R,
                                       result.returns.asset_names);
    note_written(rtrue_path);

    const std::string config_path =
        (fs::path(o.out_dir) / "sim_config.json").string();
    corrx::serialize::write_validated_json(
        config_path, corrx::serialize::sim_config_json(config), "sim_config");
    note_written(config_path);

    std::printf("simulated %lld observations of %lld assets (seed %llu)\n",
                static_cast<long long>(config.T),
                static_cast<long long>(config.N),
                static_cast<unsigned long long>(config.seed));
    if (result.break_date.has_value())
      std::printf("coefficient break at %s\n",
                  result.break_date->to_string().c_str());
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// wiring
// ---------------------------------------------------------------------------

void add_io_flags(CLI::App* sub, Opts& o, bool with_exog = true) {
  sub->add_option("--input", o.input,
                  "CSV panel: `date` column plus one numeric column per "
                  "series");
  if (with_exog)
    sub->add_option("--exog", o.exog,
                    "CSV panel of exogenous correlation drivers");
  sub->add_flag("--ffill", o.ffill,
                "forward-fill interior gaps before aligning");
}

void add_common_flags(CLI::App* sub, Opts& o) {
  sub->add_option("--config", o.config,
                  "JSON config file merged under explicit flags (flags win)");
  sub->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "master seed for all randomness")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "worker threads (0 = hardware)")->capture_default_str();
}

void add_spec_flags(CLI::App* sub, Opts& o) {
  sub->add_option("--spec", o.spec,
                  "spec selection(s): none|tpu|dummy|interaction|full|custom"
                  ", comma-separated (default: none; tpu for irf, "
                  "break-test and roll)");
  sub->add_option("--regressors", o.regressors,
                  "comma list of exog columns for --spec custom");
  sub->add_option("--exog-style", o.exog_style,
                  "how the exogenous term enters Q_t: ones|qbar")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "corrx: time-varying asset correlations driven by exogenous "
      "uncertainty.\nTwo-step GJR-GARCH / DCC-X estimation, covariance "
      "forecasting, model-confidence-set comparison, structural-break "
      "tests, impulse responses, rolling diagnostics, and a simulation "
      "DGP.\nEnvironment: CORRX_LOG=quiet|info|debug controls stderr "
      "verbosity."};
  app.require_subcommand(1);
  Opts o;

  CLI::App* stats = app.add_subcommand(
      "stats", "descriptive statistics of every input column");
  add_io_flags(stats, o);
  add_common_flags(stats, o);

  CLI::App* estimate = app.add_subcommand(
      "estimate", "two-step estimation with a three-panel text report");
  add_io_flags(estimate, o);
  add_common_flags(estimate, o);
  add_spec_flags(estimate, o);
  estimate->add_option("--break-date", o.break_dates,
                       "one-time coefficient break date (YYYY-MM-DD)");
  estimate->add_option("--break-target", o.break_target,
                       "regressor whose coefficient shifts (default: first)");
  estimate->add_option("--lb-lags", o.lb_lags,
                       "Ljung-Box lag order for panel (c)")->capture_default_str();

  CLI::App* forecast = app.add_subcommand(
      "forecast", "one-step-ahead covariance forecasts over a hold-out span");
  add_io_flags(forecast, o);
  add_common_flags(forecast, o);
  add_spec_flags(forecast, o);
  forecast->add_option("--split", o.split,
                       "last in-sample date (YYYY-MM-DD)");
  forecast->add_option("--refit-every", o.refit_every,
                       "re-estimate on an expanding window every k steps "
                       "(0 = never)")->capture_default_str();

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "loss comparison and model confidence set over forecasts");
  add_io_flags(evaluate, o, /*with_exog=*/false);
  add_common_flags(evaluate, o);
  evaluate->add_option("--manifest", o.manifest,
                       "forecast manifest (default: <out-dir>/"
                       "forecast_manifest.json)");
  evaluate->add_option("--loss", o.loss,
                       "frobenius|qlike|gmv|rpv|all")->capture_default_str();
  evaluate->add_option("--alpha", o.alpha, "MCS confidence level")->capture_default_str();
  evaluate->add_option("--bootstrap-reps", o.bootstrap_reps,
                       "block bootstrap replications")->capture_default_str();
  evaluate->add_option("--block-length", o.block_length,
                       "bootstrap block length (0 = ceil(T^{1/3}))")->capture_default_str();

  CLI::App* irf = app.add_subcommand(
      "irf", "correlation impulse responses to an exogenous shock");
  add_io_flags(irf, o);
  add_common_flags(irf, o);
  add_spec_flags(irf, o);
  irf->add_option("--pair", o.pair,
                  "asset pair `A,B` (default: every pair)");
  irf->add_option("--regressor", o.regressor,
                  "shocked regressor (default: first of the spec)");
  irf->add_option("--horizon", o.horizon, "response horizon in days")->capture_default_str();
  irf->add_option("--shock", o.shock,
                  "shock in raw regressor units (0 = sample std)")->capture_default_str();
  irf->add_flag("--stochastic", o.stochastic,
                "average simulated news over --draws paths");
  irf->add_option("--draws", o.draws, "simulation draws for --stochastic")->capture_default_str();

  CLI::App* break_test = app.add_subcommand(
      "break-test", "coefficient-shift estimates per event date");
  add_io_flags(break_test, o);
  add_common_flags(break_test, o);
  add_spec_flags(break_test, o);
  break_test->add_option("--break-date", o.break_dates,
                         "event date YYYY-MM-DD (repeatable)");
  break_test->add_option("--break-target", o.break_target,
                         "regressor whose coefficient shifts "
                         "(default: first)");

  CLI::App* roll = app.add_subcommand(
      "roll", "rolling correlations and rolling coefficient re-estimates");
  add_io_flags(roll, o);
  add_common_flags(roll, o);
  add_spec_flags(roll, o);
  roll->add_option("--window", o.window,
                   "re-estimation window length in observations")->capture_default_str();
  roll->add_option("--step", o.step, "window start increment")->capture_default_str();
  roll->add_option("--corr-window", o.corr_window,
                   "rolling correlation window")->capture_default_str();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "synthetic GJR + DCC-X panel with known parameters");
  add_common_flags(simulate, o);
  simulate->add_option("--sim-config", o.sim_config,
                       "generator configuration JSON (sim_config schema)");
  simulate->add_option("--T", o.T_override,
                       "override the configured sample length");
  simulate->add_option("--exog-style", o.exog_style,
                       "override the configured exogenous style")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!flag_given(sub, "--spec"))
      o.spec = (sub == irf || sub == break_test || sub == roll) ? "tpu" : "none";
    apply_config(sub, o);
    if (sub == stats) return cmd_stats(o);
    if (sub == estimate) return cmd_estimate(o);
    if (sub == forecast) return cmd_forecast(o);
    if (sub == evaluate) return cmd_evaluate(o);
    if (sub == irf) return cmd_irf(o);
    if (sub == break_test) return cmd_break(o);
    if (sub == roll) return cmd_roll(o);
    if (sub == simulate) return cmd_simulate(sub, o);
    std::fprintf(stderr, "error: no subcommand selected\n");
    return kInputError;
  } catch (const corrx::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
}
