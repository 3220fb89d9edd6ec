#include "corrx/serialize.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "corrx/csv.hpp"
#include "corrx/errors.hpp"
#include "corrx/schemas_embedded.hpp"

namespace corrx::serialize {

namespace {

constexpr int kParamDigits = 12;  // fit parameters and standard errors
constexpr int kPlotDigits = 12;   // plot-ready CSV values
constexpr int kExactDigits = 17;  // data-bearing CSV values (exact round-trip)
constexpr int kStatsDigits = 6;   // descriptive statistics

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc, const std::string& what) {
  const auto rows = static_cast<Eigen::Index>(doc.size());
  if (rows == 0) throw DomainError(what + ": empty matrix");
  const auto cols = static_cast<Eigen::Index>(doc[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(doc[static_cast<std::size_t>(i)].size()) !=
        cols)
      throw DomainError(what + ": ragged matrix rows");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = doc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .get<double>();
  }
  return m;
}

double number_or_nan(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}

/// Regressor names double as JSON object keys next to the reserved
/// theta1/theta2 entries of the se map.
void check_regressor_names(const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (n == "theta1" || n == "theta2")
      throw DomainError("regressor name '" + n +
                        "' collides with a reserved coefficient key");
}

std::string csv_number(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  return format_sig(v, digits);
}

}  // namespace

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

double round_sig(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

json json_number(double v, int digits) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v, digits);
}

// ---------------------------------------------------------------------------
// Fit documents
// ---------------------------------------------------------------------------

json garch_fit_json(const garch::GarchFit& fit) {
  json doc;
  doc["asset"] = fit.asset;
  doc["omega"] = json_number(fit.params.omega, kParamDigits);
  doc["alpha"] = json_number(fit.params.alpha, kParamDigits);
  doc["beta"] = json_number(fit.params.beta, kParamDigits);
  doc["gamma"] = json_number(fit.params.gamma, kParamDigits);
  json se = json::array();
  for (int i = 0; i < 4; ++i)
    se.push_back(json_number(fit.se_robust[i], kParamDigits));
  doc["se"] = std::move(se);
  doc["loglik"] = fit.loglik;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  doc["h0"] = fit.h0;
  doc["variance_floor_active"] = fit.variance_floor_active;
  return doc;
}

garch::GarchFit garch_fit_from_json(const json& doc) {
  validate_shipped(doc, "garch_fit");
  garch::GarchFit fit;
  fit.asset = doc.at("asset").get<std::string>();
  fit.params.omega = doc.at("omega").get<double>();
  fit.params.alpha = doc.at("alpha").get<double>();
  fit.params.beta = doc.at("beta").get<double>();
  fit.params.gamma = doc.at("gamma").get<double>();
  for (int i = 0; i < 4; ++i)
    fit.se_robust[i] = number_or_nan(doc.at("se")[static_cast<std::size_t>(i)]);
  fit.loglik = doc.at("loglik").get<double>();
  fit.converged = doc.at("converged").get<bool>();
  fit.iterations = doc.at("iterations").get<int>();
  fit.h0 = doc.at("h0").get<double>();
  if (doc.contains("variance_floor_active"))
    fit.variance_floor_active = doc.at("variance_floor_active").get<bool>();
  return fit;
}

json dcc_fit_json(const dcc::DccFit& fit, const dcc::DccSpec* requested) {
  check_regressor_names(fit.spec.regressors);
  const auto K = static_cast<Eigen::Index>(fit.spec.regressors.size());

  json spec_doc;
  spec_doc["regressors"] = fit.spec.regressors;
  const dcc::DccSpec& origin = requested != nullptr ? *requested : fit.spec;
  if (origin.has_break()) {
    json brk;
    brk["date"] = origin.break_date->to_string();
    brk["target"] = *origin.break_target;
    spec_doc["break"] = std::move(brk);
  } else {
    spec_doc["break"] = nullptr;
  }

  json theta_x = json::object();
  json se = json::object();
  json means = json::object();
  json scales = json::object();
  se["theta1"] = json_number(fit.se_robust[0], kParamDigits);
  se["theta2"] = json_number(fit.se_robust[1], kParamDigits);
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string& name = fit.spec.regressors[static_cast<std::size_t>(k)];
    theta_x[name] = json_number(fit.params.theta_x[k], kParamDigits);
    se[name] = json_number(fit.se_robust[2 + k], kParamDigits);
    means[name] = fit.exog_means[k];
    scales[name] = fit.exog_scales[k];
  }

  json doc;
  doc["spec"] = std::move(spec_doc);
  doc["theta1"] = json_number(fit.params.theta1, kParamDigits);
  doc["theta2"] = json_number(fit.params.theta2, kParamDigits);
  doc["theta_x"] = std::move(theta_x);
  doc["se"] = std::move(se);
  doc["loglik"] = fit.loglik;
  doc["aic"] = fit.aic;
  doc["bic"] = fit.bic;
  doc["qbar"] = matrix_json(fit.qbar);
  doc["exog_means"] = std::move(means);
  doc["exog_scales"] = std::move(scales);
  doc["style"] = dcc::exog_style_name(fit.style);
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  return doc;
}

dcc::DccFit dcc_fit_from_json(const json& doc) {
  validate_shipped(doc, "dcc_fit");
  dcc::DccFit fit;
  const json& spec_doc = doc.at("spec");
  fit.spec.regressors =
      spec_doc.at("regressors").get<std::vector<std::string>>();
  if (!spec_doc.at("break").is_null()) {
    fit.spec.break_date =
        Date::parse(spec_doc.at("break").at("date").get<std::string>());
    fit.spec.break_target = spec_doc.at("break").at("target").get<std::string>();
  }
  const auto K = static_cast<Eigen::Index>(fit.spec.regressors.size());
  fit.params.theta1 = doc.at("theta1").get<double>();
  fit.params.theta2 = doc.at("theta2").get<double>();
  fit.params.theta_x.resize(K);
  fit.se_robust.resize(2 + K);
  fit.exog_means.resize(K);
  fit.exog_scales.resize(K);
  fit.se_robust[0] = number_or_nan(doc.at("se").at("theta1"));
  fit.se_robust[1] = number_or_nan(doc.at("se").at("theta2"));
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string& name = fit.spec.regressors[static_cast<std::size_t>(k)];
    fit.params.theta_x[k] = doc.at("theta_x").at(name).get<double>();
    fit.se_robust[2 + k] = number_or_nan(doc.at("se").at(name));
    fit.exog_means[k] = doc.at("exog_means").at(name).get<double>();
    fit.exog_scales[k] = doc.contains("exog_scales")
                             ? doc.at("exog_scales").at(name).get<double>()
                             : 1.0;
  }
  fit.loglik = doc.at("loglik").get<double>();
  fit.aic = doc.at("aic").get<double>();
  fit.bic = doc.at("bic").get<double>();
  fit.qbar = matrix_from_json(doc.at("qbar"), "dcc_fit.qbar");
  if (doc.contains("style"))
    fit.style = dcc::parse_exog_style(doc.at("style").get<std::string>());
  if (doc.contains("converged")) fit.converged = doc.at("converged").get<bool>();
  if (doc.contains("iterations"))
    fit.iterations = doc.at("iterations").get<int>();
  return fit;
}

json model_fit_json(const dcc::ModelFit& fit, const dcc::DccSpec* requested) {
  json doc;
  json garch_docs = json::array();
  for (const auto& g : fit.garch_fits) garch_docs.push_back(garch_fit_json(g));
  doc["garch"] = std::move(garch_docs);
  doc["dcc"] = dcc_fit_json(fit.dcc_fit, requested);
  doc["dataset_fingerprint"] = hex64(fit.dataset_fingerprint);
  return doc;
}

dcc::ModelFit model_fit_from_json(const json& doc) {
  validate_shipped(doc, "model_fit");
  dcc::ModelFit fit;
  for (const auto& g : doc.at("garch"))
    fit.garch_fits.push_back(garch_fit_from_json(g));
  fit.dcc_fit = dcc_fit_from_json(doc.at("dcc"));
  if (doc.contains("dataset_fingerprint"))
    fit.dataset_fingerprint =
        parse_hex64(doc.at("dataset_fingerprint").get<std::string>());
  return fit;
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

json forecast_manifest_json(const forecast::OosRun& run,
                            const std::vector<std::string>& files,
                            const std::vector<std::string>& assets) {
  if (files.size() != run.models.size())
    throw DomainError("forecast_manifest_json: one file name per model "
                      "required (empty for models without a file)");
  json doc;
  doc["split_date"] = run.split_date.to_string();
  doc["holdout_rows"] = run.holdout_dates.size();
  doc["assets"] = assets;
  json models = json::array();
  for (std::size_t m = 0; m < run.models.size(); ++m) {
    const forecast::OosModel& model = run.models[m];
    json entry;
    entry["name"] = model.name;
    entry["ok"] = model.ok;
    entry["rows"] = model.ok ? model.forecasts.forecasts.size() : 0;
    entry["file"] = files[m].empty() ? json(nullptr) : json(files[m]);
    entry["error"] = model.ok ? json(nullptr) : json(model.error);
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  return doc;
}

json mcs_report_json(const evaluation::McsResult& result,
                     const std::string& loss_name,
                     const evaluation::McsOptions& options) {
  json doc;
  doc["loss"] = loss_name;
  doc["alpha"] = result.alpha;
  doc["block"] = result.block_length;
  doc["reps"] = options.replications;
  doc["seed"] = options.seed;
  json pvalues = json::object();
  for (std::size_t m = 0; m < result.model_names.size(); ++m)
    pvalues[result.model_names[m]] =
        result.pvalues[static_cast<Eigen::Index>(m)];
  doc["pvalues"] = std::move(pvalues);
  doc["survivors"] = result.surviving_set;
  doc["elimination_order"] = result.elimination_order;
  return doc;
}

int irf_half_life(const irf::IrfResult& result) {
  const Eigen::Index n = result.delta_rho.size();
  if (n == 0) return -1;
  Eigen::Index peak_h = 0;
  result.delta_rho.cwiseAbs().maxCoeff(&peak_h);
  const double peak = std::abs(result.delta_rho[peak_h]);
  if (!(peak > 0.0)) return -1;
  for (Eigen::Index h = peak_h; h < n; ++h)
    if (std::abs(result.delta_rho[h]) <= 0.5 * peak)
      return static_cast<int>(h - peak_h);
  return -1;
}

json irf_summary_json(const irf::IrfResult& result,
                      const std::string& asset_i_name,
                      const std::string& asset_j_name) {
  double peak = 0.0;
  if (result.delta_rho.size() > 0) {
    Eigen::Index peak_h = 0;
    result.delta_rho.cwiseAbs().maxCoeff(&peak_h);
    peak = result.delta_rho[peak_h];
  }
  json doc;
  doc["pair"] = json::array({asset_i_name, asset_j_name});
  doc["regressor"] = result.regressor;
  doc["shock"] = result.shock_size;
  doc["peak"] = peak;
  const int hl = irf_half_life(result);
  doc["half_life_days"] = hl >= 0 ? json(hl) : json(nullptr);
  doc["normalized_sensitivity"] = result.normalized_sensitivity;
  doc["news"] = result.news;
  doc["horizon"] = result.horizons.empty() ? 0 : result.horizons.back();
  return doc;
}

json sim_config_json(const simulate::SimConfig& config) {
  json doc;
  doc["T"] = config.T;
  doc["N"] = config.N;
  json gjr = json::array();
  for (const auto& p : config.gjr) {
    json entry;
    entry["omega"] = p.omega;
    entry["alpha"] = p.alpha;
    entry["beta"] = p.beta;
    entry["gamma"] = p.gamma;
    gjr.push_back(std::move(entry));
  }
  doc["gjr"] = std::move(gjr);
  json dcc_params;
  dcc_params["theta1"] = config.dcc_params.theta1;
  dcc_params["theta2"] = config.dcc_params.theta2;
  json theta_x = json::array();
  for (Eigen::Index k = 0; k < config.dcc_params.theta_x.size(); ++k)
    theta_x.push_back(config.dcc_params.theta_x[k]);
  dcc_params["theta_x"] = std::move(theta_x);
  doc["dcc_params"] = std::move(dcc_params);
  doc["regressor_names"] = config.regressor_names;
  doc["qbar"] = matrix_json(config.qbar);
  json exog = json::array();
  for (const auto& model : config.exog) {
    json entry;
    entry["name"] = model.name;
    entry["log_mean"] = model.log_mean;
    entry["persistence"] = model.persistence;
    entry["innovation_sd"] = model.innovation_sd;
    if (model.fixed_path.has_value()) {
      json path = json::array();
      for (Eigen::Index t = 0; t < model.fixed_path->size(); ++t)
        path.push_back((*model.fixed_path)[t]);
      entry["fixed_path"] = std::move(path);
    } else {
      entry["fixed_path"] = nullptr;
    }
    exog.push_back(std::move(entry));
  }
  doc["exog"] = std::move(exog);
  if (config.break_config.has_value()) {
    json brk;
    brk["at_index"] = config.break_config->at_index;
    brk["delta"] = config.break_config->delta;
    brk["target"] = config.break_config->target;
    doc["break_config"] = std::move(brk);
  } else {
    doc["break_config"] = nullptr;
  }
  doc["seed"] = config.seed;
  doc["style"] = dcc::exog_style_name(config.style);
  doc["burn_in"] = config.burn_in;
  doc["start_date"] = config.start_date.to_string();
  doc["asset_names"] = config.asset_names;
  return doc;
}

simulate::SimConfig sim_config_from_json(const json& doc) {
  validate_shipped(doc, "sim_config");
  simulate::SimConfig config;
  if (doc.contains("T")) config.T = doc.at("T").get<Eigen::Index>();
  if (doc.contains("N")) config.N = doc.at("N").get<Eigen::Index>();
  if (doc.contains("gjr")) {
    config.gjr.clear();
    for (const auto& entry : doc.at("gjr")) {
      garch::GjrParams p;
      p.omega = entry.at("omega").get<double>();
      p.alpha = entry.at("alpha").get<double>();
      p.beta = entry.at("beta").get<double>();
      p.gamma = entry.at("gamma").get<double>();
      config.gjr.push_back(p);
    }
  }
  if (doc.contains("dcc_params")) {
    const json& dp = doc.at("dcc_params");
    config.dcc_params.theta1 = dp.at("theta1").get<double>();
    config.dcc_params.theta2 = dp.at("theta2").get<double>();
    const json& tx = dp.at("theta_x");
    config.dcc_params.theta_x.resize(static_cast<Eigen::Index>(tx.size()));
    for (std::size_t k = 0; k < tx.size(); ++k)
      config.dcc_params.theta_x[static_cast<Eigen::Index>(k)] =
          tx[k].get<double>();
  }
  if (doc.contains("regressor_names"))
    config.regressor_names =
        doc.at("regressor_names").get<std::vector<std::string>>();
  if (doc.contains("qbar"))
    config.qbar = matrix_from_json(doc.at("qbar"), "sim_config.qbar");
  if (doc.contains("exog")) {
    config.exog.clear();
    for (const auto& entry : doc.at("exog")) {
      simulate::ExogModel model;
      if (entry.contains("name")) model.name = entry.at("name").get<std::string>();
      if (entry.contains("log_mean"))
        model.log_mean = entry.at("log_mean").get<double>();
      if (entry.contains("persistence"))
        model.persistence = entry.at("persistence").get<double>();
      if (entry.contains("innovation_sd"))
        model.innovation_sd = entry.at("innovation_sd").get<double>();
      if (entry.contains("fixed_path") && !entry.at("fixed_path").is_null()) {
        const json& path = entry.at("fixed_path");
        Eigen::VectorXd v(static_cast<Eigen::Index>(path.size()));
        for (std::size_t t = 0; t < path.size(); ++t)
          v[static_cast<Eigen::Index>(t)] = path[t].get<double>();
        model.fixed_path = std::move(v);
      }
      config.exog.push_back(std::move(model));
    }
  }
  if (doc.contains("break_config") && !doc.at("break_config").is_null()) {
    const json& brk = doc.at("break_config");
    simulate::BreakConfig bc;
    bc.at_index = brk.at("at_index").get<Eigen::Index>();
    bc.delta = brk.at("delta").get<double>();
    bc.target = brk.at("target").get<std::size_t>();
    config.break_config = bc;
  }
  if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("style"))
    config.style = dcc::parse_exog_style(doc.at("style").get<std::string>());
  if (doc.contains("burn_in"))
    config.burn_in = doc.at("burn_in").get<Eigen::Index>();
  if (doc.contains("start_date"))
    config.start_date = Date::parse(doc.at("start_date").get<std::string>());
  if (doc.contains("asset_names"))
    config.asset_names = doc.at("asset_names").get<std::vector<std::string>>();
  return config;
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

void write_stats_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, ingest::StatsRow>>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& [name, stats] : rows)
    out.push_back({name, csv_number(stats.mean, kStatsDigits),
                   csv_number(stats.std, kStatsDigits),
                   csv_number(stats.skewness, kStatsDigits),
                   csv_number(stats.kurtosis, kStatsDigits)});
  write_csv(path, {"series", "mean", "std", "skewness", "kurtosis"}, out);
}

void write_r_path_csv(const std::string& path, const std::vector<Date>& dates,
                      const std::vector<Eigen::MatrixXd>& R,
                      const std::vector<std::string>& asset_names) {
  if (dates.size() != R.size())
    throw DomainError("write_r_path_csv: dates and matrices disagree");
  const auto N = static_cast<Eigen::Index>(asset_names.size());
  std::vector<std::vector<std::string>> out;
  out.reserve(R.size() * static_cast<std::size_t>(N * (N - 1) / 2));
  for (std::size_t t = 0; t < R.size(); ++t) {
    if (R[t].rows() != N || R[t].cols() != N)
      throw DomainError("write_r_path_csv: matrix shape does not match the "
                        "asset list");
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i + 1; j < N; ++j)
        out.push_back({dates[t].to_string(),
                       asset_names[static_cast<std::size_t>(i)],
                       asset_names[static_cast<std::size_t>(j)],
                       csv_number(R[t](i, j), kPlotDigits)});
  }
  write_csv(path, {"date", "asset_i", "asset_j", "rho"}, out);
}

void write_forecast_csv(const std::string& path,
                        const forecast::ForecastSet& set,
                        const std::vector<std::string>& asset_names) {
  const auto N = static_cast<Eigen::Index>(asset_names.size());
  std::vector<std::vector<std::string>> out;
  for (const auto& f : set.forecasts) {
    if (f.H.rows() != N || f.H.cols() != N)
      throw DomainError("write_forecast_csv: matrix shape does not match the "
                        "asset list");
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i; j < N; ++j)
        out.push_back({f.date.to_string(),
                       asset_names[static_cast<std::size_t>(i)],
                       asset_names[static_cast<std::size_t>(j)],
                       csv_number(f.H(i, j), kExactDigits)});
  }
  write_csv(path, {"date", "i", "j", "h_ij"}, out);
}

forecast::ForecastSet read_forecast_csv(const std::string& path,
                                        const std::string& model_name) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {"date", "i", "j", "h_ij"};
  if (table.header != expected)
    throw ParseError("forecast CSV " + path +
                     ": header must be date,i,j,h_ij");
  if (table.rows.empty())
    throw DomainError("forecast CSV " + path + ": no rows");

  struct Row {
    Date date;
    std::string i, j;
    double h = 0.0;
  };
  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Row row;
    row.date = Date::parse(table.rows[r][0]);
    row.i = table.rows[r][1];
    row.j = table.rows[r][2];
    const std::string& cell = table.rows[r][3];
    char* end = nullptr;
    row.h = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
      throw ParseError("forecast CSV " + path + ": bad number '" + cell +
                       "' on data row " + std::to_string(r + 1));
    rows.push_back(std::move(row));
  }

  // The first date block fixes the asset order and the (i, j) pair sequence;
  // every later block must repeat it exactly.
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> sequence;
  auto name_index = [&](const std::string& n, bool allow_new) {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == n) return static_cast<Eigen::Index>(k);
    if (!allow_new)
      throw DomainError("forecast CSV " + path + ": unexpected asset '" + n +
                        "' after the first date block");
    names.push_back(n);
    return static_cast<Eigen::Index>(names.size() - 1);
  };

  std::size_t first_block = 0;
  while (first_block < rows.size() && rows[first_block].date == rows[0].date)
    ++first_block;
  for (std::size_t r = 0; r < first_block; ++r) {
    name_index(rows[r].i, true);
    name_index(rows[r].j, true);
    sequence.emplace_back(rows[r].i, rows[r].j);
  }
  const auto N = static_cast<Eigen::Index>(names.size());
  if (first_block != static_cast<std::size_t>(N * (N + 1) / 2))
    throw DomainError("forecast CSV " + path + ": first date block has " +
                      std::to_string(first_block) + " rows, expected " +
                      std::to_string(N * (N + 1) / 2) + " for " +
                      std::to_string(N) + " assets");
  {
    Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(N, N);
    for (const auto& [a, b] : sequence) {
      const Eigen::Index ia = name_index(a, false);
      const Eigen::Index ib = name_index(b, false);
      seen(std::min(ia, ib), std::max(ia, ib)) += 1.0;
    }
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i; j < N; ++j)
        if (seen(i, j) != 1.0)
          throw DomainError("forecast CSV " + path + ": pair (" +
                            names[static_cast<std::size_t>(i)] + "," +
                            names[static_cast<std::size_t>(j)] +
                            ") missing or duplicated in the first block");
  }

  forecast::ForecastSet set;
  set.model_name = model_name;
  const std::size_t block = sequence.size();
  if (rows.size() % block != 0)
    throw DomainError("forecast CSV " + path +
                      ": row count is not a multiple of the block size");
  for (std::size_t b = 0; b < rows.size() / block; ++b) {
    forecast::CovarianceForecast f;
    f.date = rows[b * block].date;
    if (b > 0 && !(set.forecasts.back().date < f.date))
      throw DomainError("forecast CSV " + path +
                        ": dates must be strictly increasing");
    f.H.resize(N, N);
    for (std::size_t r = 0; r < block; ++r) {
      const Row& row = rows[b * block + r];
      if (row.date != f.date || row.i != sequence[r].first ||
          row.j != sequence[r].second)
        throw DomainError("forecast CSV " + path + ": date block " +
                          std::to_string(b + 1) +
                          " does not repeat the first block's pair sequence");
      const Eigen::Index i = name_index(row.i, false);
      const Eigen::Index j = name_index(row.j, false);
      f.H(i, j) = row.h;
      f.H(j, i) = row.h;
    }
    set.forecasts.push_back(std::move(f));
  }
  return set;
}

void write_losses_csv(const std::string& path,
                      const evaluation::LossMatrix& losses) {
  losses.validate();
  std::vector<std::string> header = {"date"};
  header.insert(header.end(), losses.model_names.begin(),
                losses.model_names.end());
  std::vector<std::vector<std::string>> out;
  out.reserve(losses.dates.size());
  for (std::size_t t = 0; t < losses.dates.size(); ++t) {
    std::vector<std::string> row = {losses.dates[t].to_string()};
    for (Eigen::Index m = 0; m < losses.losses.cols(); ++m)
      row.push_back(
          csv_number(losses.losses(static_cast<Eigen::Index>(t), m),
                     kPlotDigits));
    out.push_back(std::move(row));
  }
  write_csv(path, header, out);
}

void write_rolling_series_csv(const std::string& path,
                              const diagnostics::RollingSeries& series) {
  std::vector<std::vector<std::string>> out;
  out.reserve(series.dates.size());
  for (std::size_t t = 0; t < series.dates.size(); ++t)
    out.push_back({series.dates[t].to_string(),
                   csv_number(series.values[static_cast<Eigen::Index>(t)],
                              kPlotDigits),
                   series.exceed_flags[t] ? "1" : "0"});
  write_csv(path, {"date", "value", "flag"}, out);
}

void write_rolling_coef_csv(const std::string& path,
                            const diagnostics::RollingCoef& coefs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(coefs.dates.size());
  for (std::size_t t = 0; t < coefs.dates.size(); ++t)
    out.push_back({coefs.dates[t].to_string(),
                   csv_number(coefs.theta3[static_cast<Eigen::Index>(t)],
                              kPlotDigits),
                   coefs.converged[t] ? "1" : "0"});
  write_csv(path, {"date", "theta3", "converged"}, out);
}

void write_irf_csv(const std::string& path, const irf::IrfResult& result) {
  std::vector<std::vector<std::string>> out;
  out.reserve(result.horizons.size());
  for (std::size_t h = 0; h < result.horizons.size(); ++h)
    out.push_back({std::to_string(result.horizons[h]),
                   csv_number(result.delta_rho[static_cast<Eigen::Index>(h)],
                              kPlotDigits)});
  write_csv(path, {"horizon", "delta_rho_pp"}, out);
}

void write_panel_csv(const std::string& path,
                     const ingest::ReturnPanel& panel) {
  std::vector<std::string> header = {"date"};
  header.insert(header.end(), panel.asset_names.begin(),
                panel.asset_names.end());
  std::vector<std::vector<std::string>> out;
  out.reserve(panel.dates.size());
  for (std::size_t t = 0; t < panel.dates.size(); ++t) {
    std::vector<std::string> row = {panel.dates[t].to_string()};
    for (Eigen::Index j = 0; j < panel.values.cols(); ++j)
      row.push_back(csv_number(panel.values(static_cast<Eigen::Index>(t), j),
                               kExactDigits));
    out.push_back(std::move(row));
  }
  write_csv(path, header, out);
}

void write_exog_csv(const std::string& path,
                    const std::vector<ingest::ExogenousSeries>& series) {
  if (series.empty())
    throw DomainError("write_exog_csv: no series to write");
  std::vector<std::string> header = {"date"};
  for (const auto& s : series) {
    header.push_back(s.name);
    if (s.dates != series[0].dates)
      throw DomainError("write_exog_csv: series '" + s.name +
                        "' is not on the shared date index");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(series[0].dates.size());
  for (std::size_t t = 0; t < series[0].dates.size(); ++t) {
    std::vector<std::string> row = {series[0].dates[t].to_string()};
    for (const auto& s : series)
      row.push_back(csv_number(s.values[static_cast<Eigen::Index>(t)],
                               kExactDigits));
    out.push_back(std::move(row));
  }
  write_csv(path, header, out);
}

// ---------------------------------------------------------------------------
// JSON files and schema validation
// ---------------------------------------------------------------------------

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot create " + path);
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out.good()) throw FileError("cannot write " + path);
}

void write_validated_json(const std::string& path, const json& doc,
                          const std::string& schema_name) {
  // Validate the reparsed text, not the in-memory document: a NaN is a
  // number in memory but dumps as null, and the file is what must validate.
  const std::string text = doc.dump(2) + "\n";
  validate_shipped(json::parse(text), schema_name);
  std::ofstream out(path);
  if (!out) throw FileError("cannot create " + path);
  out << text;
  out.flush();
  if (!out.good()) throw FileError("cannot write " + path);
}

namespace {

using SchemaMap = std::map<std::string, json, std::less<>>;

const SchemaMap& schema_registry() {
  static const SchemaMap* registry = [] {
    auto* m = new SchemaMap();
    for (const auto& [name, text] : detail::kEmbeddedSchemas)
      (*m)[std::string(name)] = json::parse(text);
    return m;
  }();
  return *registry;
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw SchemaError("schema violation at '" + (path.empty() ? "/" : path) +
                    "': " + why);
}

std::string json_type_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_null()) return "null";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

bool matches_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  throw DomainError("shipped schema names unknown type '" + t + "'");
}

void validate_node(const json& doc, const json& schema,
                   const std::string& path) {
  if (schema.contains("$ref")) {
    validate_node(doc, shipped_schema(schema.at("$ref").get<std::string>()),
                  path);
    return;
  }

  if (schema.contains("enum")) {
    for (const auto& candidate : schema.at("enum"))
      if (doc == candidate) return;
    fail(path, "value " + doc.dump() + " is not one of " +
                   schema.at("enum").dump());
  }

  if (schema.contains("type")) {
    const json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(doc, t.get<std::string>());
    } else {
      for (const auto& option : t)
        if (matches_type(doc, option.get<std::string>())) ok = true;
    }
    if (!ok)
      fail(path, "expected type " + t.dump() + ", got " + json_type_name(doc));
  }

  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema.at("required"))
        if (!doc.contains(key.get<std::string>()))
          fail(path, "missing required property '" + key.get<std::string>() +
                         "'");
    const json* props =
        schema.contains("properties") ? &schema.at("properties") : nullptr;
    for (const auto& [key, value] : doc.items()) {
      const std::string child = path + "/" + key;
      if (props != nullptr && props->contains(key)) {
        validate_node(value, props->at(key), child);
      } else if (schema.contains("additionalProperties")) {
        const json& extra = schema.at("additionalProperties");
        if (extra.is_boolean()) {
          if (!extra.get<bool>())
            fail(path, "unexpected property '" + key + "'");
        } else {
          validate_node(value, extra, child);
        }
      }
    }
  }

  if (doc.is_array()) {
    if (schema.contains("minItems") &&
        doc.size() < schema.at("minItems").get<std::size_t>())
      fail(path, "array has " + std::to_string(doc.size()) +
                     " items, fewer than minItems " +
                     schema.at("minItems").dump());
    if (schema.contains("maxItems") &&
        doc.size() > schema.at("maxItems").get<std::size_t>())
      fail(path, "array has " + std::to_string(doc.size()) +
                     " items, more than maxItems " +
                     schema.at("maxItems").dump());
    if (schema.contains("items")) {
      std::size_t idx = 0;
      for (const auto& item : doc)
        validate_node(item, schema.at("items"),
                      path + "/" + std::to_string(idx++));
    }
  }

  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema.at("minimum").get<double>())
      fail(path, doc.dump() + " is below minimum " +
                     schema.at("minimum").dump());
    if (schema.contains("maximum") && v > schema.at("maximum").get<double>())
      fail(path, doc.dump() + " is above maximum " +
                     schema.at("maximum").dump());
    if (schema.contains("exclusiveMinimum") &&
        v <= schema.at("exclusiveMinimum").get<double>())
      fail(path, doc.dump() + " is not above exclusiveMinimum " +
                     schema.at("exclusiveMinimum").dump());
    if (schema.contains("exclusiveMaximum") &&
        v >= schema.at("exclusiveMaximum").get<double>())
      fail(path, doc.dump() + " is not below exclusiveMaximum " +
                     schema.at("exclusiveMaximum").dump());
  }

  if (doc.is_string() && schema.contains("format") &&
      schema.at("format").get<std::string>() == "date") {
    if (!Date::try_parse(doc.get<std::string>()).has_value())
      fail(path, "'" + doc.get<std::string>() +
                     "' is not an ISO-8601 calendar date");
  }
}

}  // namespace

const json& shipped_schema(const std::string& name) {
  const SchemaMap& registry = schema_registry();
  const auto it = registry.find(name);
  if (it == registry.end())
    throw DomainError("no shipped schema named '" + name + "'");
  return it->second;
}

std::vector<std::string> shipped_schema_names() {
  std::vector<std::string> names;
  for (const auto& [name, schema] : schema_registry()) names.push_back(name);
  return names;
}

void validate_schema(const json& doc, const json& schema) {
  validate_node(doc, schema, "");
}

void validate_shipped(const json& doc, const std::string& schema_name) {
  validate_node(doc, shipped_schema(schema_name), "");
}

}  // namespace corrx::serialize
