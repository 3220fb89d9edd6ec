#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corrx/csv.hpp"
#include "corrx/dcc.hpp"
#include "corrx/errors.hpp"
#include "corrx/serialize.hpp"
#include "corrx/simulate.hpp"

using namespace corrx;
using namespace corrx::serialize;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// Small DCC-X fit summary with recognizable values; not the output of an
/// estimation, just a carrier for serialization checks.
dcc::DccFit sample_dcc_fit() {
  dcc::DccFit fit;
  fit.spec.regressors = {"TPU", "DUMMY"};
  fit.params.theta1 = 0.0464;
  fit.params.theta2 = 0.9292;
  fit.params.theta_x = Eigen::Vector2d(0.0856, -0.0123);
  fit.se_robust = Eigen::VectorXd(4);
  fit.se_robust << 0.011, 0.021, 0.031, 0.041;
  fit.qbar = Eigen::MatrixXd(2, 2);
  fit.qbar << 1.0, 0.25, 0.25, 1.0;
  fit.exog_means = Eigen::Vector2d(0.1105, 0.5);
  fit.exog_scales = Eigen::Vector2d(1.0, 1.0);
  fit.loglik = -1234.5678;
  fit.aic = 2473.1356;
  fit.bic = 2490.0;
  fit.converged = true;
  fit.iterations = 37;
  return fit;
}

simulate::SimConfig small_sim_config(std::uint64_t seed) {
  simulate::SimConfig config;
  config.T = 300;
  config.N = 2;
  config.gjr = {garch::GjrParams{0.05, 0.05, 0.85, 0.15},
                garch::GjrParams{0.05, 0.05, 0.85, 0.15}};
  config.dcc_params.theta1 = 0.05;
  config.dcc_params.theta2 = 0.90;
  config.dcc_params.theta_x = Eigen::VectorXd::Constant(1, 0.02);
  config.regressor_names = {"TPU"};
  config.qbar = Eigen::MatrixXd(2, 2);
  config.qbar << 1.0, 0.4, 0.4, 1.0;
  config.exog = {simulate::calibrate_exog(0.11, 0.15, 0.95, "TPU")};
  config.seed = seed;
  config.burn_in = 100;
  return config;
}

}  // namespace

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

TEST_CASE("round_sig truncates to the requested significant digits") {
  CHECK(round_sig(M_PI, 12) == doctest::Approx(3.14159265359).epsilon(1e-13));
  CHECK(round_sig(M_PI, 12) != M_PI);  // genuinely rounded
  CHECK(round_sig(M_PI, 17) == M_PI);  // 17 digits round-trip a double
  CHECK(round_sig(123456.789, 6) == 123457.0);
  CHECK(round_sig(0.0, 12) == 0.0);
  CHECK(round_sig(-1.0e-30, 12) == -1.0e-30);
  CHECK(std::isnan(round_sig(std::nan(""), 12)));
  CHECK(std::isinf(round_sig(HUGE_VAL, 12)));
}

TEST_CASE("json_number maps non-finite values to null") {
  CHECK(json_number(1.5, 12).get<double>() == 1.5);
  CHECK(json_number(std::nan(""), 12).is_null());
  CHECK(json_number(-HUGE_VAL, 12).is_null());
}

// ---------------------------------------------------------------------------
// Fit documents
// ---------------------------------------------------------------------------

TEST_CASE("garch fit document round-trips and validates") {
  garch::GarchFit fit;
  fit.asset = "SPX";
  fit.params = {0.05123456789123, 0.05, 0.85, 0.15};
  fit.se_robust << 0.01, 0.02, 0.03, 0.04;
  fit.loglik = -2345.678901234567;
  fit.h0 = 1.2345;
  fit.converged = true;
  fit.iterations = 42;

  const json doc = garch_fit_json(fit);
  CHECK_NOTHROW(validate_shipped(doc, "garch_fit"));
  CHECK(doc.at("asset") == "SPX");
  // parameters rounded to 12 significant digits
  CHECK(doc.at("omega").get<double>() == 0.0512345678912);
  CHECK(doc.at("se").size() == 4);
  // likelihood kept at full precision
  CHECK(doc.at("loglik").get<double>() == fit.loglik);

  const garch::GarchFit back = garch_fit_from_json(doc);
  CHECK(back.asset == fit.asset);
  CHECK(back.params.alpha == 0.05);
  CHECK(back.loglik == fit.loglik);
  CHECK(back.iterations == 42);
  CHECK(back.converged);
  // a second pass through JSON is byte-identical
  CHECK(garch_fit_json(back).dump(2) == doc.dump(2));
}

TEST_CASE("garch fit serializes non-finite standard errors as null") {
  garch::GarchFit fit;
  fit.asset = "A";
  fit.params = {0.05, 0.05, 0.85, 0.15};
  fit.se_robust << 0.01, std::nan(""), 0.03, 0.04;
  fit.loglik = -10.0;
  fit.h0 = 1.0;

  const json doc = garch_fit_json(fit);
  CHECK(doc.at("se")[1].is_null());
  CHECK_NOTHROW(validate_shipped(doc, "garch_fit"));
  const garch::GarchFit back = garch_fit_from_json(doc);
  CHECK(std::isnan(back.se_robust[1]));
  CHECK(back.se_robust[2] == 0.03);
}

TEST_CASE("dcc fit document carries named coefficients and round-trips") {
  const dcc::DccFit fit = sample_dcc_fit();
  const json doc = dcc_fit_json(fit);
  CHECK_NOTHROW(validate_shipped(doc, "dcc_fit"));

  CHECK(doc.at("spec").at("regressors") ==
        json::array({"TPU", "DUMMY"}));
  CHECK(doc.at("spec").at("break").is_null());
  CHECK(doc.at("theta1").get<double>() == 0.0464);
  CHECK(doc.at("theta_x").at("TPU").get<double>() == 0.0856);
  CHECK(doc.at("theta_x").at("DUMMY").get<double>() == -0.0123);
  CHECK(doc.at("se").at("theta1").get<double>() == 0.011);
  CHECK(doc.at("se").at("DUMMY").get<double>() == 0.041);
  CHECK(doc.at("exog_means").at("TPU").get<double>() == 0.1105);
  CHECK(doc.at("qbar")[0][1].get<double>() == 0.25);
  CHECK(doc.at("style") == "ones");

  const dcc::DccFit back = dcc_fit_from_json(doc);
  CHECK(back.spec.regressors == fit.spec.regressors);
  CHECK(back.params.theta_x[1] == -0.0123);
  CHECK(back.se_robust[3] == 0.041);
  CHECK(back.exog_scales[0] == 1.0);
  CHECK((back.qbar - fit.qbar).cwiseAbs().maxCoeff() == 0.0);
  CHECK(dcc_fit_json(back).dump(2) == doc.dump(2));
}

TEST_CASE("break provenance comes from the requested spec") {
  dcc::DccFit fit = sample_dcc_fit();
  // two_step_fit hands back the expanded spec: the break lives on as the
  // TPU_post20180321 regressor and the spec's break fields are empty.
  fit.spec.regressors = {"TPU", "TPU_post20180321"};

  dcc::DccSpec requested;
  requested.regressors = {"TPU"};
  requested.break_date = Date::parse("2018-03-21");
  requested.break_target = "TPU";

  const json doc = dcc_fit_json(fit, &requested);
  CHECK_NOTHROW(validate_shipped(doc, "dcc_fit"));
  CHECK(doc.at("spec").at("break").at("date") == "2018-03-21");
  CHECK(doc.at("spec").at("break").at("target") == "TPU");
  CHECK(doc.at("theta_x").contains("TPU_post20180321"));

  // the deserialized fit remembers the break, so a second serialization
  // reproduces the document without the requested spec being supplied
  const dcc::DccFit back = dcc_fit_from_json(doc);
  REQUIRE(back.spec.has_break());
  CHECK(*back.spec.break_date == Date::parse("2018-03-21"));
  CHECK(dcc_fit_json(back).dump(2) == doc.dump(2));
}

TEST_CASE("regressors named like reserved coefficient keys are rejected") {
  dcc::DccFit fit = sample_dcc_fit();
  fit.spec.regressors = {"theta1", "DUMMY"};
  CHECK_THROWS_AS(dcc_fit_json(fit), DomainError);
}

TEST_CASE("model fit document from a real two-step estimation validates") {
  const simulate::SimResult sim = simulate_panel(small_sim_config(7));
  dcc::DccSpec spec;
  spec.regressors = {"TPU"};
  const dcc::ModelFit fit = dcc::two_step_fit(sim.dataset(), spec);

  const json doc = model_fit_json(fit, &spec);
  CHECK_NOTHROW(validate_shipped(doc, "model_fit"));
  CHECK(doc.at("garch").size() == 2);
  CHECK(doc.at("garch")[0].at("asset") == "A1");
  CHECK(doc.at("dcc").at("theta_x").contains("TPU"));
  CHECK(doc.at("dataset_fingerprint").get<std::string>().size() == 16);

  const dcc::ModelFit back = model_fit_from_json(doc);
  CHECK(back.garch_fits.size() == 2);
  CHECK(back.dataset_fingerprint == fit.dataset_fingerprint);
  CHECK(back.dcc_fit.params.theta1 ==
        doctest::Approx(fit.dcc_fit.params.theta1).epsilon(1e-11));
  CHECK(model_fit_json(back).dump(2) == doc.dump(2));
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

TEST_CASE("forecast manifest lists every requested model") {
  forecast::OosRun run;
  run.split_date = Date::parse("2023-01-31");
  run.holdout_dates = {Date::parse("2023-02-01"), Date::parse("2023-02-02")};
  run.models.resize(2);
  run.models[0].name = "dcc";
  run.models[0].ok = true;
  run.models[0].forecasts.forecasts.resize(2);
  run.models[1].name = "dccx-TPU";
  run.models[1].ok = false;
  run.models[1].error = "second step: did not converge";

  const json doc =
      forecast_manifest_json(run, {"forecast_dcc.csv", ""}, {"SPX", "TNX"});
  CHECK_NOTHROW(validate_shipped(doc, "forecast_manifest"));
  CHECK(doc.at("split_date") == "2023-01-31");
  CHECK(doc.at("holdout_rows").get<int>() == 2);
  CHECK(doc.at("assets") == json::array({"SPX", "TNX"}));
  CHECK(doc.at("models")[0].at("rows").get<int>() == 2);
  CHECK(doc.at("models")[0].at("file") == "forecast_dcc.csv");
  CHECK(doc.at("models")[1].at("file").is_null());
  CHECK(doc.at("models")[1].at("error").get<std::string>() ==
        "second step: did not converge");

  CHECK_THROWS_AS(forecast_manifest_json(run, {"only_one.csv"}, {"SPX"}),
                  DomainError);
}

TEST_CASE("mcs report document validates and names every model") {
  evaluation::McsResult result;
  result.model_names = {"dcc", "dccx-TPU", "ccc"};
  result.pvalues = Eigen::Vector3d(0.02, 1.0, 0.4);
  result.surviving_set = {"dccx-TPU", "ccc"};
  result.elimination_order = {"dcc", "ccc", "dccx-TPU"};
  result.alpha = 0.05;
  result.block_length = 9;

  evaluation::McsOptions options;
  options.replications = 5000;
  options.seed = 42;

  const json doc = mcs_report_json(result, "gmv", options);
  CHECK_NOTHROW(validate_shipped(doc, "mcs_report"));
  CHECK(doc.at("loss") == "gmv");
  CHECK(doc.at("block").get<int>() == 9);
  CHECK(doc.at("reps").get<int>() == 5000);
  CHECK(doc.at("seed").get<int>() == 42);
  CHECK(doc.at("pvalues").at("dcc").get<double>() == 0.02);
  CHECK(doc.at("pvalues").size() == 3);
  CHECK(doc.at("survivors") == json::array({"dccx-TPU", "ccc"}));

  // an out-of-range p-value must not validate
  json broken = doc;
  broken["pvalues"]["dcc"] = 1.5;
  CHECK_THROWS_AS(validate_shipped(broken, "mcs_report"), SchemaError);
}

TEST_CASE("irf half-life measures the drop to half the peak") {
  irf::IrfResult result;
  const int H = 200;
  const double phi = 0.9756;
  result.horizons.resize(H + 1);
  result.delta_rho = Eigen::VectorXd::Zero(H + 1);
  for (int h = 0; h <= H; ++h) {
    result.horizons[h] = h;
    if (h >= 1) result.delta_rho[h] = 0.4 * std::pow(phi, h - 1);
  }
  // phi^28 = 0.5007 > 1/2, phi^29 = 0.4885 <= 1/2: 29 days after the peak
  CHECK(irf_half_life(result) == 29);

  result.delta_rho.setZero();
  CHECK(irf_half_life(result) == -1);

  // a response that never halves within the window reports -1
  irf::IrfResult flat;
  flat.horizons = {0, 1, 2};
  flat.delta_rho = Eigen::Vector3d(0.0, 0.4, 0.39);
  CHECK(irf_half_life(flat) == -1);
}

TEST_CASE("irf summary document validates and reports the signed peak") {
  irf::IrfResult result;
  const int H = 200;
  result.horizons.resize(H + 1);
  result.delta_rho = Eigen::VectorXd::Zero(H + 1);
  for (int h = 0; h <= H; ++h) {
    result.horizons[h] = h;
    if (h >= 1) result.delta_rho[h] = -0.4 * std::pow(0.9756, h - 1);
  }
  result.shock_size = 0.15;
  result.regressor = "TPU";
  result.normalized_sensitivity = -0.4 / 0.15;
  result.news = "expectation";

  const json doc = irf_summary_json(result, "SPX", "TNX");
  CHECK_NOTHROW(validate_shipped(doc, "irf_summary"));
  CHECK(doc.at("pair") == json::array({"SPX", "TNX"}));
  CHECK(doc.at("peak").get<double>() == doctest::Approx(-0.4));
  CHECK(doc.at("half_life_days").get<int>() == 29);
  CHECK(doc.at("shock").get<double>() == 0.15);
  CHECK(doc.at("news") == "expectation");
  CHECK(doc.at("horizon").get<int>() == 200);

  // identically zero response: peak 0, half-life null
  result.delta_rho.setZero();
  const json zero = irf_summary_json(result, "SPX", "TNX");
  CHECK(zero.at("peak").get<double>() == 0.0);
  CHECK(zero.at("half_life_days").is_null());
  CHECK_NOTHROW(validate_shipped(zero, "irf_summary"));
}

TEST_CASE("sim config document mirrors SimConfig and round-trips") {
  simulate::SimConfig config = small_sim_config(11);
  config.break_config = simulate::BreakConfig{150, -0.015, 0};
  config.asset_names = {"EQ", "BOND"};

  const json doc = sim_config_json(config);
  CHECK_NOTHROW(validate_shipped(doc, "sim_config"));
  CHECK(doc.at("T").get<int>() == 300);
  CHECK(doc.at("exog")[0].at("name") == "TPU");
  CHECK(doc.at("exog")[0].at("fixed_path").is_null());
  CHECK(doc.at("break_config").at("delta").get<double>() == -0.015);
  CHECK(doc.at("start_date") == "2015-01-05");

  const simulate::SimConfig back = sim_config_from_json(doc);
  CHECK(back.T == config.T);
  CHECK(back.exog[0].log_mean == config.exog[0].log_mean);
  CHECK(back.break_config->at_index == 150);
  CHECK(back.asset_names == config.asset_names);
  CHECK(sim_config_json(back).dump(2) == doc.dump(2));

  // both simulate identically
  const simulate::SimResult a = simulate_panel(config);
  const simulate::SimResult b = simulate_panel(back);
  CHECK((a.returns.values - b.returns.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sim config accepts partial documents and rejects unknown keys") {
  const simulate::SimConfig partial =
      sim_config_from_json(json::parse(R"({"T": 50, "seed": 9})"));
  CHECK(partial.T == 50);
  CHECK(partial.seed == 9);
  CHECK(partial.N == 2);  // untouched default

  CHECK_THROWS_AS(sim_config_from_json(json::parse(R"({"Tt": 50})")),
                  SchemaError);
  CHECK_THROWS_AS(sim_config_from_json(json::parse(R"({"T": "fifty"})")),
                  SchemaError);
  CHECK_THROWS_AS(
      sim_config_from_json(json::parse(R"({"start_date": "2020-13-01"})")),
      SchemaError);
  CHECK_THROWS_AS(
      sim_config_from_json(json::parse(R"({"style": "diagonal"})")),
      SchemaError);
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

TEST_CASE("stats CSV uses six significant digits") {
  const std::string path = tmp_path("corrx_stats.csv");
  ingest::StatsRow a{0.123456789, 1.0, -0.5, 3.0};
  ingest::StatsRow b{-0.0292, 0.123456789, 0.0, 12.3456789};
  write_stats_csv(path, {{"SPX", a}, {"TNX", b}});
  const std::string text = slurp(path);
  std::filesystem::remove(path);
  CHECK(text ==
        "series,mean,std,skewness,kurtosis\n"
        "SPX,0.123457,1,-0.5,3\n"
        "TNX,-0.0292,0.123457,0,12.3457\n");
}

TEST_CASE("R path CSV writes one row per date and upper pair") {
  const std::string path = tmp_path("corrx_rpath.csv");
  Eigen::MatrixXd r1(3, 3), r2(3, 3);
  r1 << 1.0, 0.25, 0.5, 0.25, 1.0, -0.125, 0.5, -0.125, 1.0;
  r2 = r1;
  r2(0, 1) = r2(1, 0) = 0.375;
  const std::vector<Date> dates = {Date::parse("2020-01-01"),
                                   Date::parse("2020-01-02")};
  write_r_path_csv(path, dates, {r1, r2}, {"A", "B", "C"});
  const std::string text = slurp(path);
  std::filesystem::remove(path);
  CHECK(text ==
        "date,asset_i,asset_j,rho\n"
        "2020-01-01,A,B,0.25\n"
        "2020-01-01,A,C,0.5\n"
        "2020-01-01,B,C,-0.125\n"
        "2020-01-02,A,B,0.375\n"
        "2020-01-02,A,C,0.5\n"
        "2020-01-02,B,C,-0.125\n");

  CHECK_THROWS_AS(write_r_path_csv(path, dates, {r1}, {"A", "B", "C"}),
                  DomainError);
  CHECK_THROWS_AS(write_r_path_csv(path, dates, {r1, r2}, {"A", "B"}),
                  DomainError);
}

TEST_CASE("forecast CSV round-trips covariance matrices exactly") {
  forecast::ForecastSet set;
  set.model_name = "dccx-TPU";
  Date d = Date::parse("2023-02-01");
  for (int t = 0; t < 3; ++t) {
    forecast::CovarianceForecast f;
    f.date = d;
    d = next_weekday(d);
    f.H.resize(2, 2);
    const double rho = 0.3 + 0.1 * t;
    f.H << 1.0 / 3.0 + t, rho * M_PI / 10, rho * M_PI / 10, 2.0 / 7.0;
    set.forecasts.push_back(std::move(f));
  }

  const std::string path = tmp_path("corrx_forecast.csv");
  write_forecast_csv(path, set, {"SPX", "TNX"});
  const forecast::ForecastSet back = read_forecast_csv(path, "dccx-TPU");
  std::filesystem::remove(path);

  REQUIRE(back.forecasts.size() == 3);
  CHECK(back.model_name == "dccx-TPU");
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(back.forecasts[t].date == set.forecasts[t].date);
    // 17 significant digits: bitwise identical after the round trip
    CHECK((back.forecasts[t].H - set.forecasts[t].H).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("forecast CSV reader rejects malformed files") {
  const std::string path = tmp_path("corrx_forecast_bad.csv");

  SUBCASE("wrong header") {
    write_csv(path, {"date", "a", "b", "value"}, {});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), ParseError);
  }
  SUBCASE("no rows") {
    write_csv(path, {"date", "i", "j", "h_ij"}, {});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), DomainError);
  }
  SUBCASE("incomplete first block") {
    write_csv(path, {"date", "i", "j", "h_ij"},
              {{"2023-02-01", "A", "A", "1.0"},
               {"2023-02-01", "A", "B", "0.5"}});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), DomainError);
  }
  SUBCASE("later block breaks the pair sequence") {
    write_csv(path, {"date", "i", "j", "h_ij"},
              {{"2023-02-01", "A", "A", "1.0"},
               {"2023-02-01", "A", "B", "0.5"},
               {"2023-02-01", "B", "B", "1.0"},
               {"2023-02-02", "A", "A", "1.0"},
               {"2023-02-02", "A", "C", "0.5"},
               {"2023-02-02", "B", "B", "1.0"}});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), DomainError);
  }
  SUBCASE("dates must increase") {
    write_csv(path, {"date", "i", "j", "h_ij"},
              {{"2023-02-02", "A", "A", "1.0"},
               {"2023-02-01", "A", "A", "1.0"}});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), DomainError);
  }
  SUBCASE("bad number") {
    write_csv(path, {"date", "i", "j", "h_ij"},
              {{"2023-02-01", "A", "A", "one"}});
    CHECK_THROWS_AS(read_forecast_csv(path, "m"), ParseError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("loss CSV lists models as columns") {
  evaluation::LossMatrix losses;
  losses.model_names = {"dcc", "dccx"};
  losses.dates = {Date::parse("2023-02-01"), Date::parse("2023-02-02")};
  losses.losses.resize(2, 2);
  losses.losses << 1.5, 2.25, 0.5, 0.75;
  losses.loss_name = "frobenius";

  const std::string path = tmp_path("corrx_losses.csv");
  write_losses_csv(path, losses);
  const std::string text = slurp(path);
  std::filesystem::remove(path);
  CHECK(text ==
        "date,dcc,dccx\n"
        "2023-02-01,1.5,2.25\n"
        "2023-02-02,0.5,0.75\n");
}

TEST_CASE("rolling CSVs print nan for degenerate windows") {
  diagnostics::RollingSeries series;
  series.dates = {Date::parse("2020-03-02"), Date::parse("2020-03-03")};
  series.values = Eigen::Vector2d(0.5, std::nan(""));
  series.threshold = 0.25;
  series.exceed_flags = {true, false};

  const std::string spath = tmp_path("corrx_roll_series.csv");
  write_rolling_series_csv(spath, series);
  CHECK(slurp(spath) ==
        "date,value,flag\n"
        "2020-03-02,0.5,1\n"
        "2020-03-03,nan,0\n");
  std::filesystem::remove(spath);

  diagnostics::RollingCoef coefs;
  coefs.dates = series.dates;
  coefs.theta3 = Eigen::Vector2d(std::nan(""), 0.0856);
  coefs.converged = {false, true};

  const std::string cpath = tmp_path("corrx_roll_coef.csv");
  write_rolling_coef_csv(cpath, coefs);
  CHECK(slurp(cpath) ==
        "date,theta3,converged\n"
        "2020-03-02,nan,0\n"
        "2020-03-03,0.0856,1\n");
  std::filesystem::remove(cpath);
}

TEST_CASE("irf CSV pairs horizons with responses") {
  irf::IrfResult result;
  result.horizons = {0, 1, 2};
  result.delta_rho = Eigen::Vector3d(0.0, 0.4, 0.39);

  const std::string path = tmp_path("corrx_irf.csv");
  write_irf_csv(path, result);
  CHECK(slurp(path) ==
        "horizon,delta_rho_pp\n"
        "0,0\n"
        "1,0.4\n"
        "2,0.39\n");
  std::filesystem::remove(path);
}

TEST_CASE("panel CSV round-trips through the ingest loader bitwise") {
  const simulate::SimResult sim = simulate_panel(small_sim_config(3));
  const std::string rpath = tmp_path("corrx_panel_rt.csv");
  write_panel_csv(rpath, sim.returns);
  const ingest::RawPanel raw = ingest::load_raw_panel(rpath);
  std::filesystem::remove(rpath);

  REQUIRE(raw.columns == sim.returns.asset_names);
  REQUIRE(raw.dates == sim.returns.dates);
  CHECK((raw.values - sim.returns.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exog CSV shares one date index across series") {
  const simulate::SimResult sim = simulate_panel(small_sim_config(3));
  const std::string xpath = tmp_path("corrx_exog_rt.csv");
  write_exog_csv(xpath, sim.exog);
  const ingest::RawPanel raw = ingest::load_raw_panel(xpath);
  std::filesystem::remove(xpath);
  REQUIRE(raw.columns == std::vector<std::string>{"TPU"});
  CHECK((raw.values.col(0) - sim.exog[0].values).cwiseAbs().maxCoeff() == 0.0);

  ingest::ExogenousSeries shifted = sim.exog[0];
  shifted.name = "OTHER";
  shifted.dates[0] = shifted.dates[0].plus_days(-1);
  CHECK_THROWS_AS(write_exog_csv(xpath, {sim.exog[0], shifted}), DomainError);
  CHECK_THROWS_AS(write_exog_csv(xpath, {}), DomainError);
}

// ---------------------------------------------------------------------------
// Schema machinery
// ---------------------------------------------------------------------------

TEST_CASE("embedded schemas match the shipped files") {
  const std::vector<std::string> names = shipped_schema_names();
  CHECK(names.size() == 7);
  for (const auto& name : names) {
    const std::string path =
        std::string(CORRX_SCHEMA_DIR) + "/" + name + ".schema.json";
    INFO("schema ", name);
    const json on_disk = load_json(path);
    CHECK(on_disk == shipped_schema(name));
  }
  CHECK_THROWS_AS(shipped_schema("nonexistent"), DomainError);
}

TEST_CASE("validator reports the offending path") {
  const json schema = json::parse(R"({
    "type": "object",
    "required": ["a"],
    "properties": {
      "a": {"type": "array", "items": {"type": "number", "minimum": 0}},
      "b": {"type": ["string", "null"]}
    },
    "additionalProperties": false
  })");

  CHECK_NOTHROW(validate_schema(json::parse(R"({"a": [1, 2.5]})"), schema));
  CHECK_NOTHROW(
      validate_schema(json::parse(R"({"a": [], "b": null})"), schema));

  CHECK_THROWS_WITH_AS(validate_schema(json::parse(R"({})"), schema),
                       "schema violation at '/': missing required property "
                       "'a'",
                       SchemaError);
  CHECK_THROWS_WITH_AS(
      validate_schema(json::parse(R"({"a": [1, -2]})"), schema),
      "schema violation at '/a/1': -2 is below minimum 0", SchemaError);
  CHECK_THROWS_AS(validate_schema(json::parse(R"({"a": [1], "c": 0})"),
                                  schema),
                  SchemaError);
  CHECK_THROWS_AS(validate_schema(json::parse(R"({"a": [1], "b": 3})"),
                                  schema),
                  SchemaError);
  CHECK_THROWS_AS(validate_schema(json::parse(R"({"a": "x"})"), schema),
                  SchemaError);
}

TEST_CASE("validator enforces enum, item counts, and date format") {
  const json schema = json::parse(R"({
    "type": "object",
    "properties": {
      "style": {"enum": ["ones", "qbar"]},
      "pair": {"type": "array", "minItems": 2, "maxItems": 2},
      "when": {"type": "string", "format": "date"}
    }
  })");
  CHECK_NOTHROW(validate_schema(
      json::parse(R"({"style": "qbar", "pair": [1, 2], "when": "2020-02-29"})"),
      schema));
  CHECK_THROWS_AS(
      validate_schema(json::parse(R"({"style": "diag"})"), schema),
      SchemaError);
  CHECK_THROWS_AS(validate_schema(json::parse(R"({"pair": [1]})"), schema),
                  SchemaError);
  CHECK_THROWS_AS(
      validate_schema(json::parse(R"({"when": "2021-02-29"})"), schema),
      SchemaError);
  CHECK_THROWS_AS(
      validate_schema(json::parse(R"({"when": "03/01/2020"})"), schema),
      SchemaError);
}

TEST_CASE("validator distinguishes integers from general numbers") {
  const json schema = json::parse(R"({"type": "integer"})");
  CHECK_NOTHROW(validate_schema(json::parse("3"), schema));
  CHECK_NOTHROW(validate_schema(json::parse("-3"), schema));
  CHECK_THROWS_AS(validate_schema(json::parse("3.5"), schema), SchemaError);
  CHECK_NOTHROW(validate_schema(json::parse("3.5"),
                                json::parse(R"({"type": "number"})")));
}

TEST_CASE("write_validated_json refuses documents that dump invalid") {
  garch::GarchFit fit;
  fit.asset = "A";
  fit.params = {0.05, 0.05, 0.85, 0.15};
  fit.loglik = std::nan("");  // dumps as null, which the schema forbids
  fit.h0 = 1.0;

  const std::string path = tmp_path("corrx_invalid_fit.json");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(write_validated_json(path, garch_fit_json(fit), "garch_fit"),
                  SchemaError);
  CHECK(!std::filesystem::exists(path));

  fit.loglik = -10.0;
  CHECK_NOTHROW(write_validated_json(path, garch_fit_json(fit), "garch_fit"));
  CHECK(std::filesystem::exists(path));
  CHECK_NOTHROW(validate_shipped(load_json(path), "garch_fit"));
  std::filesystem::remove(path);
}

TEST_CASE("json file helpers raise the ingest error taxonomy") {
  CHECK_THROWS_AS(load_json(tmp_path("corrx_missing_847.json")), FileError);

  const std::string path = tmp_path("corrx_broken.json");
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_json(path), ParseError);
  std::filesystem::remove(path);

  const std::string good = tmp_path("corrx_good.json");
  write_json(good, json::parse(R"({"k": [1, 2.5, "x"]})"));
  const json back = load_json(good);
  CHECK(back.at("k")[1].get<double>() == 2.5);
  // trailing newline, two-space indentation
  const std::string text = slurp(good);
  CHECK(text.back() == '\n');
  CHECK(text.find("  \"k\"") == 2);  // right after "{\n"
  std::filesystem::remove(good);
}
