#pragma once

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/dates.hpp"
#include "corrx/dcc.hpp"
#include "corrx/diagnostics.hpp"
#include "corrx/evaluation.hpp"
#include "corrx/forecast.hpp"
#include "corrx/garch.hpp"
#include "corrx/irf.hpp"
#include "corrx/simulate.hpp"

namespace corrx::serialize {

/// All machine-readable artifacts use insertion-ordered JSON so a rerun
/// reproduces files byte for byte.
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

/// Rounds through a %.{digits}g decimal representation. Non-finite values
/// pass through unchanged.
double round_sig(double v, int digits);

/// Rounded JSON number, or null when `v` is not finite (JSON has no NaN).
json json_number(double v, int digits);

// ---------------------------------------------------------------------------
// Fit documents
// ---------------------------------------------------------------------------
// Fits serialize as summaries: parameters, standard errors and likelihood
// metadata, not the filtered variance/correlation paths. A round-tripped fit
// therefore reports but cannot forecast. Parameters and standard errors are
// written with 12 significant digits; matrices and likelihoods keep full
// precision.

json garch_fit_json(const garch::GarchFit& fit);
garch::GarchFit garch_fit_from_json(const json& doc);

/// `requested` (when given) supplies the break provenance: two_step_fit
/// folds a break into an extra regressor, so the fitted spec itself no
/// longer carries the date. Pass the spec the caller asked for to record it.
json dcc_fit_json(const dcc::DccFit& fit,
                  const dcc::DccSpec* requested = nullptr);
dcc::DccFit dcc_fit_from_json(const json& doc);

json model_fit_json(const dcc::ModelFit& fit,
                    const dcc::DccSpec* requested = nullptr);
dcc::ModelFit model_fit_from_json(const json& doc);

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

/// Manifest for a forecast run: split date, hold-out length, the asset
/// column order shared by every forecast file, and one entry per requested
/// model. `files[i]` names the CSV written for model i (empty = none,
/// serialized as null).
json forecast_manifest_json(const forecast::OosRun& run,
                            const std::vector<std::string>& files,
                            const std::vector<std::string>& assets);

json mcs_report_json(const evaluation::McsResult& result,
                     const std::string& loss_name,
                     const evaluation::McsOptions& options);

/// Horizons from the |peak| back down to half the |peak|, or -1 when the
/// response is identically zero or never halves within the computed span.
int irf_half_life(const irf::IrfResult& result);

/// Summary document; the pair is reported by asset name.
json irf_summary_json(const irf::IrfResult& result,
                      const std::string& asset_i_name,
                      const std::string& asset_j_name);

json sim_config_json(const simulate::SimConfig& config);
/// Accepts partial documents: absent fields keep SimConfig's defaults.
/// Validates against the shipped sim_config schema first.
simulate::SimConfig sim_config_from_json(const json& doc);

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------
// Data-bearing files (simulated panels, covariance forecasts) use 17
// significant digits so reading them back reproduces the doubles exactly;
// plot-ready files use 12; descriptive statistics use 6.

void write_stats_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, ingest::StatsRow>>& rows);

/// Long form `date,asset_i,asset_j,rho`, one row per date and i<j pair.
void write_r_path_csv(const std::string& path, const std::vector<Date>& dates,
                      const std::vector<Eigen::MatrixXd>& R,
                      const std::vector<std::string>& asset_names);

/// Long form `date,i,j,h_ij` over i<=j (the diagonal carries variances).
void write_forecast_csv(const std::string& path,
                        const forecast::ForecastSet& set,
                        const std::vector<std::string>& asset_names);

/// Inverse of write_forecast_csv; asset order is first appearance. Throws
/// ParseError for malformed cells, DomainError when a date block does not
/// repeat the first block's pair sequence.
forecast::ForecastSet read_forecast_csv(const std::string& path,
                                        const std::string& model_name);

/// `date,<model>...` per-date loss table.
void write_losses_csv(const std::string& path,
                      const evaluation::LossMatrix& losses);

/// `date,value,flag`; degenerate windows print value "nan", flag 0.
void write_rolling_series_csv(const std::string& path,
                              const diagnostics::RollingSeries& series);

/// `date,theta3,converged`; thrown windows print theta3 "nan", converged 0.
void write_rolling_coef_csv(const std::string& path,
                            const diagnostics::RollingCoef& coefs);

/// `horizon,delta_rho_pp`.
void write_irf_csv(const std::string& path, const irf::IrfResult& result);

/// Date-indexed panel in the data_ingest input format; values round-trip
/// exactly through load_raw_panel.
void write_panel_csv(const std::string& path,
                     const ingest::ReturnPanel& panel);

/// Same format with one column per exogenous series; all series must share
/// one date index (throws DomainError otherwise).
void write_exog_csv(const std::string& path,
                    const std::vector<ingest::ExogenousSeries>& series);

// ---------------------------------------------------------------------------
// JSON files and schema validation
// ---------------------------------------------------------------------------

/// Parses a JSON file. Throws FileError if unreadable, ParseError on
/// malformed JSON.
json load_json(const std::string& path);

/// dump(2) plus trailing newline. Throws FileError if the file cannot be
/// created.
void write_json(const std::string& path, const json& doc);

/// Serializes, reparses and validates against the named shipped schema
/// before writing, so a file on disk is guaranteed to validate (NaNs, which
/// dump as null, are caught rather than shipped). Throws SchemaError.
void write_validated_json(const std::string& path, const json& doc,
                          const std::string& schema_name);

/// Parsed embedded copy of schemas/<name>.schema.json. Throws DomainError
/// for an unknown name.
const json& shipped_schema(const std::string& name);
std::vector<std::string> shipped_schema_names();

/// Minimal validator covering the subset the shipped schemas use: type
/// (single or list), enum, required, properties, additionalProperties,
/// items, minItems/maxItems, minimum/maximum/exclusiveMinimum/
/// exclusiveMaximum, format "date", and $ref into the shipped set. Throws
/// SchemaError with a JSON-pointer path into the document.
void validate_schema(const json& doc, const json& schema);
void validate_shipped(const json& doc, const std::string& schema_name);

}  // namespace corrx::serialize
