#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "corrx/data_ingest.hpp"
#include "corrx/forecast.hpp"

namespace corrx::evaluation {

enum class LossKind { frobenius, qlike, gmv, rpv };

const char* loss_kind_name(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Sum over entries of (H_ij - r_i r_j)^2 against the realized outer-product
/// proxy. Zero iff H equals r r' exactly.
double frobenius_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r);

/// log|H| + tr(H^{-1} r r'). No additive normal constants, so values compare
/// across models but are not likelihoods. Throws DomainError unless H is PD.
double qlike_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r);

/// Global-minimum-variance weights v = sqrt(n) H^{-1} j / (j' H^{-1} j);
/// weights sum to sqrt(n). Throws DomainError unless H is PD.
Eigen::VectorXd gmv_weights(const Eigen::MatrixXd& H);

/// v' H v at the GMV weights, i.e. n / (j' H^{-1} j).
double gmv_loss(const Eigen::MatrixXd& H);

/// (v' r - rp_bar)^2 with v = gmv_weights(H); rp_bar is the hold-out mean
/// portfolio return computed in a first pass over the forecast set.
double rpv_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r,
                double rp_bar);

/// Per-model, per-date losses over a common hold-out span.
struct LossMatrix {
  std::vector<std::string> model_names;
  std::vector<Date> dates;
  Eigen::MatrixXd losses;  // T_h x M
  std::string loss_name;

  /// No non-finite entries, matching shapes. Throws DomainError.
  void validate() const;
};

/// Evaluates one loss for every model and hold-out date. `realized` must
/// contain a row for every forecast date (by date lookup). RPV's mean
/// portfolio return is computed per model over the full hold-out first.
LossMatrix build_loss_matrix(const std::vector<forecast::ForecastSet>& sets,
                             const ingest::ReturnPanel& realized,
                             LossKind kind, int jobs = 1);

struct McsOptions {
  int replications = 5000;
  int block_length = 0;  // 0 = ceil(T_h^{1/3})
  std::uint64_t seed = 1;
  int jobs = 1;  // bootstrap replications run in parallel substreams
};

struct McsResult {
  std::vector<std::string> model_names;
  Eigen::VectorXd pvalues;  // monotonized MCS p-values, aligned with names
  std::vector<std::string> surviving_set;       // models with p >= alpha
  std::vector<std::string> elimination_order;   // worst-first full ranking
  double alpha = 0.0;
  int block_length = 0;  // resolved value actually used
};

/// Model Confidence Set by iterated elimination under the range statistic
///   T_R = max_{u,v} |mean d_uv| / se(d_uv),
/// with the null distribution and the standard errors taken from one
/// circular block bootstrap of the loss differentials (per-replication
/// seeded substreams; deterministic for a given seed regardless of jobs).
/// Round p-values are monotonized with a running max; the final survivor
/// has p-value 1. Pairs with exactly identical losses contribute nothing,
/// so fully identical models all survive with p = 1.
McsResult mcs(const LossMatrix& losses, double alpha,
              const McsOptions& options = {});

}  // namespace corrx::evaluation
