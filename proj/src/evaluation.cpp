#include "corrx/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "corrx/errors.hpp"
#include "corrx/parallel.hpp"
#include "corrx/rng.hpp"

namespace corrx::evaluation {

namespace {

Eigen::LLT<Eigen::MatrixXd> pd_factor(const Eigen::MatrixXd& H,
                                      const char* who) {
  if (H.rows() != H.cols())
    throw DomainError(std::string(who) + ": matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(who) +
                      ": matrix is not positive definite");
  return llt;
}

/// Circular block bootstrap index sequence of length T.
void boot_indices(Eigen::Index T, int block, Rng& rng,
                  std::vector<Eigen::Index>& out) {
  out.clear();
  while (static_cast<Eigen::Index>(out.size()) < T) {
    const auto start = static_cast<Eigen::Index>(
        rng.uniform_below(static_cast<std::uint64_t>(T)));
    for (Eigen::Index j = 0;
         j < block && static_cast<Eigen::Index>(out.size()) < T; ++j)
      out.push_back((start + j) % T);
  }
}

}  // namespace

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::frobenius: return "frobenius";
    case LossKind::qlike: return "qlike";
    case LossKind::gmv: return "gmv";
    case LossKind::rpv: return "rpv";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "frobenius") return LossKind::frobenius;
  if (name == "qlike") return LossKind::qlike;
  if (name == "gmv") return LossKind::gmv;
  if (name == "rpv") return LossKind::rpv;
  throw DomainError("unknown loss '" + name +
                    "' (expected frobenius|qlike|gmv|rpv)");
}

double frobenius_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r) {
  if (H.rows() != H.cols() || H.rows() != r.size())
    throw DomainError("frobenius_loss: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      const double d = H(i, j) - r[i] * r[j];
      sum += d * d;
    }
  return sum;
}

double qlike_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r) {
  if (H.rows() != r.size())
    throw DomainError("qlike_loss: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt = pd_factor(H, "qlike_loss");
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  // tr(H^{-1} r r') = r' H^{-1} r.
  return logdet + r.dot(llt.solve(r));
}

Eigen::VectorXd gmv_weights(const Eigen::MatrixXd& H) {
  Eigen::LLT<Eigen::MatrixXd> llt = pd_factor(H, "gmv_weights");
  const Eigen::Index n = H.rows();
  const Eigen::VectorXd hij = llt.solve(Eigen::VectorXd::Ones(n));
  const double denom = hij.sum();  // j' H^{-1} j > 0 for PD H
  return std::sqrt(static_cast<double>(n)) / denom * hij;
}

double gmv_loss(const Eigen::MatrixXd& H) {
  Eigen::LLT<Eigen::MatrixXd> llt = pd_factor(H, "gmv_loss");
  const Eigen::Index n = H.rows();
  const double denom = llt.solve(Eigen::VectorXd::Ones(n)).sum();
  return static_cast<double>(n) / denom;
}

double rpv_loss(const Eigen::MatrixXd& H, const Eigen::VectorXd& r,
                double rp_bar) {
  if (H.rows() != r.size())
    throw DomainError("rpv_loss: dimension mismatch");
  const double rp = gmv_weights(H).dot(r);
  const double d = rp - rp_bar;
  return d * d;
}

void LossMatrix::validate() const {
  if (static_cast<std::size_t>(losses.cols()) != model_names.size())
    throw DomainError("loss matrix: column/name count mismatch");
  if (!dates.empty() &&
      static_cast<std::size_t>(losses.rows()) != dates.size())
    throw DomainError("loss matrix: row/date count mismatch");
  if (!losses.allFinite())
    throw DomainError("loss matrix: non-finite entries");
}

LossMatrix build_loss_matrix(const std::vector<forecast::ForecastSet>& sets,
                             const ingest::ReturnPanel& realized,
                             LossKind kind, int jobs) {
  if (sets.empty()) throw DomainError("build_loss_matrix: no forecast sets");
  const std::size_t T_h = sets.front().forecasts.size();
  for (const auto& s : sets)
    if (s.forecasts.size() != T_h)
      throw DomainError("build_loss_matrix: forecast sets differ in length "
                        "(model '" + s.model_name + "')");
  if (T_h == 0) throw DomainError("build_loss_matrix: empty forecast sets");

  std::unordered_map<std::int32_t, Eigen::Index> row_of;
  for (std::size_t t = 0; t < realized.dates.size(); ++t)
    row_of[realized.dates[t].days] = static_cast<Eigen::Index>(t);

  LossMatrix out;
  out.loss_name = loss_kind_name(kind);
  out.losses.resize(static_cast<Eigen::Index>(T_h),
                    static_cast<Eigen::Index>(sets.size()));
  for (const auto& s : sets) out.model_names.push_back(s.model_name);
  for (const auto& f : sets.front().forecasts) out.dates.push_back(f.date);

  parallel_for(sets.size(), jobs, [&](std::size_t m) {
    const auto& fs = sets[m].forecasts;
    std::vector<Eigen::VectorXd> rs(T_h);
    for (std::size_t t = 0; t < T_h; ++t) {
      auto it = row_of.find(fs[t].date.days);
      if (it == row_of.end())
        throw DomainError("build_loss_matrix: no realized returns for " +
                          fs[t].date.to_string());
      rs[t] = realized.values.row(it->second).transpose();
    }

    double rp_bar = 0.0;
    if (kind == LossKind::rpv) {
      for (std::size_t t = 0; t < T_h; ++t)
        rp_bar += gmv_weights(fs[t].H).dot(rs[t]);
      rp_bar /= static_cast<double>(T_h);
    }

    for (std::size_t t = 0; t < T_h; ++t) {
      double v = 0.0;
      switch (kind) {
        case LossKind::frobenius: v = frobenius_loss(fs[t].H, rs[t]); break;
        case LossKind::qlike: v = qlike_loss(fs[t].H, rs[t]); break;
        case LossKind::gmv: v = gmv_loss(fs[t].H); break;
        case LossKind::rpv: v = rpv_loss(fs[t].H, rs[t], rp_bar); break;
      }
      out.losses(static_cast<Eigen::Index>(t),
                 static_cast<Eigen::Index>(m)) = v;
    }
  });
  out.validate();
  return out;
}

McsResult mcs(const LossMatrix& losses, double alpha,
              const McsOptions& options) {
  losses.validate();
  const Eigen::Index T = losses.losses.rows();
  const Eigen::Index M = losses.losses.cols();
  if (T < 10) throw DomainError("mcs: need at least 10 hold-out dates");
  if (M < 2) throw DomainError("mcs: need at least 2 models");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("mcs: alpha must lie in (0, 1)");
  if (options.replications < 1)
    throw DomainError("mcs: need at least 1 bootstrap replication");

  const int block =
      options.block_length > 0
          ? options.block_length
          : static_cast<int>(std::ceil(
                std::pow(static_cast<double>(T), 1.0 / 3.0)));
  if (block > T) throw DomainError("mcs: block length exceeds the sample");

  // Pairwise loss differentials d_uv,t, u < v, computed once so that adding
  // a common per-date constant to every model cancels before any bootstrap
  // arithmetic.
  const Eigen::Index P = M * (M - 1) / 2;
  Eigen::MatrixXd diff(T, P);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(P));
  for (Eigen::Index u = 0; u < M; ++u)
    for (Eigen::Index v = u + 1; v < M; ++v) {
      diff.col(static_cast<Eigen::Index>(pairs.size())) =
          losses.losses.col(u) - losses.losses.col(v);
      pairs.emplace_back(u, v);
    }
  const Eigen::VectorXd dbar = diff.colwise().mean();

  // One bootstrap serves every elimination round. boot_gap(r, p) holds
  // dbar*_p(r) - dbar_p; its column variances give the standard errors.
  const int R = options.replications;
  Eigen::MatrixXd boot_gap(R, P);
  Rng master(options.seed);
  parallel_for(static_cast<std::size_t>(R), options.jobs, [&](std::size_t r) {
    Rng sub = master.substream(static_cast<std::uint64_t>(r));
    std::vector<Eigen::Index> idx;
    boot_indices(T, block, sub, idx);
    for (Eigen::Index p = 0; p < P; ++p) {
      double sum = 0.0;
      for (Eigen::Index t = 0; t < T; ++t)
        sum += diff(idx[static_cast<std::size_t>(t)], p);
      boot_gap(static_cast<Eigen::Index>(r), p) =
          sum / static_cast<double>(T) - dbar[p];
    }
  });

  Eigen::VectorXd se(P);
  for (Eigen::Index p = 0; p < P; ++p)
    se[p] = std::sqrt(boot_gap.col(p).squaredNorm() / static_cast<double>(R));

  // t statistic of "u is worse than v"; degenerate pairs with identical
  // losses carry no evidence, exactly constant nonzero differentials carry
  // infinite evidence.
  auto tstat = [&](Eigen::Index p, double num) {
    if (se[p] > 0.0) return num / se[p];
    if (num == 0.0) return 0.0;
    return num > 0.0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
  };

  std::vector<bool> active(static_cast<std::size_t>(M), true);
  Eigen::VectorXd pvalues = Eigen::VectorXd::Ones(M);
  std::vector<std::string> elimination;
  double running_p = 0.0;

  for (Eigen::Index round = 0; round < M - 1; ++round) {
    // Range statistic over the active set.
    double t_range = 0.0;
    for (Eigen::Index p = 0; p < P; ++p) {
      auto [u, v] = pairs[static_cast<std::size_t>(p)];
      if (!active[static_cast<std::size_t>(u)] ||
          !active[static_cast<std::size_t>(v)])
        continue;
      t_range = std::max(t_range, std::abs(tstat(p, dbar[p])));
    }

    // Bootstrap null: same maximum over recentred replication gaps.
    int exceed = 0;
    for (int r = 0; r < R; ++r) {
      double t_star = 0.0;
      for (Eigen::Index p = 0; p < P; ++p) {
        auto [u, v] = pairs[static_cast<std::size_t>(p)];
        if (!active[static_cast<std::size_t>(u)] ||
            !active[static_cast<std::size_t>(v)])
          continue;
        if (se[p] > 0.0)
          t_star = std::max(t_star, std::abs(boot_gap(r, p)) / se[p]);
      }
      if (t_star >= t_range) ++exceed;
    }
    running_p = std::max(
        running_p, static_cast<double>(exceed) / static_cast<double>(R));

    // Eliminate the model whose worst directional statistic is largest.
    Eigen::Index worst = -1;
    double worst_stat = -std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < M; ++u) {
      if (!active[static_cast<std::size_t>(u)]) continue;
      double stat = -std::numeric_limits<double>::infinity();
      for (Eigen::Index p = 0; p < P; ++p) {
        auto [a, b] = pairs[static_cast<std::size_t>(p)];
        if (a == u && active[static_cast<std::size_t>(b)])
          stat = std::max(stat, tstat(p, dbar[p]));
        else if (b == u && active[static_cast<std::size_t>(a)])
          stat = std::max(stat, tstat(p, -dbar[p]));
      }
      if (stat > worst_stat) {
        worst_stat = stat;
        worst = u;
      }
    }

    pvalues[worst] = running_p;
    active[static_cast<std::size_t>(worst)] = false;
    elimination.push_back(
        losses.model_names[static_cast<std::size_t>(worst)]);
  }

  McsResult out;
  out.model_names = losses.model_names;
  out.alpha = alpha;
  out.block_length = block;
  out.pvalues = pvalues;
  out.elimination_order = elimination;
  for (Eigen::Index u = 0; u < M; ++u)
    if (active[static_cast<std::size_t>(u)])  // the final survivor, p = 1
      out.elimination_order.push_back(
          losses.model_names[static_cast<std::size_t>(u)]);
  for (Eigen::Index u = 0; u < M; ++u)
    if (pvalues[u] >= alpha)
      out.surviving_set.push_back(
          losses.model_names[static_cast<std::size_t>(u)]);
  return out;
}

}  // namespace corrx::evaluation
