#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "corrx/errors.hpp"
#include "corrx/evaluation.hpp"
#include "corrx/rng.hpp"

using namespace corrx;
using namespace corrx::evaluation;

namespace {

Eigen::MatrixXd random_pd(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

/// Golden-section minimizer for the scalar QLike calibration oracle.
double golden_min(const std::function<double(double)>& f, double lo,
                  double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) b = d; else a = c;
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return 0.5 * (a + b);
}

forecast::ForecastSet constant_set(const std::string& name,
                                   const std::vector<Date>& dates,
                                   const Eigen::MatrixXd& H) {
  forecast::ForecastSet fs;
  fs.model_name = name;
  for (Date d : dates) fs.forecasts.push_back({d, H});
  return fs;
}

}  // namespace

TEST_CASE("frobenius hand values and exact zero at the proxy") {
  Eigen::VectorXd r1(1);
  r1 << 1.0;
  Eigen::MatrixXd h1(1, 1);
  h1 << 2.0;
  CHECK(frobenius_loss(h1, r1) == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::VectorXd r2(2);
  r2 << 1.0, 1.0;
  CHECK(frobenius_loss(Eigen::MatrixXd::Identity(2, 2), r2) ==
        doctest::Approx(2.0).epsilon(1e-15));

  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd r(3);
    for (int i = 0; i < 3; ++i) r[i] = rng.normal();
    CHECK(frobenius_loss(r * r.transpose(), r) == 0.0);
  }

  CHECK_THROWS_AS(frobenius_loss(Eigen::MatrixXd::Identity(2, 2), r1),
                  DomainError);
}

TEST_CASE("frobenius brute-force cross-check on random inputs") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rep % 3);
    Eigen::MatrixXd H = random_pd(n, rng);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = rng.normal();
    const double direct = (H - r * r.transpose()).squaredNorm();
    CHECK(frobenius_loss(H, r) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("qlike hand values, oracle cross-check and minimization at c=1") {
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  CHECK(qlike_loss(Eigen::MatrixXd::Identity(2, 2), zero2) ==
        doctest::Approx(0.0).epsilon(1e-15));

  Eigen::VectorXd r2(2);
  r2 << 1.0, 1.0;
  CHECK(qlike_loss(Eigen::MatrixXd::Identity(2, 2), r2) ==
        doctest::Approx(2.0).epsilon(1e-15));

  // Independent oracle: determinant + explicit inverse.
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rep % 4);
    Eigen::MatrixXd H = random_pd(n, rng);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = rng.normal();
    const double oracle = std::log(H.determinant()) +
                          (H.inverse() * (r * r.transpose())).trace();
    CHECK(qlike_loss(H, r) == doctest::Approx(oracle).epsilon(1e-9));
  }

  // Scalar calibration: for H = c r^2 the loss log(c r^2) + 1/c is
  // minimized exactly at c = 1.
  const double rr = 1.7;
  auto f = [&](double c) {
    Eigen::MatrixXd H(1, 1);
    H << c * rr * rr;
    Eigen::VectorXd r(1);
    r << rr;
    return qlike_loss(H, r);
  };
  const double cstar = golden_min(f, 0.2, 3.0);
  CHECK(std::abs(cstar - 1.0) < 1e-6);

  // With the ridge proxy C = r^2 + eps the minimizer r^2/(r^2+eps)
  // approaches 1 from below as eps -> 0.
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    auto fe = [&](double c) {
      Eigen::MatrixXd H(1, 1);
      H << c * (rr * rr + eps);
      Eigen::VectorXd r(1);
      r << rr;
      return qlike_loss(H, r);
    };
    const double ce = golden_min(fe, 0.2, 3.0);
    CHECK(ce == doctest::Approx(rr * rr / (rr * rr + eps)).epsilon(1e-6));
  }

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(qlike_loss(indefinite, r2), DomainError);
}

TEST_CASE("gmv weights: closed forms and the sqrt(n) sum identity") {
  Eigen::VectorXd w4 = gmv_weights(Eigen::MatrixXd::Identity(4, 4));
  for (int i = 0; i < 4; ++i)
    CHECK(w4[i] == doctest::Approx(0.5).epsilon(1e-14));

  Eigen::MatrixXd d2 = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  Eigen::VectorXd w2 = gmv_weights(d2);
  CHECK(w2[0] == doctest::Approx(std::sqrt(2.0) * 0.8).epsilon(1e-13));
  CHECK(w2[1] == doctest::Approx(std::sqrt(2.0) * 0.2).epsilon(1e-13));

  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rep % 5);
    Eigen::MatrixXd H = random_pd(n, rng);
    Eigen::VectorXd v = gmv_weights(H);
    CHECK(std::abs(v.sum() - std::sqrt(static_cast<double>(n))) < 1e-10);

    // Brute force: solve H y = j by full-pivot LU and normalize.
    Eigen::VectorXd y =
        H.fullPivLu().solve(Eigen::VectorXd::Ones(n));
    Eigen::VectorXd brute =
        std::sqrt(static_cast<double>(n)) / y.sum() * y;
    CHECK((v - brute).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gmv loss closed forms and homogeneity") {
  CHECK(gmv_loss(Eigen::MatrixXd::Identity(2, 2)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  for (double s2 : {0.25, 1.0, 9.0})
    CHECK(gmv_loss(s2 * Eigen::MatrixXd::Identity(3, 3)) ==
          doctest::Approx(s2).epsilon(1e-13));

  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd H = random_pd(3, rng);
    CHECK(gmv_loss(2.0 * H) == doctest::Approx(2.0 * gmv_loss(H))
                                   .epsilon(1e-12));
    // v' H v at the GMV weights equals n / (j' H^{-1} j).
    Eigen::VectorXd v = gmv_weights(H);
    CHECK(v.dot(H * v) == doctest::Approx(gmv_loss(H)).epsilon(1e-12));
  }
}

TEST_CASE("rpv hand values") {
  Eigen::VectorXd r(2);
  r << 1.0, -1.0;
  CHECK(rpv_loss(Eigen::MatrixXd::Identity(2, 2), r, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-15));

  r << 1.0, 1.0;
  CHECK(rpv_loss(Eigen::MatrixXd::Identity(2, 2), r, 0.0) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("build_loss_matrix evaluates every model and date") {
  std::vector<Date> dates;
  for (int k = 0; k < 3; ++k)
    dates.push_back(Date::parse("2023-01-02").plus_days(k));

  ingest::ReturnPanel realized;
  realized.dates = dates;
  realized.asset_names = {"A", "B"};
  realized.values.resize(3, 2);
  realized.values << 1.0, 1.0, 0.5, -0.5, 0.0, 0.25;

  Eigen::MatrixXd h_a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd h_b = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  std::vector<forecast::ForecastSet> sets = {
      constant_set("A", dates, h_a), constant_set("B", dates, h_b)};

  LossMatrix lm = build_loss_matrix(sets, realized, LossKind::frobenius);
  CHECK(lm.loss_name == "frobenius");
  CHECK(lm.losses.rows() == 3);
  CHECK(lm.losses.cols() == 2);
  CHECK(lm.model_names == std::vector<std::string>{"A", "B"});
  CHECK(lm.dates == dates);
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd r = realized.values.row(t).transpose();
    CHECK(lm.losses(t, 0) ==
          doctest::Approx(frobenius_loss(h_a, r)).epsilon(1e-14));
    CHECK(lm.losses(t, 1) ==
          doctest::Approx(frobenius_loss(h_b, r)).epsilon(1e-14));
  }

  // GMV ignores the realized returns; identity forecasts give loss 1.
  LossMatrix gmv = build_loss_matrix(sets, realized, LossKind::gmv);
  CHECK(gmv.losses.col(0).minCoeff() == doctest::Approx(1.0));
  CHECK(gmv.losses.col(1).maxCoeff() == doctest::Approx(2.0));

  // RPV uses the per-model mean portfolio return in a first pass.
  LossMatrix rpv = build_loss_matrix(sets, realized, LossKind::rpv);
  Eigen::VectorXd v = gmv_weights(h_a);
  double rp_bar = 0.0;
  for (int t = 0; t < 3; ++t)
    rp_bar += v.dot(realized.values.row(t).transpose());
  rp_bar /= 3.0;
  for (int t = 0; t < 3; ++t) {
    const double rp = v.dot(realized.values.row(t).transpose());
    CHECK(rpv.losses(t, 0) ==
          doctest::Approx((rp - rp_bar) * (rp - rp_bar)).epsilon(1e-12));
  }

  // Missing realized date.
  realized.dates[2] = Date::parse("2023-02-01");
  CHECK_THROWS_AS(build_loss_matrix(sets, realized, LossKind::frobenius),
                  DomainError);
}

TEST_CASE("mcs keeps identical models with p = 1") {
  LossMatrix lm;
  lm.model_names = {"A", "B", "C"};
  lm.loss_name = "frobenius";
  lm.losses.resize(40, 3);
  Rng rng(17);
  for (int t = 0; t < 40; ++t) {
    const double v = std::abs(rng.normal());
    lm.losses(t, 0) = v;
    lm.losses(t, 1) = v;
    lm.losses(t, 2) = v;
  }
  McsOptions opts;
  opts.replications = 500;
  McsResult res = mcs(lm, 0.05, opts);
  for (int m = 0; m < 3; ++m) CHECK(res.pvalues[m] == 1.0);
  CHECK(res.surviving_set.size() == 3);
}

TEST_CASE("mcs eliminates a dominated model and ranks worst-first") {
  LossMatrix lm;
  lm.model_names = {"good", "bad", "mid"};
  lm.loss_name = "qlike";
  const int T = 200;
  lm.losses.resize(T, 3);
  Rng rng(19);
  for (int t = 0; t < T; ++t) {
    const double base = std::abs(rng.normal());
    lm.losses(t, 0) = base + 0.02 * rng.normal();
    lm.losses(t, 1) = base + 10.0 + 0.02 * rng.normal();
    lm.losses(t, 2) = base + 0.6 + 0.02 * rng.normal();
  }
  McsOptions opts;
  opts.replications = 1000;
  opts.seed = 4;
  McsResult res = mcs(lm, 0.05, opts);

  CHECK(res.pvalues[0] == 1.0);          // survivor
  CHECK(res.pvalues[1] < 0.05);          // dominated
  CHECK(res.pvalues[2] < 0.05);
  CHECK(res.surviving_set == std::vector<std::string>{"good"});
  CHECK(res.elimination_order ==
        std::vector<std::string>{"bad", "mid", "good"});
  CHECK(res.block_length == 6);  // ceil(200^(1/3))
}

TEST_CASE("mcs p-values are monotone along the elimination order") {
  LossMatrix lm;
  lm.model_names = {"m1", "m2", "m3", "m4"};
  lm.loss_name = "gmv";
  const int T = 150;
  lm.losses.resize(T, 4);
  Rng rng(23);
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < 4; ++m)
      lm.losses(t, m) = std::abs(rng.normal()) + 0.05 * m;
  McsOptions opts;
  opts.replications = 800;
  McsResult res = mcs(lm, 0.10, opts);

  // Walk the elimination order: recorded p-values never decrease.
  double prev = 0.0;
  for (const auto& name : res.elimination_order) {
    const auto it = std::find(lm.model_names.begin(), lm.model_names.end(),
                              name);
    const auto m = static_cast<Eigen::Index>(it - lm.model_names.begin());
    CHECK(res.pvalues[m] >= prev);
    prev = res.pvalues[m];
  }
  CHECK(prev == 1.0);
  CHECK(!res.surviving_set.empty());
}

TEST_CASE("mcs is invariant to a common per-date loss shift") {
  // Dyadic inputs keep the shifted differentials bitwise identical.
  LossMatrix lm;
  lm.model_names = {"A", "B"};
  lm.loss_name = "frobenius";
  const int T = 64;
  lm.losses.resize(T, 2);
  Rng rng(29);
  for (int t = 0; t < T; ++t) {
    lm.losses(t, 0) = static_cast<double>(rng.uniform_below(32)) / 8.0;
    lm.losses(t, 1) = static_cast<double>(rng.uniform_below(32)) / 8.0 + 0.25;
  }
  LossMatrix shifted = lm;
  for (int t = 0; t < T; ++t) {
    const double c = static_cast<double>(t % 7) * 0.5;
    shifted.losses(t, 0) += c;
    shifted.losses(t, 1) += c;
  }
  McsOptions opts;
  opts.replications = 400;
  McsResult a = mcs(lm, 0.05, opts);
  McsResult b = mcs(shifted, 0.05, opts);
  CHECK(a.pvalues == b.pvalues);
  CHECK(a.elimination_order == b.elimination_order);
}

TEST_CASE("mcs is deterministic and jobs-independent") {
  LossMatrix lm;
  lm.model_names = {"A", "B", "C"};
  lm.loss_name = "rpv";
  const int T = 120;
  lm.losses.resize(T, 3);
  Rng rng(31);
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < 3; ++m)
      lm.losses(t, m) = std::abs(rng.normal()) * (1.0 + 0.1 * m);

  McsOptions one;
  one.replications = 600;
  one.seed = 9;
  one.jobs = 1;
  McsOptions two = one;
  two.jobs = 2;
  McsResult a = mcs(lm, 0.05, one);
  McsResult b = mcs(lm, 0.05, one);
  McsResult c = mcs(lm, 0.05, two);
  CHECK(a.pvalues == b.pvalues);
  CHECK(a.pvalues == c.pvalues);
  CHECK(a.elimination_order == c.elimination_order);
}

TEST_CASE("mcs rejects degenerate inputs") {
  LossMatrix lm;
  lm.model_names = {"A", "B"};
  lm.losses = Eigen::MatrixXd::Zero(9, 2);
  CHECK_THROWS_AS(mcs(lm, 0.05), DomainError);  // T < 10

  lm.losses = Eigen::MatrixXd::Zero(20, 1);
  lm.model_names = {"A"};
  CHECK_THROWS_AS(mcs(lm, 0.05), DomainError);  // M < 2

  lm.losses = Eigen::MatrixXd::Zero(20, 2);
  lm.model_names = {"A", "B"};
  CHECK_THROWS_AS(mcs(lm, 0.0), DomainError);
  CHECK_THROWS_AS(mcs(lm, 1.0), DomainError);

  McsOptions opts;
  opts.block_length = 21;
  CHECK_THROWS_AS(mcs(lm, 0.05, opts), DomainError);

  lm.losses(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(mcs(lm, 0.05), DomainError);
}

TEST_CASE("loss kind names round-trip") {
  for (LossKind k : {LossKind::frobenius, LossKind::qlike, LossKind::gmv,
                     LossKind::rpv})
    CHECK(parse_loss_kind(loss_kind_name(k)) == k);
  CHECK_THROWS_AS(parse_loss_kind("mse"), DomainError);
}
