#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <span>

#include "corrx/errors.hpp"
#include "corrx/garch.hpp"
#include "corrx/rng.hpp"
#include "corrx/stats.hpp"

using namespace corrx;
using namespace corrx::garch;

namespace {

/// Minimal GJR data generator for recovery tests (burn-in discarded).
Eigen::VectorXd simulate_gjr(const GjrParams& p, Eigen::Index T, Rng& rng) {
  const Eigen::Index burn = 200;
  double h2 = p.unconditional_variance();
  double r = std::sqrt(h2) * rng.normal();
  Eigen::VectorXd out(T);
  for (Eigen::Index t = 1; t < burn + T; ++t) {
    h2 = p.omega + p.alpha * r * r + p.beta * h2 +
         (r < 0.0 ? p.gamma * r * r : 0.0);
    r = std::sqrt(h2) * rng.normal();
    if (t >= burn) out[t - burn] = r;
  }
  return out;
}

}  // namespace

TEST_CASE("gjr_filter hand recursions") {
  Eigen::VectorXd r(2);

  GjrParams flat{0.5, 0.0, 0.0, 0.0};
  r << 1.3, -0.4;
  Eigen::VectorXd h2 = gjr_filter(flat, r, 2.0);
  CHECK(h2[0] == 2.0);
  CHECK(h2[1] == 0.5);  // constant from t=2 onward

  GjrParams p{0.1, 0.1, 0.8, 0.1};
  r << -1.0, 0.0;
  CHECK(gjr_filter(p, r, 1.0)[1] == doctest::Approx(1.1).epsilon(1e-14));
  r << 1.0, 0.0;
  CHECK(gjr_filter(p, r, 1.0)[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gjr_filter validates inputs") {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(3);
  GjrParams ok{0.1, 0.1, 0.8, 0.1};
  CHECK_THROWS_AS(gjr_filter(ok, r, 0.0), DomainError);
  CHECK_THROWS_AS(gjr_filter(ok, r, -1.0), DomainError);

  GjrParams bad_omega{0.0, 0.1, 0.8, 0.1};
  CHECK_THROWS_AS(gjr_filter(bad_omega, r, 1.0), DomainError);
  GjrParams bad_neg{0.1, -0.1, 0.8, 0.1};
  CHECK_THROWS_AS(gjr_filter(bad_neg, r, 1.0), DomainError);
  GjrParams bad_stat{0.1, 0.3, 0.8, 0.1};
  CHECK_THROWS_AS(gjr_filter(bad_stat, r, 1.0), DomainError);

  r[1] = std::nan("");
  CHECK_THROWS_AS(gjr_filter(ok, r, 1.0), DomainError);
}

TEST_CASE("gjr_loglik closed forms at T=1") {
  GjrParams p{1.0, 0.0, 0.0, 0.0};
  Eigen::VectorXd r(1);
  r << 0.0;
  const double log2pi = std::log(2.0 * M_PI);
  CHECK(gjr_loglik(p, r, 1.0) == doctest::Approx(-0.5 * log2pi).epsilon(1e-14));
  r << 1.0;
  CHECK(gjr_loglik(p, r, 1.0) ==
        doctest::Approx(-0.5 * (log2pi + 1.0)).epsilon(1e-14));
}

TEST_CASE("loglik terms sum to the total and the floor guards h->0") {
  GjrParams p{0.05, 0.08, 0.85, 0.05};
  Rng rng(11);
  Eigen::VectorXd r = simulate_gjr(p, 300, rng);
  Eigen::VectorXd terms = gjr_loglik_terms(p, r, 1.0);
  CHECK(terms.sum() == doctest::Approx(gjr_loglik(p, r, 1.0)).epsilon(1e-12));

  // A tiny h0 with nonzero first return is floored, not -inf.
  GjrParams degen{1e-30, 0.0, 0.0, 0.0};
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(std::isfinite(gjr_loglik_terms(degen, one, 1e-30)[0]));
  CHECK(gjr_loglik_terms(degen, one, 1e-30)[0] < -1e10);
}

TEST_CASE("filter is sign-invariant when gamma is zero") {
  GjrParams p{0.1, 0.1, 0.8, 0.0};
  Rng rng(5);
  Eigen::VectorXd r(50);
  for (auto& v : r.reshaped()) v = rng.normal();
  Eigen::VectorXd h_pos = gjr_filter(p, r, 1.0);
  Eigen::VectorXd h_neg = gjr_filter(p, (-r).eval(), 1.0);
  CHECK((h_pos - h_neg).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("finite-difference gradients agree across stencils") {
  GjrParams p{0.07, 0.06, 0.82, 0.09};
  Rng rng(17);
  Eigen::VectorXd r = simulate_gjr(p, 400, rng);

  auto f = [&](const Eigen::VectorXd& th) {
    GjrParams q{th[0], th[1], th[2], th[3]};
    return gjr_loglik_terms(q, r, 1.0).sum();
  };
  Eigen::VectorXd th(4);
  th << 0.05, 0.08, 0.80, 0.06;
  Eigen::VectorXd g2 = optim::fd_gradient(f, th);
  Eigen::VectorXd g4 = optim::fd_gradient_refined(f, th);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(g2[i] - g4[i]) <=
          1e-4 * std::max(1.0, std::abs(g4[i])));
}

TEST_CASE("fit recovers simulated parameters") {
  GjrParams truth{0.05, 0.05, 0.85, 0.15};
  Rng rng(2024);
  Eigen::VectorXd r = simulate_gjr(truth, 5000, rng);

  GarchFit fit = fit_gjr(r);
  CHECK(fit.converged);
  CHECK(fit.params.persistence() < 1.0);
  CHECK(fit.params.omega == doctest::Approx(truth.omega).epsilon(0.8));
  CHECK(std::abs(fit.params.alpha - truth.alpha) < 0.05);
  CHECK(std::abs(fit.params.beta - truth.beta) < 0.06);
  CHECK(std::abs(fit.params.gamma - truth.gamma) < 0.07);
  CHECK(fit.loglik == doctest::Approx(gjr_loglik(fit.params, r, fit.h0)));
  for (int i = 0; i < 4; ++i) {
    CHECK(std::isfinite(fit.se_robust[i]));
    CHECK(fit.se_robust[i] >= 0.0);
  }
  CHECK(fit.se_robust[2] > 0.0);  // beta is interior, se must be positive

  // Residuals of a correctly-specified fit are near unit variance.
  std::span<const double> res(fit.residuals.data(),
                              static_cast<std::size_t>(fit.residuals.size()));
  CHECK(variance(res) > 0.9);
  CHECK(variance(res) < 1.1);
}

TEST_CASE("white noise drives alpha and gamma toward zero") {
  Rng rng(99);
  Eigen::VectorXd r(3000);
  for (auto& v : r.reshaped()) v = rng.normal();
  GarchFit fit = fit_gjr(r);
  CHECK(fit.params.alpha < 0.05);
  CHECK(fit.params.gamma < 0.05);
  CHECK(fit.params.unconditional_variance() == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("fit is deterministic across reruns") {
  GjrParams truth{0.05, 0.08, 0.85, 0.05};
  Rng rng(7);
  Eigen::VectorXd r = simulate_gjr(truth, 1500, rng);
  GarchFit a = fit_gjr(r);
  GarchFit b = fit_gjr(r);
  CHECK(a.params.omega == b.params.omega);
  CHECK(a.params.alpha == b.params.alpha);
  CHECK(a.params.beta == b.params.beta);
  CHECK(a.params.gamma == b.params.gamma);
  CHECK(a.loglik == b.loglik);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("fit_gjr enforces the observation floor") {
  Eigen::VectorXd r = Eigen::VectorXd::Constant(30, 0.1);
  CHECK_THROWS_AS(fit_gjr(r), DomainError);

  GjrFitOptions opts;
  opts.min_obs = 10;
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(20, 0.1);
  CHECK_THROWS_AS(fit_gjr(flat, opts), DomainError);  // zero variance
}

TEST_CASE("degarch definitions") {
  GarchFit fit;
  fit.variance_path.resize(3);
  fit.variance_path << 4.0, 1.0, 0.25;
  Eigen::VectorXd r(3);
  r << 2.0, 0.0, -1.0;
  Eigen::VectorXd e = degarch(r, fit);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == 0.0);
  CHECK(e[2] == doctest::Approx(-2.0));

  Eigen::VectorXd wrong(2);
  CHECK_THROWS_AS(degarch(wrong, fit), DomainError);

  // Constant-variance fit scales elementwise.
  fit.variance_path.setConstant(3, 9.0);
  Eigen::VectorXd scaled = degarch(r, fit);
  for (int i = 0; i < 3; ++i) CHECK(scaled[i] == doctest::Approx(r[i] / 3.0));
}

TEST_CASE("demean option centers the series first") {
  GjrParams truth{0.05, 0.08, 0.85, 0.05};
  Rng rng(31);
  Eigen::VectorXd r = simulate_gjr(truth, 1500, rng);
  r.array() += 5.0;  // large offset would wreck a zero-mean fit

  GjrFitOptions opts;
  opts.demean = true;
  GarchFit fit = fit_gjr(r, opts);
  CHECK(fit.params.unconditional_variance() < 2.0);  // not inflated by the mean
}
