#include "corrx/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstring>

#include "corrx/errors.hpp"

namespace corrx {

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least 2 observations");
  double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double central_moment(std::span<const double> x, int k) {
  double m = mean(x);
  double s = 0.0;
  for (double v : x) s += std::pow(v - m, k);
  return s / static_cast<double>(x.size());
}

double skewness(std::span<const double> x) {
  double m2 = central_moment(x, 2);
  if (m2 <= 0.0) throw DomainError("skewness undefined for zero-variance series");
  return central_moment(x, 3) / std::pow(m2, 1.5);
}

double kurtosis(std::span<const double> x) {
  double m2 = central_moment(x, 2);
  if (m2 <= 0.0) throw DomainError("kurtosis undefined for zero-variance series");
  return central_moment(x, 4) / (m2 * m2);
}

double autocorrelation(std::span<const double> x, int lag) {
  const auto n = static_cast<long>(x.size());
  if (lag < 0 || lag >= n) throw DomainError("autocorrelation lag out of range");
  double m = mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  if (denom <= 0.0) throw DomainError("autocorrelation of zero-variance series");
  double num = 0.0;
  for (long t = lag; t < n; ++t) num += (x[t] - m) * (x[t - lag] - m);
  return num / denom;
}

double chi_squared_sf(double x, double df) {
  if (df <= 0.0) throw DomainError("chi-squared df must be positive");
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& data) {
  const auto n = data.cols();
  const auto t = data.rows();
  if (t < 2) throw DomainError("correlation needs at least 2 rows");
  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::VectorXd ss = centered.colwise().squaredNorm();
  for (Eigen::Index j = 0; j < n; ++j)
    if (ss(j) <= 0.0)
      throw DomainError("zero-variance column in correlation input");
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double c = centered.col(i).dot(centered.col(j)) /
                 std::sqrt(ss(i) * ss(j));
      corr(i, j) = c;
      corr(j, i) = c;
    }
  }
  return corr;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_doubles(std::span<const double> xs, std::uint64_t h) {
  for (double v : xs) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h = fnv1a(&bits, sizeof(bits), h);
  }
  return h;
}

}  // namespace corrx
