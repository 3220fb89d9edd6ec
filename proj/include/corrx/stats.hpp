#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace corrx {

double mean(std::span<const double> x);
/// Sample variance (divisor n-1).
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

/// Central moment of order k with divisor n.
double central_moment(std::span<const double> x, int k);

/// m3 / m2^{3/2}; throws DomainError on zero variance.
double skewness(std::span<const double> x);
/// m4 / m2^2, non-excess (normal = 3); throws DomainError on zero variance.
double kurtosis(std::span<const double> x);

/// Sample autocorrelation at the given lag (demeaned).
double autocorrelation(std::span<const double> x, int lag);

/// Upper-tail probability P(X > x) for a chi-squared with `df` degrees of
/// freedom.
double chi_squared_sf(double x, double df);

/// Sample Pearson correlation matrix of the columns of `data` (demeaned,
/// unit diagonal by construction). Throws DomainError if a column has zero
/// variance.
Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& data);

/// FNV-1a 64-bit over a byte range; building block for dataset fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t n,
                    std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_doubles(std::span<const double> xs, std::uint64_t h);

}  // namespace corrx
