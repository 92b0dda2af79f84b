#pragma once

#include <functional>
#include <span>

namespace shclab {

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

/// Perimeter of the ellipse with semi-axes a, b.
double ellipse_perimeter(double a, double b);
/// Surface area of the ellipsoid with semi-axes a, b, c (any order).
double ellipsoid_surface(double a, double b, double c);

/// E[max(Y_1, 0)] for the symmetric stable law with exponent |xi|^alpha, alpha in (1, 2].
double stable_positive_part_mean(double alpha);

/// E[sup_{s<=1} Y_s] for the same process, from Spitzer's identity.
/// Only used as an independent check of the Monte Carlo constants.
double stable_sup_mean_spitzer(double alpha);

/// Same identity on the grid {k/n}: E[max_{k<=n} Y_{k/n}].
double stable_grid_sup_mean_spitzer(double alpha, long n);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value). Sorts copies.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
/// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

/// Kolmogorov distribution survival function Q_KS(lambda).
double kolmogorov_sf(double lambda);

}  // namespace shclab
