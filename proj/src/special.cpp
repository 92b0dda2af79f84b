#include "shclab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace shclab {

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ellipse_perimeter(double a, double b) {
    if (a < b) std::swap(a, b);
    const double k = std::sqrt(1.0 - (b * b) / (a * a));
    return 4.0 * a * std::comp_ellint_2(k);
}

double ellipsoid_surface(double a, double b, double c) {
    double s[3] = {a, b, c};
    std::sort(s, s + 3, std::greater<>());
    a = s[0];
    b = s[1];
    c = s[2];
    if (a - c < 1e-14 * a) return 4.0 * std::numbers::pi * a * a;
    const double phi = std::acos(c / a);
    const double sphi = std::sin(phi);
    const double k2 = (a * a * (b * b - c * c)) / (b * b * (a * a - c * c));
    const double k = std::sqrt(std::clamp(k2, 0.0, 1.0));
    const double E = std::ellint_2(k, phi);
    const double F = std::ellint_1(k, phi);
    return 2.0 * std::numbers::pi * c * c +
           2.0 * std::numbers::pi * a * b / sphi * (E * sphi * sphi + F * (1.0 - sphi * sphi));
}

double stable_positive_part_mean(double alpha) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
    return std::tgamma(1.0 - 1.0 / alpha) / std::numbers::pi;
}

double stable_sup_mean_spitzer(double alpha) { return alpha * stable_positive_part_mean(alpha); }

double stable_grid_sup_mean_spitzer(double alpha, long n) {
    // E[max_k S_k] = sum_k E[S_k^+]/k with S_k = Y_{k/n}.
    const double s = 1.0 / alpha;
    double acc = 0.0;
    for (long k = n; k >= 1; --k) acc += std::pow(static_cast<double>(k), s - 1.0);
    return stable_positive_part_mean(alpha) * std::pow(static_cast<double>(n), -s) * acc;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(i / n - j / m));
    }
    const double ne = n * m / (n + m);
    const double sq = std::sqrt(ne);
    return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

KsResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
    std::vector<double> x(a.begin(), a.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sq = std::sqrt(n);
    return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

}  // namespace shclab
