#include "shclab/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shclab/special.hpp"

namespace shclab {

namespace {

constexpr std::size_t kMaxCells = 30'000'000;

// Mass of (1 - |x|^2)^3 over the unit ball of R^d.
double bump_mass(int d) {
    const double area = d * unit_ball_volume(d);
    // int_0^1 r^{d-1}(1-r^2)^3 dr = B(d/2, 4)/2
    const double beta = std::tgamma(0.5 * d) * std::tgamma(4.0) / std::tgamma(0.5 * d + 4.0);
    return area * 0.5 * beta;
}

struct Grid {
    int d = 1;
    int n[3] = {1, 1, 1};
    std::size_t stride[3] = {1, 1, 1};
    double lo[3] = {0, 0, 0};
    double h = 0.0;
    int R = 0;  // kernel radius in cells
    std::vector<float> cov;
    std::vector<std::uint8_t> band;
    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
    void center(std::size_t idx, double* x) const {
        for (int i = d - 1; i >= 0; --i) {
            const std::size_t k = idx / stride[i];
            idx -= k * stride[i];
            x[i] = lo[i] + (k + 0.5) * h;
        }
    }
};

struct Kernel {
    std::vector<std::ptrdiff_t> delta;
    std::vector<double> w;      // rho(o h) h^d, summing to 1
    std::vector<double> grad;   // grad rho(o h) h^d, d per tap
};

Grid build_grid(const DomainSpec& domain, double eps, double h) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(h > 0.0) || !(h < 0.25 * eps)) throw std::invalid_argument("grid too coarse: need grid_h < eps/4");
    Grid g;
    g.d = domain.dim;
    g.h = h;
    g.R = static_cast<int>(std::ceil(eps / h));
    const BoundingBox box = bounding_box(domain);
    const double pad = 2.0 * eps + 4.0 * h;
    std::size_t total = 1;
    for (int i = 0; i < g.d; ++i) {
        g.lo[i] = box.lo[i] - pad;
        g.n[i] = static_cast<int>(std::ceil((box.hi[i] - box.lo[i] + 2.0 * pad) / h));
        total *= g.n[i];
    }
    if (total > kMaxCells) throw std::invalid_argument("mollification grid too large for this epsilon");
    for (int i = 1; i < g.d; ++i) g.stride[i] = g.stride[i - 1] * g.n[i - 1];

    g.cov.assign(total, 0.0f);
    std::vector<std::uint8_t> uncertain(total, 0);
    const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(g.d));
    const double margin = (domain.kind == DomainKind::level_set ? 1.5 : 1.0) * half_diag + 1e-12;
    const int S = g.d == 1 ? 64 : (g.d == 2 ? 8 : 4);
    int sub_total = 1;
    for (int i = 0; i < g.d; ++i) sub_total *= S;
    double x[3], y[3];
    for (std::size_t idx = 0; idx < total; ++idx) {
        g.center(idx, x);
        const double p = distance_proxy(domain, x);
        if (p > margin) {
            g.cov[idx] = 1.0f;
        } else if (p >= -margin) {
            uncertain[idx] = 1;
            int inside = 0;
            for (int s = 0; s < sub_total; ++s) {
                int r = s;
                for (int i = 0; i < g.d; ++i) {
                    y[i] = x[i] + ((r % S + 0.5) / S - 0.5) * h;
                    r /= S;
                }
                inside += contains_raw(domain, y);
            }
            g.cov[idx] = static_cast<float>(static_cast<double>(inside) / sub_total);
        }
    }
    // Band: cells within R (Chebyshev) of an uncertain cell.
    g.band.assign(total, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!uncertain[idx]) continue;
        int k[3] = {0, 0, 0};
        std::size_t rem = idx;
        for (int i = g.d - 1; i >= 0; --i) {
            k[i] = static_cast<int>(rem / g.stride[i]);
            rem -= static_cast<std::size_t>(k[i]) * g.stride[i];
        }
        const int lo2 = g.d > 1 ? -g.R : 0, hi2 = g.d > 1 ? g.R : 0;
        const int lo3 = g.d > 2 ? -g.R : 0, hi3 = g.d > 2 ? g.R : 0;
        for (int c = lo3; c <= hi3; ++c)
            for (int b = lo2; b <= hi2; ++b) {
                const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(idx) +
                                            c * static_cast<std::ptrdiff_t>(g.stride[2]) * (g.d > 2) +
                                            b * static_cast<std::ptrdiff_t>(g.stride[1]) * (g.d > 1);
                if (g.d > 1 && (k[1] + b < 0 || k[1] + b >= g.n[1])) continue;
                if (g.d > 2 && (k[2] + c < 0 || k[2] + c >= g.n[2])) continue;
                for (int a = -g.R; a <= g.R; ++a) {
                    if (k[0] + a < 0 || k[0] + a >= g.n[0]) continue;
                    g.band[base + a] = 1;
                }
            }
    }
    return g;
}

Kernel build_kernel(const Grid& g, double eps) {
    Kernel k;
    const int R = g.R;
    const int lo2 = g.d > 1 ? -R : 0, hi2 = g.d > 1 ? R : 0;
    const int lo3 = g.d > 2 ? -R : 0, hi3 = g.d > 2 ? R : 0;
    double mass = 0.0;
    const double hd = std::pow(g.h, g.d);
    for (int c = lo3; c <= hi3; ++c)
        for (int b = lo2; b <= hi2; ++b)
            for (int a = -R; a <= R; ++a) {
                const double o[3] = {a * g.h, b * g.h, c * g.h};
                const double r2 = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) / (eps * eps);
                if (r2 >= 1.0) continue;
                const double u = 1.0 - r2;
                // The tap at offset o multiplies cov(x - o).
                k.delta.push_back(-(a * static_cast<std::ptrdiff_t>(g.stride[0]) +
                                    b * static_cast<std::ptrdiff_t>(g.stride[1]) * (g.d > 1) +
                                    c * static_cast<std::ptrdiff_t>(g.stride[2]) * (g.d > 2)));
                k.w.push_back(u * u * u * hd);
                for (int i = 0; i < g.d; ++i) k.grad.push_back(-6.0 * o[i] / (eps * eps) * u * u * hd);
                mass += u * u * u * hd;
            }
    for (double& v : k.w) v /= mass;
    for (double& v : k.grad) v /= mass;
    return k;
}

}  // namespace

double mollifier(double r, double eps, int dim) {
    if (r >= eps) return 0.0;
    const double u = 1.0 - (r * r) / (eps * eps);
    return u * u * u / (bump_mass(dim) * std::pow(eps, dim));
}

double mollified_variation(const DomainSpec& domain, double epsilon, double grid_h) {
    const Grid g = build_grid(domain, epsilon, grid_h);
    const Kernel k = build_kernel(g, epsilon);
    const double hd = std::pow(g.h, g.d);
    const std::size_t taps = k.delta.size();
    double total = 0.0;
    const std::size_t n = g.size();
#pragma omp parallel for schedule(static) reduction(+ : total)
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (!g.band[idx]) continue;
        double grad[3] = {0, 0, 0};
        for (std::size_t t = 0; t < taps; ++t) {
            const double c = g.cov[static_cast<std::ptrdiff_t>(idx) + k.delta[t]];
            if (c == 0.0) continue;
            for (int i = 0; i < g.d; ++i) grad[i] += c * k.grad[t * g.d + i];
        }
        total += std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]) * hd;
    }
    return total;
}

std::shared_ptr<const ScalarField> mollified_indicator(const DomainSpec& domain, double epsilon,
                                                       double grid_h) {
    if (domain.dim != 2) throw std::invalid_argument("mollified indicator is tabulated for d = 2 only");
    Grid g = build_grid(domain, epsilon, grid_h);
    const Kernel k = build_kernel(g, epsilon);
    auto values = std::make_shared<std::vector<double>>(g.size());
    double integral = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        double v = g.cov[idx];
        if (g.band[idx]) {
            v = 0.0;
            for (std::size_t t = 0; t < k.delta.size(); ++t)
                v += g.cov[static_cast<std::ptrdiff_t>(idx) + k.delta[t]] * k.w[t];
        }
        (*values)[idx] = v;
        integral += v * g.h * g.h;
    }
    auto f = std::make_shared<ScalarField>();
    char buf[64];
    std::snprintf(buf, sizeof buf, ",eps=%g)", epsilon);
    f->name = "mollified(" + describe(domain) + buf;
    f->dim = 2;
    const double x0 = g.lo[0], y0 = g.lo[1], h = g.h;
    const int nx = g.n[0], ny = g.n[1];
    f->value = [values, x0, y0, h, nx, ny](const double* x) {
        const double u = (x[0] - x0) / h - 0.5, v = (x[1] - y0) / h - 0.5;
        if (!(u >= 0.0 && v >= 0.0 && u < nx - 1 && v < ny - 1)) return 0.0;
        const int i = static_cast<int>(u), j = static_cast<int>(v);
        const double fu = u - i, fv = v - j;
        const auto at = [&](int a, int b) { return (*values)[static_cast<std::size_t>(b) * nx + a]; };
        return (1 - fu) * (1 - fv) * at(i, j) + fu * (1 - fv) * at(i + 1, j) + (1 - fu) * fv * at(i, j + 1) +
               fu * fv * at(i + 1, j + 1);
    };
    f->support.lo = {x0, y0};
    f->support.hi = {x0 + nx * h, y0 + ny * h};
    f->integral = integral;
    return f;
}

}  // namespace shclab
