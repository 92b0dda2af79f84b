#include "shclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "shclab/special.hpp"

namespace shclab {

namespace {

constexpr double kMinVolume = 1e-12;
constexpr double kBoundaryEps = 1e-12;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void check_dim(const DomainSpec& d, std::size_t n) {
    if (static_cast<int>(n) != d.dim) {
        throw std::invalid_argument("dimension mismatch: domain has d=" + std::to_string(d.dim) +
                                    ", point has " + std::to_string(n) + " coordinates");
    }
}

void finish(DomainSpec& d) {
    if (d.center.empty()) d.center.assign(d.dim, 0.0);
    if (static_cast<int>(d.center.size()) != d.dim) throw std::invalid_argument("center has wrong size");
    if (volume(d) < kMinVolume) throw std::invalid_argument("degenerate domain: volume below 1e-12");
}

// local = R^T (x - c)
void to_local(const DomainSpec& d, const double* x, double* y) {
    const int n = d.dim;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += d.rotation[j * n + i] * (x[j] - d.center[j]);
        y[i] = s;
    }
}

void to_world_dir(const DomainSpec& d, const double* v, double* out) {
    const int n = d.dim;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += d.rotation[j * n + i] * v[i];
        out[j] = s;
    }
}

double norm(const double* v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

// Closest point on the ellipsoid sum (p_i/a_i)^2 = 1 to z >= 0 (componentwise).
// Newton on g(l) = sum (a_i z_i / (a_i^2 + l))^2 - 1, which is convex and
// decreasing on (-a_min^2, inf); started left of the root it converges monotonically.
void ellipsoid_closest(const double* a, const double* z, int n, double* p) {
    int m = 0;
    for (int i = 1; i < n; ++i)
        if (a[i] < a[m]) m = i;
    double zn = norm(z, n);
    double amax = *std::max_element(a, a + n);
    if (zn == 0.0) {
        for (int i = 0; i < n; ++i) p[i] = 0.0;
        p[m] = a[m];
        return;
    }
    auto g = [&](double l, double* dg) {
        double s = 0.0, ds = 0.0;
        for (int i = 0; i < n; ++i) {
            const double q = a[i] * z[i] / (a[i] * a[i] + l);
            s += q * q;
            ds += -2.0 * q * q / (a[i] * a[i] + l);
        }
        if (dg) *dg = ds;
        return s - 1.0;
    };
    const double floor_l = -a[m] * a[m];
    double hi = amax * zn;
    double lambda;
    const double tiny = 1e-14 * amax;
    if (z[m] > tiny) {
        double lo = floor_l + a[m] * z[m];
        double l = lo;
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            double dg;
            const double v = g(l, &dg);
            const double step = v / dg;
            const double next = l - step;
            if (!(next > floor_l) || !std::isfinite(next)) break;
            if (std::abs(next - l) <= 1e-12 * (1.0 + std::abs(l))) {
                l = next;
                ok = true;
                break;
            }
            l = next;
        }
        if (!ok) {
            double b_lo = lo, b_hi = hi;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (b_lo + b_hi);
                if (g(mid, nullptr) > 0.0) b_lo = mid; else b_hi = mid;
            }
            l = 0.5 * (b_lo + b_hi);
        }
        lambda = l;
    } else {
        // z on the minor-axis hyperplane: the root may sit at the pole -a_min^2.
        const double eps = 1e-13 * a[m] * a[m];
        double g0 = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == m || a[i] * a[i] + floor_l <= eps) continue;
            const double q = a[i] * z[i] / (a[i] * a[i] + floor_l);
            g0 += q * q;
        }
        g0 -= 1.0;
        if (g0 <= 0.0) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == m || a[i] * a[i] + floor_l <= eps) {
                    p[i] = 0.0;
                    continue;
                }
                p[i] = a[i] * a[i] * z[i] / (a[i] * a[i] + floor_l);
                s += (p[i] / a[i]) * (p[i] / a[i]);
            }
            p[m] = a[m] * std::sqrt(std::max(0.0, 1.0 - s));
            return;
        }
        double b_lo = floor_l, b_hi = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (b_lo + b_hi);
            if (mid <= floor_l) break;
            if (g(mid, nullptr) > 0.0) b_lo = mid; else b_hi = mid;
        }
        lambda = 0.5 * (b_lo + b_hi);
    }
    for (int i = 0; i < n; ++i) p[i] = a[i] * a[i] * z[i] / (a[i] * a[i] + lambda);
}

double ellipsoid_distance(const DomainSpec& d, const double* x, double* grad) {
    const int n = d.dim;
    double y[3] = {}, z[3] = {}, p[3] = {};
    to_local(d, x, y);
    double rho2 = 0.0;
    for (int i = 0; i < n; ++i) {
        z[i] = std::abs(y[i]);
        rho2 += (y[i] / d.axes[i]) * (y[i] / d.axes[i]);
    }
    ellipsoid_closest(d.axes.data(), z, n, p);
    double dist = 0.0;
    for (int i = 0; i < n; ++i) dist += (z[i] - p[i]) * (z[i] - p[i]);
    dist = std::sqrt(dist);
    if (grad) {
        double nl[3];
        for (int i = 0; i < n; ++i) nl[i] = -std::copysign(p[i] / (d.axes[i] * d.axes[i]), y[i]);
        const double nn = norm(nl, n);
        for (int i = 0; i < n; ++i) nl[i] /= nn;
        to_world_dir(d, nl, grad);
    }
    return rho2 < 1.0 ? dist : -dist;
}

double pow_d(double r, int d) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= r;
    return v;
}

// Uniform direction times radius with density proportional to rho^{d-1} on (r1, r2].
void radial_band(int d, double r1, double r2, RngStream& rng, double* u) {
    const double u1 = pow_d(r1, d), u2 = pow_d(r2, d);
    const double rho = std::pow(u1 + rng.uniform() * (u2 - u1), 1.0 / d);
    if (d == 1) {
        u[0] = (rng.uniform() < 0.5 ? -rho : rho);
        return;
    }
    double nn = 0.0;
    do {
        nn = 0.0;
        for (int i = 0; i < d; ++i) {
            u[i] = rng.normal();
            nn += u[i] * u[i];
        }
    } while (nn == 0.0);
    nn = std::sqrt(nn);
    for (int i = 0; i < d; ++i) u[i] *= rho / nn;
}

}  // namespace

double BoundingBox::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

const char* kind_name(DomainKind kind) {
    switch (kind) {
        case DomainKind::ball: return "ball";
        case DomainKind::annulus: return "annulus";
        case DomainKind::ellipsoid: return "ellipsoid";
        case DomainKind::interval: return "interval";
        case DomainKind::level_set: return "level_set";
    }
    return "?";
}

DomainSpec make_ball(int dim, double radius, std::vector<double> center) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    DomainSpec d;
    d.kind = DomainKind::ball;
    d.dim = dim;
    d.radius = radius;
    d.center = std::move(center);
    finish(d);
    return d;
}

DomainSpec make_annulus(int dim, double inner, double outer, std::vector<double> center) {
    if (dim < 2 || dim > 3) throw std::invalid_argument("annulus needs d = 2 or 3");
    if (!(inner > 0.0 && outer > inner)) throw std::invalid_argument("annulus needs 0 < inner < outer");
    DomainSpec d;
    d.kind = DomainKind::annulus;
    d.dim = dim;
    d.radius = outer;
    d.inner_radius = inner;
    d.center = std::move(center);
    finish(d);
    return d;
}

DomainSpec make_ellipsoid(std::vector<double> axes, std::vector<double> rotation,
                          std::vector<double> center) {
    const int n = static_cast<int>(axes.size());
    if (n < 2 || n > 3) throw std::invalid_argument("ellipsoid supports d = 2 or 3");
    for (double a : axes)
        if (!(a > 0.0)) throw std::invalid_argument("ellipsoid semi-axes must be positive");
    if (rotation.empty()) {
        rotation.assign(n * n, 0.0);
        for (int i = 0; i < n; ++i) rotation[i * n + i] = 1.0;
    }
    if (static_cast<int>(rotation.size()) != n * n) throw std::invalid_argument("rotation has wrong size");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += rotation[k * n + i] * rotation[k * n + j];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-9)
                throw std::invalid_argument("rotation is not orthonormal");
        }
    DomainSpec d;
    d.kind = DomainKind::ellipsoid;
    d.dim = n;
    d.axes = std::move(axes);
    d.rotation = std::move(rotation);
    d.center = std::move(center);
    finish(d);
    return d;
}

DomainSpec make_ellipse(double a, double b, double angle, std::vector<double> center) {
    const double c = std::cos(angle), s = std::sin(angle);
    return make_ellipsoid({a, b}, {c, -s, s, c}, std::move(center));
}

DomainSpec make_interval(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("interval needs a < b");
    DomainSpec d;
    d.kind = DomainKind::interval;
    d.dim = 1;
    d.center = {0.5 * (a + b)};
    d.radius = 0.5 * (b - a);
    finish(d);
    return d;
}

DomainSpec make_level_set(std::shared_ptr<const LevelSetField> field) {
    if (!field) throw std::invalid_argument("level set needs a field");
    if (std::isnan(field->volume)) throw std::invalid_argument("level-set field was not analyzed");
    DomainSpec d;
    d.kind = DomainKind::level_set;
    d.dim = field->dim;
    d.field = std::move(field);
    finish(d);
    return d;
}

DomainSpec dilate(const DomainSpec& in, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("dilation factor must be positive");
    DomainSpec d = in;
    for (double& x : d.center) x *= c;
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::interval: d.radius *= c; break;
        case DomainKind::annulus:
            d.radius *= c;
            d.inner_radius *= c;
            break;
        case DomainKind::ellipsoid:
            for (double& a : d.axes) a *= c;
            break;
        case DomainKind::level_set: {
            LevelSetField f;
            const auto src = in.field;
            f.name = "dilate(" + src->name + "," + fmt(c) + ")";
            f.dim = src->dim;
            f.value = [src, c](const double* x) {
                double y[3];
                for (int i = 0; i < src->dim; ++i) y[i] = x[i] / c;
                return src->value(y);
            };
            f.gradient = [src, c](const double* x, double* g) {
                double y[3];
                for (int i = 0; i < src->dim; ++i) y[i] = x[i] / c;
                src->gradient(y, g);
                for (int i = 0; i < src->dim; ++i) g[i] /= c;
            };
            f.holder_kappa = src->holder_kappa;
            f.holder_L = src->holder_L / std::pow(c, 1.0 + src->holder_kappa);
            f.box = src->box;
            for (double& v : f.box.lo) v *= c;
            for (double& v : f.box.hi) v *= c;
            d.field = analyze_level_set(std::move(f));
            break;
        }
    }
    return d;
}

std::string describe(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::ball: return "ball(d=" + std::to_string(d.dim) + ",R=" + fmt(d.radius) + ")";
        case DomainKind::annulus:
            return "annulus(d=" + std::to_string(d.dim) + ",r=" + fmt(d.inner_radius) + ",R=" +
                   fmt(d.radius) + ")";
        case DomainKind::ellipsoid: {
            std::string s = "ellipsoid(";
            for (std::size_t i = 0; i < d.axes.size(); ++i) s += (i ? "," : "") + fmt(d.axes[i]);
            if (d.dim == 2) {
                const double ang = std::atan2(d.rotation[2], d.rotation[0]) * 180.0 / std::numbers::pi;
                if (std::abs(ang) > 1e-9) s += ",angle=" + fmt(ang) + "deg";
            }
            return s + ")";
        }
        case DomainKind::interval:
            return "interval(" + fmt(d.center[0] - d.radius) + "," + fmt(d.center[0] + d.radius) + ")";
        case DomainKind::level_set: return d.field->name;
    }
    return "?";
}

bool contains_raw(const DomainSpec& d, const double* x) {
    switch (d.kind) {
        case DomainKind::ball: {
            double s = 0.0;
            for (int i = 0; i < d.dim; ++i) s += (x[i] - d.center[i]) * (x[i] - d.center[i]);
            return s < d.radius * d.radius;
        }
        case DomainKind::annulus: {
            double s = 0.0;
            for (int i = 0; i < d.dim; ++i) s += (x[i] - d.center[i]) * (x[i] - d.center[i]);
            return s < d.radius * d.radius && s > d.inner_radius * d.inner_radius;
        }
        case DomainKind::ellipsoid: {
            double y[3];
            to_local(d, x, y);
            double s = 0.0;
            for (int i = 0; i < d.dim; ++i) s += (y[i] / d.axes[i]) * (y[i] / d.axes[i]);
            return s < 1.0;
        }
        case DomainKind::interval: return std::abs(x[0] - d.center[0]) < d.radius;
        case DomainKind::level_set: return d.field->value(x) > 0.0;
    }
    return false;
}

bool contains(const DomainSpec& d, std::span<const double> x) {
    check_dim(d, x.size());
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("point is not finite");
    return contains_raw(d, x.data());
}

double signed_distance_raw(const DomainSpec& d, const double* x, double* grad) {
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::interval:
        case DomainKind::annulus: {
            double s = 0.0;
            for (int i = 0; i < d.dim; ++i) s += (x[i] - d.center[i]) * (x[i] - d.center[i]);
            const double rho = std::sqrt(s);
            double sign = -1.0;  // d delta / d rho
            double delta = d.radius - rho;
            if (d.kind == DomainKind::annulus && rho - d.inner_radius < delta) {
                delta = rho - d.inner_radius;
                sign = 1.0;
            }
            if (grad) {
                for (int i = 0; i < d.dim; ++i)
                    grad[i] = rho > 0.0 ? sign * (x[i] - d.center[i]) / rho : (i == 0 ? sign : 0.0);
            }
            return delta;
        }
        case DomainKind::ellipsoid: return ellipsoid_distance(d, x, grad);
        case DomainKind::level_set: break;
    }
    throw std::invalid_argument("signed distance is not available for level-set domains");
}

double signed_distance(const DomainSpec& d, std::span<const double> x) {
    check_dim(d, x.size());
    return signed_distance_raw(d, x.data());
}

double distance_proxy(const DomainSpec& d, const double* x) {
    if (d.kind != DomainKind::level_set) return signed_distance_raw(d, x);
    double g[3];
    const double v = d.field->value(x);
    d.field->gradient(x, g);
    const double gn = std::max(norm(g, d.dim), 1e-12);
    return v / gn;
}

double volume(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::ball: return unit_ball_volume(d.dim) * pow_d(d.radius, d.dim);
        case DomainKind::annulus:
            return unit_ball_volume(d.dim) * (pow_d(d.radius, d.dim) - pow_d(d.inner_radius, d.dim));
        case DomainKind::ellipsoid: {
            double v = unit_ball_volume(d.dim);
            for (double a : d.axes) v *= a;
            return v;
        }
        case DomainKind::interval: return 2.0 * d.radius;
        case DomainKind::level_set: return d.field->volume;
    }
    return 0.0;
}

double perimeter(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::ball: return d.dim * unit_ball_volume(d.dim) * pow_d(d.radius, d.dim - 1);
        case DomainKind::annulus:
            return d.dim * unit_ball_volume(d.dim) *
                   (pow_d(d.radius, d.dim - 1) + pow_d(d.inner_radius, d.dim - 1));
        case DomainKind::ellipsoid:
            if (d.dim == 2) return ellipse_perimeter(d.axes[0], d.axes[1]);
            return ellipsoid_surface(d.axes[0], d.axes[1], d.axes[2]);
        case DomainKind::interval: return 2.0;
        case DomainKind::level_set:
            if (!(d.field->grad_inf_boundary > 0.0))
                throw std::runtime_error("gradient vanishes on the boundary shell");
            return d.field->perimeter;
    }
    return 0.0;
}

double reach(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::ball: return d.radius;
        case DomainKind::annulus: return std::min(d.inner_radius, 0.5 * (d.radius - d.inner_radius));
        case DomainKind::ellipsoid: {
            const auto [mn, mx] = std::minmax_element(d.axes.begin(), d.axes.end());
            return (*mn) * (*mn) / (*mx);
        }
        case DomainKind::interval: return d.radius;
        case DomainKind::level_set: return kNaN;
    }
    return kNaN;
}

double max_depth(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::interval: return d.radius;
        case DomainKind::annulus: return 0.5 * (d.radius - d.inner_radius);
        case DomainKind::ellipsoid: return *std::min_element(d.axes.begin(), d.axes.end());
        case DomainKind::level_set: return d.field->max_depth;
    }
    return kNaN;
}

BoundingBox bounding_box(const DomainSpec& d) {
    BoundingBox b;
    b.lo.resize(d.dim);
    b.hi.resize(d.dim);
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::annulus:
        case DomainKind::interval:
            for (int i = 0; i < d.dim; ++i) {
                b.lo[i] = d.center[i] - d.radius;
                b.hi[i] = d.center[i] + d.radius;
            }
            break;
        case DomainKind::ellipsoid:
            for (int j = 0; j < d.dim; ++j) {
                double s = 0.0;
                for (int i = 0; i < d.dim; ++i) {
                    const double r = d.rotation[j * d.dim + i] * d.axes[i];
                    s += r * r;
                }
                b.lo[j] = d.center[j] - std::sqrt(s);
                b.hi[j] = d.center[j] + std::sqrt(s);
            }
            break;
        case DomainKind::level_set: return d.field->box;
    }
    return b;
}

double clamp_blend(double s, double r, double* derivative) {
    const double a = std::abs(s);
    const double h = 0.5 * r;
    double v, dv;
    if (a <= h) {
        v = a;
        dv = 1.0;
    } else if (a >= r) {
        v = r;
        dv = 0.0;
    } else {
        const double u = (a - h) / h;
        v = h + h * (-u * u * u + u * u + u);
        dv = (1.0 - u) * (3.0 * u + 1.0);
    }
    if (derivative) *derivative = dv;
    return s < 0.0 ? -v : v;
}

std::shared_ptr<const LevelSetField> clamped_level_set(const DomainSpec& domain, double r,
                                                       double r0_margin) {
    if (domain.kind == DomainKind::level_set)
        throw std::invalid_argument("clamped level set needs a domain with a signed distance");
    const double rc = reach(domain);
    if (!(r > 0.0) || !(r < rc))
        throw std::invalid_argument("clamp radius r must satisfy 0 < r < reach = " + fmt(rc));
    if (!(r0_margin >= 0.0)) throw std::invalid_argument("box margin must be nonnegative");
    auto dom = std::make_shared<DomainSpec>(domain);
    LevelSetField f;
    f.name = "clamped(" + describe(domain) + ",r=" + fmt(r) + ")";
    f.dim = domain.dim;
    f.value = [dom, r](const double* x) { return clamp_blend(signed_distance_raw(*dom, x), r); };
    f.gradient = [dom, r](const double* x, double* g) {
        double gd;
        const double delta = signed_distance_raw(*dom, x, g);
        clamp_blend(delta, r, &gd);
        for (int i = 0; i < dom->dim; ++i) g[i] *= gd;
    };
    f.holder_kappa = 1.0;
    f.holder_L = 8.0 / r + 1.0 / (rc - r);
    f.box = bounding_box(domain);
    for (int i = 0; i < domain.dim; ++i) {
        f.box.lo[i] -= r0_margin;
        f.box.hi[i] += r0_margin;
    }
    return analyze_level_set(std::move(f));
}

UniformSample sample_uniform(const DomainSpec& d, std::size_t n, RngStream& rng) {
    const BoundingBox box = bounding_box(d);
    UniformSample out;
    out.points.reserve(n * d.dim);
    std::vector<double> x(d.dim);
    std::size_t trials = 0, accepted = 0;
    while (accepted < n) {
        for (int i = 0; i < d.dim; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
        ++trials;
        if (contains_raw(d, x.data())) {
            out.points.insert(out.points.end(), x.begin(), x.end());
            ++accepted;
        }
        if (trials >= 10000 && static_cast<double>(accepted) < 1e-3 * trials)
            throw std::runtime_error("rejection sampling acceptance below 1e-3 (degenerate box)");
    }
    out.acceptance = trials ? static_cast<double>(accepted) / trials : 1.0;
    return out;
}

WeightedSample boundary_shell_sample(const DomainSpec& d, double width, std::size_t n,
                                     RngStream& rng, double interior_fraction) {
    const StartSampler sampler(d, width, 1);
    WeightedSample out;
    const bool interior = sampler.size() > 1;
    std::size_t n_int = interior ? std::max<std::size_t>(1, std::llround(interior_fraction * n)) : 0;
    if (n_int >= n) n_int = n - 1;
    const std::size_t n_shell = n - n_int;
    out.shell_volume = sampler.volume(0);
    out.interior_volume = interior ? sampler.volume(1) : 0.0;
    std::vector<double> x(d.dim);
    for (std::size_t k = 0; k < n; ++k) {
        const int j = k < n_shell ? 0 : 1;
        sampler.sample(j, rng, x.data());
        out.points.insert(out.points.end(), x.begin(), x.end());
        out.stratum.push_back(j);
        const double w = j == 0 ? out.shell_volume / n_shell : out.interior_volume / n_int;
        out.weights.push_back(contains_raw(d, x.data()) ? w : 0.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// StartSampler

StartSampler StartSampler::uniform(const DomainSpec& domain) {
    StartSampler s;
    s.domain_ = domain;
    s.uniform_ = true;
    s.width_ = kInf;
    s.volumes_ = {domain.kind == DomainKind::level_set ? domain.field->box.volume() : shclab::volume(domain)};
    s.lo_ = {0.0};
    s.hi_ = {kInf};
    return s;
}

StartSampler::StartSampler(const DomainSpec& domain, double width, int depth_strata)
    : domain_(domain), width_(width) {
    if (!(width > 0.0)) throw std::invalid_argument("shell width must be positive");
    if (depth_strata < 1) throw std::invalid_argument("depth_strata must be >= 1");
    const double rc = reach(domain);
    if (domain.kind != DomainKind::ellipsoid && std::isfinite(rc) && width >= rc)
        throw std::invalid_argument("shell width " + fmt(width) + " is not below the reach " + fmt(rc));

    if (domain.kind != DomainKind::level_set) {
        double edge = width;
        std::vector<double> bounds = {0.0};
        for (int k = depth_strata - 1; k >= 1; --k) bounds.push_back(width / std::pow(4.0, k));
        bounds.push_back(width);
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
            lo_.push_back(bounds[k]);
            hi_.push_back(bounds[k + 1]);
            volumes_.push_back(band_volume(bounds[k], bounds[k + 1]));
        }
        const double vin = band_volume(edge, kInf);
        if (vin > 0.0) {
            lo_.push_back(edge);
            hi_.push_back(kInf);
            volumes_.push_back(vin);
            has_interior_ = true;
        }
        return;
    }

    // Level sets: classify grid cells against phi with the Lipschitz bound G.
    const LevelSetField& f = *domain.field;
    const int d = f.dim;
    double extent = 0.0;
    for (int i = 0; i < d; ++i) extent = std::max(extent, f.box.hi[i] - f.box.lo[i]);
    const int cap = d == 2 ? 1024 : 96;
    cells_per_dim_ = std::clamp(static_cast<int>(std::ceil(4.0 * extent / width)), 16, cap);
    cell_ = extent / cells_per_dim_;
    origin_ = f.box.lo;
    const double half_diag = 0.5 * cell_ * std::sqrt(static_cast<double>(d));
    const double G = f.grad_bound;
    cells_.assign(2, {});
    const std::uint32_t total = static_cast<std::uint32_t>(std::pow(cells_per_dim_, d));
    double x[3];
    for (std::uint32_t c = 0; c < total; ++c) {
        std::uint32_t rem = c;
        for (int i = 0; i < d; ++i) {
            x[i] = origin_[i] + (rem % cells_per_dim_ + 0.5) * cell_;
            rem /= cells_per_dim_;
        }
        const double v = f.value(x);
        if (v < -G * half_diag) continue;
        if (v > G * half_diag && distance_proxy(domain, x) - half_diag >= width) {
            cells_[1].push_back(c);
        } else {
            cells_[0].push_back(c);
        }
    }
    const double cv = std::pow(cell_, d);
    volumes_ = {cells_[0].size() * cv};
    lo_ = {0.0};
    hi_ = {width};
    if (!cells_[1].empty()) {
        volumes_.push_back(cells_[1].size() * cv);
        lo_.push_back(width);
        hi_.push_back(kInf);
        has_interior_ = true;
    } else {
        cells_.pop_back();
    }
}

double StartSampler::band_volume(double a, double b) const {
    const DomainSpec& d = domain_;
    const double vb = unit_ball_volume(d.dim);
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::interval: {
            const double r2 = std::max(0.0, d.radius - a);
            const double r1 = std::max(0.0, d.radius - b);
            return vb * (pow_d(r2, d.dim) - pow_d(r1, d.dim));
        }
        case DomainKind::annulus: {
            const double mid = 0.5 * (d.radius + d.inner_radius);
            double v = 0.0;
            const double o2 = std::max(mid, d.radius - a), o1 = std::max(mid, d.radius - b);
            v += vb * (pow_d(o2, d.dim) - pow_d(o1, d.dim));
            const double i1 = std::min(mid, d.inner_radius + a), i2 = std::min(mid, d.inner_radius + b);
            v += vb * (pow_d(i2, d.dim) - pow_d(i1, d.dim));
            return v;
        }
        case DomainKind::ellipsoid: {
            const double amin = *std::min_element(d.axes.begin(), d.axes.end());
            const double r2 = std::max(0.0, 1.0 - a / amin), r1 = std::max(0.0, 1.0 - b / amin);
            return shclab::volume(d) * (pow_d(r2, d.dim) - pow_d(r1, d.dim));
        }
        case DomainKind::level_set: break;
    }
    return 0.0;
}

void StartSampler::sample_band(double a, double b, RngStream& rng, double* x) const {
    const DomainSpec& d = domain_;
    double u[3];
    switch (d.kind) {
        case DomainKind::ball:
        case DomainKind::interval: {
            radial_band(d.dim, std::max(0.0, d.radius - b), std::max(0.0, d.radius - a), rng, u);
            for (int i = 0; i < d.dim; ++i) x[i] = d.center[i] + u[i];
            return;
        }
        case DomainKind::annulus: {
            const double vb = unit_ball_volume(d.dim);
            const double mid = 0.5 * (d.radius + d.inner_radius);
            const double o2 = std::max(mid, d.radius - a), o1 = std::max(mid, d.radius - b);
            const double i1 = std::min(mid, d.inner_radius + a), i2 = std::min(mid, d.inner_radius + b);
            const double vo = vb * (pow_d(o2, d.dim) - pow_d(o1, d.dim));
            const double vi = vb * (pow_d(i2, d.dim) - pow_d(i1, d.dim));
            if (rng.uniform() * (vo + vi) < vo) radial_band(d.dim, o1, o2, rng, u);
            else radial_band(d.dim, i1, i2, rng, u);
            for (int i = 0; i < d.dim; ++i) x[i] = d.center[i] + u[i];
            return;
        }
        case DomainKind::ellipsoid: {
            const double amin = *std::min_element(d.axes.begin(), d.axes.end());
            radial_band(d.dim, std::max(0.0, 1.0 - b / amin), std::max(0.0, 1.0 - a / amin), rng, u);
            double y[3];
            for (int i = 0; i < d.dim; ++i) y[i] = d.axes[i] * u[i];
            for (int j = 0; j < d.dim; ++j) {
                double s = d.center[j];
                for (int i = 0; i < d.dim; ++i) s += d.rotation[j * d.dim + i] * y[i];
                x[j] = s;
            }
            return;
        }
        case DomainKind::level_set: break;
    }
}

void StartSampler::sample(int j, RngStream& rng, double* x) const {
    const DomainSpec& d = domain_;
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        if (uniform_) {
            const BoundingBox box = bounding_box(d);
            for (int i = 0; i < d.dim; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
            if (d.kind != DomainKind::level_set && !contains_raw(d, x)) continue;
        } else if (d.kind == DomainKind::level_set) {
            const auto& list = cells_[j];
            std::uint32_t c = list[std::min<std::size_t>(list.size() - 1,
                                                         static_cast<std::size_t>(rng.uniform() * list.size()))];
            for (int i = 0; i < d.dim; ++i) {
                x[i] = origin_[i] + (c % cells_per_dim_ + rng.uniform()) * cell_;
                c /= cells_per_dim_;
            }
        } else {
            sample_band(lo_[j], hi_[j], rng, x);
        }
        if (std::abs(distance_proxy(d, x)) >= kBoundaryEps) return;
    }
    throw std::runtime_error("start sampler could not avoid the boundary");
}

}  // namespace shclab
