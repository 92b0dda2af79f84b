#include "shclab/level_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <stdexcept>

namespace shclab {

namespace {

struct ContourStats {
    double perimeter = 0.0;
    double volume = 0.0;
    double grad_min = kInf;
    double grad_max = 0.0;
};

double gnorm(const LevelSetField& f, const double* x) {
    double g[3] = {0, 0, 0};
    f.gradient(x, g);
    double s = 0.0;
    for (int i = 0; i < f.dim; ++i) s += g[i] * g[i];
    return std::sqrt(s);
}

// Root of phi on the segment a -> b, where phi(a) > 0 >= phi(b) or the reverse.
void edge_root(const LevelSetField& f, const double* a, const double* b, double va, double vb,
               double* out) {
    double lo = 0.0, hi = 1.0;
    double flo = va;
    const int d = f.dim;
    double x[3];
    for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (lo + hi);
        for (int i = 0; i < d; ++i) x[i] = a[i] + m * (b[i] - a[i]);
        const double fm = f.value(x);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
        if (hi - lo < 1e-13) break;
    }
    (void)vb;
    const double m = 0.5 * (lo + hi);
    for (int i = 0; i < d; ++i) out[i] = a[i] + m * (b[i] - a[i]);
}

// Marching squares on an N x N node grid. Volume by the divergence theorem,
// Vol = (1/2) sum over segments of (x_mid . n) * length.
ContourStats contour2d(const LevelSetField& f, int N) {
    const double x0 = f.box.lo[0], y0 = f.box.lo[1];
    const double hx = (f.box.hi[0] - x0) / N, hy = (f.box.hi[1] - y0) / N;
    std::vector<double> v((N + 1) * (N + 1));
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i) {
            const double p[2] = {x0 + i * hx, y0 + j * hy};
            v[j * (N + 1) + i] = f.value(p);
        }
    ContourStats st;
    auto node = [&](int i, int j, double* p) {
        p[0] = x0 + i * hx;
        p[1] = y0 + j * hy;
    };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            double cv[4];
            int inside = 0;
            for (int k = 0; k < 4; ++k) {
                cv[k] = v[cj[k] * (N + 1) + ci[k]];
                inside += cv[k] > 0.0;
            }
            if (inside == 0 || inside == 4) continue;
            double pts[4][2];
            int np = 0;
            for (int k = 0; k < 4; ++k) {
                const int k2 = (k + 1) % 4;
                if ((cv[k] > 0.0) != (cv[k2] > 0.0)) {
                    double a[2], b[2];
                    node(ci[k], cj[k], a);
                    node(ci[k2], cj[k2], b);
                    edge_root(f, a, b, cv[k], cv[k2], pts[np]);
                    ++np;
                }
            }
            auto add_segment = [&](const double* p, const double* q) {
                const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
                if (len == 0.0) return;
                const double m[2] = {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
                double g[2];
                f.gradient(m, g);
                const double gn = std::hypot(g[0], g[1]);
                if (gn > 0.0) st.volume += -0.5 * (m[0] * g[0] + m[1] * g[1]) / gn * len;
                st.perimeter += len;
            };
            if (np == 2) {
                add_segment(pts[0], pts[1]);
            } else if (np == 4) {
                // Saddle: decide the pairing from the cell centre.
                const double c[2] = {x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy};
                const bool center_in = f.value(c) > 0.0;
                if (center_in == (cv[0] > 0.0)) {
                    add_segment(pts[0], pts[1]);
                    add_segment(pts[2], pts[3]);
                } else {
                    add_segment(pts[3], pts[0]);
                    add_segment(pts[1], pts[2]);
                }
            }
            for (int k = 0; k < np; ++k) {
                const double gn = gnorm(f, pts[k]);
                st.grad_min = std::min(st.grad_min, gn);
                st.grad_max = std::max(st.grad_max, gn);
            }
        }
    return st;
}

// Grid quadrature in 3D: volume by sub-sampled cell counting, perimeter by the
// co-area slab (1/2a) * int_{|phi|<a} |grad phi|.
ContourStats contour3d(const LevelSetField& f, int N, double a_cells, double G) {
    double h[3];
    for (int i = 0; i < 3; ++i) h[i] = (f.box.hi[i] - f.box.lo[i]) / N;
    const double hmax = std::max({h[0], h[1], h[2]});
    const double a = a_cells * hmax;
    const double half_diag = 0.5 * std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
    const double cv = h[0] * h[1] * h[2];
    const int S = 4;
    ContourStats st;
    double x[3];
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                x[0] = f.box.lo[0] + (i + 0.5) * h[0];
                x[1] = f.box.lo[1] + (j + 0.5) * h[1];
                x[2] = f.box.lo[2] + (k + 0.5) * h[2];
                const double vc = f.value(x);
                if (vc > G * half_diag + a) {
                    st.volume += cv;
                    continue;
                }
                if (vc < -G * half_diag - a) continue;
                double inside = 0.0, slab = 0.0;
                for (int c = 0; c < S; ++c)
                    for (int b = 0; b < S; ++b)
                        for (int q = 0; q < S; ++q) {
                            double y[3] = {f.box.lo[0] + (i + (q + 0.5) / S) * h[0],
                                           f.box.lo[1] + (j + (b + 0.5) / S) * h[1],
                                           f.box.lo[2] + (k + (c + 0.5) / S) * h[2]};
                            const double vy = f.value(y);
                            if (vy > 0.0) inside += 1.0;
                            if (std::abs(vy) < a) slab += gnorm(f, y);
                        }
                st.volume += cv * inside / (S * S * S);
                st.perimeter += cv * slab / (S * S * S) / (2.0 * a);
            }
    // Gradient bounds from roots along x-edges of the node grid.
    for (int k = 0; k <= N; ++k)
        for (int j = 0; j <= N; ++j) {
            double prev = 0.0;
            double pa[3];
            for (int i = 0; i <= N; ++i) {
                double p[3] = {f.box.lo[0] + i * h[0], f.box.lo[1] + j * h[1], f.box.lo[2] + k * h[2]};
                const double vp = f.value(p);
                if (i > 0 && ((vp > 0.0) != (prev > 0.0))) {
                    double r[3];
                    edge_root(f, pa, p, prev, vp, r);
                    const double gn = gnorm(f, r);
                    st.grad_min = std::min(st.grad_min, gn);
                    st.grad_max = std::max(st.grad_max, gn);
                }
                prev = vp;
                std::copy(p, p + 3, pa);
            }
        }
    return st;
}

std::map<std::string, double> parse_params(const std::string& body) {
    std::map<std::string, double> out;
    static const std::regex kv(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([-+0-9.eE]+)\s*)");
    std::size_t start = 0;
    while (start < body.size()) {
        std::size_t end = body.find(',', start);
        if (end == std::string::npos) end = body.size();
        const std::string item = body.substr(start, end - start);
        std::smatch m;
        if (!item.empty() && item.find_first_not_of(" \t") != std::string::npos) {
            if (!std::regex_match(item, m, kv)) throw std::invalid_argument("bad level-set parameter '" + item + "'");
            out[m[1]] = std::stod(m[2]);
        }
        start = end + 1;
    }
    return out;
}

double take(std::map<std::string, double>& p, const std::string& key, double def) {
    auto it = p.find(key);
    if (it == p.end()) return def;
    const double v = it->second;
    p.erase(it);
    return v;
}

}  // namespace

std::shared_ptr<const LevelSetField> analyze_level_set(LevelSetField f) {
    if (f.dim < 2 || f.dim > 3) throw std::invalid_argument("level-set fields support d = 2 or 3");
    if (!f.value || !f.gradient) throw std::invalid_argument("level-set field needs value and gradient");
    if (static_cast<int>(f.box.lo.size()) != f.dim || static_cast<int>(f.box.hi.size()) != f.dim)
        throw std::invalid_argument("level-set field needs a bounding box");

    // Gradient bound and depth scale from a coarse node grid.
    const int M = f.dim == 2 ? 257 : 49;
    double gmax = 0.0, depth = 0.0;
    const std::size_t total = static_cast<std::size_t>(std::pow(M, f.dim));
    double x[3];
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rem = c;
        for (int i = 0; i < f.dim; ++i) {
            x[i] = f.box.lo[i] + (f.box.hi[i] - f.box.lo[i]) * static_cast<double>(rem % M) / (M - 1);
            rem /= M;
        }
        const double v = f.value(x);
        if (!std::isfinite(v)) throw std::invalid_argument("level-set field is not finite on its box");
        const double gn = gnorm(f, x);
        gmax = std::max(gmax, gn);
        if (v > 0.0 && gn > 0.0) depth = std::max(depth, v / gn);
    }
    f.grad_bound = 1.25 * gmax + 1e-9;
    f.max_depth = depth;

    ContourStats fine, coarse;
    if (f.dim == 2) {
        fine = contour2d(f, 2048);
        coarse = contour2d(f, 1024);
    } else {
        fine = contour3d(f, 96, 1.0, f.grad_bound);
        coarse = contour3d(f, 96, 2.0, f.grad_bound);
    }
    if (fine.perimeter <= 0.0) throw std::invalid_argument("level-set field has an empty zero contour");
    if (!(fine.grad_min > 1e-8)) throw std::runtime_error("gradient vanishes on the boundary shell");
    f.perimeter = fine.perimeter;
    f.perimeter_error = std::abs(fine.perimeter - coarse.perimeter);
    f.volume = fine.volume;
    f.volume_error = std::abs(fine.volume - coarse.volume);
    f.grad_inf_boundary = fine.grad_min;
    f.grad_sup_boundary = fine.grad_max;
    return std::make_shared<const LevelSetField>(std::move(f));
}

std::shared_ptr<const LevelSetField> distorted_disk(double c, double kappa, std::vector<double> x0) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
    if (!(c >= 0.0)) throw std::invalid_argument("distortion amplitude must be nonnegative");
    if (x0.size() != 2) throw std::invalid_argument("distortion point must be planar");
    LevelSetField f;
    char buf[96];
    std::snprintf(buf, sizeof buf, "distorted_disk(c=%g,kappa=%g)", c, kappa);
    f.name = buf;
    f.dim = 2;
    const double p = 1.0 + kappa;
    f.value = [=](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        const double dx = x[0] - x0[0], dy = x[1] - x0[1];
        return 1.0 - r2 - c * std::pow(std::hypot(dx, dy), p);
    };
    f.gradient = [=](const double* x, double* g) {
        const double dx = x[0] - x0[0], dy = x[1] - x0[1];
        const double rr = std::hypot(dx, dy);
        const double w = rr > 0.0 ? c * p * std::pow(rr, p - 2.0) : 0.0;
        g[0] = -2.0 * x[0] - w * dx;
        g[1] = -2.0 * x[1] - w * dy;
    };
    f.holder_kappa = kappa;
    // |grad phi(x) - grad phi(y)| <= 2|x-y| + c p 2^{1-kappa} |x-y|^kappa on a box of diameter D.
    const double D = 2.2 * std::sqrt(2.0);
    f.holder_L = 2.0 * std::pow(D, 1.0 - kappa) + c * p * std::pow(2.0, 1.0 - kappa);
    f.box = {{-1.1, -1.1}, {1.1, 1.1}};
    return analyze_level_set(std::move(f));
}

std::shared_ptr<const LevelSetField> clamped_ball(int dim, double R, double r) {
    return clamped_level_set(make_ball(dim, R), r, 0.1 * R);
}

std::shared_ptr<const LevelSetField> level_set_by_name(const std::string& spec) {
    static const std::regex call(R"(\s*([A-Za-z_]+)\s*\((.*)\)\s*)");
    std::smatch m;
    std::string name = spec, body;
    if (std::regex_match(spec, m, call)) {
        name = m[1];
        body = m[2];
    }
    auto p = parse_params(body);
    std::shared_ptr<const LevelSetField> out;
    if (name == "clamped_ball") {
        const int d = static_cast<int>(take(p, "d", 2));
        const double R = take(p, "R", 1.0);
        const double r = take(p, "r", 0.2);
        out = clamped_ball(d, R, r);
    } else if (name == "distorted_disk") {
        const double c = take(p, "c", 0.1);
        const double kappa = take(p, "kappa", 0.5);
        out = distorted_disk(c, kappa);
    } else {
        throw std::invalid_argument("unknown level-set field '" + name + "'");
    }
    if (!p.empty()) throw std::invalid_argument("unknown parameter '" + p.begin()->first + "' for " + name);
    return out;
}

std::vector<std::string> level_set_library() {
    return {"clamped_ball(d=2, R=1, r=0.2)   clamped signed distance of a ball",
            "distorted_disk(c=0.1, kappa=0.5)   1 - |x|^2 - c|x - (1,0)|^(1+kappa)"};
}

}  // namespace shclab
