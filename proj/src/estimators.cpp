#include "shclab/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shclab/kernels.hpp"

namespace shclab {

namespace {

constexpr int kMaxDim = 3;
constexpr long kMinStratumPaths = 32;

std::uint64_t stream_index(int stratum, std::size_t i) {
    return (static_cast<std::uint64_t>(stratum) << 40) | static_cast<std::uint64_t>(i);
}

double sample_var(double n, double s, double ss) {
    if (n < 2) return 0.0;
    return std::max(0.0, (ss - s * s / n) / (n - 1.0));
}

double sample_cov(double n, double sa, double sb, double sab) {
    if (n < 2) return 0.0;
    return (sab - sa * sb / n) / (n - 1.0);
}

// Sums over paths of the deficit d, survival q, clamped sup m1 and sup m2.
struct Moments {
    double n = 0, d = 0, dd = 0, q = 0, qq = 0, m1 = 0, m1m1 = 0, m2 = 0, m2m2 = 0, dm1 = 0, dm2 = 0;
    void add(double d_, double q_, double sup) {
        const double a = std::min(sup, 1.0);
        n += 1;
        d += d_;
        dd += d_ * d_;
        q += q_;
        qq += q_ * q_;
        m1 += a;
        m1m1 += a * a;
        m2 += sup;
        m2m2 += sup * sup;
        dm1 += d_ * a;
        dm2 += d_ * sup;
    }
    void merge(const Moments& o) {
        n += o.n;
        d += o.d;
        dd += o.dd;
        q += o.q;
        qq += o.qq;
        m1 += o.m1;
        m1m1 += o.m1m1;
        m2 += o.m2;
        m2m2 += o.m2m2;
        dm1 += o.dm1;
        dm2 += o.dm2;
    }
};

struct PathAcc {
    std::array<Moments, 2> level;
    void merge(const PathAcc& o) {
        level[0].merge(o.level[0]);
        level[1].merge(o.level[1]);
    }
};

// Combines per-stratum moments with deficit weights a_j and sup weights b_j.
HeatLevel combine(const std::vector<Moments>& strata, const std::vector<double>& a, const std::vector<double>& b,
                  int n_steps) {
    HeatLevel h;
    h.n_steps = n_steps;
    double vd = 0, vq = 0, vm1 = 0, vm2 = 0;
    for (std::size_t j = 0; j < strata.size(); ++j) {
        const Moments& s = strata[j];
        if (s.n == 0) continue;
        h.n_paths += static_cast<long>(s.n);
        h.deficit += a[j] * s.d / s.n;
        h.q_direct += a[j] * s.q / s.n;
        h.mu += b[j] * s.m1 / s.n;
        h.m += b[j] * s.m2 / s.n;
        vd += a[j] * a[j] * sample_var(s.n, s.d, s.dd) / s.n;
        vq += a[j] * a[j] * sample_var(s.n, s.q, s.qq) / s.n;
        vm1 += b[j] * b[j] * sample_var(s.n, s.m1, s.m1m1) / s.n;
        vm2 += b[j] * b[j] * sample_var(s.n, s.m2, s.m2m2) / s.n;
        h.cov_deficit_mu += a[j] * b[j] * sample_cov(s.n, s.d, s.m1, s.dm1) / s.n;
        h.cov_deficit_m += a[j] * b[j] * sample_cov(s.n, s.d, s.m2, s.dm2) / s.n;
    }
    h.deficit_se = std::sqrt(vd);
    h.q_direct_se = std::sqrt(vq);
    h.mu_se = std::sqrt(vm1);
    h.m_se = std::sqrt(vm2);
    return h;
}

// Neyman allocation n_j ~ w_j s_j with a per-stratum floor.
std::vector<long> allocate(long total, const std::vector<double>& w, std::vector<double> s) {
    double smax = 0.0;
    for (double v : s) smax = std::max(smax, v);
    if (smax <= 0.0) std::fill(s.begin(), s.end(), 1.0), smax = 1.0;
    for (double& v : s) v = std::max(v, 0.05 * smax);
    double norm = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) norm += w[j] * s[j];
    std::vector<long> n(w.size());
    for (std::size_t j = 0; j < w.size(); ++j)
        n[j] = std::max(kMinStratumPaths, std::lround(total * w[j] * s[j] / norm));
    return n;
}

// One simulation context: evaluates a fine skeleton at strides 2 and 1.
struct Engine {
    const ProcessSpec& process;
    const DomainSpec& domain;
    double t;
    const McConfig& cfg;
    int levels = 1;
    int n_fine = 0;
    bool bridge = false;
    double var_rate = 0.0;
    double length = 0.0;  // interval length
    std::unique_ptr<PathSampler> sampler;

    struct Ws {
        PathSampler::Workspace sw;
        std::vector<double> pos, starts;
    };

    Engine(const ProcessSpec& p, const DomainSpec& d, double t_, const McConfig& c, bool need_sampler)
        : process(p), domain(d), t(t_), cfg(c) {
        levels = cfg.grid_check ? 2 : 1;
        n_fine = cfg.n_steps * levels;
        bridge = cfg.bridge_correction;
        var_rate = process.family == Family::brownian ? process.brownian_variance() : 0.0;
        length = 2.0 * domain.radius;
        if (need_sampler) sampler = std::make_unique<PathSampler>(process, t, n_fine);
    }

    Ws make_ws() const {
        Ws ws;
        if (sampler) ws.sw = sampler->make_workspace();
        ws.pos.resize(static_cast<std::size_t>(n_fine + 1) * process.dim);
        ws.starts.resize(static_cast<std::size_t>(std::max(1, cfg.starts_per_path)) * process.dim);
        return ws;
    }

    int stride(int level) const { return levels == 2 && level == 0 ? 2 : 1; }

    double grid_sup(const double* pos, int level, RngStream* brng) const {
        const int d = process.dim, s = stride(level), n = n_fine / s;
        double m = 0.0;
        if (bridge) {
            const double var = var_rate * t / n;
            for (int k = 1; k <= n; ++k)
                m = std::max(m, bridge_max(pos[(k - 1) * s * d], pos[k * s * d], var, brng->uniform()));
        } else {
            for (int k = 1; k <= n; ++k) m = std::max(m, pos[k * s * d]);
        }
        return m;
    }

    // Survival of one start point along the skeleton, and whether it starts inside.
    double survival(const double* x, const double* pos, int level, bool& inside) const {
        const int d = process.dim, s = stride(level), n = n_fine / s;
        inside = contains_raw(domain, x);
        if (!inside) return 0.0;
        double y[kMaxDim];
        if (bridge) {
            const double var = var_rate * t / n;
            double prev = distance_proxy(domain, x), q = 1.0;
            for (int k = 1; k <= n; ++k) {
                const double* p = pos + static_cast<std::size_t>(k) * s * d;
                for (int i = 0; i < d; ++i) y[i] = x[i] + p[i];
                const double cur = distance_proxy(domain, y);
                if (cur <= 0.0 || !contains_raw(domain, y)) return 0.0;
                q *= bridge_survival(prev, cur, var);
                prev = cur;
            }
            return q;
        }
        for (int k = 1; k <= n; ++k) {
            const double* p = pos + static_cast<std::size_t>(k) * s * d;
            for (int i = 0; i < d; ++i) y[i] = x[i] + p[i];
            if (!contains_raw(domain, y)) return 0.0;
        }
        return 1.0;
    }

    // Starts drawn from a stratum; d = 1[inside] - survival averaged over starts.
    void eval_spatial(const StartSampler& ss, int j, std::size_t i, Ws& ws, PathAcc& acc) const {
        const std::uint64_t idx = stream_index(j, i);
        RngStream prng(cfg.seed, StreamTag::process, idx);
        RngStream srng(cfg.seed, StreamTag::starts, idx);
        RngStream brng(cfg.seed, StreamTag::bridge, idx);
        const int K = cfg.starts_per_path, d = process.dim;
        for (int k = 0; k < K; ++k) ss.sample(j, srng, ws.starts.data() + k * d);
        sampler->sample(prng, ws.sw, ws.pos.data());
        for (int level = 0; level < levels; ++level) {
            double dsum = 0.0, qsum = 0.0;
            for (int k = 0; k < K; ++k) {
                bool inside = false;
                const double q = survival(ws.starts.data() + k * d, ws.pos.data(), level, inside);
                dsum += (inside ? 1.0 : 0.0) - q;
                qsum += q;
            }
            acc.level[level].add(dsum / K, qsum / K, grid_sup(ws.pos.data(), level, &brng));
        }
    }

    // Interval: the start is integrated out exactly; deficit = min(L, range) + shift.
    void eval_interval(const double* pos, PathAcc& acc, double shift = 0.0) const {
        for (int level = 0; level < levels; ++level) {
            const int s = stride(level), n = n_fine / s;
            double lo = 0.0, hi = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double v = pos[k * s];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double dd = std::min(length, hi - lo) + shift;
            acc.level[level].add(dd, length - dd, hi);
        }
    }
};

double pilot_mu(const ProcessSpec& process, double t, const McConfig& cfg) {
    McConfig pc = cfg;
    pc.n_paths = std::max(100L, cfg.n_paths / 100);
    pc.seed = splitmix64(cfg.seed ^ static_cast<std::uint64_t>(StreamTag::pilot));
    pc.grid_check = false;
    return estimate_mu(process, t, pc).value;
}

std::string bias_note(const McConfig& cfg) {
    return cfg.bridge_correction ? "bridge-corrected sup; exit on grid with half-space bridge survival"
                                 : "grid sup and grid exit (one-sided: sup low, survival high)";
}

void check_common(const ProcessSpec& process, double t, const McConfig& cfg) {
    cfg.validate();
    process.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be finite and nonnegative");
    if (cfg.bridge_correction && process.family != Family::brownian)
        throw std::invalid_argument("bridge correction is exact only for the brownian family");
}

struct SupStats {
    static constexpr int kMax = 16;
    double n = 0;
    std::array<double, kMax> s{}, ss{}, s0{};  // s0: cross product with statistic 0
    void merge(const SupStats& o) {
        n += o.n;
        for (int k = 0; k < kMax; ++k) {
            s[k] += o.s[k];
            ss[k] += o.ss[k];
            s0[k] += o.s0[k];
        }
    }
};

// Paths from the origin; stat(sup, out) writes k statistics per path.
template <class Stat>
SupStats sup_kernel(const ProcessSpec& process, double t, const McConfig& cfg, StreamTag tag, int k, Stat stat) {
    PathSampler sampler(process, t, cfg.n_steps);
    const bool bridge = cfg.bridge_correction;
    const double var = process.family == Family::brownian ? process.brownian_variance() * t / cfg.n_steps : 0.0;
    const int n = cfg.n_steps, d = process.dim;
    struct Ws {
        PathSampler::Workspace sw;
        std::vector<double> pos;
    };
    return reduce_paths<SupStats>(
        static_cast<std::size_t>(cfg.n_paths), cfg.serial_reference,
        [&] {
            Ws ws;
            ws.sw = sampler.make_workspace();
            ws.pos.resize(static_cast<std::size_t>(n + 1) * d);
            return ws;
        },
        [&](SupStats& acc, Ws& ws, std::size_t i) {
            RngStream rng(cfg.seed, tag, i);
            sampler.sample(rng, ws.sw, ws.pos.data());
            double m = 0.0;
            if (bridge) {
                RngStream brng(cfg.seed, StreamTag::bridge, i);
                for (int j = 1; j <= n; ++j)
                    m = std::max(m, bridge_max(ws.pos[(j - 1) * d], ws.pos[j * d], var, brng.uniform()));
            } else {
                for (int j = 1; j <= n; ++j) m = std::max(m, ws.pos[j * d]);
            }
            double out[SupStats::kMax] = {};
            stat(m, out);
            acc.n += 1;
            for (int j = 0; j < k; ++j) {
                acc.s[j] += out[j];
                acc.ss[j] += out[j] * out[j];
                acc.s0[j] += out[j] * out[0];
            }
        });
}

Estimate from_stats(const SupStats& st, int k, const McConfig& cfg) {
    Estimate e;
    e.value = st.s[k] / st.n;
    e.std_error = std::sqrt(sample_var(st.n, st.s[k], st.ss[k]) / st.n);
    e.n_paths = static_cast<long>(st.n);
    e.n_steps = cfg.n_steps;
    e.seed = cfg.seed;
    e.bias_note = cfg.bridge_correction ? "bridge-corrected sup" : "grid sup (biased low)";
    return e;
}

}  // namespace

void McConfig::validate() const {
    if (n_paths < 100) throw std::invalid_argument("n_paths must be >= 100");
    if (n_steps < 8) throw std::invalid_argument("n_steps must be >= 8");
    if (starts_per_path < 1) throw std::invalid_argument("starts_per_path must be >= 1");
    if (depth_strata < 1 || depth_strata > 8) throw std::invalid_argument("depth_strata must lie in [1, 8]");
    if (!(interior_fraction >= 0.0 && interior_fraction <= 0.5))
        throw std::invalid_argument("interior_fraction must lie in [0, 0.5]");
    if (shell_width && !(*shell_width > 0.0)) throw std::invalid_argument("shell_width must be positive");
}

double ratio_std_error(double a, double a_se, double b, double b_se, double cov) {
    if (b == 0.0) return kInf;
    const double r = a / b;
    const double v = (a_se * a_se - 2.0 * r * cov + r * r * b_se * b_se) / (b * b);
    return std::sqrt(std::max(0.0, v));
}

HeatRun run_heat(const ProcessSpec& process, const DomainSpec& domain, double t, const McConfig& cfg) {
    check_common(process, t, cfg);
    if (process.dim != domain.dim) throw std::invalid_argument("process and domain dimensions differ");
    if (domain.dim > kMaxDim) throw std::invalid_argument("domains are limited to d <= 3");
    HeatRun run;
    run.volume = volume(domain);
    if (!(run.volume > 0.0)) throw std::invalid_argument("empty domain");
    if (t == 0.0) {
        run.mode = "trivial";
        run.coarse.n_steps = cfg.n_steps;
        run.coarse.q_direct = run.volume;
        if (cfg.grid_check) run.fine = run.coarse;
        return run;
    }

    const bool interval = domain.kind == DomainKind::interval && !cfg.bridge_correction && !cfg.start_region;
    const bool jump = cfg.jump_stratification;
    if (jump && !(interval && process.family == Family::stable && process.alpha == 1.0))
        throw std::invalid_argument("jump stratification needs the Cauchy process on an interval");

    std::vector<Moments> coarse, fine;
    std::vector<double> a_w, b_w;
    const long N = cfg.n_paths;

    auto collect = [&](const PathAcc& acc) {
        coarse.push_back(acc.level[0]);
        fine.push_back(acc.level[1]);
    };

    if (jump) {
        run.mode = "jump_stratified";
        Engine eng(process, domain, t, cfg, false);
        const double L = eng.length, dt = t / eng.n_fine;
        const int nf = eng.n_fine;
        // Thresholds L 4^-k down to about t/4, plus the band above L.
        std::vector<double> a = {0.0};
        int J = std::max(1, static_cast<int>(std::ceil(std::log(4.0 * L / t) / std::log(4.0))));
        for (int k = J - 1; k >= 0; --k) a.push_back(L * std::pow(4.0, -k));
        a.push_back(kInf);
        const int S = static_cast<int>(a.size()) - 1;
        // G(x) = P(max |increment| >= x).
        const auto G = [&](double x) {
            if (x <= 0.0) return 1.0;
            if (std::isinf(x)) return 0.0;
            return -std::expm1(nf * std::log1p(-cauchy_tail(x, dt)));
        };
        std::vector<double> P(S), cm(S);
        for (int j = 0; j < S; ++j) P[j] = G(a[j]) - G(a[j + 1]);
        // Control variate min(L, M) for the largest increment M, with its exact stratum mean
        // E[min(L, M) | a_j <= M < a_j+1] = a_j + int_a_j^min(a_j+1, L) (G(x) - G(a_j+1)) dx / P_j.
        for (int j = 0; j < S; ++j) {
            const double lo = a[j], hi = std::min(a[j + 1], L), gb = G(a[j + 1]);
            double integral = 0.0;
            if (hi > lo) {
                // x = hi e^-u, so that the small-x end is a smooth tail
                const double umax = lo > 0.0 ? std::log(hi / lo) : 60.0;
                integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                    [&](double u) {
                        const double x = hi * std::exp(-u);
                        return (G(x) - gb) * x;
                    },
                    0.0, umax, 10, 1e-12);
            }
            cm[j] = P[j] > 0.0 ? lo + integral / P[j] : lo;
        }
        auto stratum_run = [&](int j, long n, std::uint64_t seed) {
            return reduce_paths<PathAcc>(
                static_cast<std::size_t>(n), cfg.serial_reference, [&] { return eng.make_ws(); },
                [&](PathAcc& acc, Engine::Ws& ws, std::size_t i) {
                    RngStream rng(seed, StreamTag::process, stream_index(j, i));
                    sample_cauchy_conditioned(dt, nf, a[j], a[j + 1], rng, ws.pos.data());
                    double m = 0.0;
                    for (int k = 1; k <= nf; ++k) m = std::max(m, std::abs(ws.pos[k] - ws.pos[k - 1]));
                    eng.eval_interval(ws.pos.data(), acc, cm[j] - std::min(L, m));
                });
        };
        const long pilot = std::max(64L, N / (10L * S));
        const std::uint64_t pilot_seed = splitmix64(cfg.seed ^ static_cast<std::uint64_t>(StreamTag::pilot));
        std::vector<double> sd(S);
        for (int j = 0; j < S; ++j) {
            const PathAcc acc = stratum_run(j, pilot, pilot_seed);
            sd[j] = std::sqrt(sample_var(acc.level[0].n, acc.level[0].d, acc.level[0].dd));
        }
        const std::vector<long> n = allocate(N, P, sd);
        for (int j = 0; j < S; ++j) collect(stratum_run(j, n[j], cfg.seed));
        a_w = P;
        b_w = P;
        run.strata = S;
    } else if (interval) {
        run.mode = "interval_exact";
        Engine eng(process, domain, t, cfg, true);
        collect(reduce_paths<PathAcc>(
            static_cast<std::size_t>(N), cfg.serial_reference, [&] { return eng.make_ws(); },
            [&](PathAcc& acc, Engine::Ws& ws, std::size_t i) {
                RngStream rng(cfg.seed, StreamTag::process, stream_index(0, i));
                eng.sampler->sample(rng, ws.sw, ws.pos.data());
                eng.eval_interval(ws.pos.data(), acc);
            }));
        a_w = {1.0};
        b_w = {1.0};
    } else {
        Engine eng(process, domain, t, cfg, true);
        std::unique_ptr<StartSampler> ss;
        if (cfg.start_region) {
            run.mode = "uniform";
            if (cfg.start_region->dim != domain.dim) throw std::invalid_argument("start region dimension differs");
            ss = std::make_unique<StartSampler>(StartSampler::uniform(*cfg.start_region));
        } else if (!cfg.stratified) {
            run.mode = "uniform";
            ss = std::make_unique<StartSampler>(StartSampler::uniform(domain));
        } else {
            run.mode = "stratified";
            const double depth = max_depth(domain);
            const double rc = reach(domain);
            double w;
            if (cfg.shell_width) {
                w = *cfg.shell_width;
                const double limit = std::isfinite(rc) ? rc : depth;
                if (w >= limit) throw std::invalid_argument("shell width is not below the reach of the domain");
            } else {
                w = 8.0 * pilot_mu(process, t, cfg);
                w = std::min(w, 0.5 * depth);
                if (std::isfinite(rc)) w = std::min(w, 0.9 * rc);
                w = std::max(w, 1e-6 * depth);
            }
            run.shell_width = w;
            ss = std::make_unique<StartSampler>(domain, w, cfg.depth_strata);
        }
        const int S = ss->size();
        run.strata = S;
        auto stratum_run = [&](int j, long n) {
            return reduce_paths<PathAcc>(
                static_cast<std::size_t>(n), cfg.serial_reference, [&] { return eng.make_ws(); },
                [&](PathAcc& acc, Engine::Ws& ws, std::size_t i) { eng.eval_spatial(*ss, j, i, ws, acc); });
        };
        std::vector<long> n(S, N);
        if (S > 1) {
            const long n_in = ss->is_interior(S - 1) ? std::max(kMinStratumPaths, std::lround(cfg.interior_fraction * N)) : 0;
            const int shell = ss->is_interior(S - 1) ? S - 1 : S;
            std::vector<double> w(shell), sd(shell);
            // Pilot with its own seed; discarded afterwards.
            McConfig pc = cfg;
            pc.seed = splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(StreamTag::pilot) << 8));
            pc.grid_check = false;
            Engine pe(process, domain, t, pc, true);
            const long pilot = std::max(64L, N / (20L * S));
            for (int j = 0; j < shell; ++j) {
                const PathAcc acc = reduce_paths<PathAcc>(
                    static_cast<std::size_t>(pilot), cfg.serial_reference, [&] { return pe.make_ws(); },
                    [&](PathAcc& a, Engine::Ws& ws, std::size_t i) { pe.eval_spatial(*ss, j, i, ws, a); });
                w[j] = ss->volume(j);
                sd[j] = std::sqrt(sample_var(acc.level[0].n, acc.level[0].d, acc.level[0].dd));
            }
            const std::vector<long> ns = allocate(N - n_in, w, sd);
            for (int j = 0; j < shell; ++j) n[j] = ns[j];
            if (shell < S) n[S - 1] = n_in;
        }
        long total = 0;
        for (long v : n) total += v;
        for (int j = 0; j < S; ++j) {
            collect(stratum_run(j, n[j]));
            a_w.push_back(ss->volume(j));
            b_w.push_back(static_cast<double>(n[j]) / total);
        }
    }

    run.coarse = combine(coarse, a_w, b_w, cfg.n_steps);
    if (cfg.grid_check) run.fine = combine(fine, a_w, b_w, 2 * cfg.n_steps);
    return run;
}

Estimate estimate_Q(const ProcessSpec& process, const DomainSpec& domain, double t, const McConfig& cfg) {
    const HeatRun run = run_heat(process, domain, t, cfg);
    const HeatLevel& h = run.best();
    Estimate e;
    // With a foreign start region the deficit mixes in the volume estimate,
    // so the direct survival sum is the estimator that stays coupled.
    if (cfg.start_region) {
        e.value = h.q_direct;
        e.std_error = h.q_direct_se;
    } else {
        e.value = run.volume - h.deficit;
        e.std_error = h.deficit_se;
    }
    e.n_paths = h.n_paths;
    e.n_steps = h.n_steps;
    e.seed = cfg.seed;
    e.bias_note = bias_note(cfg);
    return e;
}

Estimate estimate_mu(const ProcessSpec& process, double t, const McConfig& cfg) {
    check_common(process, t, cfg);
    if (t == 0.0) return Estimate{0.0, 0.0, cfg.n_paths, cfg.n_steps, cfg.seed, "empty time window"};
    const SupStats st = sup_kernel(process, t, cfg, StreamTag::normalizer, 1,
                                   [](double m, double* out) { out[0] = std::min(m, 1.0); });
    return from_stats(st, 0, cfg);
}

Estimate estimate_tail(const ProcessSpec& process, double t, double eps, const McConfig& cfg) {
    check_common(process, t, cfg);
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (t == 0.0 || std::isinf(eps)) return Estimate{0.0, 0.0, cfg.n_paths, cfg.n_steps, cfg.seed, ""};
    const SupStats st = sup_kernel(process, t, cfg, StreamTag::normalizer, 1,
                                   [eps](double m, double* out) { out[0] = m > eps ? 1.0 : 0.0; });
    return from_stats(st, 0, cfg);
}

Estimate estimate_sup_moment(const ProcessSpec& process, double t, double p, const McConfig& cfg) {
    check_common(process, t, cfg);
    if (!(p > 0.0)) throw std::invalid_argument("moment order must be positive");
    if ((process.family == Family::stable || process.family == Family::time_changed) && process.alpha < 2.0 &&
        p >= process.alpha)
        throw std::invalid_argument("infinite moment: p >= alpha for a stable family");
    if (t == 0.0) return Estimate{0.0, 0.0, cfg.n_paths, cfg.n_steps, cfg.seed, ""};
    const SupStats st = sup_kernel(process, t, cfg, StreamTag::normalizer, 1,
                                   [p](double m, double* out) { out[0] = std::pow(m, p); });
    return from_stats(st, 0, cfg);
}

FunctionalRun run_functional(const ProcessSpec& process, const ScalarField& f, double t, const McConfig& cfg) {
    check_common(process, t, cfg);
    if (cfg.bridge_correction) throw std::invalid_argument("functional heat content uses grid minima only");
    if (!f.value || f.support.lo.size() != static_cast<std::size_t>(f.dim))
        throw std::invalid_argument("field needs a support box");
    if (f.dim != process.dim) throw std::invalid_argument("field and process dimensions differ");
    const int d = process.dim, K = cfg.starts_per_path;
    const int levels = cfg.grid_check ? 2 : 1;
    const int n = cfg.n_steps * (levels == 2 ? 2 : 1);
    const double vbox = f.support.volume();
    PathSampler sampler(process, t > 0.0 ? t : 1.0, n);
    struct Ws {
        PathSampler::Workspace sw;
        std::vector<double> pos;
    };
    struct Acc {
        Moments lv[2];
        void merge(const Acc& o) {
            lv[0].merge(o.lv[0]);
            lv[1].merge(o.lv[1]);
        }
    };
    const Acc acc = reduce_paths<Acc>(
        static_cast<std::size_t>(cfg.n_paths), cfg.serial_reference,
        [&] {
            Ws ws;
            ws.sw = sampler.make_workspace();
            ws.pos.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
            return ws;
        },
        [&](Acc& a, Ws& ws, std::size_t i) {
            RngStream prng(cfg.seed, StreamTag::process, i);
            RngStream srng(cfg.seed, StreamTag::starts, i);
            if (t > 0.0) sampler.sample(prng, ws.sw, ws.pos.data());
            double dsum[2] = {}, qsum[2] = {}, x[16], y[16];
            for (int k = 0; k < K; ++k) {
                for (int c = 0; c < d; ++c) x[c] = srng.uniform(f.support.lo[c], f.support.hi[c]);
                const double f0 = f.value(x);
                // mn[0]: every stride-th node (coarse), mn[1]: all nodes
                double mn[2] = {f0, f0};
                for (int s = 1; s <= n && (mn[0] > 0.0 || mn[1] > 0.0) && t > 0.0; ++s) {
                    const double* p = ws.pos.data() + static_cast<std::size_t>(s) * d;
                    for (int c = 0; c < d; ++c) y[c] = x[c] + p[c];
                    const double v = f.value(y);
                    mn[1] = std::min(mn[1], v);
                    if (levels == 1 || s % 2 == 0) mn[0] = std::min(mn[0], v);
                }
                for (int l = 0; l < levels; ++l) {
                    const double m = levels == 1 ? mn[1] : mn[l];
                    dsum[l] += f0 - m;
                    qsum[l] += m;
                }
            }
            for (int l = 0; l < levels; ++l) {
                const int stride = levels == 2 && l == 0 ? 2 : 1;
                double sup = 0.0;
                for (int s = stride; s <= n; s += stride) sup = std::max(sup, ws.pos[static_cast<std::size_t>(s) * d]);
                a.lv[l].add(vbox * dsum[l] / K, vbox * qsum[l] / K, sup);
            }
        });
    const auto level = [&](const Moments& m, int steps) {
        const auto est = [&](double s, double ss) {
            Estimate e;
            e.value = s / m.n;
            e.std_error = std::sqrt(sample_var(m.n, s, ss) / m.n);
            e.n_paths = cfg.n_paths;
            e.n_steps = steps;
            e.seed = cfg.seed;
            e.bias_note = "grid minimum (one-sided: Q_f high)";
            return e;
        };
        FunctionalLevel lv;
        lv.n_steps = steps;
        lv.q = est(m.q, m.qq);
        lv.deficit = est(m.d, m.dd);
        lv.mu = est(m.m1, m.m1m1);
        lv.cov_deficit_mu = sample_cov(m.n, m.d, m.m1, m.dm1) / m.n;
        return lv;
    };
    FunctionalRun out;
    out.coarse = level(acc.lv[0], cfg.n_steps);
    if (levels == 2) out.fine = level(acc.lv[1], n);
    return out;
}

Estimate estimate_Qf(const ProcessSpec& process, const ScalarField& f, double t, const McConfig& cfg) {
    return run_functional(process, f, t, cfg).best().q;
}

Assumption1Table assumption1_diagnostic(const ProcessSpec& process, const std::vector<double>& t_ladder,
                                       const std::vector<double>& eps_list, const McConfig& cfg) {
    if (t_ladder.empty() || eps_list.empty()) throw std::invalid_argument("ladders must be nonempty");
    if (static_cast<int>(eps_list.size()) + 1 > SupStats::kMax) throw std::invalid_argument("too many eps values");
    for (std::size_t k = 1; k < t_ladder.size(); ++k)
        if (!(t_ladder[k] < t_ladder[k - 1])) throw std::invalid_argument("t ladder must be strictly decreasing");
    Assumption1Table tab;
    tab.t_ladder = t_ladder;
    tab.eps = eps_list;
    const int E = static_cast<int>(eps_list.size());
    for (double t : t_ladder) {
        check_common(process, t, cfg);
        const SupStats st = sup_kernel(process, t, cfg, StreamTag::normalizer, E + 1, [&](double m, double* out) {
            out[0] = std::min(m, 1.0);
            for (int e = 0; e < E; ++e) out[e + 1] = m > eps_list[e] ? 1.0 : 0.0;
        });
        const double mu = st.s[0] / st.n;
        const double mu_se = std::sqrt(sample_var(st.n, st.s[0], st.ss[0]) / st.n);
        std::vector<double> r(E), rse(E);
        for (int e = 0; e < E; ++e) {
            const double p = st.s[e + 1] / st.n;
            const double p_se = std::sqrt(sample_var(st.n, st.s[e + 1], st.ss[e + 1]) / st.n);
            const double cov = sample_cov(st.n, st.s[e + 1], st.s[0], st.s0[e + 1]) / st.n;
            r[e] = p / mu;
            rse[e] = ratio_std_error(p, p_se, mu, mu_se, cov);
        }
        tab.mu.push_back(mu);
        tab.ratio.push_back(r);
        tab.ratio_se.push_back(rse);
    }
    tab.monotone.assign(E, true);
    if (t_ladder.size() == 1) tab.warnings.push_back("single-point ladder: monotonicity flags are vacuous");
    for (int e = 0; e < E; ++e)
        for (std::size_t k = 1; k < t_ladder.size(); ++k) {
            const double tol = 2.0 * std::hypot(tab.ratio_se[k][e], tab.ratio_se[k - 1][e]);
            if (tab.ratio[k][e] > tab.ratio[k - 1][e] + tol) tab.monotone[e] = false;
        }
    return tab;
}

std::vector<Estimate> estimate_inverse_moments(const SubordinatorSpec& sub, double t, const std::vector<double>& qs,
                                               long n, double ds, std::uint64_t seed, bool serial_reference) {
    sub.validate();
    if (qs.empty() || static_cast<int>(qs.size()) > SupStats::kMax) throw std::invalid_argument("bad moment list");
    if (n < 2) throw std::invalid_argument("need at least two samples");
    const int Q = static_cast<int>(qs.size());
    const SupStats st = reduce_paths<SupStats>(
        static_cast<std::size_t>(n), serial_reference, [] { return 0; },
        [&](SupStats& acc, int&, std::size_t i) {
            RngStream rng(seed, StreamTag::clock, i);
            const double e = sample_inverse_subordinator(sub, t, ds, rng);
            acc.n += 1;
            for (int k = 0; k < Q; ++k) {
                const double v = std::pow(e, qs[k]);
                acc.s[k] += v;
                acc.ss[k] += v * v;
            }
        });
    std::vector<Estimate> out;
    for (int k = 0; k < Q; ++k) {
        Estimate e;
        e.value = st.s[k] / st.n;
        e.std_error = std::sqrt(sample_var(st.n, st.s[k], st.ss[k]) / st.n);
        e.n_paths = n;
        e.seed = seed;
        e.bias_note = "first passage on a grid of spacing ds (biased high by < ds)";
        out.push_back(e);
    }
    return out;
}

}  // namespace shclab
