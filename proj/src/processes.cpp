#include "shclab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "shclab/fbm.hpp"

namespace shclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRejectionCap = 10'000;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Specs

SubordinatorSpec SubordinatorSpec::stable(double beta) {
    SubordinatorSpec s;
    s.kind = Kind::stable;
    s.beta = beta;
    return s;
}

SubordinatorSpec SubordinatorSpec::tempered(double beta, double theta) {
    SubordinatorSpec s;
    s.kind = Kind::tempered_stable;
    s.beta = beta;
    s.theta = theta;
    return s;
}

SubordinatorSpec SubordinatorSpec::drift_poisson(double drift, double rate, double jump_mean) {
    SubordinatorSpec s;
    s.kind = Kind::drift_compound_poisson;
    s.drift = drift;
    s.rate = rate;
    s.jump_mean = jump_mean;
    return s;
}

double SubordinatorSpec::laplace_exponent(double lambda) const {
    switch (kind) {
        case Kind::stable: return std::pow(lambda, beta);
        case Kind::tempered_stable: return std::pow(lambda + theta, beta) - std::pow(theta, beta);
        case Kind::drift_compound_poisson:
            return drift * lambda + rate * lambda * jump_mean / (1.0 + lambda * jump_mean);
    }
    return kNaN;
}

double SubordinatorSpec::mean() const {
    switch (kind) {
        case Kind::stable: return kInf;
        case Kind::tempered_stable: return theta > 0.0 ? beta * std::pow(theta, beta - 1.0) : kInf;
        case Kind::drift_compound_poisson: return drift + rate * jump_mean;
    }
    return kNaN;
}

bool SubordinatorSpec::unbounded() const {
    return kind != Kind::drift_compound_poisson || drift > 0.0;
}

void SubordinatorSpec::validate() const {
    switch (kind) {
        case Kind::stable:
        case Kind::tempered_stable:
            if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("subordinator beta must lie in (0, 1)");
            if (!(theta >= 0.0)) throw std::invalid_argument("tempering theta must be nonnegative");
            break;
        case Kind::drift_compound_poisson:
            if (!(drift >= 0.0 && rate >= 0.0)) throw std::invalid_argument("drift and rate must be nonnegative");
            if (!(jump_mean > 0.0)) throw std::invalid_argument("jump mean must be positive");
            if (!(drift > 0.0 || rate > 0.0)) throw std::invalid_argument("subordinator is identically zero");
            break;
    }
}

std::string SubordinatorSpec::describe() const {
    switch (kind) {
        case Kind::stable: return fmt("stable(beta=%g)", beta);
        case Kind::tempered_stable: return fmt("tempered(beta=%g", beta) + fmt(",theta=%g)", theta);
        case Kind::drift_compound_poisson:
            return fmt("drift_poisson(b=%g", drift) + fmt(",rate=%g", rate) + fmt(",jump_mean=%g)", jump_mean);
    }
    return "?";
}

ClockSpec ClockSpec::inverse(SubordinatorSpec sub) {
    ClockSpec c;
    c.kind = Kind::inverse_subordinator;
    c.beta = sub.kind == SubordinatorSpec::Kind::drift_compound_poisson ? 1.0 : sub.beta;
    c.sub = sub;
    return c;
}

ClockSpec ClockSpec::lamperti(SubordinatorSpec sub, double beta, double x0) {
    ClockSpec c;
    c.kind = Kind::lamperti_inverse;
    c.sub = sub;
    c.beta = beta;
    c.x0 = x0;
    return c;
}

ClockSpec ClockSpec::power(double beta) {
    ClockSpec c;
    c.kind = Kind::deterministic_power;
    c.beta = beta;
    return c;
}

void ClockSpec::validate() const {
    switch (kind) {
        case Kind::inverse_subordinator:
            sub.validate();
            if (!sub.unbounded()) throw std::invalid_argument("inverse clock needs phi(inf) = inf");
            break;
        case Kind::lamperti_inverse:
            sub.validate();
            if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("Lamperti beta must lie in (0, 1)");
            if (!(x0 > 0.0)) throw std::invalid_argument("Lamperti x0 must be positive");
            if (!std::isfinite(sub.mean())) throw std::invalid_argument("Lamperti clock needs E[S_1] < inf");
            break;
        case Kind::deterministic_power:
            if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("power clock beta must lie in (0, 1]");
            break;
    }
}

std::string ClockSpec::describe() const {
    switch (kind) {
        case Kind::inverse_subordinator: return "inverse(" + sub.describe() + ")";
        case Kind::lamperti_inverse:
            return "lamperti(" + sub.describe() + fmt(",beta=%g", beta) + fmt(",x0=%g)", x0);
        case Kind::deterministic_power: return fmt("power(beta=%g)", beta);
    }
    return "?";
}

ProcessSpec ProcessSpec::brownian(int dim, BrownianScale scale) {
    ProcessSpec p;
    p.family = Family::brownian;
    p.dim = dim;
    p.alpha = 2.0;
    p.scale = scale;
    return p;
}

ProcessSpec ProcessSpec::stable(int dim, double alpha) {
    ProcessSpec p;
    p.family = Family::stable;
    p.dim = dim;
    p.alpha = alpha;
    return p;
}

ProcessSpec ProcessSpec::fbm(int dim, double hurst) {
    ProcessSpec p;
    p.family = Family::fbm;
    p.dim = dim;
    p.hurst = hurst;
    return p;
}

ProcessSpec ProcessSpec::time_changed(int dim, double alpha, ClockSpec clock) {
    ProcessSpec p;
    p.family = Family::time_changed;
    p.dim = dim;
    p.alpha = alpha;
    p.clock = clock;
    return p;
}

void ProcessSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("process dimension must be >= 1");
    switch (family) {
        case Family::brownian: break;
        case Family::stable:
            if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable alpha must lie in (0, 2]");
            break;
        case Family::fbm:
            if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
            break;
        case Family::time_changed:
            if (!(alpha > 1.0 && alpha <= 2.0))
                throw std::invalid_argument("time-changed inner alpha must lie in (1, 2]");
            clock.validate();
            break;
    }
}

const char* ProcessSpec::family_name() const {
    switch (family) {
        case Family::brownian: return "brownian";
        case Family::stable: return "stable";
        case Family::fbm: return "fbm";
        case Family::time_changed: return "time_changed";
    }
    return "?";
}

std::string ProcessSpec::describe() const {
    const std::string d = fmt(",d=%g)", dim);
    switch (family) {
        case Family::brownian:
            return std::string("brownian(") + (scale == BrownianScale::heat ? "heat" : "standard") + d;
        case Family::stable: return fmt("stable(alpha=%g", alpha) + d;
        case Family::fbm: return fmt("fbm(H=%g", hurst) + d;
        case Family::time_changed: return fmt("time_changed(alpha=%g,clock=", alpha) + clock.describe() + d;
    }
    return "?";
}

void PathGrid::update_sups() {
    sup_first_coord = 0.0;
    sup_norm_from_start = 0.0;
    if (times.empty()) return;
    const double* x0 = at(0);
    sup_first_coord = x0[0];
    for (std::size_t k = 0; k < size(); ++k) {
        const double* x = at(k);
        sup_first_coord = std::max(sup_first_coord, x[0]);
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += (x[i] - x0[i]) * (x[i] - x0[i]);
        sup_norm_from_start = std::max(sup_norm_from_start, std::sqrt(r2));
    }
}

// ---------------------------------------------------------------------------
// Variates

double sample_stable_1d(double alpha, RngStream& rng) {
    const double v = kPi * (rng.uniform() - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = rng.exponential();
    if (alpha == 2.0) return 2.0 * std::sin(v) * std::sqrt(w);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double beta, RngStream& rng) {
    if (beta == 1.0) return 1.0;
    const double u = kPi * rng.uniform();
    const double e = rng.exponential();
    return std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta) *
           std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
}

void sample_stable_increment(double alpha, double dt, int dim, RngStream& rng, double* out) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stable alpha must lie in (0, 2]");
    if (dim == 1) {
        out[0] = std::pow(dt, 1.0 / alpha) * sample_stable_1d(alpha, rng);
        return;
    }
    const double s = alpha == 2.0 ? dt : std::pow(dt, 2.0 / alpha) * sample_positive_stable(0.5 * alpha, rng);
    const double scale = std::sqrt(2.0 * s);
    for (int i = 0; i < dim; ++i) out[i] = scale * rng.normal();
}

double sample_stable_1d_subordinated(double alpha, double dt, RngStream& rng) {
    const double s = alpha == 2.0 ? dt : std::pow(dt, 2.0 / alpha) * sample_positive_stable(0.5 * alpha, rng);
    return std::sqrt(2.0 * s) * rng.normal();
}

double sample_subordinator_increment(const SubordinatorSpec& sub, double dt, RngStream& rng) {
    using K = SubordinatorSpec::Kind;
    switch (sub.kind) {
        case K::stable: return std::pow(dt, 1.0 / sub.beta) * sample_positive_stable(sub.beta, rng);
        case K::tempered_stable: {
            if (sub.theta == 0.0) return std::pow(dt, 1.0 / sub.beta) * sample_positive_stable(sub.beta, rng);
            // Acceptance is exp(-dt theta^beta); split long steps to keep it reasonable.
            const double cost = dt * std::pow(sub.theta, sub.beta);
            if (cost > 2.0) {
                const int parts = static_cast<int>(std::ceil(cost / 2.0));
                double s = 0.0;
                for (int i = 0; i < parts; ++i) s += sample_subordinator_increment(sub, dt / parts, rng);
                return s;
            }
            const double scale = std::pow(dt, 1.0 / sub.beta);
            for (int tries = 0; tries < kRejectionCap; ++tries) {
                const double s = scale * sample_positive_stable(sub.beta, rng);
                if (rng.uniform() < std::exp(-sub.theta * s)) return s;
            }
            throw std::runtime_error("tempered stable rejection exceeded retry cap");
        }
        case K::drift_compound_poisson: {
            double s = sub.drift * dt;
            if (sub.rate > 0.0) {
                double clock = rng.exponential() / sub.rate;
                while (clock < dt) {
                    s += sub.jump_mean * rng.exponential();
                    clock += rng.exponential() / sub.rate;
                }
            }
            return s;
        }
    }
    return kNaN;
}

PathGrid sample_subordinator_path(const SubordinatorSpec& sub, double t, int n_steps, RngStream& rng) {
    sub.validate();
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    PathGrid p;
    p.dim = 1;
    p.times.resize(n_steps + 1);
    p.positions.resize(n_steps + 1);
    const double dt = t / n_steps;
    double s = 0.0;
    p.times[0] = 0.0;
    p.positions[0] = 0.0;
    for (int k = 1; k <= n_steps; ++k) {
        s += sample_subordinator_increment(sub, dt, rng);
        p.times[k] = k * dt;
        p.positions[k] = s;
    }
    p.times[n_steps] = t;
    p.update_sups();
    return p;
}

double inverse_clock(const PathGrid& path, double t) {
    for (std::size_t k = 0; k < path.size(); ++k)
        if (path.positions[k * path.dim] > t) return path.times[k];
    throw std::runtime_error("increasing path does not exceed the level; extend the path");
}

double sample_inverse_subordinator(const SubordinatorSpec& sub, double t, double ds, RngStream& rng,
                                   long max_steps) {
    if (!(ds > 0.0)) throw std::invalid_argument("clock step must be positive");
    double s = 0.0, S = 0.0;
    long steps = 0;
    while (S <= t) {
        S += sample_subordinator_increment(sub, ds, rng);
        s += ds;
        if (++steps > max_steps) throw std::runtime_error("inverse subordinator exceeded extension cap");
    }
    return s;
}

namespace {

double lamperti_default_dr(const SubordinatorSpec& sub, double beta, double horizon_u, int n_steps) {
    const double m = sub.mean();
    const double a_est = std::log1p(beta * m * horizon_u) / (beta * m);
    return std::max(a_est, 1.0 / (beta * m)) / (16.0 * n_steps);
}

}  // namespace

PathGrid lamperti_xi(const SubordinatorSpec& sub, double beta, double x0, double t, int n_steps,
                     RngStream& rng, double dr) {
    if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    sub.validate();
    if (!std::isfinite(sub.mean())) throw std::invalid_argument("Lamperti construction needs E[S_1] < inf");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    const double scale = std::pow(x0, -beta);
    if (dr <= 0.0) dr = lamperti_default_dr(sub, beta, t * scale, n_steps);
    PathGrid p;
    p.dim = 1;
    p.times.resize(n_steps + 1);
    p.positions.resize(n_steps + 1);
    double S = 0.0, I = 0.0;
    for (int k = 0; k <= n_steps; ++k) {
        const double tk = t * k / n_steps;
        const double u = tk * scale;
        // Advance until the left sum of exp(beta S) dr exceeds u.
        while (I <= u && k > 0) {
            I += std::exp(beta * S) * dr;
            S += sample_subordinator_increment(sub, dr, rng);
        }
        p.times[k] = tk;
        p.positions[k] = x0 * std::exp(S);
    }
    p.update_sups();
    return p;
}

double lamperti_zeta(const SubordinatorSpec& sub, double beta, double x0, double t, RngStream& rng, double dr) {
    ClockSpec c = ClockSpec::lamperti(sub, beta, x0);
    c.validate();
    if (t <= x0) return 0.0;
    if (dr <= 0.0) dr = 1.0 / (1024.0 * beta * sub.mean());
    double S = 0.0, I = 0.0;
    const double level = std::log(t / x0);
    while (S <= level) {
        I += std::exp(beta * S) * dr;
        S += sample_subordinator_increment(sub, dr, rng);
    }
    return std::pow(x0, beta) * I;
}

bool continuous_clock(const ClockSpec& clock) {
    return clock.kind == ClockSpec::Kind::deterministic_power || clock.sub.unbounded();
}

double terminal_clock(const ClockSpec& clock, double t, int n_steps, RngStream& rng, double* scratch) {
    switch (clock.kind) {
        case ClockSpec::Kind::deterministic_power: return std::pow(t, clock.beta);
        case ClockSpec::Kind::inverse_subordinator: {
            // P(E_t > s) = P(s^{1/beta} S_1 < t)
            if (clock.sub.kind == SubordinatorSpec::Kind::stable)
                return std::pow(t / sample_positive_stable(clock.sub.beta, rng), clock.sub.beta);
            // E_t lies in (s - ds, s]; the midpoint halves the overshoot
            const double ds = 1.0 / clock.sub.laplace_exponent(1.0 / t) / (4.0 * n_steps);
            const long cap = 4000L * n_steps;
            double s = 0.0, S = 0.0;
            long steps = 0;
            while (S <= t) {
                S += sample_subordinator_increment(clock.sub, ds, rng);
                s += ds;
                if (++steps > cap) throw std::runtime_error("inverse clock exceeded extension cap");
            }
            return s - 0.5 * ds;
        }
        case ClockSpec::Kind::lamperti_inverse:
            sample_clock(clock, t, n_steps, rng, scratch);
            return scratch[n_steps];
    }
    return 0.0;
}

void sample_clock(const ClockSpec& clock, double t, int n_steps, RngStream& rng, double* u) {
    u[0] = 0.0;
    switch (clock.kind) {
        case ClockSpec::Kind::deterministic_power:
            for (int k = 1; k <= n_steps; ++k) u[k] = std::pow(t * k / n_steps, clock.beta);
            return;
        case ClockSpec::Kind::inverse_subordinator: {
            const double ds = 1.0 / clock.sub.laplace_exponent(1.0 / t) / (4.0 * n_steps);
            const long cap = 4000L * n_steps;
            double s = 0.0, S = 0.0;
            long steps = 0;
            for (int k = 1; k <= n_steps; ++k) {
                const double tk = t * k / n_steps;
                while (S <= tk) {
                    S += sample_subordinator_increment(clock.sub, ds, rng);
                    s += ds;
                    if (++steps > cap) throw std::runtime_error("inverse clock exceeded extension cap");
                }
                u[k] = s;
            }
            return;
        }
        case ClockSpec::Kind::lamperti_inverse: {
            const double beta = clock.beta, x0 = clock.x0;
            const double dr = 1.0 / (8.0 * n_steps * beta * clock.sub.mean());
            const double xb = std::pow(x0, beta);
            double S = 0.0, I = 0.0;
            for (int k = 1; k <= n_steps; ++k) {
                const double tk = t * k / n_steps;
                if (tk <= x0) {
                    u[k] = 0.0;
                    continue;
                }
                const double level = std::log(tk / x0);
                while (S <= level) {
                    I += std::exp(beta * S) * dr;
                    S += sample_subordinator_increment(clock.sub, dr, rng);
                }
                u[k] = xb * I;
            }
            return;
        }
    }
}

PathGrid time_changed_path(const ProcessSpec& spec, const std::vector<double>& clock_values, double t,
                           RngStream& rng) {
    if (clock_values.size() < 2) throw std::invalid_argument("clock needs at least two values");
    const int n = static_cast<int>(clock_values.size()) - 1;
    const int d = spec.dim;
    PathGrid p;
    p.dim = d;
    p.times.resize(n + 1);
    p.positions.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
    double inc[16];
    for (int k = 1; k <= n; ++k) {
        const double du = clock_values[k] - clock_values[k - 1];
        if (du < 0.0) throw std::invalid_argument("clock is not nondecreasing");
        double* x = p.positions.data() + static_cast<std::size_t>(k) * d;
        const double* prev = x - d;
        if (du > 0.0) {
            sample_stable_increment(spec.alpha, du, d, rng, inc);
            for (int i = 0; i < d; ++i) x[i] = prev[i] + inc[i];
        } else {
            for (int i = 0; i < d; ++i) x[i] = prev[i];
        }
        p.times[k] = t * k / n;
    }
    p.update_sups();
    return p;
}

// ---------------------------------------------------------------------------
// PathSampler

PathSampler::PathSampler(const ProcessSpec& spec, double t, int n_steps, bool range_skeleton)
    : spec_(spec), t_(t), n_(n_steps) {
    spec_.validate();
    range_ = range_skeleton && spec_.family == Family::time_changed && continuous_clock(spec_.clock);
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    if (spec_.dim > 16) throw std::invalid_argument("dimension above 16 not supported by the path sampler");
    if (spec_.family == Family::fbm) fbm_ = std::make_unique<FbmGenerator>(n_steps, spec_.hurst);
}

PathSampler::~PathSampler() = default;

bool PathSampler::uses_cholesky() const { return fbm_ && fbm_->uses_cholesky(); }

PathSampler::Workspace PathSampler::make_workspace() const {
    Workspace ws;
    ws.clock.resize(n_ + 1);
    if (fbm_) ws.scratch.resize(2 * static_cast<std::size_t>(n_));
    return ws;
}

void PathSampler::sample(RngStream& rng, Workspace& ws, double* pos) const {
    const int d = spec_.dim, n = n_;
    const double dt = t_ / n;
    for (int i = 0; i < d; ++i) pos[i] = 0.0;
    switch (spec_.family) {
        case Family::brownian: {
            const double sd = std::sqrt(spec_.brownian_variance() * dt);
            for (int k = 1; k <= n; ++k) {
                double* x = pos + static_cast<std::size_t>(k) * d;
                for (int i = 0; i < d; ++i) x[i] = x[i - d] + sd * rng.normal();
            }
            return;
        }
        case Family::stable: {
            const double alpha = spec_.alpha;
            if (d == 1) {
                const double scale = std::pow(dt, 1.0 / alpha);
                for (int k = 1; k <= n; ++k) pos[k] = pos[k - 1] + scale * sample_stable_1d(alpha, rng);
                return;
            }
            const double s_scale = std::pow(dt, 2.0 / alpha);
            for (int k = 1; k <= n; ++k) {
                double* x = pos + static_cast<std::size_t>(k) * d;
                const double s = alpha == 2.0 ? dt : s_scale * sample_positive_stable(0.5 * alpha, rng);
                const double sd = std::sqrt(2.0 * s);
                for (int i = 0; i < d; ++i) x[i] = x[i - d] + sd * rng.normal();
            }
            return;
        }
        case Family::fbm: {
            const double scale = std::pow(dt, spec_.hurst);
            double* a = ws.scratch.data();
            double* b = a + n;
            for (int c = 0; c < d; c += 2) {
                fbm_->sample_pair(rng, ws.fft_in, ws.fft_out, a, b);
                double sa = 0.0, sb = 0.0;
                for (int k = 1; k <= n; ++k) {
                    double* x = pos + static_cast<std::size_t>(k) * d;
                    sa += scale * a[k - 1];
                    x[c] = sa;
                    if (c + 1 < d) {
                        sb += scale * b[k - 1];
                        x[c + 1] = sb;
                    }
                }
            }
            return;
        }
        case Family::time_changed: {
            double* u = ws.clock.data();
            const double alpha = spec_.alpha;
            double inc[16];
            if (range_) {
                // continuous clock: X on [0, t] traces Y on [0, U_t]
                const double du = terminal_clock(spec_.clock, t_, n, rng, u) / n;
                for (int k = 1; k <= n; ++k) {
                    double* x = pos + static_cast<std::size_t>(k) * d;
                    if (du > 0.0) {
                        sample_stable_increment(alpha, du, d, rng, inc);
                        for (int i = 0; i < d; ++i) x[i] = x[i - d] + inc[i];
                    } else {
                        for (int i = 0; i < d; ++i) x[i] = x[i - d];
                    }
                }
                return;
            }
            sample_clock(spec_.clock, t_, n, rng, u);
            for (int k = 1; k <= n; ++k) {
                double* x = pos + static_cast<std::size_t>(k) * d;
                const double du = u[k] - u[k - 1];
                if (du > 0.0) {
                    sample_stable_increment(alpha, du, d, rng, inc);
                    for (int i = 0; i < d; ++i) x[i] = x[i - d] + inc[i];
                } else {
                    for (int i = 0; i < d; ++i) x[i] = x[i - d];
                }
            }
            return;
        }
    }
}

PathGrid sample_path(const ProcessSpec& spec, double t, int n_steps, RngStream& rng) {
    PathSampler sampler(spec, t, n_steps, false);
    auto ws = sampler.make_workspace();
    PathGrid p;
    p.dim = spec.dim;
    p.times.resize(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) p.times[k] = t * k / n_steps;
    p.times[n_steps] = t;
    p.positions.resize(static_cast<std::size_t>(n_steps + 1) * spec.dim);
    sampler.sample(rng, ws, p.positions.data());
    p.update_sups();
    return p;
}

double running_sup_first_coordinate(const PathGrid& path) {
    if (path.times.empty()) throw std::invalid_argument("empty path");
    double m = path.positions[0];
    for (std::size_t k = 1; k < path.size(); ++k) m = std::max(m, path.positions[k * path.dim]);
    return m;
}

double bridge_corrected_sup(const PathGrid& path, double variance_rate, RngStream& rng) {
    if (path.times.empty()) throw std::invalid_argument("empty path");
    double m = path.positions[0];
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double var = variance_rate * (path.times[k] - path.times[k - 1]);
        m = std::max(m, bridge_max(path.positions[(k - 1) * path.dim], path.positions[k * path.dim], var,
                                   rng.uniform()));
    }
    return m;
}

double bridge_survival(double da, double db, double var) {
    if (!(da > 0.0 && db > 0.0)) return 0.0;
    return -std::expm1(-2.0 * da * db / var);
}

double cauchy_tail(double a, double dt) {
    if (a <= 0.0) return 1.0;
    if (std::isinf(a)) return 0.0;
    return (2.0 / kPi) * std::atan(dt / a);
}

void sample_cauchy_conditioned(double dt, int n_steps, double a_lo, double a_hi, RngStream& rng, double* pos) {
    const double p_lo = cauchy_tail(a_lo, dt), p_hi = cauchy_tail(a_hi, dt);
    // |C| = dt / tan(pi v / 2) with v = P(|C| > x) uniform on the allowed range.
    const auto draw = [&](double v_lo, double v_hi) {
        const double v = v_lo + (v_hi - v_lo) * rng.uniform();
        const double mag = dt / std::tan(0.5 * kPi * v);
        return rng.uniform() < 0.5 ? -mag : mag;
    };
    pos[0] = 0.0;
    if (a_lo <= 0.0) {
        for (int k = 1; k <= n_steps; ++k) pos[k] = pos[k - 1] + draw(p_hi, 1.0);
        return;
    }
    if (!(p_lo > p_hi)) throw std::invalid_argument("empty Cauchy band");
    // First index in the band is geometric given increments are below a_hi.
    const double q = (p_lo - p_hi) / (1.0 - p_hi);
    const double log_r = std::log1p(-q);
    const double rn = std::exp(n_steps * log_r);
    int first = 1;
    if (q < 1.0) {
        const double u = rng.uniform();
        first = 1 + static_cast<int>(std::floor(std::log1p(-u * (1.0 - rn)) / log_r));
        first = std::clamp(first, 1, n_steps);
    }
    for (int k = 1; k <= n_steps; ++k) {
        double x;
        if (k < first) x = draw(p_lo, 1.0);
        else if (k == first) x = draw(p_hi, p_lo);
        else x = draw(p_hi, 1.0);
        pos[k] = pos[k - 1] + x;
    }
}

}  // namespace shclab
