#include "shclab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace shclab {

namespace {

constexpr double kPi = std::numbers::pi;

double stable_constant(double alpha, const ConstantsCache& cache) {
    if (alpha == 2.0) return 2.0 / std::sqrt(kPi);
    return cache.require(stable_constant_name(alpha)).value;
}

double stable_constant_rel_error(double alpha, const ConstantsCache& cache) {
    if (alpha == 2.0) return 0.0;
    const ConstantEntry& e = cache.require(stable_constant_name(alpha));
    return e.std_error / e.value;
}

bool inverse_stable_clock(const ClockSpec& c) {
    return c.kind == ClockSpec::Kind::inverse_subordinator && c.sub.kind == SubordinatorSpec::Kind::stable;
}

}  // namespace

const char* norm_kind_name(NormKind kind) {
    switch (kind) {
        case NormKind::estimated_mu: return "estimated_mu";
        case NormKind::reference_mu: return "reference_mu";
        case NormKind::estimated_m: return "estimated_m";
        case NormKind::clock_scale: return "clock_scale";
    }
    return "?";
}

NormKind parse_norm_kind(const std::string& name) {
    for (NormKind k : {NormKind::estimated_mu, NormKind::reference_mu, NormKind::estimated_m, NormKind::clock_scale})
        if (name == norm_kind_name(k)) return k;
    throw std::invalid_argument("unknown normalizer '" + name + "'");
}

double mu_reference(const ProcessSpec& process, double t, const ConstantsCache& cache) {
    if (!(t > 0.0)) throw std::invalid_argument("mu_reference needs t > 0");
    switch (process.family) {
        case Family::brownian:
            return process.scale == BrownianScale::heat ? 2.0 * std::sqrt(t / kPi) : std::sqrt(2.0 * t / kPi);
        case Family::stable:
            if (process.alpha == 1.0) {
                if (!(t < 1.0)) throw std::invalid_argument("Cauchy normalizer t log(1/t)/pi needs t < 1");
                return t * std::log(1.0 / t) / kPi;
            }
            if (process.alpha < 1.0) throw std::invalid_argument("no reference normalizer for alpha < 1");
            return std::pow(t, 1.0 / process.alpha) * stable_constant(process.alpha, cache);
        case Family::fbm:
            if (process.hurst == 0.5) return std::sqrt(2.0 * t / kPi);
            return std::pow(t, process.hurst) * cache.require(fbm_constant_name(process.hurst)).value;
        case Family::time_changed: {
            const double a = process.alpha;
            const ClockSpec& c = process.clock;
            double moment;
            if (inverse_stable_clock(c))
                moment = inverse_stable_moment(c.sub.beta, 1.0 / a, t);
            else if (c.kind == ClockSpec::Kind::deterministic_power)
                moment = std::pow(t, c.beta / a);
            else
                throw std::invalid_argument("no closed-form normalizer for clock " + c.describe());
            return stable_constant(a, cache) * moment;
        }
    }
    return kNaN;
}

double mu_reference_rel_error(const ProcessSpec& process, const ConstantsCache& cache) {
    switch (process.family) {
        case Family::brownian: return 0.0;
        case Family::stable: return process.alpha == 1.0 ? 0.0 : stable_constant_rel_error(process.alpha, cache);
        case Family::fbm: {
            if (process.hurst == 0.5) return 0.0;
            const ConstantEntry& e = cache.require(fbm_constant_name(process.hurst));
            return e.std_error / e.value;
        }
        case Family::time_changed: return stable_constant_rel_error(process.alpha, cache);
    }
    return 0.0;
}

double inverse_stable_moment(double beta, double q, double t) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    if (q == 0.0) return 1.0;
    return std::tgamma(q + 1.0) / std::tgamma(q * beta + 1.0) * std::pow(t, q * beta);
}

double clock_scale(const ProcessSpec& process, double t) {
    if (process.family != Family::time_changed) throw std::invalid_argument("clock scale needs a time-changed process");
    const ClockSpec& c = process.clock;
    if (c.kind == ClockSpec::Kind::inverse_subordinator)
        return std::pow(c.sub.laplace_exponent(1.0 / t), -1.0 / process.alpha);
    return std::pow(t, c.beta / process.alpha);
}

double predicted_limit(const ProcessSpec& process, double perimeter, NormKind norm, const ConstantsCache& cache) {
    if (norm != NormKind::clock_scale) return perimeter;
    if (process.family != Family::time_changed) throw std::invalid_argument("clock_scale needs a time-changed process");
    const ClockSpec& c = process.clock;
    const double a = process.alpha;
    double factor;
    if (inverse_stable_clock(c))
        factor = std::tgamma(1.0 + 1.0 / a) / std::tgamma(1.0 + c.sub.beta / a);
    else if (c.kind == ClockSpec::Kind::deterministic_power)
        factor = 1.0;
    else
        throw std::invalid_argument("no predicted limit for clock " + c.describe());
    return factor * stable_constant(a, cache) * perimeter;
}

double predicted_limit(const ProcessSpec& process, const DomainSpec& domain, NormKind norm,
                       const ConstantsCache& cache) {
    return predicted_limit(process, perimeter(domain), norm, cache);
}

FitSpec default_fit(const ProcessSpec& process) {
    FitSpec f;
    switch (process.family) {
        case Family::brownian: f.theta = 0.5; break;
        case Family::stable:
            if (process.alpha == 1.0) {
                f.model = FitModel::inverse_log;
                f.theta = 0.0;
            } else {
                f.theta = std::min(1.0 / process.alpha, 1.0 - 1.0 / process.alpha);
            }
            break;
        case Family::fbm: f.theta = process.hurst; break;
        case Family::time_changed: f.theta = process.clock.beta / process.alpha; break;
    }
    return f;
}

namespace {

struct Wls {
    double limit = 0, slope = 0, var_limit = 0, chi2 = 0;
    bool ok = false;
};

Wls wls(const std::vector<double>& g, const std::vector<double>& y, const std::vector<double>& w) {
    Wls r;
    const std::size_t n = g.size();
    double sw = 0, sg = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sg += w[i] * g[i];
        sy += w[i] * y[i];
    }
    const double gm = sg / sw, ym = sy / sw;
    double sgg = 0, sgy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sgg += w[i] * (g[i] - gm) * (g[i] - gm);
        sgy += w[i] * (g[i] - gm) * (y[i] - ym);
    }
    if (!(sgg > 1e-14 * sw * std::max(gm * gm, 1e-300))) return r;
    r.slope = sgy / sgg;
    r.limit = ym - r.slope * gm;
    r.var_limit = 1.0 / sw + gm * gm / sgg;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - r.limit - r.slope * g[i];
        r.chi2 += w[i] * e * e;
    }
    r.ok = true;
    return r;
}

double basis(const FitSpec& f, double t) {
    return f.model == FitModel::power ? std::pow(t, f.theta) : 1.0 / std::log(1.0 / t);
}

}  // namespace

Extrapolation extrapolate_ratio(const std::vector<double>& t, const std::vector<double>& ratio,
                                const std::vector<double>& std_error, FitSpec fit) {
    const std::size_t n = t.size();
    if (ratio.size() != n || std_error.size() != n) throw std::invalid_argument("ladder columns differ in length");
    if (n < 3) throw std::invalid_argument("insufficient ladder: need at least 3 points");
    for (double v : t)
        if (!(v > 0.0)) throw std::invalid_argument("ladder times must be positive");
    if (fit.model == FitModel::inverse_log)
        for (double v : t)
            if (!(v < 1.0)) throw std::invalid_argument("inverse-log model needs t < 1");

    Extrapolation out;
    out.fit = fit;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] > t[b]; });
    int up = 0, down = 0;
    for (std::size_t k = 1; k < n; ++k) {
        const double diff = ratio[order[k]] - ratio[order[k - 1]];
        if (diff > 0) ++up;
        if (diff < 0) ++down;
    }
    out.trend = down == 0 ? "increasing" : (up == 0 ? "decreasing" : "mixed");

    bool weighted = true;
    for (double s : std_error)
        if (!(s > 0.0)) weighted = false;
    std::vector<double> w(n, 1.0), g(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (weighted) w[i] = 1.0 / (std_error[i] * std_error[i]);
        g[i] = basis(fit, t[i]);
    }

    const std::size_t last = order.back();
    const double span = std::log10(t[order.front()] / t[last]);
    const auto fallback = [&](const char* why) {
        out.fallback = true;
        out.limit = ratio[last];
        out.std_error = std_error[last];
        out.ci_low = out.limit - 1.96 * out.std_error;
        out.ci_high = out.limit + 1.96 * out.std_error;
        out.note = why;
        return out;
    };

    if (fit.model == FitModel::power) {
        double best = kInf;
        for (double th = 0.05; th <= 1.5 + 1e-12; th += 0.005) {
            std::vector<double> gg(n);
            for (std::size_t i = 0; i < n; ++i) gg[i] = std::pow(t[i], th);
            const Wls r = wls(gg, ratio, w);
            if (r.ok && r.chi2 < best) {
                best = r.chi2;
                out.free_theta = th;
                out.free_limit = r.limit;
            }
        }
    }

    if (n < 4) return fallback("fewer than 4 ladder points; last point with trend flag");
    if (span < 2.0 - 1e-9) return fallback("ladder spans under 2 decades; last point with trend flag");
    const Wls r = wls(g, ratio, w);
    if (!r.ok) return fallback("ill-conditioned fit; last point with trend flag");
    out.limit = r.limit;
    out.slope = r.slope;
    out.chi2 = r.chi2;
    out.dof = static_cast<int>(n) - 2;
    double var = r.var_limit;
    const double red = out.dof > 0 ? r.chi2 / out.dof : 0.0;
    if (!weighted) var *= red;
    else if (red > 1.0) var *= red;
    out.std_error = std::sqrt(var);
    out.ci_low = out.limit - 1.96 * out.std_error;
    out.ci_high = out.limit + 1.96 * out.std_error;
    return out;
}

}  // namespace shclab
