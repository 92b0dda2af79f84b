#include "shclab/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "shclab/kernels.hpp"
#include "shclab/level_sets.hpp"
#include "shclab/mollify.hpp"

#ifndef SHCLAB_VERSION
#define SHCLAB_VERSION "unknown"
#endif

namespace shclab {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// ---- YAML helpers ----

std::string where(const std::string& ctx, const std::string& key) { return ctx.empty() ? key : ctx + "." + key; }

void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!n.IsMap()) throw ConfigError(ctx + ": expected a mapping");
    for (const auto& kv : n) {
        const std::string k = kv.first.as<std::string>();
        if (!allowed.count(k)) throw ConfigError(where(ctx, k) + ": unknown key");
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& ctx) {
    const YAML::Node v = n[key];
    if (!v) throw ConfigError(where(ctx, key) + ": missing");
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where(ctx, key) + ": cannot parse '" + YAML::Dump(v) + "'");
    }
}

template <class T>
T get_or(const YAML::Node& n, const std::string& key, T fallback, const std::string& ctx) {
    return n[key] ? get<T>(n, key, ctx) : fallback;
}

SubordinatorSpec parse_subordinator(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"kind", "beta", "theta", "drift", "rate", "jump_mean"}, ctx);
    const std::string kind = get<std::string>(n, "kind", ctx);
    SubordinatorSpec s;
    if (kind == "stable") {
        s = SubordinatorSpec::stable(get<double>(n, "beta", ctx));
    } else if (kind == "tempered_stable") {
        s = SubordinatorSpec::tempered(get<double>(n, "beta", ctx), get<double>(n, "theta", ctx));
    } else if (kind == "drift_compound_poisson") {
        s = SubordinatorSpec::drift_poisson(get_or(n, "drift", 0.0, ctx), get_or(n, "rate", 0.0, ctx),
                                            get_or(n, "jump_mean", 1.0, ctx));
    } else {
        throw ConfigError(where(ctx, "kind") + ": unknown subordinator '" + kind + "'");
    }
    return s;
}

ClockSpec parse_clock(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"kind", "subordinator", "beta", "x0"}, ctx);
    const std::string kind = get<std::string>(n, "kind", ctx);
    if (kind == "inverse") {
        if (!n["subordinator"]) throw ConfigError(where(ctx, "subordinator") + ": missing");
        return ClockSpec::inverse(parse_subordinator(n["subordinator"], where(ctx, "subordinator")));
    }
    if (kind == "lamperti") {
        if (!n["subordinator"]) throw ConfigError(where(ctx, "subordinator") + ": missing");
        return ClockSpec::lamperti(parse_subordinator(n["subordinator"], where(ctx, "subordinator")),
                                   get<double>(n, "beta", ctx), get_or(n, "x0", 1e-3, ctx));
    }
    if (kind == "power") return ClockSpec::power(get<double>(n, "beta", ctx));
    throw ConfigError(where(ctx, "kind") + ": unknown clock '" + kind + "'");
}

ProcessSpec parse_process(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"family", "dim", "scale", "alpha", "hurst", "clock"}, ctx);
    const std::string family = get<std::string>(n, "family", ctx);
    const int dim = get_or(n, "dim", 2, ctx);
    ProcessSpec p;
    if (family == "brownian") {
        const std::string scale = get_or<std::string>(n, "scale", "heat", ctx);
        if (scale != "heat" && scale != "standard") throw ConfigError(where(ctx, "scale") + ": heat or standard");
        p = ProcessSpec::brownian(dim, scale == "heat" ? BrownianScale::heat : BrownianScale::standard);
    } else if (family == "stable") {
        p = ProcessSpec::stable(dim, get<double>(n, "alpha", ctx));
    } else if (family == "fbm") {
        p = ProcessSpec::fbm(dim, get<double>(n, "hurst", ctx));
    } else if (family == "time_changed") {
        if (!n["clock"]) throw ConfigError(where(ctx, "clock") + ": missing");
        p = ProcessSpec::time_changed(dim, get<double>(n, "alpha", ctx), parse_clock(n["clock"], where(ctx, "clock")));
    } else {
        throw ConfigError(where(ctx, "family") + ": unknown family '" + family + "'");
    }
    for (const char* k : {"scale", "alpha", "hurst", "clock"}) {
        const bool used = (family == "brownian" && std::string(k) == "scale") ||
                          ((family == "stable" || family == "time_changed") && std::string(k) == "alpha") ||
                          (family == "fbm" && std::string(k) == "hurst") ||
                          (family == "time_changed" && std::string(k) == "clock");
        if (n[k] && !used) throw ConfigError(where(ctx, k) + ": not a parameter of family " + family);
    }
    return p;
}

std::vector<double> get_vec(const YAML::Node& n, const std::string& key, const std::string& ctx) {
    const YAML::Node v = n[key];
    if (!v) return {};
    if (!v.IsSequence()) throw ConfigError(where(ctx, key) + ": expected a list");
    std::vector<double> out;
    for (const auto& x : v) {
        try {
            out.push_back(x.as<double>());
        } catch (const YAML::Exception&) {
            throw ConfigError(where(ctx, key) + ": non-numeric entry");
        }
    }
    return out;
}

DomainSpec parse_domain(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"kind", "dim", "radius", "center", "inner", "outer", "axes", "angle", "a", "b", "field"}, ctx);
    const std::string kind = get<std::string>(n, "kind", ctx);
    const std::vector<double> center = get_vec(n, "center", ctx);
    if (kind == "ball") return make_ball(get_or(n, "dim", 2, ctx), get_or(n, "radius", 1.0, ctx), center);
    if (kind == "annulus")
        return make_annulus(get_or(n, "dim", 2, ctx), get<double>(n, "inner", ctx), get<double>(n, "outer", ctx),
                            center);
    if (kind == "ellipse")
        return make_ellipse(get<double>(n, "a", ctx), get<double>(n, "b", ctx), get_or(n, "angle", 0.0, ctx), center);
    if (kind == "ellipsoid") return make_ellipsoid(get_vec(n, "axes", ctx), {}, center);
    if (kind == "interval") return make_interval(get_or(n, "a", 0.0, ctx), get_or(n, "b", 1.0, ctx));
    if (kind == "level_set") return make_level_set(level_set_by_name(get<std::string>(n, "field", ctx)));
    throw ConfigError(where(ctx, "kind") + ": unknown domain kind '" + kind + "'");
}

std::shared_ptr<const ScalarField> parse_field(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"kind", "dim", "domain", "epsilon", "grid_h"}, ctx);
    const std::string kind = get<std::string>(n, "kind", ctx);
    if (kind == "quartic_bump") return quartic_bump(get_or(n, "dim", 2, ctx));
    if (!n["domain"]) throw ConfigError(where(ctx, "domain") + ": missing");
    const DomainSpec dom = parse_domain(n["domain"], where(ctx, "domain"));
    if (kind == "indicator") return indicator_field(dom);
    if (kind == "mollified_indicator")
        return mollified_indicator(dom, get<double>(n, "epsilon", ctx), get<double>(n, "grid_h", ctx));
    throw ConfigError(where(ctx, "kind") + ": unknown field '" + kind + "'");
}

McConfig parse_mc(const YAML::Node& n, const std::string& ctx) {
    check_keys(n,
               {"n_paths", "n_steps", "seed", "shell_width", "stratified", "bridge_correction", "starts_per_path",
                "depth_strata", "interior_fraction", "jump_stratification"},
               ctx);
    McConfig c;
    c.n_paths = get_or(n, "n_paths", c.n_paths, ctx);
    c.n_steps = get_or(n, "n_steps", c.n_steps, ctx);
    c.seed = get_or<std::uint64_t>(n, "seed", c.seed, ctx);
    if (n["shell_width"]) c.shell_width = get<double>(n, "shell_width", ctx);
    c.stratified = get_or(n, "stratified", c.stratified, ctx);
    c.bridge_correction = get_or(n, "bridge_correction", c.bridge_correction, ctx);
    c.starts_per_path = get_or(n, "starts_per_path", c.starts_per_path, ctx);
    c.depth_strata = get_or(n, "depth_strata", c.depth_strata, ctx);
    c.interior_fraction = get_or(n, "interior_fraction", c.interior_fraction, ctx);
    c.jump_stratification = get_or(n, "jump_stratification", c.jump_stratification, ctx);
    return c;
}

AcceptanceSpec parse_acceptance(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"check", "target", "tolerance", "monotone", "band"}, ctx);
    AcceptanceSpec a;
    const std::string check = get_or<std::string>(n, "check", "extrapolated", ctx);
    if (check == "extrapolated") a.check = AcceptanceSpec::Check::extrapolated;
    else if (check == "last_point") a.check = AcceptanceSpec::Check::last_point;
    else if (check == "band") a.check = AcceptanceSpec::Check::band;
    else throw ConfigError(where(ctx, "check") + ": extrapolated, last_point or band");
    if (n["target"] && get<std::string>(n, "target", ctx) != "predicted") a.target = get<double>(n, "target", ctx);
    a.tolerance = get_or(n, "tolerance", a.tolerance, ctx);
    a.monotone = get_or(n, "monotone", a.monotone, ctx);
    if (n["band"]) {
        const std::vector<double> b = get_vec(n, "band", ctx);
        if (b.size() != 2) throw ConfigError(where(ctx, "band") + ": expected [lo, hi]");
        a.band_lo = b[0];
        a.band_hi = b[1];
    }
    return a;
}

FitSpec parse_fit(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"model", "theta"}, ctx);
    FitSpec f;
    const std::string model = get_or<std::string>(n, "model", "power", ctx);
    if (model == "power") f.model = FitModel::power;
    else if (model == "inverse_log") f.model = FitModel::inverse_log;
    else throw ConfigError(where(ctx, "model") + ": power or inverse_log");
    f.theta = get_or(n, "theta", f.theta, ctx);
    return f;
}

ExperimentConfig parse_experiment_node(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"name", "process", "domain", "field", "t_ladder", "mc", "normalizer", "fit", "acceptance"}, ctx);
    ExperimentConfig e;
    e.name = get<std::string>(n, "name", ctx);
    const std::string c = ctx.empty() ? e.name : ctx + "(" + e.name + ")";
    try {
        if (!n["process"]) throw ConfigError(where(c, "process") + ": missing");
        e.process = parse_process(n["process"], where(c, "process"));
        if (n["domain"] && n["field"]) throw ConfigError(c + ": give either domain or field");
        if (n["domain"]) e.domain = parse_domain(n["domain"], where(c, "domain"));
        else if (n["field"]) e.field = parse_field(n["field"], where(c, "field"));
        else throw ConfigError(c + ": domain or field required");
        e.t_ladder = get_vec(n, "t_ladder", c);
        if (n["mc"]) e.mc = parse_mc(n["mc"], where(c, "mc"));
        e.normalizer = parse_norm_kind(get_or<std::string>(n, "normalizer", "estimated_mu", c));
        if (n["fit"]) e.fit = parse_fit(n["fit"], where(c, "fit"));
        if (n["acceptance"]) e.acceptance = parse_acceptance(n["acceptance"], where(c, "acceptance"));
        e.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(c + ": " + ex.what());
    }
    e.config_hash = fnv1a(YAML::Dump(n));
    return e;
}

YAML::Node parse_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& ex) {
        throw ConfigError(std::string("YAML: ") + ex.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double perimeter_of(const ExperimentConfig& cfg) {
    if (cfg.field) return cfg.field->grad_l1;
    if (cfg.domain->kind == DomainKind::level_set) return cfg.domain->field->perimeter;
    return perimeter(*cfg.domain);
}

double volume_of(const ExperimentConfig& cfg) {
    if (cfg.field) return cfg.field->integral;
    if (cfg.domain->kind == DomainKind::level_set) return cfg.domain->field->volume;
    return volume(*cfg.domain);
}

struct Normalized {
    double q_hat, q_se, norm, norm_se, ratio, ratio_se;
};

Normalized normalize(double vol, double deficit, double deficit_se, double norm, double norm_se, double cov) {
    Normalized r;
    r.q_hat = vol - deficit;
    r.q_se = deficit_se;
    r.norm = norm;
    r.norm_se = norm_se;
    r.ratio = (vol - r.q_hat) / norm;
    r.ratio_se = ratio_std_error(deficit, deficit_se, norm, norm_se, cov);
    return r;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::grid_limited: return "grid-limited";
        case Verdict::unchecked: return "unchecked";
    }
    return "?";
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::fail: return 1;
        case Verdict::grid_limited: return 2;
        default: return 0;
    }
}

std::string ExperimentConfig::domain_name() const {
    if (field) return field->name;
    return domain ? describe(*domain) : "?";
}

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("experiment without a name");
    const auto fail = [&](const std::string& m) { throw ConfigError(name + ": " + m); };
    try {
        process.validate();
        mc.validate();
    } catch (const std::invalid_argument& ex) {
        fail(ex.what());
    }
    if (!domain && !field) fail("domain or field required");
    const int dim = field ? field->dim : domain->dim;
    if (dim != process.dim) fail("process and domain dimensions differ");
    if (t_ladder.empty()) fail("t_ladder is empty");
    for (std::size_t k = 0; k < t_ladder.size(); ++k) {
        if (!(t_ladder[k] > 0.0)) fail("t_ladder entries must be positive");
        if (k > 0 && !(t_ladder[k] < t_ladder[k - 1])) fail("t_ladder must be strictly decreasing");
    }
    const bool cauchy = process.family == Family::stable && process.alpha == 1.0;
    if (cauchy && normalizer == NormKind::reference_mu && t_ladder.front() >= 1.0)
        fail("the Cauchy normalizer needs every t < 1");
    if (normalizer == NormKind::clock_scale && process.family != Family::time_changed)
        fail("clock_scale needs a time-changed process");
    if (field) {
        if (normalizer == NormKind::estimated_m || normalizer == NormKind::clock_scale)
            fail("functional runs support estimated_mu and reference_mu");
        if (!std::isfinite(field->integral)) fail("field without a known integral");
    }
    if (acceptance && acceptance->check == AcceptanceSpec::Check::band && !domain) fail("band check needs a domain");
    if (acceptance && !(acceptance->tolerance >= 0.0)) fail("tolerance must be nonnegative");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg_in, const ConstantsCache& cache, const RunOptions& opt) {
    ExperimentConfig cfg = cfg_in;
    if (opt.seed) cfg.mc.seed = *opt.seed;
    if (opt.n_paths) cfg.mc.n_paths = *opt.n_paths;
    cfg.validate();

    ExperimentReport rep;
    rep.name = cfg.name;
    rep.family = cfg.process.family_name();
    rep.process = cfg.process.describe();
    rep.domain = cfg.domain_name();
    rep.norm = cfg.normalizer;
    rep.volume = volume_of(cfg);
    rep.perimeter = perimeter_of(cfg);
    rep.config_hash = cfg.config_hash;
    rep.seed = cfg.mc.seed;
    rep.version = SHCLAB_VERSION;
    rep.threads = thread_count();
    rep.threads_source = opt.threads_source;
    try {
        rep.predicted = predicted_limit(cfg.process, rep.perimeter, cfg.normalizer, cache);
    } catch (const std::invalid_argument& ex) {
        rep.warnings.push_back(std::string("no predicted limit: ") + ex.what());
    }

    const std::size_t last = cfg.t_ladder.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const double t = cfg.t_ladder[k];
        McConfig mc = cfg.mc;
        mc.seed = cfg.mc.seed + k;
        mc.grid_check = k == last;
        const auto start = std::chrono::steady_clock::now();
        Normalized lv[2];
        int steps[2] = {mc.n_steps, 2 * mc.n_steps};
        const auto norm_for = [&](double mu, double mu_se, double cov_mu, double m, double m_se, double cov_m,
                                  double deficit, double deficit_se) {
            switch (cfg.normalizer) {
                case NormKind::estimated_mu: return normalize(rep.volume, deficit, deficit_se, mu, mu_se, cov_mu);
                case NormKind::estimated_m: return normalize(rep.volume, deficit, deficit_se, m, m_se, cov_m);
                case NormKind::reference_mu:
                    return normalize(rep.volume, deficit, deficit_se, mu_reference(cfg.process, t, cache), 0.0, 0.0);
                case NormKind::clock_scale:
                    return normalize(rep.volume, deficit, deficit_se, clock_scale(cfg.process, t), 0.0, 0.0);
            }
            return Normalized{};
        };
        if (cfg.field) {
            const FunctionalRun fr = run_functional(cfg.process, *cfg.field, t, mc);
            const auto one = [&](const FunctionalLevel& l) {
                return norm_for(l.mu.value, l.mu.std_error, l.cov_deficit_mu, kNaN, kNaN, 0.0, l.deficit.value,
                                l.deficit.std_error);
            };
            lv[0] = one(fr.coarse);
            if (fr.fine) lv[1] = one(*fr.fine);
        } else {
            const HeatRun hr = run_heat(cfg.process, *cfg.domain, t, mc);
            const auto one = [&](const HeatLevel& l) {
                return norm_for(l.mu, l.mu_se, l.cov_deficit_mu, l.m, l.m_se, l.cov_deficit_m, l.deficit,
                                l.deficit_se);
            };
            lv[0] = one(hr.coarse);
            if (hr.fine) lv[1] = one(*hr.fine);
        }
        const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const int use = mc.grid_check ? 1 : 0;
        ReportRow row;
        row.t = t;
        row.n_paths = mc.n_paths;
        row.n_steps = steps[use];
        row.seed = mc.seed;
        row.q_hat = lv[use].q_hat;
        row.q_se = lv[use].q_se;
        row.norm_hat = lv[use].norm;
        row.norm_se = lv[use].norm_se;
        row.ratio = lv[use].ratio;
        row.ratio_se = lv[use].ratio_se;
        row.runtime_s = opt.reproducible ? 0.0 : runtime;
        rep.rows.push_back(row);
        if (mc.grid_check) {
            BiasCheck b;
            b.t = t;
            b.n_coarse = steps[0];
            b.n_fine = steps[1];
            b.ratio_coarse = lv[0].ratio;
            b.ratio_fine = lv[1].ratio;
            b.delta = b.ratio_fine - b.ratio_coarse;
            b.ratio_se = lv[1].ratio_se;
            b.limited = std::abs(b.delta) > 2.0 * b.ratio_se;
            rep.bias = b;
        }
        if (row.q_hat > rep.volume + 2.0 * row.q_se) rep.warnings.push_back("Q above volume at t=" + num(t));
        if (row.ratio < -2.0 * row.ratio_se) rep.warnings.push_back("negative ratio at t=" + num(t));
        if (opt.verbose)
            std::fprintf(stderr, "  %s t=%-8.3g ratio=%.5f +- %.5f (%.1fs)\n", cfg.name.c_str(), t, row.ratio,
                         row.ratio_se, runtime);
    }

    std::vector<double> ts, rs, ses;
    for (const auto& r : rep.rows) {
        ts.push_back(r.t);
        rs.push_back(r.ratio);
        ses.push_back(r.ratio_se);
    }
    if (rep.rows.size() < 3) {
        rep.warnings.push_back("ladder of " + std::to_string(rep.rows.size()) +
                               " point(s): no extrapolation, smallest-t ratio reported");
    } else {
        try {
            rep.extrapolation = extrapolate_ratio(ts, rs, ses, cfg.fit ? *cfg.fit : default_fit(cfg.process));
            if (rep.extrapolation->fallback) rep.warnings.push_back(rep.extrapolation->note);
        } catch (const std::invalid_argument& ex) {
            rep.warnings.push_back(std::string("extrapolation failed: ") + ex.what());
        }
    }

    if (rep.bias && rep.bias->limited) {
        rep.verdict = Verdict::grid_limited;
        rep.detail = "doubling n_steps moved the ratio by " + short_num(rep.bias->delta) + " > 2 se = " +
                     short_num(2.0 * rep.bias->ratio_se);
        return rep;
    }
    if (!cfg.acceptance) return rep;

    const AcceptanceSpec& acc = *cfg.acceptance;
    double widen = 0.0;
    if (cfg.normalizer == NormKind::reference_mu || cfg.normalizer == NormKind::clock_scale)
        widen = 2.0 * mu_reference_rel_error(cfg.process, cache);
    rep.tolerance = acc.tolerance + widen;
    const double last_ratio = rep.rows.back().ratio;

    if (acc.check == AcceptanceSpec::Check::band) {
        double grad_ratio = 1.0;
        if (cfg.domain->kind == DomainKind::level_set)
            grad_ratio = cfg.domain->field->grad_sup_boundary / cfg.domain->field->grad_inf_boundary;
        const double lo = acc.band_lo * rep.perimeter, hi = acc.band_hi * grad_ratio * rep.perimeter;
        bool ok = true;
        for (const auto& r : rep.rows)
            if (r.ratio + 2.0 * r.ratio_se < lo || r.ratio - 2.0 * r.ratio_se > hi) ok = false;
        rep.verdict = ok ? Verdict::pass : Verdict::fail;
        rep.detail = "band [" + short_num(lo) + ", " + short_num(hi) + "]";
        return rep;
    }

    rep.target = acc.target ? *acc.target : rep.predicted;
    if (!std::isfinite(rep.target)) throw ConfigError(cfg.name + ": acceptance needs a target or a predicted limit");
    double value = last_ratio;
    if (acc.check == AcceptanceSpec::Check::extrapolated && rep.extrapolation && !rep.extrapolation->fallback)
        value = rep.extrapolation->limit;
    const double rel = std::abs(value - rep.target) / std::abs(rep.target);
    bool ok = rel <= rep.tolerance;
    rep.detail = short_num(value) + " vs " + short_num(rep.target) + " (rel " + short_num(rel) + ", tol " +
                 short_num(rep.tolerance) + ")";
    if (acc.monotone && rep.rows.size() >= 2) {
        const double sign = rep.target >= rep.rows.front().ratio ? 1.0 : -1.0;
        bool mono = true;
        for (std::size_t k = 1; k < rep.rows.size(); ++k) {
            const double step = sign * (rep.rows[k].ratio - rep.rows[k - 1].ratio);
            if (step < -2.0 * std::hypot(rep.rows[k].ratio_se, rep.rows[k - 1].ratio_se)) mono = false;
        }
        if (std::abs(last_ratio - rep.target) >= std::abs(rep.rows.front().ratio - rep.target)) mono = false;
        rep.detail += mono ? ", monotone toward target" : ", not monotone toward target";
        ok = ok && mono;
    }
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    return rep;
}

std::string report_csv(const ExperimentReport& r, bool reproducible) {
    std::ostringstream o;
    o << "# experiment=" << r.name << "\n";
    o << "# process=" << r.process << "\n";
    o << "# domain=" << r.domain << "\n";
    o << "# version=" << r.version << "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
    o << "# config_hash=" << hash << "\n";
    o << "# seed=" << r.seed << "\n";
    if (!reproducible) o << "# threads=" << r.threads << " (" << r.threads_source << ")\n";
    o << "# volume=" << num(r.volume) << "\n";
    o << "# perimeter=" << num(r.perimeter) << "\n";
    o << "# predicted_limit=" << num(r.predicted) << "\n";
    if (r.extrapolation) {
        const Extrapolation& e = *r.extrapolation;
        o << "# extrapolated_limit=" << num(e.limit) << "\n";
        o << "# extrapolated_se=" << num(e.std_error) << "\n";
        o << "# extrapolated_ci=" << num(e.ci_low) << ":" << num(e.ci_high) << "\n";
        o << "# fit=" << (e.fit.model == FitModel::power ? "power" : "inverse_log") << " theta=" << num(e.fit.theta)
          << (e.fallback ? " fallback" : "") << "\n";
        o << "# trend=" << e.trend << "\n";
    }
    if (r.bias)
        o << "# bias_check=t:" << num(r.bias->t) << " delta:" << num(r.bias->delta) << " se:" << num(r.bias->ratio_se)
          << (r.bias->limited ? " limited" : " ok") << "\n";
    o << "# verdict=" << verdict_name(r.verdict) << "\n";
    o << "experiment,family,domain,t,n_paths,n_steps,q_hat,q_se,norm_kind,norm_hat,norm_se,ratio,ratio_se,runtime_s\n";
    for (const auto& row : r.rows) {
        o << csv_field(r.name) << "," << r.family << "," << csv_field(r.domain) << "," << num(row.t) << ","
          << row.n_paths << "," << row.n_steps << "," << num(row.q_hat) << "," << num(row.q_se) << ","
          << norm_kind_name(r.norm) << "," << num(row.norm_hat) << "," << num(row.norm_se) << "," << num(row.ratio)
          << "," << num(row.ratio_se) << "," << num(row.runtime_s) << "\n";
    }
    return o.str();
}

std::string bias_csv(const ExperimentReport& r) {
    std::ostringstream o;
    o << "# experiment=" << r.name << "\n";
    o << "experiment,t,n_steps_coarse,n_steps_fine,ratio_coarse,ratio_fine,delta,ratio_se,limited\n";
    if (r.bias) {
        const BiasCheck& b = *r.bias;
        o << csv_field(r.name) << "," << num(b.t) << "," << b.n_coarse << "," << b.n_fine << "," << num(b.ratio_coarse)
          << "," << num(b.ratio_fine) << "," << num(b.delta) << "," << num(b.ratio_se) << "," << (b.limited ? 1 : 0)
          << "\n";
    }
    return o.str();
}

std::string report_text(const ExperimentReport& r) {
    std::ostringstream o;
    char line[256];
    o << r.name << ": " << r.process << " on " << r.domain << ", normalizer " << norm_kind_name(r.norm) << "\n";
    std::snprintf(line, sizeof line, "  %-10s %-8s %-8s %-14s %-12s %-8s\n", "t", "paths", "steps", "ratio", "se",
                  "time_s");
    o << line;
    for (const auto& row : r.rows) {
        std::snprintf(line, sizeof line, "  %-10.3g %-8ld %-8d %-14.6f %-12.6f %-8.1f\n", row.t, row.n_paths,
                      row.n_steps, row.ratio, row.ratio_se, row.runtime_s);
        o << line;
    }
    if (r.extrapolation)
        o << "  extrapolated " << short_num(r.extrapolation->limit) << " +- " << short_num(r.extrapolation->std_error)
          << " (free theta " << short_num(r.extrapolation->free_theta) << " -> "
          << short_num(r.extrapolation->free_limit) << ")\n";
    o << "  predicted " << short_num(r.predicted) << "\n";
    for (const auto& w : r.warnings) o << "  warning: " << w << "\n";
    o << "  verdict " << verdict_name(r.verdict) << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
    return o.str();
}

SuiteConfig parse_suite(const std::string& text, const std::string& base_dir) {
    const YAML::Node root = parse_yaml(text);
    if (!root || root.IsNull()) throw ConfigError("empty suite");
    check_keys(root, {"suite", "budget_s", "constants", "experiments"}, "");
    SuiteConfig s;
    s.name = get_or<std::string>(root, "suite", "suite", "");
    s.budget_s = get_or(root, "budget_s", 0.0, "");
    if (root["constants"]) {
        const std::filesystem::path p = get<std::string>(root, "constants", "");
        s.constants = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();
    }
    const YAML::Node ex = root["experiments"];
    if (!ex || !ex.IsSequence() || ex.size() == 0) throw ConfigError("suite lists no experiments");
    std::set<std::string> names;
    for (std::size_t i = 0; i < ex.size(); ++i) {
        ExperimentConfig e = parse_experiment_node(ex[i], "experiments[" + std::to_string(i) + "]");
        if (!names.insert(e.name).second) throw ConfigError("duplicate experiment name " + e.name);
        s.experiments.push_back(std::move(e));
    }
    return s;
}

SuiteConfig load_suite(const std::string& path) {
    return parse_suite(read_file(path), std::filesystem::path(path).parent_path().string());
}

ExperimentConfig parse_experiment(const std::string& text) {
    const YAML::Node root = parse_yaml(text);
    if (!root || root.IsNull()) throw ConfigError("empty experiment file");
    return parse_experiment_node(root, "");
}

ExperimentConfig parse_experiment_file(const std::string& path) { return parse_experiment(read_file(path)); }

void write_report_files(const ExperimentReport& r, const std::string& out_dir, bool reproducible) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::ofstream(dir / (r.name + ".csv")) << report_csv(r, reproducible);
    std::ofstream(dir / (r.name + "_bias.csv")) << bias_csv(r);
}

SuiteSummary run_suite(const SuiteConfig& suite, const ConstantsCache& cache, const RunOptions& opt,
                       const std::string& out_dir) {
    SuiteSummary sum;
    const auto start = std::chrono::steady_clock::now();
    bool any_fail = false, any_limited = false;
    for (const auto& e : suite.experiments) {
        if (opt.verbose) std::fprintf(stderr, "running %s\n", e.name.c_str());
        ExperimentReport r = run_experiment(e, cache, opt);
        if (!out_dir.empty()) write_report_files(r, out_dir, opt.reproducible);
        any_fail = any_fail || r.verdict == Verdict::fail;
        any_limited = any_limited || r.verdict == Verdict::grid_limited;
        sum.reports.push_back(std::move(r));
    }
    sum.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sum.over_budget = suite.budget_s > 0.0 && sum.runtime_s > suite.budget_s;
    sum.exit_code = any_fail ? 1 : (any_limited ? 2 : 0);

    std::ostringstream o;
    char line[512];
    std::snprintf(line, sizeof line, "%-28s %-14s %-12s %-12s %s\n", "experiment", "verdict", "value", "target",
                  "detail");
    o << line;
    for (const auto& r : sum.reports) {
        const double value = r.extrapolation && !r.extrapolation->fallback ? r.extrapolation->limit : r.rows.back().ratio;
        std::snprintf(line, sizeof line, "%-28s %-14s %-12.6g %-12.6g %s\n", r.name.c_str(), verdict_name(r.verdict),
                      value, r.target, r.detail.c_str());
        o << line;
    }
    std::snprintf(line, sizeof line, "suite %s: %.1f s (budget %.0f s)%s\n", suite.name.c_str(), sum.runtime_s,
                  suite.budget_s, sum.over_budget ? " OVER BUDGET" : "");
    o << line;
    sum.table = o.str();
    return sum;
}

}  // namespace shclab
