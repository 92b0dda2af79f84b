#include "shclab/constants.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "shclab/fbm.hpp"
#include "shclab/kernels.hpp"
#include "shclab/processes.hpp"
#include "shclab/rng.hpp"
#include "shclab/special.hpp"

#ifndef SHCLAB_SOURCE_DIR
#define SHCLAB_SOURCE_DIR "."
#endif

namespace shclab {

namespace {

std::string header() { return "# shclab constants v" + std::to_string(ConstantsCache::kVersion); }

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct MeanAcc {
    double n = 0, s = 0, ss = 0;
    void add(double z) {
        n += 1;
        s += z;
        ss += z * z;
    }
    void merge(const MeanAcc& o) {
        n += o.n;
        s += o.s;
        ss += o.ss;
    }
    double mean() const { return s / n; }
    double se() const {
        const double m = mean();
        return std::sqrt(std::max(ss / n - m * m, 0.0) / (n - 1));
    }
};

// Richardson-combined (grid sup - terminal positive part) of one path.
double richardson_sample(const double* x, int n, double rate_factor) {
    double sup_fine = 0.0, sup_coarse = 0.0, pos = 0.0;
    for (int k = 0; k < n; ++k) {
        pos += x[k];
        if (pos > sup_fine) sup_fine = pos;
        if (k % 2 == 1 && pos > sup_coarse) sup_coarse = pos;
    }
    const double tail = std::max(pos, 0.0);
    const double fine = sup_fine - tail, coarse = sup_coarse - tail;
    return fine + (fine - coarse) / rate_factor;
}

std::string provenance(long n_paths, int n_steps, std::uint64_t seed) {
    return "mc:paths=" + std::to_string(n_paths) + ",steps=" + std::to_string(n_steps) +
           ",seed=" + std::to_string(seed) + ",richardson";
}

void check_steps(long n_paths, int n_steps) {
    if (n_paths < 2) throw std::invalid_argument("oracle needs at least 2 paths");
    if (n_steps < 2 || n_steps % 2 != 0) throw std::invalid_argument("oracle needs an even step count >= 2");
}

}  // namespace

ConstantsCache ConstantsCache::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open constants file " + path);
    ConstantsCache cache;
    cache.source_ = path;
    std::string line;
    if (!std::getline(in, line) || line != header())
        throw std::runtime_error("constants file " + path + " lacks header '" + header() + "'");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ConstantEntry e;
        if (!(ss >> e.name >> e.value >> e.std_error))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed entry");
        std::getline(ss >> std::ws, e.provenance);
        cache.set(std::move(e));
    }
    return cache;
}

ConstantsCache ConstantsCache::load_or_empty(const std::string& path) {
    if (std::ifstream(path)) return load(path);
    ConstantsCache cache;
    cache.source_ = path + " (missing)";
    return cache;
}

std::string ConstantsCache::to_string() const {
    std::string out = header() + "\n";
    for (const auto& e : entries_)
        out += e.name + " " + num(e.value) + " " + num(e.std_error) + " " + e.provenance + "\n";
    return out;
}

void ConstantsCache::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write constants file " + path);
    out << to_string();
}

const ConstantEntry* ConstantsCache::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

const ConstantEntry& ConstantsCache::require(const std::string& name) const {
    if (const ConstantEntry* e = find(name)) return *e;
    throw std::runtime_error("constant " + name + " missing from " + (source_.empty() ? "cache" : source_) +
                             "; regenerate it with `shclab constants`");
}

void ConstantsCache::set(ConstantEntry entry) {
    for (auto& e : entries_)
        if (e.name == entry.name) {
            e = std::move(entry);
            return;
        }
    entries_.push_back(std::move(entry));
}

std::string stable_constant_name(double alpha) { return "stable_sup_mean:alpha=" + short_num(alpha); }
std::string fbm_constant_name(double hurst) { return "fbm_sup_mean:H=" + short_num(hurst); }

std::string default_constants_path() {
    if (const char* env = std::getenv("SHCLAB_CONSTANTS"); env && *env) return env;
    return std::string(SHCLAB_SOURCE_DIR) + "/data/constants.txt";
}

ConstantEntry stable_sup_mean_oracle(double alpha, long n_paths, int n_steps, std::uint64_t seed,
                                     bool serial_reference) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("oracle alpha must lie in (1, 2]");
    check_steps(n_paths, n_steps);
    const double dt = 1.0 / n_steps;
    const double rate_factor = std::pow(2.0, 1.0 / alpha) - 1.0;
    const std::uint64_t key = splitmix64(seed ^ static_cast<std::uint64_t>(alpha * 1e6));
    const MeanAcc acc = reduce_paths<MeanAcc>(
        static_cast<std::size_t>(n_paths), serial_reference, [&] { return std::vector<double>(n_steps); },
        [&](MeanAcc& a, std::vector<double>& x, std::size_t i) {
            RngStream rng(key, StreamTag::oracle, i);
            for (int k = 0; k < n_steps; ++k) sample_stable_increment(alpha, dt, 1, rng, &x[k]);
            a.add(richardson_sample(x.data(), n_steps, rate_factor));
        });
    return {stable_constant_name(alpha), stable_positive_part_mean(alpha) + acc.mean(), acc.se(),
            provenance(n_paths, n_steps, seed)};
}

ConstantEntry fbm_sup_mean_oracle(double hurst, long n_paths, int n_steps, std::uint64_t seed,
                                  bool serial_reference) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("hurst must lie in (0, 1)");
    check_steps(n_paths, n_steps);
    const FbmGenerator gen(n_steps, hurst);
    const double scale = std::pow(1.0 / n_steps, hurst);
    const double rate_factor = std::pow(2.0, hurst) - 1.0;
    const std::uint64_t key = splitmix64(seed ^ static_cast<std::uint64_t>(hurst * 1e6));
    struct Ws {
        std::vector<std::complex<double>> in, out;
        std::vector<double> a, b;
    };
    const long pairs = (n_paths + 1) / 2;
    const MeanAcc acc = reduce_paths<MeanAcc>(
        static_cast<std::size_t>(pairs), serial_reference,
        [&] { return Ws{std::vector<std::complex<double>>(2 * n_steps), std::vector<std::complex<double>>(2 * n_steps),
                        std::vector<double>(n_steps), std::vector<double>(n_steps)}; },
        [&](MeanAcc& m, Ws& ws, std::size_t i) {
            RngStream rng(key, StreamTag::oracle, i);
            gen.sample_pair(rng, ws.in, ws.out, ws.a.data(), ws.b.data());
            for (int k = 0; k < n_steps; ++k) {
                ws.a[k] *= scale;
                ws.b[k] *= scale;
            }
            m.add(richardson_sample(ws.a.data(), n_steps, rate_factor));
            m.add(richardson_sample(ws.b.data(), n_steps, rate_factor));
        });
    const double positive_part = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return {fbm_constant_name(hurst), positive_part + acc.mean(), acc.se(), provenance(2 * pairs, n_steps, seed)};
}

ConstantsCache regenerate_constants(const OracleConfig& cfg) {
    ConstantsCache cache;
    for (double a : cfg.alphas)
        cache.set(stable_sup_mean_oracle(a, cfg.n_paths, cfg.n_steps, cfg.seed, cfg.serial_reference));
    for (double h : cfg.hursts)
        cache.set(fbm_sup_mean_oracle(h, cfg.n_paths, cfg.n_steps, cfg.seed, cfg.serial_reference));
    return cache;
}

}  // namespace shclab
