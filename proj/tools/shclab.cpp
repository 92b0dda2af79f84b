// shclab command line: run / suite / constants / list-families.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "shclab/harness.hpp"
#include "shclab/kernels.hpp"
#include "shclab/level_sets.hpp"

using namespace shclab;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string constants;
    std::uint64_t seed = 0;
    long n_paths = 0;
    int threads = 0;
    bool csv = false;
    bool reproducible = false;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Config file (YAML)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "Directory for <name>.csv and <name>_bias.csv");
    app->add_option("--seed", c.seed, "Override the base seed");
    app->add_option("--n-paths", c.n_paths, "Override paths per ladder point");
    app->add_option("--threads", c.threads, "Worker threads (default: SHCLAB_THREADS, else all cores)");
    app->add_option("--constants", c.constants, "Constants cache (default: shipped data/constants.txt)");
    app->add_flag("--csv", c.csv, "Print the CSV report on stdout instead of the table");
    app->add_flag("--reproducible", c.reproducible, "Zero runtimes and omit the thread count from CSVs");
    app->add_flag("-q,--quiet", c.quiet, "No progress on stderr");
}

// Flag beats environment beats OpenMP default.
std::string setup_threads(int flag) {
    if (flag > 0) {
        set_thread_count(flag);
        return "flag";
    }
    if (const char* env = std::getenv("SHCLAB_THREADS"); env && *env) {
        const int n = std::atoi(env);
        if (n > 0) {
            set_thread_count(n);
            return "SHCLAB_THREADS";
        }
    }
    return "default";
}

RunOptions options(const Common& c) {
    RunOptions o;
    if (c.seed) o.seed = c.seed;
    if (c.n_paths > 0) o.n_paths = c.n_paths;
    o.reproducible = c.reproducible;
    o.verbose = !c.quiet;
    o.threads_source = setup_threads(c.threads);
    return o;
}

int cmd_run(const Common& c) {
    const ExperimentConfig cfg = parse_experiment_file(c.config);
    const RunOptions opt = options(c);
    const ConstantsCache cache = ConstantsCache::load_or_empty(c.constants.empty() ? default_constants_path() : c.constants);
    const ExperimentReport r = run_experiment(cfg, cache, opt);
    if (!c.out.empty()) write_report_files(r, c.out, c.reproducible);
    std::cout << (c.csv ? report_csv(r, c.reproducible) : report_text(r));
    return exit_code(r.verdict);
}

int cmd_suite(const Common& c) {
    const SuiteConfig suite = load_suite(c.config);
    const RunOptions opt = options(c);
    std::string path = c.constants;
    if (path.empty()) path = suite.constants.empty() ? default_constants_path() : suite.constants;
    const ConstantsCache cache = ConstantsCache::load_or_empty(path);
    const SuiteSummary s = run_suite(suite, cache, opt, c.out);
    if (c.csv) {
        for (const auto& r : s.reports) std::cout << report_csv(r, c.reproducible);
    } else {
        for (const auto& r : s.reports) std::cout << report_text(r) << "\n";
        std::cout << s.table;
    }
    return s.exit_code;
}

int cmd_constants(const std::string& out, const OracleConfig& cfg, int threads) {
    setup_threads(threads);
    const ConstantsCache cache = regenerate_constants(cfg);
    const std::string path = out.empty() ? default_constants_path() : out;
    cache.save(path);
    std::cout << cache.to_string() << "written to " << path << "\n";
    return 0;
}

void list_families() {
    std::cout << "process families:\n"
                 "  brownian      dim, scale (heat | standard)\n"
                 "  stable        dim, alpha in (0, 2]\n"
                 "  fbm           dim, hurst in (0, 1)\n"
                 "  time_changed  dim, alpha, clock\n"
                 "clocks:\n"
                 "  inverse       subordinator\n"
                 "  lamperti      subordinator, beta, x0\n"
                 "  power         beta in (0, 1]\n"
                 "subordinators:\n"
                 "  stable                  beta\n"
                 "  tempered_stable         beta, theta\n"
                 "  drift_compound_poisson  drift, rate, jump_mean\n"
                 "domains:\n"
                 "  ball (dim, radius, center), annulus (dim, inner, outer, center),\n"
                 "  ellipse (a, b, angle, center), ellipsoid (axes, center), interval (a, b),\n"
                 "  level_set (field)\n"
                 "level-set fields:\n";
    for (const auto& s : level_set_library()) std::cout << "  " << s << "\n";
    std::cout << "functional fields:\n"
                 "  quartic_bump (dim), indicator (domain), mollified_indicator (domain, epsilon, grid_h)\n"
                 "normalizers:\n"
                 "  estimated_mu, reference_mu, estimated_m, clock_scale\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shclab: Monte Carlo spectral heat content"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SHCLAB_VERSION);

    Common run_opts, suite_opts;
    add_common(app.add_subcommand("run", "Run one experiment file"), run_opts);
    add_common(app.add_subcommand("suite", "Run a suite file and report pass/fail"), suite_opts);

    auto* cons = app.add_subcommand("constants", "Regenerate the Monte Carlo constants cache");
    OracleConfig ocfg;
    std::string cons_out;
    int cons_threads = 0;
    cons->add_option("--out", cons_out, "Cache path (default: shipped data/constants.txt)");
    cons->add_option("--n-paths", ocfg.n_paths, "Paths per constant");
    cons->add_option("--steps", ocfg.n_steps, "Grid steps on [0, 1]");
    cons->add_option("--seed", ocfg.seed, "Seed");
    cons->add_option("--alphas", ocfg.alphas, "Stable indices");
    cons->add_option("--hursts", ocfg.hursts, "Hurst indices");
    cons->add_option("--threads", cons_threads, "Worker threads");

    app.add_subcommand("list-families", "List processes, clocks, domains and fields");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (app.got_subcommand("run")) return cmd_run(run_opts);
        if (app.got_subcommand("suite")) return cmd_suite(suite_opts);
        if (app.got_subcommand("constants")) return cmd_constants(cons_out, ocfg, cons_threads);
        list_families();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
