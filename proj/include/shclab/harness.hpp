#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shclab/asymptotics.hpp"
#include "shclab/constants.hpp"
#include "shclab/estimators.hpp"
#include "shclab/fields.hpp"

namespace shclab {

/// Malformed or inconsistent experiment configuration (exit code 3).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct AcceptanceSpec {
    enum class Check {
        extrapolated,  // fitted limit within tolerance of the target
        last_point,    // smallest-t ratio within tolerance of the target
        band,          // every ratio inside [lo Per, hi (sup|grad phi|/inf|grad phi|) Per]
    };
    Check check = Check::extrapolated;
    std::optional<double> target;  // empty: predicted limit
    double tolerance = 0.05;       // relative
    bool monotone = false;         // ladder must move toward the target
    double band_lo = 0.9, band_hi = 1.1;
};

struct ExperimentConfig {
    std::string name;
    ProcessSpec process;
    std::optional<DomainSpec> domain;
    std::shared_ptr<const ScalarField> field;  // functional heat content when set
    std::vector<double> t_ladder;
    McConfig mc;
    NormKind normalizer = NormKind::estimated_mu;
    std::optional<FitSpec> fit;
    std::optional<AcceptanceSpec> acceptance;
    std::uint64_t config_hash = 0;  // of the canonical config text

    /// Throws ConfigError.
    void validate() const;
    std::string domain_name() const;
};

struct ReportRow {
    double t = 0.0;
    long n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    double q_hat = 0.0, q_se = 0.0;
    double norm_hat = 0.0, norm_se = 0.0;
    double ratio = 0.0, ratio_se = 0.0;
    double runtime_s = 0.0;
};

/// Same paths evaluated on n and 2n steps at the smallest t.
struct BiasCheck {
    double t = 0.0;
    int n_coarse = 0, n_fine = 0;
    double ratio_coarse = 0.0, ratio_fine = 0.0;
    double delta = 0.0, ratio_se = 0.0;
    bool limited = false;
};

enum class Verdict { pass, fail, grid_limited, unchecked };
const char* verdict_name(Verdict v);
int exit_code(Verdict v);

struct ExperimentReport {
    std::string name, family, process, domain;
    NormKind norm = NormKind::estimated_mu;
    double volume = 0.0;
    double perimeter = kNaN;
    double predicted = kNaN;
    double target = kNaN;
    double tolerance = kNaN;  // after widening by the constant's error
    std::vector<ReportRow> rows;
    std::optional<Extrapolation> extrapolation;
    std::optional<BiasCheck> bias;
    Verdict verdict = Verdict::unchecked;
    std::string detail;
    std::vector<std::string> warnings;
    std::uint64_t config_hash = 0, seed = 0;
    std::string version;
    int threads = 1;
    std::string threads_source;  // "default", "flag" or "SHCLAB_THREADS"
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<long> n_paths;
    bool reproducible = false;  // zero runtimes, omit thread count from CSV
    bool verbose = false;       // progress lines on stderr
    std::string threads_source = "default";
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ConstantsCache& cache,
                                const RunOptions& opt = {});

/// The per-experiment CSV with '#' metadata lines.
std::string report_csv(const ExperimentReport& r, bool reproducible);
/// The doubling study.
std::string bias_csv(const ExperimentReport& r);
/// Human-readable summary block.
std::string report_text(const ExperimentReport& r);

struct SuiteConfig {
    std::string name;
    double budget_s = 0.0;
    std::string constants;  // resolved path, empty for the default
    std::vector<ExperimentConfig> experiments;
};

/// YAML parsing; unknown keys are errors.
SuiteConfig parse_suite(const std::string& text, const std::string& base_dir = ".");
SuiteConfig load_suite(const std::string& path);
/// A file holding one experiment at top level.
ExperimentConfig parse_experiment_file(const std::string& path);
ExperimentConfig parse_experiment(const std::string& text);

struct SuiteSummary {
    std::vector<ExperimentReport> reports;
    double runtime_s = 0.0;
    bool over_budget = false;
    int exit_code = 0;
    std::string table;
};

/// Runs every experiment; writes <name>.csv and <name>_bias.csv into out_dir when non-empty.
SuiteSummary run_suite(const SuiteConfig& suite, const ConstantsCache& cache, const RunOptions& opt,
                       const std::string& out_dir);

void write_report_files(const ExperimentReport& r, const std::string& out_dir, bool reproducible);

std::uint64_t fnv1a(const std::string& s);

}  // namespace shclab
