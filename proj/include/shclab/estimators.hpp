#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shclab/fields.hpp"
#include "shclab/geometry.hpp"
#include "shclab/processes.hpp"

namespace shclab {

struct McConfig {
    long n_paths = 100'000;
    int n_steps = 64;
    std::uint64_t seed = 1;
    std::optional<double> shell_width;  // empty: 8 mu(t) from a pilot
    bool stratified = true;
    bool bridge_correction = false;  // brownian only
    int starts_per_path = 4;
    int depth_strata = 3;
    double interior_fraction = 0.1;
    bool jump_stratification = false;  // Cauchy on an interval
    bool grid_check = false;           // also evaluate the same paths on 2 n_steps
    bool serial_reference = false;
    /// Draw starts uniformly from this region instead of the domain
    /// (common start points when comparing nested domains).
    std::optional<DomainSpec> start_region;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    std::string bias_note;
};

/// Everything one set of paths says about a (process, domain, t) triple at
/// one grid resolution.
struct HeatLevel {
    int n_steps = 0;
    long n_paths = 0;
    double deficit = 0.0, deficit_se = 0.0;    // Vol - Q
    double q_direct = 0.0, q_direct_se = 0.0;  // sum of stratum volumes times survival
    double mu = 0.0, mu_se = 0.0;              // E[min(sup X^1, 1)]
    double m = 0.0, m_se = 0.0;                // E[sup X^1]
    double cov_deficit_mu = 0.0, cov_deficit_m = 0.0;
};

struct HeatRun {
    double volume = 0.0;
    double shell_width = kNaN;
    int strata = 1;
    std::string mode;  // "stratified", "uniform", "interval_exact", "jump_stratified"
    HeatLevel coarse;
    std::optional<HeatLevel> fine;  // 2 n_steps on the same paths

    /// The finest level evaluated.
    const HeatLevel& best() const { return fine ? *fine : coarse; }
};

/// Q, mu and the sup mean from one path set; the workhorse behind estimate_Q.
HeatRun run_heat(const ProcessSpec& process, const DomainSpec& domain, double t, const McConfig& cfg);

Estimate estimate_Q(const ProcessSpec& process, const DomainSpec& domain, double t, const McConfig& cfg);
Estimate estimate_mu(const ProcessSpec& process, double t, const McConfig& cfg);
/// P(sup_{s<=t} X^1_s > eps).
Estimate estimate_tail(const ProcessSpec& process, double t, double eps, const McConfig& cfg);
/// E[(sup_{s<=t} X^1_s)^p]; refuses p >= alpha for stable families.
Estimate estimate_sup_moment(const ProcessSpec& process, double t, double p, const McConfig& cfg);

struct FunctionalLevel {
    int n_steps = 0;
    Estimate q;        // Q_f
    Estimate deficit;  // int f - Q_f
    Estimate mu;
    double cov_deficit_mu = 0.0;
};
struct FunctionalRun {
    FunctionalLevel coarse;
    std::optional<FunctionalLevel> fine;  // 2 n_steps on the same paths
    const FunctionalLevel& best() const { return fine ? *fine : coarse; }
};
FunctionalRun run_functional(const ProcessSpec& process, const ScalarField& f, double t, const McConfig& cfg);
Estimate estimate_Qf(const ProcessSpec& process, const ScalarField& f, double t, const McConfig& cfg);

struct Assumption1Table {
    std::vector<double> t_ladder, eps;
    std::vector<std::vector<double>> ratio, ratio_se;  // [t][eps]
    std::vector<double> mu;
    std::vector<bool> monotone;  // per eps
    std::vector<std::string> warnings;
};
Assumption1Table assumption1_diagnostic(const ProcessSpec& process, const std::vector<double>& t_ladder,
                                       const std::vector<double>& eps_list, const McConfig& cfg);

/// E[E_t^q] for each q from n samples of the inverse subordinator on spacing ds.
std::vector<Estimate> estimate_inverse_moments(const SubordinatorSpec& sub, double t,
                                               const std::vector<double>& qs, long n, double ds,
                                               std::uint64_t seed, bool serial_reference = false);

/// Ratio a/b with delta-method standard error.
double ratio_std_error(double a, double a_se, double b, double b_se, double cov);

}  // namespace shclab
