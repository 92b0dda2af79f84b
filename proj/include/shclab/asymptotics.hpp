#pragma once

#include <string>
#include <vector>

#include "shclab/constants.hpp"
#include "shclab/geometry.hpp"
#include "shclab/processes.hpp"

namespace shclab {

enum class NormKind { estimated_mu, reference_mu, estimated_m, clock_scale };

const char* norm_kind_name(NormKind kind);
NormKind parse_norm_kind(const std::string& name);

/// Closed-form normalizer:
///   brownian      2 sqrt(t/pi) (heat) or sqrt(2t/pi) (standard)
///   stable        t^{1/alpha} E[sup Y_1] for alpha in (1, 2], t log(1/t)/pi for alpha = 1
///   fbm           t^H E[sup B^H_1]
///   time_changed  E[sup Y_1] E[U_t^{1/alpha}] for inverse-stable and power clocks
double mu_reference(const ProcessSpec& process, double t, const ConstantsCache& cache);
/// Relative standard error carried by the cached constant behind mu_reference (0 if closed form).
double mu_reference_rel_error(const ProcessSpec& process, const ConstantsCache& cache);

/// Gamma(q+1)/Gamma(q beta+1) t^{q beta}: E[E_t^q] for the inverse beta-stable subordinator.
double inverse_stable_moment(double beta, double q, double t);

/// phi(1/t)^{-1/alpha}: the clock normalizer of a time-changed stable process.
double clock_scale(const ProcessSpec& process, double t);

/// Limit of (Vol - Q)/normalizer as t -> 0.
double predicted_limit(const ProcessSpec& process, const DomainSpec& domain, NormKind norm,
                       const ConstantsCache& cache);
/// Same with the perimeter supplied (functional heat content uses int |grad f|).
double predicted_limit(const ProcessSpec& process, double perimeter, NormKind norm, const ConstantsCache& cache);

enum class FitModel { power, inverse_log };

struct FitSpec {
    FitModel model = FitModel::power;
    double theta = 0.5;
};

/// Default correction model: theta = 1/2 brownian, min(1/alpha, 1 - 1/alpha) stable,
/// H for fbm, beta/alpha time-changed; 1/log(1/t) for the Cauchy process.
FitSpec default_fit(const ProcessSpec& process);

struct Extrapolation {
    double limit = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    double slope = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    FitSpec fit;
    bool fallback = false;  // last point used instead of a fit
    std::string trend;      // "increasing", "decreasing" or "mixed" along decreasing t
    double free_theta = 0.0, free_limit = 0.0;  // free-exponent robustness fit
    std::string note;
};

/// Weighted least squares of ratio = L + a g(t). Needs >= 3 points; with fewer
/// than 4 points or a span under 2 decades the smallest-t point is returned
/// with a trend flag.
Extrapolation extrapolate_ratio(const std::vector<double>& t, const std::vector<double>& ratio,
                                const std::vector<double>& std_error, FitSpec fit = {});

}  // namespace shclab
