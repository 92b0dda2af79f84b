#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "shclab/rng.hpp"

namespace shclab {

/// Bernstein-function description of a subordinator S.
struct SubordinatorSpec {
    enum class Kind { stable, tempered_stable, drift_compound_poisson };
    Kind kind = Kind::stable;
    double beta = 0.5;   // stable index
    double theta = 0.0;  // tempering
    double drift = 0.0;  // b
    double rate = 0.0;   // compound Poisson intensity
    double jump_mean = 1.0;  // jumps are Exp(mean jump_mean)

    static SubordinatorSpec stable(double beta);
    static SubordinatorSpec tempered(double beta, double theta);
    static SubordinatorSpec drift_poisson(double drift, double rate = 0.0, double jump_mean = 1.0);

    /// phi(lambda) with E[exp(-lambda S_t)] = exp(-t phi(lambda)).
    double laplace_exponent(double lambda) const;
    /// E[S_1] = phi'(0+), infinite for the pure stable case.
    double mean() const;
    /// phi(inf) = inf, i.e. the inverse is continuous.
    bool unbounded() const;
    void validate() const;
    std::string describe() const;
};

struct ClockSpec {
    enum class Kind { inverse_subordinator, lamperti_inverse, deterministic_power };
    Kind kind = Kind::deterministic_power;
    SubordinatorSpec sub;
    double beta = 1.0;  // index of the clock, U_{ct} =d c^beta U_t
    double x0 = 1e-3;   // Lamperti starting point

    static ClockSpec inverse(SubordinatorSpec sub);
    static ClockSpec lamperti(SubordinatorSpec sub, double beta, double x0);
    static ClockSpec power(double beta);

    void validate() const;
    std::string describe() const;
};

enum class Family { brownian, stable, fbm, time_changed };

/// Per-coordinate variance of Brownian motion: 2t (heat) or t (standard).
enum class BrownianScale { heat, standard };

struct ProcessSpec {
    Family family = Family::brownian;
    int dim = 2;
    double alpha = 2.0;  // stable index; inner index for time_changed
    double hurst = 0.5;
    BrownianScale scale = BrownianScale::heat;
    ClockSpec clock;

    static ProcessSpec brownian(int dim, BrownianScale scale = BrownianScale::heat);
    static ProcessSpec stable(int dim, double alpha);
    static ProcessSpec fbm(int dim, double hurst);
    static ProcessSpec time_changed(int dim, double alpha, ClockSpec clock);

    void validate() const;
    std::string describe() const;
    const char* family_name() const;
    /// Variance rate of one Brownian coordinate (brownian family only).
    double brownian_variance() const { return scale == BrownianScale::heat ? 2.0 : 1.0; }
};

/// A sampled skeleton on a strictly increasing time grid.
struct PathGrid {
    int dim = 1;
    std::vector<double> times;
    std::vector<double> positions;  // times.size() * dim
    double sup_first_coord = 0.0;
    double sup_norm_from_start = 0.0;

    std::size_t size() const { return times.size(); }
    const double* at(std::size_t k) const { return positions.data() + k * dim; }
    /// Recomputes the sup accumulators from the stored points.
    void update_sups();
};

/// Symmetric stable variable with E exp(i xi Y) = exp(-|xi|^alpha) (Chambers-Mallows-Stuck).
double sample_stable_1d(double alpha, RngStream& rng);
/// Positive stable variable with E exp(-lambda S) = exp(-lambda^beta), beta in (0, 1] (Kanter).
double sample_positive_stable(double beta, RngStream& rng);

/// Increment over dt of the isotropic stable process with exponent |xi|^alpha.
/// d = 1 uses CMS, d >= 2 subordinates a Gaussian: sqrt(2 S) N with S ~ (alpha/2)-stable.
void sample_stable_increment(double alpha, double dt, int dim, RngStream& rng, double* out);
/// Same law in d = 1 by subordination, used to cross-check CMS.
double sample_stable_1d_subordinated(double alpha, double dt, RngStream& rng);

/// S_{t+dt} - S_t.
double sample_subordinator_increment(const SubordinatorSpec& sub, double dt, RngStream& rng);
PathGrid sample_subordinator_path(const SubordinatorSpec& sub, double t, int n_steps, RngStream& rng);

/// First grid time where the increasing path strictly exceeds level t.
/// Throws if the path never does.
double inverse_clock(const PathGrid& path, double t);
/// E_t by streaming S on a grid of spacing ds until it passes t.
double sample_inverse_subordinator(const SubordinatorSpec& sub, double t, double ds, RngStream& rng,
                                   long max_steps = 100'000'000);

/// xi_t = x0 exp(S_{A(t x0^-beta)}), A the inverse of int_0 exp(beta S_r) dr (left sums).
/// dr <= 0 picks a step from the drift scale.
PathGrid lamperti_xi(const SubordinatorSpec& sub, double beta, double x0, double t, int n_steps,
                     RngStream& rng, double dr = 0.0);
/// zeta_t = inf{s : xi_s > t} for the Lamperti process started at x0.
double lamperti_zeta(const SubordinatorSpec& sub, double beta, double x0, double t, RngStream& rng,
                     double dr = 0.0);

/// Clock values U_{k t/n}, k = 0..n.
void sample_clock(const ClockSpec& clock, double t, int n_steps, RngStream& rng, double* u);
/// Clocks without jumps: power clocks and inverses of strictly increasing subordinators.
bool continuous_clock(const ClockSpec& clock);
/// U_t alone, at the resolution sample_clock uses for n_steps. scratch holds n_steps + 1 values.
double terminal_clock(const ClockSpec& clock, double t, int n_steps, RngStream& rng, double* scratch);

/// Y_{U} for a stable Y given nondecreasing clock values; flat spots reuse the position.
PathGrid time_changed_path(const ProcessSpec& spec, const std::vector<double>& clock_values,
                           double t, RngStream& rng);

class FbmGenerator;

/// Reusable sampler of skeletons on the uniform grid {k t/n}. Positions are
/// relative to the start (row 0 is zero). Thread-safe: each thread owns a Workspace.
///
/// With range_skeleton and a continuous clock, a time-changed process is
/// sampled as Y on the uniform grid of [0, U_t]: same range and endpoint as
/// X on [0, t], which is all that sups and exits see, and a grid error of
/// order n^{-1/alpha} instead of the clock's much slower rate.
class PathSampler {
  public:
    PathSampler(const ProcessSpec& spec, double t, int n_steps, bool range_skeleton = true);
    ~PathSampler();
    PathSampler(const PathSampler&) = delete;
    PathSampler& operator=(const PathSampler&) = delete;

    struct Workspace {
        std::vector<double> clock;
        std::vector<double> scratch;
        std::vector<std::complex<double>> fft_in, fft_out;
    };
    Workspace make_workspace() const;

    /// Fills pos[(n+1) * dim].
    void sample(RngStream& rng, Workspace& ws, double* pos) const;

    const ProcessSpec& spec() const { return spec_; }
    double t() const { return t_; }
    int n_steps() const { return n_; }
    double dt() const { return t_ / n_; }
    bool uses_cholesky() const;

  private:
    ProcessSpec spec_;
    double t_;
    int n_;
    bool range_ = false;
    std::unique_ptr<FbmGenerator> fbm_;
};

/// One skeleton as a PathGrid, the convenience form of PathSampler.
PathGrid sample_path(const ProcessSpec& spec, double t, int n_steps, RngStream& rng);

double running_sup_first_coordinate(const PathGrid& path);
/// Running sup of coordinate 1 with each grid step replaced by an exact
/// Brownian-bridge maximum; variance_rate is sigma^2 per unit time.
double bridge_corrected_sup(const PathGrid& path, double variance_rate, RngStream& rng);

/// Cauchy skeleton in d = 1 (scale dt per step) conditioned on the largest
/// |increment| lying in [a_lo, a_hi). a_lo = 0 and a_hi = inf are allowed.
void sample_cauchy_conditioned(double dt, int n_steps, double a_lo, double a_hi, RngStream& rng,
                               double* pos);
/// P(|C| > a) for a Cauchy variable of scale dt.
double cauchy_tail(double a, double dt);

/// Max of a Brownian bridge from a to b over a step with variance var = sigma^2 dt.
inline double bridge_max(double a, double b, double var, double u) {
    const double diff = b - a;
    return 0.5 * (a + b + std::sqrt(diff * diff - 2.0 * var * std::log(u)));
}

/// Probability that a Brownian bridge between two points at distances da, db > 0
/// from a flat boundary stays on their side.
double bridge_survival(double da, double db, double var);

}  // namespace shclab
