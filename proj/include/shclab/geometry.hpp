#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shclab/rng.hpp"

namespace shclab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoundingBox {
    std::vector<double> lo, hi;
    double volume() const;
};

/// Omega = {phi > 0} with gradient access and regularity metadata.
struct LevelSetField {
    std::string name;
    int dim = 2;
    std::function<double(const double*)> value;
    std::function<void(const double*, double*)> gradient;
    double holder_kappa = 1.0;
    double holder_L = kNaN;
    BoundingBox box;

    // Filled by analyze_level_set().
    double grad_inf_boundary = kNaN;
    double grad_sup_boundary = kNaN;
    double grad_bound = kNaN;  // sup |grad phi| over the box, padded
    double max_depth = kNaN;   // sup of phi/|grad phi| over sampled interior points
    double volume = kNaN;
    double volume_error = kNaN;
    double perimeter = kNaN;
    double perimeter_error = kNaN;
};

/// Computes volume, perimeter and gradient bounds of a level-set field.
/// Throws if |grad phi| vanishes on the zero contour.
std::shared_ptr<const LevelSetField> analyze_level_set(LevelSetField field);

enum class DomainKind { ball, annulus, ellipsoid, interval, level_set };

struct DomainSpec {
    DomainKind kind = DomainKind::ball;
    int dim = 2;
    std::vector<double> center;
    double radius = 1.0;        // ball, annulus (outer)
    double inner_radius = 0.0;  // annulus
    std::vector<double> axes;   // ellipsoid semi-axes
    std::vector<double> rotation;  // ellipsoid, row-major; world = center + R * local
    std::shared_ptr<const LevelSetField> field;
};

DomainSpec make_ball(int dim, double radius, std::vector<double> center = {});
DomainSpec make_annulus(int dim, double inner, double outer, std::vector<double> center = {});
DomainSpec make_ellipsoid(std::vector<double> axes, std::vector<double> rotation = {},
                          std::vector<double> center = {});
/// Planar ellipse rotated by `angle` radians.
DomainSpec make_ellipse(double a, double b, double angle = 0.0, std::vector<double> center = {});
DomainSpec make_interval(double a, double b);
DomainSpec make_level_set(std::shared_ptr<const LevelSetField> field);
/// x -> c x.
DomainSpec dilate(const DomainSpec& domain, double c);

std::string describe(const DomainSpec& domain);
const char* kind_name(DomainKind kind);

bool contains(const DomainSpec& domain, std::span<const double> x);
double volume(const DomainSpec& domain);
double perimeter(const DomainSpec& domain);
double signed_distance(const DomainSpec& domain, std::span<const double> x);
/// Largest r with a smooth signed distance on {|delta| < r}.
double reach(const DomainSpec& domain);
BoundingBox bounding_box(const DomainSpec& domain);

/// Unchecked versions used by the simulation kernels.
bool contains_raw(const DomainSpec& domain, const double* x);
double signed_distance_raw(const DomainSpec& domain, const double* x, double* grad = nullptr);
/// Signed distance where available, phi/|grad phi| for level sets.
double distance_proxy(const DomainSpec& domain, const double* x);

/// phi = g(delta) with g the identity on [-r/2, r/2], a monotone cubic blend on
/// [r/2, r] and constant beyond, so |grad phi| = 1 on the shell and phi in C^{1,1}.
std::shared_ptr<const LevelSetField> clamped_level_set(const DomainSpec& domain, double r,
                                                       double r0_margin = 0.1);
/// The blend g and its derivative.
double clamp_blend(double s, double r, double* derivative = nullptr);

struct UniformSample {
    std::vector<double> points;  // n * dim
    double acceptance = 1.0;
};
UniformSample sample_uniform(const DomainSpec& domain, std::size_t n, RngStream& rng);

struct WeightedSample {
    std::vector<double> points;  // n * dim
    std::vector<double> weights;
    std::vector<int> stratum;
    double shell_volume = 0.0;
    double interior_volume = 0.0;
};
/// Shell {0 < delta < width} plus interior stratum, weighted so that sums of
/// weights times f are unbiased for the integral of f over Omega.
WeightedSample boundary_shell_sample(const DomainSpec& domain, double width, std::size_t n,
                                     RngStream& rng, double interior_fraction = 0.1);

/// Depth strata of a domain: [0, w/4^{m-1}), ..., [w/4, w) and [w, inf).
/// Analytic kinds sample exactly in each band of (pseudo-)depth; level sets use
/// grid cells classified against the field, so strata volumes are exact either way.
class StartSampler {
  public:
    StartSampler(const DomainSpec& domain, double width, int depth_strata = 1);
    /// A single stratum covering the whole domain (rejection from the box).
    static StartSampler uniform(const DomainSpec& domain);

    int size() const { return static_cast<int>(volumes_.size()); }
    double volume(int j) const { return volumes_[j]; }
    bool is_interior(int j) const { return j == size() - 1 && has_interior_; }
    double width() const { return width_; }
    /// Draws a start point in stratum j; may lie outside Omega for level-set shells.
    void sample(int j, RngStream& rng, double* x) const;

  private:
    StartSampler() = default;
    void sample_band(double d_lo, double d_hi, RngStream& rng, double* x) const;
    double band_volume(double d_lo, double d_hi) const;

    DomainSpec domain_;
    double width_ = 0.0;
    bool has_interior_ = false;
    bool uniform_ = false;
    std::vector<double> lo_, hi_;  // depth band per stratum
    std::vector<double> volumes_;
    // level-set cells
    std::vector<double> origin_;
    double cell_ = 0.0;
    std::vector<std::vector<std::uint32_t>> cells_;  // per stratum, packed cell indices
    int cells_per_dim_ = 0;
};

/// Maximal depth used to clamp automatic shell widths.
double max_depth(const DomainSpec& domain);

}  // namespace shclab
