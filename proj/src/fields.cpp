#include "shclab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shclab/special.hpp"

namespace shclab {

std::shared_ptr<const ScalarField> indicator_field(const DomainSpec& domain) {
    auto f = std::make_shared<ScalarField>();
    auto dom = std::make_shared<DomainSpec>(domain);
    f->name = "indicator(" + describe(domain) + ")";
    f->dim = domain.dim;
    f->value = [dom](const double* x) { return contains_raw(*dom, x) ? 1.0 : 0.0; };
    f->support = bounding_box(domain);
    f->integral = volume(domain);
    f->grad_l1 = perimeter(domain);
    return f;
}

std::shared_ptr<const ScalarField> quartic_bump(int dim) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("quartic bump supports d = 1, 2, 3");
    auto f = std::make_shared<ScalarField>();
    f->name = "quartic_bump(d=" + std::to_string(dim) + ")";
    f->dim = dim;
    f->value = [dim](const double* x) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        const double u = 1.0 - r2;
        return u > 0.0 ? u * u : 0.0;
    };
    f->support.lo.assign(dim, -1.0);
    f->support.hi.assign(dim, 1.0);
    const double area = dim * unit_ball_volume(dim);
    // int_0^1 r^{d-1}(1-r^2)^2 dr = B(d/2, 3)/2
    const double beta = std::tgamma(0.5 * dim) * std::tgamma(3.0) / std::tgamma(0.5 * dim + 3.0);
    f->integral = area * 0.5 * beta;
    f->grad_l1 = 4.0 * area * (1.0 / (dim + 1) - 1.0 / (dim + 3));
    return f;
}

std::shared_ptr<const ScalarField> step_field(const std::vector<std::pair<double, DomainSpec>>& levels) {
    if (levels.empty()) throw std::invalid_argument("step field needs at least one level");
    auto f = std::make_shared<ScalarField>();
    const int dim = levels.front().second.dim;
    auto lv = std::make_shared<std::vector<std::pair<double, DomainSpec>>>(levels);
    f->name = "step(";
    f->dim = dim;
    f->support = bounding_box(levels.front().second);
    f->integral = 0.0;
    for (const auto& [c, d] : levels) {
        if (d.dim != dim) throw std::invalid_argument("step field levels differ in dimension");
        if (!(c >= 0.0)) throw std::invalid_argument("step field weights must be nonnegative");
        const BoundingBox b = bounding_box(d);
        for (int i = 0; i < dim; ++i) {
            f->support.lo[i] = std::min(f->support.lo[i], b.lo[i]);
            f->support.hi[i] = std::max(f->support.hi[i], b.hi[i]);
        }
        f->integral += c * volume(d);
        f->name += (f->name.size() > 5 ? "+" : "") + std::to_string(c).substr(0, 4) + "*" + describe(d);
    }
    f->name += ")";
    f->value = [lv](const double* x) {
        double s = 0.0;
        for (const auto& [c, d] : *lv)
            if (contains_raw(d, x)) s += c;
        return s;
    };
    return f;
}

}  // namespace shclab
