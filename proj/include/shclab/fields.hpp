#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "shclab/geometry.hpp"

namespace shclab {

/// Nonnegative function with bounded support, the target of Q_f.
struct ScalarField {
    std::string name;
    int dim = 2;
    std::function<double(const double*)> value;
    BoundingBox support;     // f vanishes outside
    double integral = kNaN;  // int f, when known
    double grad_l1 = kNaN;   // int |grad f|, when known
};

std::shared_ptr<const ScalarField> indicator_field(const DomainSpec& domain);

/// f(x) = (1 - |x|^2)^2 on the unit ball, zero outside.
std::shared_ptr<const ScalarField> quartic_bump(int dim = 2);

/// f = sum_i c_i 1_{Omega_i}.
std::shared_ptr<const ScalarField> step_field(const std::vector<std::pair<double, DomainSpec>>& levels);

}  // namespace shclab
