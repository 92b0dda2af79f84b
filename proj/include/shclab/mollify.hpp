#pragma once

#include <memory>

#include "shclab/fields.hpp"
#include "shclab/geometry.hpp"

namespace shclab {

/// rho_eps(x) = c (1 - |x|^2/eps^2)^3 on |x| < eps, mass 1.
double mollifier(double r, double eps, int dim);

/// int |grad (1_Omega * rho_eps)| by grid quadrature with spacing grid_h < eps/4.
/// The gradient is the exact derivative of the discrete convolution, evaluated
/// only in the band where the convolution is not locally constant.
double mollified_variation(const DomainSpec& domain, double epsilon, double grid_h);

/// f_eps = 1_Omega * rho_eps tabulated on a grid (d = 2) with bilinear lookup.
std::shared_ptr<const ScalarField> mollified_indicator(const DomainSpec& domain, double epsilon,
                                                       double grid_h);

}  // namespace shclab
