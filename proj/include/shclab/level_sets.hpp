#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shclab/geometry.hpp"

namespace shclab {

/// phi(x) = 1 - |x|^2 - c |x - x0|^{1+kappa}: a disk with a C^{1,kappa}
/// distortion concentrated at the boundary point x0.
std::shared_ptr<const LevelSetField> distorted_disk(double c = 0.1, double kappa = 0.5,
                                                    std::vector<double> x0 = {1.0, 0.0});

/// Clamped signed distance of the ball of radius R centred at 0.
std::shared_ptr<const LevelSetField> clamped_ball(int dim, double R, double r);

/// Builds a shipped field from "name(key=value, ...)", e.g. "clamped_ball(R=1, r=0.2)".
std::shared_ptr<const LevelSetField> level_set_by_name(const std::string& spec);

/// One line per shipped field with its parameters.
std::vector<std::string> level_set_library();

}  // namespace shclab
