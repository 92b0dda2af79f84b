#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shclab/geometry.hpp"
#include "shclab/mollify.hpp"

using namespace shclab;

TEST_SUITE("mollify") {

TEST_CASE("mollifier has unit mass") {
    for (int dim : {1, 2, 3}) {
        const double eps = 0.3;
        const int n = 4000;
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (i + 0.5) * eps / n;
            const double shell = dim == 1 ? 2.0 : (dim == 2 ? 2.0 * std::numbers::pi * r : 4.0 * std::numbers::pi * r * r);
            mass += mollifier(r, eps, dim) * shell * eps / n;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(mollifier(eps, eps, dim) == 0.0);
    }
}

TEST_CASE("mollified variation of the unit disk") {
    CHECK(mollified_variation(make_ball(2, 1.0), 0.02, 0.004) == doctest::Approx(2.0 * std::numbers::pi).epsilon(0.02));
}

TEST_CASE("mollified variation of the unit interval") {
    CHECK(mollified_variation(make_interval(0.0, 1.0), 0.01, 0.001) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("planar dilation doubles the variation") {
    const double a = mollified_variation(make_ellipse(1.0, 0.6), 0.04, 0.008);
    const double b = mollified_variation(dilate(make_ellipse(1.0, 0.6), 2.0), 0.04, 0.008);
    CHECK(b / a == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("mollified indicator integrates to the area") {
    const auto f = mollified_indicator(make_ball(2, 1.0), 0.05, 0.005);
    CHECK(f->integral == doctest::Approx(std::numbers::pi).epsilon(2e-3));
    const double c[2] = {0.0, 0.0}, far[2] = {2.0, 0.0}, edge[2] = {1.0, 0.0};
    CHECK(f->value(c) == doctest::Approx(1.0));
    CHECK(f->value(far) == 0.0);
    CHECK(f->value(edge) == doctest::Approx(0.5).epsilon(0.03));
}

}
