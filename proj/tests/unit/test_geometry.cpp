#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "shclab/geometry.hpp"
#include "shclab/level_sets.hpp"
#include "shclab/rng.hpp"

using namespace shclab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("geometry") {

TEST_CASE("contains") {
    const DomainSpec disk = make_ball(2, 1.0);
    CHECK(contains(disk, std::vector<double>{0.0, 0.0}));
    CHECK_FALSE(contains(disk, std::vector<double>{1.0, 0.0}));
    const DomainSpec clamped = make_level_set(clamped_level_set(disk, 0.2));
    CHECK(contains(clamped, std::vector<double>{0.5, 0.0}));
}

TEST_CASE("volume and perimeter") {
    CHECK(volume(make_ball(2, 1.0)) == doctest::Approx(kPi));
    CHECK(volume(make_interval(0.0, 1.0)) == doctest::Approx(1.0));
    CHECK(volume(make_ellipse(2.0, 1.0)) == doctest::Approx(2.0 * kPi));
    CHECK(perimeter(make_ball(2, 1.0)) == doctest::Approx(2.0 * kPi));
    CHECK(perimeter(make_interval(0.0, 1.0)) == doctest::Approx(2.0));
    CHECK(perimeter(make_ellipse(2.0, 1.0)) == doctest::Approx(9.6884).epsilon(1e-4));
    CHECK(volume(make_annulus(2, 0.5, 1.0)) == doctest::Approx(0.75 * kPi));
    CHECK(perimeter(make_annulus(2, 0.5, 1.0)) == doctest::Approx(3.0 * kPi));
    CHECK(volume(make_ball(3, 1.0)) == doctest::Approx(4.0 * kPi / 3.0));
}

TEST_CASE("rotated ellipse keeps volume and perimeter") {
    const DomainSpec a = make_ellipse(2.0, 1.0), b = make_ellipse(2.0, 1.0, kPi / 6.0, {0.3, -0.2});
    CHECK(volume(b) == doctest::Approx(volume(a)));
    CHECK(perimeter(b) == doctest::Approx(perimeter(a)));
}

TEST_CASE("signed distance") {
    const DomainSpec disk = make_ball(2, 1.0);
    CHECK(signed_distance(disk, std::vector<double>{0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(signed_distance(disk, std::vector<double>{2.0, 0.0}) == doctest::Approx(-1.0));
    CHECK(signed_distance(make_interval(0.0, 1.0), std::vector<double>{0.3}) == doctest::Approx(0.3));
    // ellipse: nearest point on the minor axis end
    CHECK(signed_distance(make_ellipse(2.0, 1.0), std::vector<double>{0.0, 0.5}) == doctest::Approx(0.5));
}

TEST_CASE("signed distance is 1-Lipschitz") {
    RngStream r(11, StreamTag::user, 0);
    for (const DomainSpec& d : {make_ball(2, 1.0), make_ellipse(2.0, 1.0, 0.4), make_annulus(2, 0.4, 1.0)}) {
        for (int i = 0; i < 2000; ++i) {
            std::vector<double> x{r.uniform(-2.5, 2.5), r.uniform(-2.5, 2.5)}, y{r.uniform(-2.5, 2.5), r.uniform(-2.5, 2.5)};
            const double dist = std::hypot(x[0] - y[0], x[1] - y[1]);
            REQUIRE(std::abs(signed_distance(d, x) - signed_distance(d, y)) <= dist * (1.0 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("clamped level set") {
    const auto f = clamped_level_set(make_ball(2, 1.0), 0.2);
    const double origin[2] = {0.0, 0.0}, shell[2] = {0.95, 0.0}, outside[2] = {1.5, 0.0};
    CHECK(f->value(origin) == doctest::Approx(0.2));
    CHECK(f->value(shell) == doctest::Approx(0.05));
    double g[2];
    f->gradient(shell, g);
    CHECK(std::hypot(g[0], g[1]) == doctest::Approx(1.0));
    CHECK(f->value(outside) == doctest::Approx(-0.2));
}

TEST_CASE("clamped level set probes") {
    const DomainSpec disk = make_ball(2, 1.0);
    const auto f = clamped_level_set(disk, 0.2);
    RngStream r(12, StreamTag::user, 0);
    const double h = 1e-6;
    for (int i = 0; i < 10000; ++i) {
        double x[2] = {r.uniform(-1.5, 1.5), r.uniform(-1.5, 1.5)};
        const double delta = signed_distance_raw(disk, x);
        REQUIRE((f->value(x) > 0.0) == contains_raw(disk, x));
        if (std::abs(delta) < 0.1) {
            double gx, gy;
            double p[2] = {x[0] + h, x[1]}, m[2] = {x[0] - h, x[1]};
            gx = (f->value(p) - f->value(m)) / (2 * h);
            p[0] = x[0], p[1] = x[1] + h, m[0] = x[0], m[1] = x[1] - h;
            gy = (f->value(p) - f->value(m)) / (2 * h);
            const double n = std::hypot(gx, gy);
            REQUIRE(n >= 0.999);
            REQUIRE(n <= 1.001);
        }
    }
}

TEST_CASE("level-set analysis of the clamped ball") {
    const auto f = level_set_by_name("clamped_ball(R=1, r=0.2)");
    CHECK(f->volume == doctest::Approx(kPi).epsilon(2e-3));
    CHECK(f->perimeter == doctest::Approx(2.0 * kPi).epsilon(2e-3));
    CHECK(f->grad_inf_boundary == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(f->grad_sup_boundary == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("distorted disk has gradient spread on the boundary") {
    const auto f = distorted_disk(0.1, 0.5);
    CHECK(f->grad_sup_boundary > f->grad_inf_boundary);
    CHECK(f->perimeter < 2.0 * kPi);
    CHECK(f->perimeter > 0.9 * 2.0 * kPi);
}

TEST_CASE("sample_uniform") {
    RngStream r(13, StreamTag::user, 0);
    const std::size_t n = 100000;
    const UniformSample disk = sample_uniform(make_ball(2, 1.0), n, r);
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::hypot(disk.points[2 * i], disk.points[2 * i + 1]);
        s += v;
        ss += v * v;
    }
    const double mean = s / n, se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(mean - 2.0 / 3.0) < 3.0 * se);

    const UniformSample iv = sample_uniform(make_interval(0.0, 1.0), 10, r);
    REQUIRE(iv.points.size() == 10);
    for (double x : iv.points) CHECK((x > 0.0 && x < 1.0));

    const UniformSample ball = sample_uniform(make_ball(3, 1.0), n, r);
    double inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = ball.points.data() + 3 * i;
        inside += (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] < 0.25) ? 1 : 0;
    }
    const double frac = inside / n;
    CHECK(std::abs(frac - 0.125) < 3.0 * std::sqrt(0.125 * 0.875 / n));
}

TEST_CASE("boundary shell sample") {
    RngStream r(14, StreamTag::user, 0);
    const WeightedSample disk = boundary_shell_sample(make_ball(2, 1.0), 0.1, 50000, r);
    CHECK(disk.shell_volume == doctest::Approx(kPi * (1.0 - 0.81)));
    double w = 0;
    for (double x : disk.weights) w += x;
    CHECK(w == doctest::Approx(kPi).epsilon(1e-9));
    const WeightedSample iv = boundary_shell_sample(make_interval(0.0, 1.0), 0.1, 1000, r);
    CHECK(iv.shell_volume == doctest::Approx(0.2));
    // unbiased for int |x|^2 over the disk = pi/2
    double s = 0;
    for (std::size_t i = 0; i < disk.weights.size(); ++i) {
        const double* p = disk.points.data() + 2 * i;
        s += disk.weights[i] * (p[0] * p[0] + p[1] * p[1]);
    }
    CHECK(s == doctest::Approx(kPi / 2.0).epsilon(0.02));
}

TEST_CASE("start sampler strata volumes add up") {
    const DomainSpec d = make_ellipse(2.0, 1.0, 0.3);
    const StartSampler s(d, 0.2, 3);
    double v = 0;
    for (int j = 0; j < s.size(); ++j) v += s.volume(j);
    CHECK(v == doctest::Approx(volume(d)).epsilon(1e-9));
    RngStream r(15, StreamTag::user, 0);
    double x[2];
    for (int j = 0; j < s.size(); ++j)
        for (int i = 0; i < 200; ++i) {
            s.sample(j, r, x);
            REQUIRE(contains_raw(d, x));
        }
}

TEST_CASE("degenerate domains are rejected") {
    CHECK_THROWS(make_ball(2, 1e-8));
    CHECK_THROWS(make_interval(1.0, 1.0));
}

}
