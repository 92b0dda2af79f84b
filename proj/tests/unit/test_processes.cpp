#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "shclab/estimators.hpp"
#include "shclab/fbm.hpp"
#include "shclab/processes.hpp"
#include "shclab/special.hpp"

using namespace shclab;

namespace {

struct Mean {
    double n = 0, s = 0, ss = 0;
    void add(double x) {
        n += 1;
        s += x;
        ss += x * x;
    }
    double mean() const { return s / n; }
    double var() const { return (ss - s * s / n) / (n - 1); }
    double se() const { return std::sqrt(var() / n); }
};

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / std::numbers::pi; }

}  // namespace

TEST_SUITE("processes") {

TEST_CASE("stable increments") {
    RngStream r(1, StreamTag::user, 0);
    Mean g;
    double x;
    for (int i = 0; i < 1000000; ++i) {
        sample_stable_increment(2.0, 0.5, 1, r, &x);
        g.add(x);
    }
    CHECK(g.var() == doctest::Approx(1.0).epsilon(0.01));

    const int n = 200000;
    double in = 0;
    for (int i = 0; i < n; ++i) {
        sample_stable_increment(1.0, 1.0, 1, r, &x);
        in += std::abs(x) <= 1.0;
    }
    CHECK(std::abs(in / n - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("CMS and subordination agree in law") {
    RngStream a(2, StreamTag::user, 0), b(2, StreamTag::user, 1);
    std::vector<double> x(100000), y(100000);
    for (auto& v : x) sample_stable_increment(1.5, 1.0, 1, a, &v);
    for (auto& v : y) v = sample_stable_1d_subordinated(1.5, 1.0, b);
    CHECK(ks_two_sample(x, y).p_value > 0.01);
}

TEST_CASE("Cauchy sampler matches the arctan law") {
    RngStream a(3, StreamTag::user, 0);
    std::vector<double> x(50000);
    for (auto& v : x) sample_stable_increment(1.0, 1.0, 1, a, &v);
    CHECK(ks_one_sample(x, cauchy_cdf).p_value > 0.01);
}

TEST_CASE("stable scaling") {
    RngStream a(4, StreamTag::user, 0), b(4, StreamTag::user, 1);
    std::vector<double> x(50000), y(50000);
    const double t = 0.01;
    for (auto& v : x) {
        sample_stable_increment(1.5, t, 1, a, &v);
        v /= std::pow(t, 1.0 / 1.5);
    }
    for (auto& v : y) sample_stable_increment(1.5, 1.0, 1, b, &v);
    CHECK(ks_two_sample(x, y).p_value > 0.01);
}

TEST_CASE("brownian endpoint variance") {
    RngStream r(5, StreamTag::user, 0);
    const auto spec = ProcessSpec::brownian(2);
    PathSampler s(spec, 1.0, 1);
    auto ws = s.make_workspace();
    std::vector<double> pos(4);
    Mean m;
    for (int i = 0; i < 1000000; ++i) {
        s.sample(r, ws, pos.data());
        m.add(pos[2] * pos[2] + pos[3] * pos[3]);
    }
    CHECK(m.mean() == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("fbm with H = 1/2 is standard brownian motion") {
    const auto spec = ProcessSpec::fbm(1, 0.5);
    PathSampler s(spec, 1.0, 16);
    auto ws = s.make_workspace();
    std::vector<double> pos(17);
    Mean m;
    for (std::size_t i = 0; i < 200000; ++i) {
        RngStream r(6, StreamTag::process, i);
        s.sample(r, ws, pos.data());
        m.add(pos[16] * pos[16]);
    }
    CHECK(m.mean() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fbm covariance") {
    CHECK(FbmGenerator::autocovariance(0, 0.75) == doctest::Approx(1.0));
    CHECK(FbmGenerator::autocovariance(1, 0.75) == doctest::Approx(0.5 * (std::pow(2.0, 1.5) - 2.0)));
    FbmGenerator g(64, 0.75);
    CHECK_FALSE(g.uses_cholesky());
    std::vector<std::complex<double>> in(128), out(128);
    std::vector<double> a(64), b(64);
    Mean v, c, cross;
    for (std::size_t i = 0; i < 100000; ++i) {
        RngStream r(7, StreamTag::process, i);
        g.sample_pair(r, in, out, a.data(), b.data());
        v.add(a[10] * a[10]);
        c.add(a[10] * a[11]);
        cross.add(a[10] * b[10]);
    }
    CHECK(v.mean() == doctest::Approx(1.0).epsilon(0.02));
    CHECK(c.mean() == doctest::Approx(0.4142135).epsilon(0.03));
    CHECK(std::abs(cross.mean()) < 4.0 * cross.se());
}

TEST_CASE("grid refinement never lowers the sup") {
    const auto spec = ProcessSpec::stable(1, 1.5);
    for (std::uint64_t i = 0; i < 50; ++i) {
        RngStream r(8, StreamTag::process, i);
        const PathGrid p = sample_path(spec, 2.0, 4096, r);
        double coarse = 0.0;
        for (std::size_t k = 0; k < p.size(); k += 64) coarse = std::max(coarse, p.at(k)[0]);
        REQUIRE(p.sup_first_coord >= coarse);
        REQUIRE(p.times.back() == doctest::Approx(2.0));
    }
}

TEST_CASE("running sup") {
    PathGrid zero;
    zero.dim = 1;
    zero.times = {0.0, 0.5, 1.0};
    zero.positions = {0.0, 0.0, 0.0};
    zero.update_sups();
    CHECK(running_sup_first_coordinate(zero) == 0.0);

    const auto spec = ProcessSpec::brownian(1, BrownianScale::standard);
    Mean exact, grid;
    for (std::uint64_t i = 0; i < 1000000; ++i) {
        RngStream r(9, StreamTag::process, i);
        const PathGrid p = sample_path(spec, 1.0, 1, r);
        RngStream u(9, StreamTag::bridge, i);
        exact.add(bridge_corrected_sup(p, 1.0, u));
    }
    CHECK(exact.mean() == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(0.005));
    for (std::uint64_t i = 0; i < 20000; ++i) {
        RngStream r(10, StreamTag::process, i);
        grid.add(running_sup_first_coordinate(sample_path(spec, 1.0, 64, r)));
    }
    CHECK(grid.mean() + 3.0 * grid.se() < std::sqrt(2.0 / std::numbers::pi));
}

TEST_CASE("subordinator Laplace transforms") {
    RngStream r(11, StreamTag::user, 0);
    Mean st, te;
    const auto stable = SubordinatorSpec::stable(0.5);
    const auto tempered = SubordinatorSpec::tempered(0.5, 1.0);
    for (int i = 0; i < 1000000; ++i) st.add(std::exp(-sample_subordinator_increment(stable, 1.0, r)));
    for (int i = 0; i < 200000; ++i) te.add(std::exp(-sample_subordinator_increment(tempered, 1.0, r)));
    CHECK(std::abs(st.mean() - std::exp(-1.0)) < 3.0 * st.se());
    CHECK(std::abs(te.mean() - std::exp(-(std::sqrt(2.0) - 1.0))) < 3.0 * te.se());

    const PathGrid d = sample_subordinator_path(SubordinatorSpec::drift_poisson(2.0), 1.0, 10, r);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(d.at(k)[0] == doctest::Approx(2.0 * d.times[k]));
}

TEST_CASE("Laplace exponents are Bernstein functions") {
    for (const auto& s : {SubordinatorSpec::stable(0.3), SubordinatorSpec::tempered(0.7, 2.0),
                          SubordinatorSpec::drift_poisson(0.5, 3.0, 0.2)}) {
        CHECK(s.laplace_exponent(0.0) == 0.0);
        double prev = 0.0, prev_slope = 1e300;
        for (int k = 1; k <= 200; ++k) {
            const double l = 0.05 * k, v = s.laplace_exponent(l);
            REQUIRE(v > prev);
            const double slope = (v - prev) / 0.05;
            REQUIRE(slope <= prev_slope * (1.0 + 1e-12));
            prev = v;
            prev_slope = slope;
        }
    }
    CHECK(SubordinatorSpec::stable(0.5).unbounded());
    CHECK_FALSE(SubordinatorSpec::drift_poisson(0.0, 1.0).unbounded());
}

TEST_CASE("inverse clock") {
    PathGrid lin;
    lin.dim = 1;
    for (int k = 0; k <= 100; ++k) {
        lin.times.push_back(0.01 * k);
        lin.positions.push_back(0.02 * k);
    }
    CHECK(std::abs(inverse_clock(lin, 1.0) - 0.5) <= 0.01 + 1e-12);

    RngStream r(12, StreamTag::user, 0);
    const auto sub = SubordinatorSpec::stable(0.5);
    const PathGrid p = sample_subordinator_path(sub, 5.0, 5000, r);
    double prev = 0.0;
    for (double t = 0.0; t < p.at(p.size() - 1)[0]; t += 0.01) {
        const double e = inverse_clock(p, t);
        REQUIRE(e >= prev);
        prev = e;
    }

    Mean m;
    for (std::uint64_t i = 0; i < 30000; ++i) {
        RngStream q(13, StreamTag::clock, i);
        m.add(sample_inverse_subordinator(sub, 1.0, 1e-3, q));
    }
    CHECK(m.mean() == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(0.02));
}

TEST_CASE("clock paths are nondecreasing from zero") {
    for (const auto& c : {ClockSpec::inverse(SubordinatorSpec::stable(0.5)), ClockSpec::power(0.5),
                          ClockSpec::lamperti(SubordinatorSpec::drift_poisson(0.5, 1.0, 0.5), 0.5, 1e-2)}) {
        std::vector<double> u(65);
        for (std::uint64_t i = 0; i < 50; ++i) {
            RngStream r(14, StreamTag::clock, i);
            sample_clock(c, 1.0, 64, r, u.data());
            REQUIRE(u[0] == 0.0);
            for (int k = 1; k <= 64; ++k) REQUIRE(u[k] >= u[k - 1]);
        }
    }
}

TEST_CASE("Lamperti process with a pure drift") {
    RngStream r(15, StreamTag::user, 0);
    const PathGrid p = lamperti_xi(SubordinatorSpec::drift_poisson(0.5), 0.5, 1.0, 1.0, 100, r);
    // (1 + beta b t)^{1/beta}
    CHECK(p.at(p.size() - 1)[0] == doctest::Approx(1.5625).epsilon(2e-3));
    for (std::size_t k = 1; k < p.size(); ++k) {
        REQUIRE(p.at(k)[0] >= p.at(k - 1)[0]);
        REQUIRE(p.at(k)[0] >= 1.0);
    }
}

TEST_CASE("Lamperti self-similarity") {
    const auto sub = SubordinatorSpec::drift_poisson(0.5, 1.0, 0.5);
    const double beta = 0.5, x0 = 0.01, c = 3.0, t = 1.0;
    std::vector<double> a(10000), b(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        RngStream r(16, StreamTag::user, i), s(17, StreamTag::user, i);
        const PathGrid pa = lamperti_xi(sub, beta, x0, t * std::pow(c, -beta), 16, r);
        const PathGrid pb = lamperti_xi(sub, beta, c * x0, t, 16, s);
        a[i] = c * pa.at(pa.size() - 1)[0];
        b[i] = pb.at(pb.size() - 1)[0];
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("identity clock reproduces the stable law") {
    const auto tc = ProcessSpec::time_changed(1, 1.5, ClockSpec::power(1.0));
    const auto st = ProcessSpec::stable(1, 1.5);
    std::vector<double> a(30000), b(30000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        RngStream r(18, StreamTag::process, i), s(19, StreamTag::process, i);
        const PathGrid p = sample_path(tc, 1.0, 4, r), q = sample_path(st, 1.0, 4, s);
        a[i] = p.at(4)[0];
        b[i] = q.at(4)[0];
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("power clock self-similarity") {
    const double alpha = 1.5, beta = 0.5, c = 2.0, t = 1.0;
    const auto spec = ProcessSpec::time_changed(1, alpha, ClockSpec::power(beta));
    std::vector<double> a(30000), b(30000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        RngStream r(20, StreamTag::process, i), s(21, StreamTag::process, i);
        a[i] = c * sample_path(spec, t * std::pow(c, -alpha / beta), 2, r).at(2)[0];
        b[i] = sample_path(spec, t, 2, s).at(2)[0];
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("inverse-stable clock gives the product form of the sup mean") {
    // E[sup Y_1] E[E_1^{1/2}] for a variance-2 brownian Y
    const auto spec = ProcessSpec::time_changed(1, 2.0, ClockSpec::inverse(SubordinatorSpec::stable(0.5)));
    McConfig cfg;
    cfg.n_paths = 40000;
    cfg.n_steps = 1024;
    cfg.seed = 22;
    const Estimate fine = estimate_sup_moment(spec, 1.0, 1.0, cfg);
    cfg.n_steps = 256;
    const Estimate coarse = estimate_sup_moment(spec, 1.0, 1.0, cfg);
    // grid bias of order n^{-1/2}: one Richardson step
    const double rich = fine.value + (fine.value - coarse.value);
    const double expect = 2.0 / std::sqrt(std::numbers::pi) * std::tgamma(1.5) / std::tgamma(1.25);
    CHECK(rich == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("isotropy of the planar stable process") {
    const auto spec = ProcessSpec::stable(2, 1.5);
    const int n = 100000;
    std::vector<std::vector<double>> proj(5, std::vector<double>(n));
    const double ang[5] = {0.0, 0.7, 1.9, 3.1, 4.4};
    double x[2];
    for (int i = 0; i < n; ++i) {
        RngStream r(23, StreamTag::process, i);
        sample_stable_increment(1.5, 1.0, 2, r, x);
        for (int k = 0; k < 5; ++k) proj[k][i] = std::cos(ang[k]) * x[0] + std::sin(ang[k]) * x[1];
    }
    for (int k = 1; k < 5; ++k) CHECK(ks_two_sample(proj[0], proj[k]).p_value > 0.01);
}

TEST_CASE("symmetry: first coordinate has mean zero") {
    for (const auto& spec : {ProcessSpec::brownian(2), ProcessSpec::fbm(2, 0.75),
                             ProcessSpec::time_changed(2, 2.0, ClockSpec::inverse(SubordinatorSpec::stable(0.5)))}) {
        Mean m;
        for (std::uint64_t i = 0; i < 20000; ++i) {
            RngStream r(24, StreamTag::process, i);
            m.add(sample_path(spec, 1.0, 8, r).at(8)[0]);
        }
        CHECK(std::abs(m.mean()) < 3.0 * m.se());
    }
}

TEST_CASE("conditioned Cauchy skeleton keeps its largest jump in the band") {
    const double dt = 1e-3;
    std::vector<double> pos(65);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        RngStream r(25, StreamTag::process, i);
        sample_cauchy_conditioned(dt, 64, 0.01, 0.04, r, pos.data());
        double big = 0.0;
        for (int k = 1; k <= 64; ++k) big = std::max(big, std::abs(pos[k] - pos[k - 1]));
        REQUIRE(big >= 0.01);
        REQUIRE(big < 0.04);
    }
    CHECK(cauchy_tail(1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("bridge helpers") {
    CHECK(bridge_max(0.0, 0.0, 1.0, std::exp(-0.5)) == doctest::Approx(0.5));
    CHECK(bridge_max(1.0, 2.0, 1e-300, 0.5) == doctest::Approx(2.0));
    CHECK(bridge_survival(1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-2.0)));
}

TEST_CASE("spec validation") {
    CHECK_THROWS(ProcessSpec::stable(1, 2.5).validate());
    CHECK_THROWS(ProcessSpec::fbm(1, 1.0).validate());
    CHECK_THROWS(ProcessSpec::brownian(0).validate());
    CHECK_NOTHROW(ProcessSpec::time_changed(2, 1.8, ClockSpec::inverse(SubordinatorSpec::stable(0.5))).validate());
}

}
