#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shclab/estimators.hpp"
#include "shclab/fields.hpp"
#include "shclab/mollify.hpp"
#include "shclab/special.hpp"

using namespace shclab;

namespace {

constexpr double kPi = std::numbers::pi;

McConfig mc(long n, int steps = 64, std::uint64_t seed = 1) {
    McConfig c;
    c.n_paths = n;
    c.n_steps = steps;
    c.seed = seed;
    return c;
}

double joint(double a, double b) { return std::hypot(a, b); }

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("Q tends to the volume as t -> 0") {
    const DomainSpec disk = make_ball(2, 1.0);
    const Estimate q = estimate_Q(ProcessSpec::stable(2, 1.5), disk, 1e-9, mc(20000));
    CHECK(std::abs(q.value - kPi) <= std::max(3.0 * q.std_error, 1e-4));
    CHECK(estimate_Q(ProcessSpec::brownian(2), disk, 0.0, mc(1000)).value == kPi);
}

TEST_CASE("brownian heat loss from an interval") {
    McConfig c = mc(100000, 16);
    c.bridge_correction = true;
    const double t = 1e-4;
    const Estimate q = estimate_Q(ProcessSpec::brownian(1), make_interval(0.0, 1.0), t, c);
    CHECK(1.0 - q.value == doctest::Approx(4.0 * std::sqrt(t / kPi)).epsilon(0.05));
}

TEST_CASE("nested domains with common starts") {
    McConfig c = mc(20000, 64, 3);
    c.start_region = make_ball(2, 1.0);
    const auto p = ProcessSpec::stable(2, 1.5);
    for (double t : {1e-3, 1e-2}) {
        const Estimate small = estimate_Q(p, make_ball(2, 0.8), t, c);
        const Estimate big = estimate_Q(p, make_ball(2, 1.0), t, c);
        CHECK(small.value <= big.value);
        CHECK(small.value < 0.64 * kPi + 4.0 * small.std_error);
    }
}

TEST_CASE("brownian mu") {
    McConfig c = mc(200000, 8);
    c.bridge_correction = true;
    const double t = 1e-4;
    const Estimate m = estimate_mu(ProcessSpec::brownian(1), t, c);
    CHECK(m.value == doctest::Approx(2.0 * std::sqrt(t / kPi)).epsilon(0.01));
    CHECK(estimate_mu(ProcessSpec::brownian(1), 0.0, c).value == 0.0);
}

TEST_CASE("stable mu follows the skeleton scaling form") {
    // Exact skeleton sup mean at t = 1, rescaled, less the clamp at 1:
    // E[(S - a)^+] ~ 2 c a^{-1/2} with the sup tail c x^{-3/2}.
    const double alpha = 1.5, t = 1e-4;
    const int n = 64;
    const Estimate m = estimate_mu(ProcessSpec::stable(1, alpha), t, mc(400000, n, 5));
    const double a = std::pow(t, -1.0 / alpha);
    const double c = std::tgamma(alpha) * std::sin(kPi * alpha / 2.0) / kPi;
    const double expect = std::pow(t, 1.0 / alpha) * (stable_grid_sup_mean_spitzer(alpha, n) - 2.0 * c / std::sqrt(a));
    CHECK(std::abs(m.value - expect) < 3.0 * m.std_error);
}

TEST_CASE("tail probabilities") {
    const Estimate tiny = estimate_tail(ProcessSpec::brownian(1), 1e-4, 0.1, mc(1000000, 8));
    CHECK(tiny.value < 1e-5);
    CHECK(estimate_tail(ProcessSpec::stable(1, 1.5), 1e-2, kInf, mc(1000)).value == 0.0);
    CHECK_THROWS(estimate_tail(ProcessSpec::brownian(1), 1.0, 0.0, mc(1000)));

    const auto p = ProcessSpec::stable(1, 1.5);
    double prev = kInf;
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const double r = estimate_tail(p, t, 0.25, mc(200000, 64, 7)).value / estimate_mu(p, t, mc(50000, 64, 8)).value;
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("sup moments") {
    McConfig c = mc(200000, 8);
    c.bridge_correction = true;
    CHECK(estimate_sup_moment(ProcessSpec::brownian(1), 1.0, 2.0, c).value == doctest::Approx(2.0).epsilon(0.02));
    CHECK_THROWS_WITH(estimate_sup_moment(ProcessSpec::stable(1, 1.5), 1.0, 1.5, mc(1000)),
                      doctest::Contains("infinite moment"));

    const auto p = ProcessSpec::stable(1, 1.5);
    double prev = kInf;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double r = estimate_sup_moment(p, t, 1.2, mc(50000, 64, 9)).value / estimate_mu(p, t, mc(50000, 64, 9)).value;
        CHECK(r < prev);
        prev = r;
    }
    const Estimate m1 = estimate_sup_moment(p, 0.5, 1.0, mc(20000, 64, 10));
    const Estimate mu = estimate_mu(p, 0.5, mc(20000, 64, 10));
    CHECK(m1.value >= mu.value);
}

TEST_CASE("functional heat content of an indicator is Q") {
    const DomainSpec disk = make_ball(2, 1.0);
    const auto p = ProcessSpec::stable(2, 1.5);
    const double t = 1e-3;
    const Estimate qf = estimate_Qf(p, *indicator_field(disk), t, mc(100000, 64, 11));
    const Estimate q = estimate_Q(p, disk, t, mc(20000, 64, 11));
    CHECK(std::abs(qf.value - q.value) < 2.0 * joint(qf.std_error, q.std_error));
}

TEST_CASE("functional heat content tends to the integral") {
    const auto f = quartic_bump(2);
    const Estimate q = estimate_Qf(ProcessSpec::brownian(2), *f, 1e-10, mc(50000, 8));
    CHECK(q.value == doctest::Approx(kPi / 3.0).epsilon(0.01));
}

TEST_CASE("layer cake for a two-level step function") {
    const DomainSpec in = make_ball(2, 0.5), out = make_ball(2, 1.0);
    const auto f = step_field({{1.0, in}, {1.0, out}});
    const auto p = ProcessSpec::stable(2, 1.5);
    const double t = 1e-2;
    const Estimate qf = estimate_Qf(p, *f, t, mc(100000, 64, 12));
    const Estimate qi = estimate_Q(p, in, t, mc(20000, 64, 13));
    const Estimate qo = estimate_Q(p, out, t, mc(20000, 64, 14));
    CHECK(std::abs(qf.value - qi.value - qo.value) <
          2.0 * std::sqrt(qf.std_error * qf.std_error + qi.std_error * qi.std_error + qo.std_error * qo.std_error));
}

TEST_CASE("mollification does not increase heat loss") {
    const DomainSpec disk = make_ball(2, 1.0);
    const auto p = ProcessSpec::brownian(2);
    const double t = 1e-3;
    const auto f = indicator_field(disk);
    for (double eps : {0.05, 0.1}) {
        const auto fe = mollified_indicator(disk, eps, eps / 5.0);
        const FunctionalRun a = run_functional(p, *fe, t, mc(40000, 32, 15));
        const FunctionalRun b = run_functional(p, *f, t, mc(40000, 32, 15));
        const Estimate ra = a.best().deficit, rb = b.best().deficit;
        CHECK(ra.value <= rb.value + 2.0 * joint(ra.std_error, rb.std_error));
    }
}

TEST_CASE("assumption 1 diagnostic") {
    const std::vector<double> ladder = {1e-2, 1e-3, 1e-4};
    const Assumption1Table bm = assumption1_diagnostic(ProcessSpec::brownian(1), ladder, {0.1, 0.25}, mc(20000, 32));
    for (bool f : bm.monotone) CHECK(f);
    const Assumption1Table st =
        assumption1_diagnostic(ProcessSpec::stable(1, 1.2), ladder, {0.1, 0.25}, mc(100000, 32, 16));
    for (bool f : st.monotone) CHECK(f);
    CHECK(st.ratio.size() == 3);

    const Assumption1Table one = assumption1_diagnostic(ProcessSpec::brownian(1), {1e-2}, {0.1}, mc(1000));
    CHECK(one.monotone.front());
    CHECK_FALSE(one.warnings.empty());
}

TEST_CASE("standard error scales as n^{-1/2}") {
    // light tails: the stable interior stratum makes se itself noisy
    const auto p = ProcessSpec::brownian(2);
    const DomainSpec disk = make_ball(2, 1.0);
    McConfig c = mc(5000, 32, 17);
    c.shell_width = 0.2;
    const double a = estimate_Q(p, disk, 1e-3, c).std_error;
    c.n_paths = 20000;
    c.seed = 18;
    const double b = estimate_Q(p, disk, 1e-3, c).std_error;
    CHECK(a / b > 2.0 / 1.5);
    CHECK(a / b < 2.0 * 1.5);
}

TEST_CASE("Q is monotone in t and bounded by the volume") {
    const auto p = ProcessSpec::stable(2, 1.5);
    const DomainSpec disk = make_ball(2, 1.0);
    McConfig c = mc(20000, 32, 19);
    c.shell_width = 0.5;
    double prev = volume(disk);
    for (double t : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double q = estimate_Q(p, disk, t, c).value;
        CHECK(q <= prev);
        prev = q;
    }
}

TEST_CASE("rotation invariance") {
    const auto p = ProcessSpec::stable(2, 1.5);
    const double t = 1e-3;
    const Estimate a = estimate_Q(p, make_ellipse(1.5, 0.75), t, mc(20000, 64, 20));
    const Estimate b = estimate_Q(p, make_ellipse(1.5, 0.75, kPi / 6.0), t, mc(20000, 64, 21));
    CHECK(std::abs(a.value - b.value) < 3.0 * joint(a.std_error, b.std_error));
}

TEST_CASE("stable scaling law") {
    const DomainSpec disk = make_ball(2, 1.0), big = dilate(disk, 2.0);
    for (double alpha : {1.5, 2.0}) {
        const auto p = alpha == 2.0 ? ProcessSpec::brownian(2) : ProcessSpec::stable(2, alpha);
        const double t = 4e-3;
        const Estimate a = estimate_Q(p, big, t, mc(20000, 64, 22));
        const Estimate b = estimate_Q(p, disk, t * std::pow(2.0, -alpha), mc(20000, 64, 23));
        CHECK(std::abs(a.value - 4.0 * b.value) < 3.0 * joint(a.std_error, 4.0 * b.std_error));
    }
}

TEST_CASE("Cauchy jump stratification agrees with plain sampling and cuts the error") {
    const auto p = ProcessSpec::stable(1, 1.0);
    const DomainSpec iv = make_interval(0.0, 1.0);
    const double t = 1e-4;
    McConfig c = mc(100000, 64, 24);
    const Estimate plain = estimate_Q(p, iv, t, c);
    c.jump_stratification = true;
    const Estimate strat = estimate_Q(p, iv, t, c);
    CHECK(std::abs(plain.value - strat.value) < 3.0 * joint(plain.std_error, strat.std_error));
    CHECK(strat.std_error < 0.1 * plain.std_error);
    CHECK_THROWS(estimate_Q(ProcessSpec::stable(1, 1.5), iv, t, c));
}

TEST_CASE("inverse stable moments") {
    const auto sub = SubordinatorSpec::stable(0.5);
    const auto m = estimate_inverse_moments(sub, 1.0, {0.5, 1.0}, 50000, 1e-3, 25);
    CHECK(m[1].value == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(0.02));
    CHECK(m[0].value == doctest::Approx(std::tgamma(1.5) / std::tgamma(1.25)).epsilon(0.02));
}

TEST_CASE("configuration errors") {
    const auto p = ProcessSpec::brownian(2);
    const DomainSpec disk = make_ball(2, 1.0);
    CHECK_THROWS(estimate_Q(p, disk, 1e-3, mc(50)));
    CHECK_THROWS(estimate_Q(p, disk, 1e-3, mc(1000, 4)));
    McConfig c = mc(1000);
    c.shell_width = 2.0;
    CHECK_THROWS(estimate_Q(p, disk, 1e-3, c));
    CHECK_THROWS(estimate_Q(p, disk, -1.0, mc(1000)));
    CHECK_THROWS(estimate_Q(ProcessSpec::brownian(3), disk, 1e-3, mc(1000)));
}

TEST_CASE("grid check evaluates the same paths twice") {
    McConfig c = mc(20000, 32, 26);
    c.grid_check = true;
    const HeatRun r = run_heat(ProcessSpec::stable(2, 1.5), make_ball(2, 1.0), 1e-3, c);
    REQUIRE(r.fine);
    CHECK(r.fine->n_steps == 64);
    // a finer grid can only see more exits
    CHECK(r.fine->deficit >= r.coarse.deficit);
    CHECK(r.fine->mu >= r.coarse.mu);
}

}
