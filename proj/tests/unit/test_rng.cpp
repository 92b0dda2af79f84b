#include <doctest.h>

#include <cmath>
#include <set>

#include "shclab/rng.hpp"

using namespace shclab;

TEST_SUITE("rng") {

// Known-answer vectors of the Random123 distribution.
TEST_CASE("philox4x32-10 known answers") {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(42, StreamTag::process, 7), b(42, StreamTag::process, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {1ULL, 2ULL})
        for (StreamTag tag : {StreamTag::process, StreamTag::starts, StreamTag::pilot})
            for (std::uint64_t idx : {0ULL, 1ULL, (1ULL << 40)}) firsts.insert(RngStream(seed, tag, idx).next_u64());
    CHECK(firsts.size() == 18);
}

TEST_CASE("uniform stays in the open unit interval with mean 1/2") {
    RngStream r(3, StreamTag::user, 0);
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
    }
    CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal and exponential moments") {
    RngStream r(5, StreamTag::user, 1);
    const int n = 400000;
    double s = 0, ss = 0, e = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        ss += z * z;
        e += r.exponential();
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(ss / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(e / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("splitmix64 reference value") {
    // First output of the reference generator seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

}
