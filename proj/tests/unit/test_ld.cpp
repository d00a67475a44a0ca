#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/graphs.hpp"
#include "mfld/ld_bounds.hpp"
#include "mfld/meanfield.hpp"
#include "oracles/oracles.hpp"

using namespace mfld;

TEST_CASE("L by hand") {
    // Lip 1, D 2, p 1/2, delta 1/2: a = 2 + log 4, b = 4 + 2
    const double a = 2 + std::log(4.0), b = 6.0;
    CHECK(ld_L(1.0, 2.0, 0.5, 0.5) == doctest::Approx(std::pow(a, 2.0 / 3.0) * std::pow(b, 1.0 / 3.0) / 0.5).epsilon(1e-14));
    CHECK(ld_L(0.0, 0.0, 0.5, 1.0) == doctest::Approx(std::pow(std::log(4.0), 2.0 / 3.0) * 0.0).epsilon(1e-14));
    CHECK_THROWS_AS(ld_L(1, 1, 0.5, 0.0), Error);
    CHECK_THROWS_AS(ld_L(1, 1, 1.0, 0.1), Error);
}

TEST_CASE("L is monotone") {
    double prev = 0;
    for (double d = 0.0; d <= 10; d += 0.5) {
        const double v = ld_L(1.0, d, 0.3, 0.2);
        CHECK(v >= prev);
        prev = v;
    }
    prev = kInf;
    for (double delta = 0.05; delta <= 1.0; delta += 0.05) {
        const double v = ld_L(1.0, 3.0, 0.3, delta);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("upper bound formula") {
    const int n = 2000000000;
    const auto u = ld_upper(1.5e9, 0.1, 0.01, n, 0.5, 0.3, 0.5);
    const double L = ld_L(0.1, 0.01, 0.5, 0.5);
    CHECK(u.L == doctest::Approx(L));
    const double factor = 1 - 64 * L / std::cbrt(static_cast<double>(n));
    REQUIRE(factor > 0);
    CHECK(!u.vacuous);
    CHECK(u.bound == doctest::Approx(-1.5e9 * factor));
    const auto v = ld_upper(5.0, 1.0, 3.0, 10, 0.5, 0.3, 0.1);
    CHECK(v.vacuous);
    CHECK(v.bound == 0.0);
    CHECK_THROWS_AS(ld_upper(1.0, 1.0, 1.0, 10, 0.5, 0.3, 0.2), Error);  // delta >= phi / n
}

TEST_CASE("lower bound formula") {
    const auto l = ld_lower(3.0, 1.0, 8, 0.2, 0.5);
    // ratio 1 / (8 * 0.25) = 0.5
    CHECK(l.hypothesis_ok);
    CHECK(l.bound == doctest::Approx(-3.0 * 2 - 2));
    CHECK(!ld_lower(3.0, 1.0, 7, 0.2, 0.5).hypothesis_ok);
}

TEST_CASE("exact tail against direct summation") {
    std::mt19937_64 rng(1);
    const CubeFunction f(5, oracle::random_log_density(5, rng));
    for (double p : {0.2, 0.5}) {
        for (double t : {-1.0, 0.0, 0.1, 0.3}) {
            double s = 0;
            for (Vertex y = 0; y < 32; ++y)
                if (f(y) >= t * 5) {
                    const int k = std::popcount(y);
                    s += std::pow(p, k) * std::pow(1 - p, 5 - k);
                }
            const double got = exact_tail(f, p, t);
            if (s == 0)
                CHECK(std::isinf(got));
            else
                CHECK(got == doctest::Approx(std::log(s)).epsilon(1e-12));
        }
    }
    CHECK(std::isinf(exact_tail(f, 0.5, 100.0)));
}

TEST_CASE("Chernoff sandwich on a small triangle model") {
    // -phi_chernoff(t) >= log P(f >= tn) by Markov, for every t
    const CubeFunction f = model_table(SubgraphModel::triangle(5));
    for (double t : {0.03, 0.05, 0.1, 0.15}) {
        const double tail = exact_tail(f, 0.3, t);
        if (std::isfinite(tail)) CHECK(tail <= -phi_chernoff_lower(f, 0.3, t) + 1e-9);
    }
}

TEST_CASE("report assembles both sides") {
    const auto r = ld_report(40.0, 45.0, 0.2, 0.5, 100, 0.4, 0.3, 0.05);
    CHECK(r.upper_hypothesis_ok);
    CHECK(r.L == doctest::Approx(ld_L(0.2, 0.5, 0.4, 0.05)));
    CHECK(r.lower_bound == doctest::Approx(ld_lower(45.0, 0.2, 100, 0.3, 0.05).bound));
    const auto bad = ld_report(1.0, 2.0, 0.2, 0.5, 100, 0.4, 0.3, 0.05);
    CHECK(!bad.upper_hypothesis_ok);
    CHECK(bad.vacuous_upper);
}
