#include "doctest.h"

#include "varimotion/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace varimotion;

TEST_CASE("rho values")
{
    BumpKernelPair k(2);
    CHECK(k.rho(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(k.rho(0.0) == doctest::Approx(0.3678794).epsilon(1e-7));
    CHECK(k.rho(1.0) == 0.0);
    CHECK(k.rho(1.5) == 0.0);
    CHECK(k.rho(0.5) == doctest::Approx(0.2635971).epsilon(1e-7));
}

TEST_CASE("xi values")
{
    BumpKernelPair k(2);
    CHECK(k.xi(0.0) == 0.0);
    // (2/2) * 0.25 / 0.5625 * exp(-4/3)
    const double expected = 1.0 * 0.25 / 0.5625 * std::exp(-4.0 / 3.0);
    CHECK(k.xi(0.5) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(k.xi(0.5) == doctest::Approx(0.1171543).epsilon(1e-6));
    // 1/(0.99^2 - 1) = -50.2512..., so exp(...) ~ 1.5e-22 times a factor ~ 2500
    const double s = 0.99;
    const long double oracle = 1.0L * s * s / ((s * s - 1.0L) * (s * s - 1.0L)) *
                               std::exp(1.0L / (s * s - 1.0L));
    CHECK(k.xi(s) < 1e-17);
    CHECK(static_cast<double>(oracle) == doctest::Approx(k.xi(s)).epsilon(1e-10));
    CHECK(k.xi(1.0) == 0.0);
}

TEST_CASE("profiles are even, nonnegative and clamp near the support edge")
{
    for (int n : {2, 3}) {
        BumpKernelPair k(n);
        for (double s = -1.2; s <= 1.2; s += 0.01) {
            CHECK(k.rho(s) == k.rho(-s));
            CHECK(k.xi(s) == k.xi(-s));
            CHECK(k.rho(s) >= 0.0);
            CHECK(k.xi(s) >= 0.0);
            CHECK(std::isfinite(k.rho_prime(s)));
        }
        CHECK(k.rho_prime(0.0) == 0.0);
        CHECK(k.rho(1.0 - 1e-12) == 0.0);
        CHECK(k.rho_prime(1.0 - 1e-12) == 0.0);
        CHECK(k.xi(1.0 - 1e-12) == 0.0);
    }
}

TEST_CASE("rho is nonincreasing and rho' nonpositive on [0,1]")
{
    BumpKernelPair k(3);
    double prev = k.rho(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double s = i / 1000.0;
        CHECK(k.rho(s) <= prev);
        CHECK(k.rho_prime(s) <= 0.0);
        prev = k.rho(s);
    }
}

TEST_CASE("rho' agrees with a central difference")
{
    BumpKernelPair k(2);
    for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double h = 1e-6;
        const double fd = (k.rho(s + h) - k.rho(s - h)) / (2 * h);
        CHECK(k.rho_prime(s) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("pair identity")
{
    for (int n : {2, 3}) {
        BumpKernelPair k(n);
        std::vector<double> grid;
        for (int i = 1; i <= 9; ++i)
            grid.push_back(i / 10.0);
        CHECK(check_pair_identity(k, grid) <= 1e-12);

        std::vector<double> dense;
        for (int i = 1; i < 10000; ++i)
            dense.push_back(i / 10000.0);
        CHECK(check_pair_identity(k, dense) <= 1e-12);
    }
}

TEST_CASE("mismatched pair is detected")
{
    BumpKernelPair base(2);
    CustomKernelPair bad(
        2, [&](double s) { return base.rho(s); }, [&](double s) { return base.rho_prime(s); },
        [&](double s) { return 2.0 * base.xi(s); });
    const double s = 0.5;
    const double residual = check_pair_identity(bad, std::span<const double>(&s, 1));
    CHECK(residual == doctest::Approx(2.0 * base.xi(0.5)).epsilon(1e-12));
    CHECK(residual > 0.05);
}

TEST_CASE("empty sample set")
{
    BumpKernelPair k(2);
    CHECK(check_pair_identity(k, {}) == 0.0);
}

TEST_CASE("mass profile normalization")
{
    CHECK(MassProfile::indicator(1).normalization() == doctest::Approx(2.0));
    CHECK(MassProfile::indicator(2).normalization() == doctest::Approx(std::numbers::pi));
    CHECK(MassProfile::indicator(3).normalization() == doctest::Approx(4.0 * std::numbers::pi / 3.0));
    CHECK(MassProfile::indicator(2)(0.0) == 1.0);
    CHECK(MassProfile::indicator(2)(1.0) == 0.0);

    // lambda(s) = 1 - s^2: C = sigma_{d-1} * int_0^1 (1 - s^2) s^{d-1} ds
    auto lambda = [](double s) { return std::abs(s) < 1.0 ? 1.0 - s * s : 0.0; };
    CHECK(MassProfile::smooth(1, lambda).normalization() == doctest::Approx(2.0 * 2.0 / 3.0).epsilon(1e-9));
    CHECK(MassProfile::smooth(2, lambda).normalization() ==
          doctest::Approx(2.0 * std::numbers::pi * 0.25).epsilon(1e-9));
    CHECK(MassProfile::smooth(3, lambda).normalization() ==
          doctest::Approx(4.0 * std::numbers::pi * (1.0 / 3.0 - 1.0 / 5.0)).epsilon(1e-9));
}
