#include "varimotion/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace varimotion {

namespace {

// exp(-708) is about the smallest normal double; beyond that the profiles
// are clamped to zero so (s^2-1)^{-2} never multiplies a zero into a NaN.
constexpr double kMinExponent = -708.0;

} // namespace

BumpKernelPair::BumpKernelPair(int ambient_dim) : ambient_dim_(ambient_dim)
{
    if (ambient_dim < 1)
        throw std::invalid_argument("BumpKernelPair: ambient dimension must be positive");
}

double BumpKernelPair::rho(double s) const
{
    const double q = s * s - 1.0;
    if (q >= 0.0)
        return 0.0;
    const double e = 1.0 / q;
    return e < kMinExponent ? 0.0 : std::exp(e);
}

double BumpKernelPair::rho_prime(double s) const
{
    const double q = s * s - 1.0;
    if (q >= 0.0)
        return 0.0;
    const double e = 1.0 / q;
    if (e < kMinExponent)
        return 0.0;
    return -2.0 * s / (q * q) * std::exp(e);
}

double BumpKernelPair::xi(double s) const
{
    const double q = s * s - 1.0;
    if (q >= 0.0)
        return 0.0;
    const double e = 1.0 / q;
    if (e < kMinExponent)
        return 0.0;
    return 2.0 / ambient_dim_ * (s * s) / (q * q) * std::exp(e);
}

CustomKernelPair::CustomKernelPair(int ambient_dim, Profile rho, Profile rho_prime, Profile xi)
    : ambient_dim_(ambient_dim),
      rho_(std::move(rho)),
      rho_prime_(std::move(rho_prime)),
      xi_(std::move(xi))
{
}

std::shared_ptr<const KernelPair> make_default_kernels(int ambient_dim)
{
    return std::make_shared<BumpKernelPair>(ambient_dim);
}

double check_pair_identity(const KernelPair& kernels, std::span<const double> samples)
{
    const double n = kernels.ambient_dim();
    double worst = 0.0;
    for (double s : samples)
        worst = std::max(worst, std::abs(n * kernels.xi(s) + s * kernels.rho_prime(s)));
    return worst;
}

double unit_ball_volume(int d)
{
    if (d < 1)
        throw std::invalid_argument("unit_ball_volume: dimension must be positive");
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double unit_sphere_area(int d)
{
    if (d < 1)
        throw std::invalid_argument("unit_sphere_area: dimension must be positive");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

MassProfile::MassProfile(int intrinsic_dim, Profile lambda, double normalization)
    : intrinsic_dim_(intrinsic_dim), lambda_(std::move(lambda)), normalization_(normalization)
{
}

MassProfile MassProfile::indicator(int intrinsic_dim)
{
    return MassProfile(
        intrinsic_dim, [](double s) { return std::abs(s) < 1.0 ? 1.0 : 0.0; },
        unit_ball_volume(intrinsic_dim));
}

MassProfile MassProfile::smooth(int intrinsic_dim, Profile lambda)
{
    constexpr int intervals = 4096;
    const double h = 1.0 / intervals;
    double sum = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double s = k * h;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * lambda(s) * std::pow(s, intrinsic_dim - 1);
    }
    const double integral = sum * h / 3.0;
    return MassProfile(intrinsic_dim, std::move(lambda), unit_sphere_area(intrinsic_dim) * integral);
}

} // namespace varimotion
