#pragma once

#include <functional>
#include <memory>
#include <span>

namespace varimotion {

/// Radial profile pair (rho, xi) used to regularize the first variation and
/// the mass. Arguments are dimensionless (s = r / eps). Implementations must
/// satisfy n * xi(s) = -s * rho'(s) on (-1, 1) and vanish outside.
class KernelPair {
public:
    virtual ~KernelPair() = default;

    virtual double rho(double s) const = 0;
    virtual double rho_prime(double s) const = 0;
    virtual double xi(double s) const = 0;

    virtual int ambient_dim() const = 0;
};

/// rho(s) = exp(1 / (s^2 - 1)) and its partner
/// xi(s) = (2/n) s^2 / (s^2 - 1)^2 exp(1 / (s^2 - 1)).
class BumpKernelPair final : public KernelPair {
public:
    explicit BumpKernelPair(int ambient_dim);

    double rho(double s) const override;
    double rho_prime(double s) const override;
    double xi(double s) const override;
    int ambient_dim() const override { return ambient_dim_; }

private:
    int ambient_dim_;
};

/// Wraps arbitrary callables; used to test mismatched pairs.
class CustomKernelPair final : public KernelPair {
public:
    using Profile = std::function<double(double)>;

    CustomKernelPair(int ambient_dim, Profile rho, Profile rho_prime, Profile xi);

    double rho(double s) const override { return rho_(s); }
    double rho_prime(double s) const override { return rho_prime_(s); }
    double xi(double s) const override { return xi_(s); }
    int ambient_dim() const override { return ambient_dim_; }

private:
    int ambient_dim_;
    Profile rho_;
    Profile rho_prime_;
    Profile xi_;
};

std::shared_ptr<const KernelPair> make_default_kernels(int ambient_dim);

/// max_s |n xi(s) + s rho'(s)|; zero for an empty sample set.
double check_pair_identity(const KernelPair& kernels, std::span<const double> samples);

/// Profile lambda for the mass estimator together with its normalization
/// C_lambda = sigma_{d-1} * int_0^1 lambda(s) s^{d-1} ds.
class MassProfile {
public:
    using Profile = std::function<double(double)>;

    /// lambda = 1 on (-1, 1); C_lambda is the volume of the unit d-ball.
    static MassProfile indicator(int intrinsic_dim);

    /// Smooth profile; C_lambda by composite Simpson quadrature.
    static MassProfile smooth(int intrinsic_dim, Profile lambda);

    double operator()(double s) const { return lambda_(s); }
    double normalization() const { return normalization_; }
    int intrinsic_dim() const { return intrinsic_dim_; }

private:
    MassProfile(int intrinsic_dim, Profile lambda, double normalization);

    int intrinsic_dim_;
    Profile lambda_;
    double normalization_;
};

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// Surface measure of the unit sphere S^{d-1} in R^d (2 for d = 1).
double unit_sphere_area(int d);

} // namespace varimotion
