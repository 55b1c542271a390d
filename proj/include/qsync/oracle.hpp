#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsync/params.hpp"

namespace qsync {

/// Adaptive integration failed (step size collapsed or step budget exhausted).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double tau) : std::runtime_error(what), tau_(tau) {}
    double tau() const { return tau_; }

private:
    double tau_;
};

/**
 * Memory kernel as a sum of two decaying exponentials,
 * G(tau) = weightPlus e^{-ratePlus tau} + weightMinus e^{-rateMinus tau}.
 *
 * For the moving-qubit kernel (x1/4) e^{-lambdaBar tau} cosh(thetaM tau) the
 * two rates are lambdaBar -/+ thetaM and both weights equal x1/8.
 */
template <typename Scalar>
struct KernelModes {
    using Complex = std::complex<Scalar>;
    Complex ratePlus{};
    Complex rateMinus{};
    Complex weightPlus{};
    Complex weightMinus{};

    Complex operator()(Scalar tau) const
    {
        using std::exp;
        return weightPlus * exp(-ratePlus * tau) + weightMinus * exp(-rateMinus * tau);
    }
};

template <typename Scalar>
KernelModes<Scalar> reduce_kernel(const ScaledParams<Scalar>& sp)
{
    const Scalar w = sp.x1 / Scalar{8};
    return {sp.lambdaBar - sp.thetaM, sp.lambdaBar + sp.thetaM, w, w};
}

/// Kernel in its closed form, (x1/4) e^{-lambdaBar tau} cosh(thetaM tau).
template <typename Scalar>
std::complex<Scalar> kernel_closed_form(const ScaledParams<Scalar>& sp, Scalar tau)
{
    using std::cosh;
    using std::exp;
    return sp.x1 / Scalar{4} * exp(-sp.lambdaBar * tau) * cosh(sp.thetaM * tau);
}

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 1e-3;
    long max_steps = 50'000'000;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/**
 * Solves dE/dtau = -int_0^tau G(tau - s) E(s) ds with E(0) = 1.
 *
 * Because G is a sum of exponentials the memory integral is carried exactly by
 * two convolution states z_pm(tau) = int_0^tau e^{-r_pm (tau - s)} E(s) ds:
 *
 *   E'   = -(w+ z+ + w- z-)
 *   z+'  = E - r+ z+
 *   z-'  = E - r- z-
 *
 * The 3-dimensional complex system is integrated with an adaptive
 * Dormand-Prince pair, error-controlled on its 6 real components. Steps are
 * clipped to land on every grid point.
 */
template <typename Scalar>
std::vector<std::complex<Scalar>> solve_volterra(const KernelModes<Scalar>& km, std::span<const Scalar> tau_grid,
                                                 const IntegratorOptions& opt = {})
{
    using Complex = std::complex<Scalar>;
    using State = Eigen::Matrix<Complex, 3, 1>;
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;
    using D = detail::DormandPrince;

    std::vector<Complex> out;
    if (tau_grid.empty()) return out;
    if (tau_grid.front() != Scalar{0}) throw std::invalid_argument("oracle grid must start at tau = 0");
    out.reserve(tau_grid.size());

    Eigen::Matrix<Complex, 3, 3> A;
    A << Complex(0), -km.weightPlus, -km.weightMinus,
         Complex(1), -km.ratePlus, Complex(0),
         Complex(1), Complex(0), -km.rateMinus;
    const auto rhs = [&A](const State& y) -> State { return A * y; };

    State y(Complex(1), Complex(0), Complex(0));
    out.push_back(y(0));

    const Scalar rtol(opt.rtol), atol(opt.atol);
    Scalar t{0};
    Scalar h(opt.initial_step);
    State k1 = rhs(y);
    long steps = 0;

    for (std::size_t g = 1; g < tau_grid.size(); ++g) {
        const Scalar target = tau_grid[g];
        if (target < t) throw std::invalid_argument("oracle grid must be monotone");
        while (t < target) {
            if (++steps > opt.max_steps) {
                throw IntegrationError("oracle step budget exhausted", static_cast<double>(t));
            }
            bool last = false;
            Scalar step = h;
            if (t + step >= target) {
                step = target - t;
                last = true;
            }
            const Scalar floor = Scalar{1e-14} * max(Scalar{1}, abs(t));
            if (step < floor && !last) {
                throw IntegrationError("oracle step size underflow at tau = " + std::to_string(static_cast<double>(t)),
                                       static_cast<double>(t));
            }

            const State k2 = rhs(y + step * (Scalar(D::a21) * k1));
            const State k3 = rhs(y + step * (Scalar(D::a31) * k1 + Scalar(D::a32) * k2));
            const State k4 = rhs(y + step * (Scalar(D::a41) * k1 + Scalar(D::a42) * k2 + Scalar(D::a43) * k3));
            const State k5 = rhs(y + step * (Scalar(D::a51) * k1 + Scalar(D::a52) * k2 + Scalar(D::a53) * k3
                                             + Scalar(D::a54) * k4));
            const State k6 = rhs(y + step * (Scalar(D::a61) * k1 + Scalar(D::a62) * k2 + Scalar(D::a63) * k3
                                             + Scalar(D::a64) * k4 + Scalar(D::a65) * k5));
            const State ynew = y + step * (Scalar(D::b1) * k1 + Scalar(D::b3) * k3 + Scalar(D::b4) * k4
                                           + Scalar(D::b5) * k5 + Scalar(D::b6) * k6);
            const State k7 = rhs(ynew);
            const State err = step * (Scalar(D::e1) * k1 + Scalar(D::e3) * k3 + Scalar(D::e4) * k4
                                      + Scalar(D::e5) * k5 + Scalar(D::e6) * k6 + Scalar(D::e7) * k7);

            Scalar acc{0};
            for (int i = 0; i < 3; ++i) {
                const Scalar sr = atol + rtol * max(abs(y(i).real()), abs(ynew(i).real()));
                const Scalar si = atol + rtol * max(abs(y(i).imag()), abs(ynew(i).imag()));
                acc += (err(i).real() / sr) * (err(i).real() / sr) + (err(i).imag() / si) * (err(i).imag() / si);
            }
            const Scalar errnorm = sqrt(acc / Scalar{6});

            const Scalar factor = errnorm == Scalar{0}
                                      ? Scalar{5}
                                      : min(Scalar{5}, max(Scalar{0.2}, Scalar{0.9} * pow(errnorm, Scalar{-0.2})));
            if (errnorm <= Scalar{1}) {
                t = last ? target : t + step;
                y = ynew;
                k1 = k7;
                // A clipped final step says nothing about the natural step size.
                if (!last) h = step * factor;
            } else {
                h = step * min(Scalar{1}, factor);
                if (h < floor) {
                    throw IntegrationError(
                        "oracle step size underflow at tau = " + std::to_string(static_cast<double>(t)),
                        static_cast<double>(t));
                }
            }
        }
        out.push_back(y(0));
    }
    return out;
}

template <typename Scalar>
std::vector<std::complex<Scalar>> solve_volterra(const ScaledParams<Scalar>& sp, std::span<const Scalar> tau_grid,
                                                 const IntegratorOptions& opt = {})
{
    return solve_volterra(reduce_kernel(sp), tau_grid, opt);
}

/// max_k |a_k - b_k|
template <typename Scalar>
Scalar max_divergence(std::span<const std::complex<Scalar>> a, std::span<const std::complex<Scalar>> b)
{
    using std::abs;
    if (a.size() != b.size()) throw std::invalid_argument("trajectories sampled on different grids");
    Scalar m{0};
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, abs(a[k] - b[k]));
    return m;
}

using KernelModesd = KernelModes<double>;

}  // namespace qsync
