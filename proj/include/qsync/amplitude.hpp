#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsync/params.hpp"

namespace qsync {

/// Residues cannot be formed because two characteristic roots coincide.
class DegenerateRootsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A characteristic root with positive real part was hit during evaluation,
/// or the amplitude left the unit disk.
class PhysicalityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDegeneracyTolerance = 1e-6;
inline constexpr double kAmplitudeBoundTolerance = 1e-8;

/// Monic cubic q^3 + a2 q^2 + a1 q + a0.
template <typename Scalar>
struct CubicCoefficients {
    using Complex = std::complex<Scalar>;
    Complex a2{};
    Complex a1{};
    Complex a0{};

    Complex operator()(const Complex& q) const { return ((q + a2) * q + a1) * q + a0; }
    Complex derivative(const Complex& q) const { return (Scalar{3} * q + Scalar{2} * a2) * q + a1; }
};

template <typename Scalar>
struct CubicRoots {
    std::array<std::complex<Scalar>, 3> roots{};
    bool degenerate{false};
};

/// Three-exponential representation E(tau) = sum_i coeffs[i] exp(roots[i] tau).
template <typename Scalar>
struct AmplitudeSolution {
    std::array<std::complex<Scalar>, 3> roots{};
    std::array<std::complex<Scalar>, 3> coeffs{};
    bool degenerate{false};
};

template <typename Scalar>
CubicCoefficients<Scalar> build_cubic(const ScaledParams<Scalar>& sp)
{
    using Complex = std::complex<Scalar>;
    const Complex lb(sp.x1, -sp.x3);
    return {Scalar{2} * lb, sp.yPlus * sp.yMinus + sp.x1 / Scalar{4}, sp.x1 * lb / Scalar{4}};
}

/// Denominator of the Laplace-transformed amplitude equation,
/// q (q + y+)(q + y-) + (x1/4)(q + x1 - i x3), expanded term by term.
template <typename Scalar>
CubicCoefficients<Scalar> expand_characteristic(const ScaledParams<Scalar>& sp)
{
    using Complex = std::complex<Scalar>;
    const Complex g = sp.x1 / Scalar{4};
    const Complex shift(sp.x1, -sp.x3);
    // q (q^2 + (y+ + y-) q + y+ y-) + g q + g shift
    return {sp.yPlus + sp.yMinus, sp.yPlus * sp.yMinus + g, g * shift};
}

namespace detail {

template <typename Scalar>
Scalar cubic_scale(const CubicCoefficients<Scalar>& c)
{
    using std::abs;
    using std::cbrt;
    using std::sqrt;
    return std::max({Scalar{1}, abs(c.a2), sqrt(abs(c.a1)), cbrt(abs(c.a0))});
}

template <typename Scalar>
std::complex<Scalar> newton_polish(const CubicCoefficients<Scalar>& c, std::complex<Scalar> q, int steps)
{
    using std::abs;
    Scalar best = abs(c(q));
    for (int k = 0; k < steps; ++k) {
        const auto d = c.derivative(q);
        if (d == std::complex<Scalar>{}) break;
        const auto next = q - c(q) / d;
        const Scalar r = abs(c(next));
        if (!(r < best)) break;
        q = next;
        best = r;
    }
    return q;
}

// Bound on the rounding noise of the Taylor coefficients of c about m.
template <typename Scalar>
std::array<Scalar, 3> taylor_noise(const CubicCoefficients<Scalar>& c, const std::complex<Scalar>& m)
{
    using std::abs;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar am = abs(m);
    const Scalar k{16};
    return {k * eps * (am * am * am + abs(c.a2) * am * am + abs(c.a1) * am + abs(c.a0)),
            k * eps * (Scalar{3} * am * am + Scalar{2} * abs(c.a2) * am + abs(c.a1)),
            k * eps * (Scalar{3} * am + abs(c.a2))};
}

// True when m is a root of multiplicity >= order up to rounding noise.
template <typename Scalar>
bool is_multiple_root(const CubicCoefficients<Scalar>& c, const std::complex<Scalar>& m, int order)
{
    using std::abs;
    const auto noise = taylor_noise(c, m);
    const std::array<std::complex<Scalar>, 3> taylor{c(m), c.derivative(m), Scalar{3} * m + c.a2};
    for (int j = 0; j < order; ++j) {
        if (abs(taylor[j]) > noise[j]) return false;
    }
    return true;
}

template <typename Scalar>
bool close_roots(const std::complex<Scalar>& a, const std::complex<Scalar>& b, Scalar tol)
{
    using std::abs;
    return abs(a - b) < tol * std::max({Scalar{1}, abs(a), abs(b)});
}

}  // namespace detail

/**
 * Roots of a monic complex cubic.
 *
 * Eigenvalues of the companion matrix give the initial estimates; each is
 * then Newton-polished. Clusters that are multiple roots at the level of
 * rounding noise collapse to their centroid, which is well conditioned even
 * when the individual roots are not. Roots are ordered by descending real
 * part with ties broken by descending imaginary part.
 */
template <typename Scalar>
CubicRoots<Scalar> solve_cubic(const CubicCoefficients<Scalar>& c)
{
    using Complex = std::complex<Scalar>;
    using std::abs;

    Eigen::Matrix<Complex, 3, 3> companion = Eigen::Matrix<Complex, 3, 3>::Zero();
    companion(1, 0) = Complex(1);
    companion(2, 1) = Complex(1);
    companion(0, 2) = -c.a0;
    companion(1, 2) = -c.a1;
    companion(2, 2) = -c.a2;

    Eigen::ComplexEigenSolver<Eigen::Matrix<Complex, 3, 3>> solver(companion, false);
    CubicRoots<Scalar> out;
    for (int i = 0; i < 3; ++i) out.roots[i] = detail::newton_polish(c, solver.eigenvalues()[i], 3);

    auto& q = out.roots;
    const Scalar tol{kDegeneracyTolerance};
    const Scalar cluster{1e-3};

    // Cluster centroids come from the root sum -a2, which polishing does not preserve.
    const Complex centroid = -c.a2 / Scalar{3};
    if (detail::close_roots(q[0], q[1], cluster) && detail::close_roots(q[1], q[2], cluster)
        && detail::close_roots(q[0], q[2], cluster) && detail::is_multiple_root(c, centroid, 3)) {
        q = {centroid, centroid, centroid};
    } else {
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                if (!detail::close_roots(q[i], q[j], cluster)) continue;
                const Complex m = (-c.a2 - q[3 - i - j]) / Scalar{2};
                if (detail::is_multiple_root(c, m, 2)) q[i] = q[j] = m;
            }
        }
    }

    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (detail::close_roots(q[i], q[j], tol)) out.degenerate = true;
        }
    }

    const Scalar tie = Scalar{1e-12} * detail::cubic_scale(c);
    std::sort(q.begin(), q.end(), [tie](const Complex& a, const Complex& b) {
        if (abs(a.real() - b.real()) > tie) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

/// c_i = (q_i + y+)(q_i + y-) / prod_{j != i} (q_i - q_j)
template <typename Scalar>
AmplitudeSolution<Scalar> residues(const ScaledParams<Scalar>& sp, const CubicRoots<Scalar>& r)
{
    if (r.degenerate) throw DegenerateRootsError("characteristic roots are degenerate");
    AmplitudeSolution<Scalar> sol;
    sol.roots = r.roots;
    const auto& q = r.roots;
    for (int i = 0; i < 3; ++i) {
        std::complex<Scalar> den(1);
        for (int j = 0; j < 3; ++j) {
            if (j != i) den *= q[i] - q[j];
        }
        sol.coeffs[i] = (q[i] + sp.yPlus) * (q[i] + sp.yMinus) / den;
    }
    return sol;
}

template <typename Scalar>
AmplitudeSolution<Scalar> solve_amplitude(const ScaledParams<Scalar>& sp)
{
    return residues(sp, solve_cubic(build_cubic(sp)));
}

/// Residue moments sum_i q_i^k c_i for k = 0, 1, 2 (the amplitude and its
/// first two derivatives at tau = 0).
template <typename Scalar>
std::array<std::complex<Scalar>, 3> residue_moments(const AmplitudeSolution<Scalar>& sol)
{
    std::array<std::complex<Scalar>, 3> m{};
    for (int i = 0; i < 3; ++i) {
        m[0] += sol.coeffs[i];
        m[1] += sol.roots[i] * sol.coeffs[i];
        m[2] += sol.roots[i] * sol.roots[i] * sol.coeffs[i];
    }
    return m;
}

template <typename Scalar>
std::complex<Scalar> eval_amplitude(const AmplitudeSolution<Scalar>& sol, Scalar tau)
{
    using std::cos;
    using std::exp;
    using std::sin;
    if (!(tau >= 0)) throw std::invalid_argument("scaled time must be non-negative");

    std::complex<Scalar> e{};
    for (int i = 0; i < 3; ++i) {
        const Scalar growth = sol.roots[i].real() * tau;
        if (growth > Scalar{kAmplitudeBoundTolerance}) {
            throw PhysicalityError("unstable characteristic root with Re(q) = "
                                   + std::to_string(static_cast<double>(sol.roots[i].real()))
                                   + " at tau = " + std::to_string(static_cast<double>(tau)));
        }
        const Scalar mag = exp(std::max(growth, Scalar{-745}));
        const Scalar ph = sol.roots[i].imag() * tau;
        e += sol.coeffs[i] * std::complex<Scalar>(mag * cos(ph), mag * sin(ph));
    }
    return e;
}

template <typename Scalar>
std::vector<std::complex<Scalar>> eval_amplitude_grid(const AmplitudeSolution<Scalar>& sol,
                                                      std::span<const Scalar> tau_grid)
{
    std::vector<std::complex<Scalar>> out;
    out.reserve(tau_grid.size());
    for (std::size_t k = 0; k < tau_grid.size(); ++k) {
        if (k > 0 && tau_grid[k] < tau_grid[k - 1]) throw std::invalid_argument("tau grid must be monotone");
        out.push_back(eval_amplitude(sol, tau_grid[k]));
    }
    return out;
}

/// Throws PhysicalityError if any |E| exceeds 1 beyond tolerance.
template <typename Scalar>
void check_amplitude_bound(std::span<const std::complex<Scalar>> values, std::span<const Scalar> tau_grid)
{
    using std::abs;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (abs(values[k]) > Scalar{1} + Scalar{kAmplitudeBoundTolerance}) {
            throw PhysicalityError("|E| = " + std::to_string(static_cast<double>(abs(values[k])))
                                   + " exceeds 1 at tau = " + std::to_string(static_cast<double>(tau_grid[k])));
        }
    }
}

using CubicCoefficientsd = CubicCoefficients<double>;
using AmplitudeSolutiond = AmplitudeSolution<double>;

}  // namespace qsync
