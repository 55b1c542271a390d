#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qsync/amplitude.hpp"
#include "qsync/params.hpp"
#include "qsync/quadrature.hpp"

namespace qsync {

/// Reduced qubit density matrix in the basis (|e>, |g>).
template <typename Scalar>
struct DensityMatrix {
    using Complex = std::complex<Scalar>;
    using Matrix = Eigen::Matrix<Complex, 2, 2>;

    Matrix m = Matrix::Identity() / Scalar{2};

    Scalar rho_ee() const { return m(0, 0).real(); }
    Scalar rho_gg() const { return m(1, 1).real(); }
    Complex rho_eg() const { return m(0, 1); }
    Complex rho_ge() const { return m(1, 0); }

    Scalar trace() const { return m.trace().real(); }
    Scalar determinant() const { return m.determinant().real(); }

    static DensityMatrix maximally_mixed() { return {}; }
    static DensityMatrix from_entries(Scalar ee, Complex eg)
    {
        DensityMatrix r;
        r.m << Complex(ee), eg, std::conj(eg), Complex(Scalar{1} - ee);
        return r;
    }
};

/// rho(t) for the pure initial state (C0|g> + C1|e>) and survival amplitude E:
/// rho_ee = |C1|^2 |E|^2, rho_eg = C1 C0* E, rho_gg = 1 - rho_ee.
template <typename Scalar>
DensityMatrix<Scalar> density_matrix(const InitialQubitState<Scalar>& s0, const std::complex<Scalar>& E)
{
    using std::abs;
    if (!(abs(E) <= Scalar{1} + Scalar{kAmplitudeBoundTolerance})) {
        throw PhysicalityError("survival amplitude outside the unit disk");
    }
    return DensityMatrix<Scalar>::from_entries(s0.excited_population() * std::norm(E), s0.coherence() * E);
}

namespace detail {

template <typename Scalar>
void check_angles(Scalar theta, Scalar phi)
{
    const Scalar pi = std::numbers::pi_v<Scalar>;
    if (!(theta >= 0 && theta <= pi)) throw std::domain_error("polar angle outside [0, pi]");
    if (!(phi >= 0 && phi < Scalar{2} * pi)) throw std::domain_error("azimuthal angle outside [0, 2 pi)");
}

}  // namespace detail

/// Q = (1/2pi) [cos(theta) rho_ee + sin(theta) Re(e^{i phi} rho_eg) + sin^2(theta/2)]
template <typename Scalar>
Scalar husimi_q(const DensityMatrix<Scalar>& rho, Scalar theta, Scalar phi)
{
    using std::cos;
    using std::sin;
    detail::check_angles(theta, phi);
    const Scalar s = sin(theta / Scalar{2});
    const std::complex<Scalar> rot(cos(phi), sin(phi));
    return (cos(theta) * rho.rho_ee() + sin(theta) * (rot * rho.rho_eg()).real() + s * s)
           * std::numbers::inv_pi_v<Scalar> / Scalar{2};
}

/// Spin-coherent state cos(theta/2)|e> + sin(theta/2) e^{i phi}|g>.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 2, 1> coherent_state(Scalar theta, Scalar phi)
{
    using std::cos;
    using std::sin;
    Eigen::Matrix<std::complex<Scalar>, 2, 1> v;
    v << std::complex<Scalar>(cos(theta / Scalar{2})),
        sin(theta / Scalar{2}) * std::complex<Scalar>(cos(phi), sin(phi));
    return v;
}

/// (1/2pi) <theta, phi| rho |theta, phi> evaluated as a matrix product.
template <typename Scalar>
Scalar husimi_q_direct(const DensityMatrix<Scalar>& rho, Scalar theta, Scalar phi)
{
    detail::check_angles(theta, phi);
    const auto v = coherent_state(theta, phi);
    return (v.adjoint() * rho.m * v)(0, 0).real() * std::numbers::inv_pi_v<Scalar> / Scalar{2};
}

/**
 * Husimi Q sampled on Gauss-Legendre nodes in cos(theta) crossed with uniform
 * phi nodes. values is row-major in theta: values[i * n_phi + j].
 */
template <typename Scalar>
struct PhaseSpaceGrid {
    std::vector<Scalar> theta_nodes;
    std::vector<Scalar> theta_weights;  // Gauss-Legendre weights in cos(theta)
    std::vector<Scalar> phi_nodes;
    std::vector<Scalar> values;
    Scalar tau{0};

    std::size_t n_theta() const { return theta_nodes.size(); }
    std::size_t n_phi() const { return phi_nodes.size(); }
    Scalar operator()(std::size_t i, std::size_t j) const { return values[i * phi_nodes.size() + j]; }
};

template <typename Scalar>
std::vector<Scalar> uniform_phi_nodes(int n_phi)
{
    std::vector<Scalar> phi(n_phi);
    for (int j = 0; j < n_phi; ++j) phi[j] = Scalar{2} * std::numbers::pi_v<Scalar> * Scalar(j) / Scalar(n_phi);
    return phi;
}

template <typename Scalar>
PhaseSpaceGrid<Scalar> husimi_grid(const DensityMatrix<Scalar>& rho, int n_theta, int n_phi, Scalar tau = 0)
{
    using std::acos;
    using std::clamp;
    if (n_theta < 2 || n_phi < 2) throw std::invalid_argument("husimi grid needs at least 2 x 2 nodes");

    const auto gl = gauss_legendre<Scalar>(n_theta);
    PhaseSpaceGrid<Scalar> g;
    g.tau = tau;
    g.phi_nodes = uniform_phi_nodes<Scalar>(n_phi);
    // Descending cos(theta) so theta ascends from the |e> pole.
    for (int i = n_theta - 1; i >= 0; --i) {
        g.theta_nodes.push_back(acos(clamp(gl.nodes[i], Scalar{-1}, Scalar{1})));
        g.theta_weights.push_back(gl.weights[i]);
    }
    g.values.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (const Scalar th : g.theta_nodes) {
        for (const Scalar ph : g.phi_nodes) g.values.push_back(husimi_q(rho, th, ph));
    }
    return g;
}

/// Q(pi/2, phi) on uniform phi nodes.
template <typename Scalar>
std::vector<Scalar> husimi_equator(const DensityMatrix<Scalar>& rho, std::span<const Scalar> phi_nodes)
{
    std::vector<Scalar> out;
    out.reserve(phi_nodes.size());
    for (const Scalar ph : phi_nodes) out.push_back(husimi_q(rho, std::numbers::pi_v<Scalar> / Scalar{2}, ph));
    return out;
}

/// Integral of Q over the unit sphere using the grid's own quadrature weights.
template <typename Scalar>
Scalar sphere_integral(const PhaseSpaceGrid<Scalar>& g)
{
    const Scalar dphi = Scalar{2} * std::numbers::pi_v<Scalar> / Scalar(g.n_phi());
    Scalar total{0};
    for (std::size_t i = 0; i < g.n_theta(); ++i) {
        Scalar row{0};
        for (std::size_t j = 0; j < g.n_phi(); ++j) row += g(i, j);
        total += g.theta_weights[i] * row * dphi;
    }
    return total;
}

/// S(phi) = (rho_eg e^{i phi} + rho_ge e^{-i phi}) / 8 = Re(rho_eg e^{i phi}) / 4
template <typename Scalar>
Scalar sync_measure(const DensityMatrix<Scalar>& rho, Scalar phi)
{
    using std::cos;
    using std::sin;
    return (std::complex<Scalar>(cos(phi), sin(phi)) * rho.rho_eg()).real() / Scalar{4};
}

/// S(phi) = int_0^pi sin(theta) Q(theta, phi) dtheta - 1/(2pi), by Gauss-Legendre in theta.
template <typename Scalar>
Scalar sync_measure_by_quadrature(const DensityMatrix<Scalar>& rho, Scalar phi, int n_nodes = 16)
{
    using std::sin;
    if (n_nodes < 8) throw std::invalid_argument("theta quadrature needs at least 8 nodes");
    const auto gl = gauss_legendre<Scalar>(n_nodes, Scalar{0}, std::numbers::pi_v<Scalar>);
    Scalar acc{0};
    for (int k = 0; k < n_nodes; ++k) acc += gl.weights[k] * sin(gl.nodes[k]) * husimi_q(rho, gl.nodes[k], phi);
    return acc - std::numbers::inv_pi_v<Scalar> / Scalar{2};
}

inline constexpr double kUndefinedPhaseThreshold = 1e-12;

/// Maximizer of S over phi and the maximum itself. phase is empty when the
/// coherence vanishes and the phase distribution is uniform.
template <typename Scalar>
struct PeakPhase {
    std::optional<Scalar> phase;
    Scalar height{0};
};

template <typename Scalar>
PeakPhase<Scalar> peak_phase(const DensityMatrix<Scalar>& rho)
{
    using std::abs;
    using std::arg;
    using std::fmod;
    const Scalar mag = abs(rho.rho_eg());
    PeakPhase<Scalar> p;
    if (mag < Scalar{kUndefinedPhaseThreshold}) return p;
    const Scalar two_pi = Scalar{2} * std::numbers::pi_v<Scalar>;
    Scalar ph = fmod(-arg(rho.rho_eg()), two_pi);
    if (ph < 0) ph += two_pi;
    if (ph >= two_pi) ph -= two_pi;
    p.phase = ph;
    p.height = mag / Scalar{4};
    return p;
}

/// Time series of S at a set of probe phases plus the tracked peak.
template <typename Scalar>
struct SyncTrace {
    std::vector<Scalar> tau_grid;
    std::vector<Scalar> phi_probes;
    std::vector<Scalar> s_values;  // row-major: s_values[k * phi_probes.size() + p]
    std::vector<std::optional<Scalar>> peak_phase;
    std::vector<Scalar> peak_height;

    Scalar s(std::size_t k, std::size_t p) const { return s_values[k * phi_probes.size() + p]; }
};

template <typename Scalar>
SyncTrace<Scalar> track_peak_phase(std::span<const DensityMatrix<Scalar>> rhos, std::span<const Scalar> tau_grid,
                                   std::span<const Scalar> phi_probes)
{
    if (rhos.empty()) throw std::invalid_argument("empty density-matrix trajectory");
    if (rhos.size() != tau_grid.size()) throw std::invalid_argument("trajectory and tau grid differ in length");
    SyncTrace<Scalar> tr;
    tr.tau_grid.assign(tau_grid.begin(), tau_grid.end());
    tr.phi_probes.assign(phi_probes.begin(), phi_probes.end());
    tr.s_values.reserve(rhos.size() * phi_probes.size());
    for (const auto& rho : rhos) {
        for (const Scalar ph : phi_probes) tr.s_values.push_back(sync_measure(rho, ph));
        const auto pk = peak_phase(rho);
        tr.peak_phase.push_back(pk.phase);
        tr.peak_height.push_back(pk.height);
    }
    return tr;
}

/// Distance from angle a to angle b on the circle, in [0, pi].
template <typename Scalar>
Scalar circular_distance(Scalar a, Scalar b)
{
    using std::abs;
    using std::fmod;
    const Scalar two_pi = Scalar{2} * std::numbers::pi_v<Scalar>;
    Scalar d = fmod(abs(a - b), two_pi);
    return d > std::numbers::pi_v<Scalar> ? two_pi - d : d;
}

using DensityMatrixd = DensityMatrix<double>;
using PhaseSpaceGridd = PhaseSpaceGrid<double>;
using SyncTraced = SyncTrace<double>;

}  // namespace qsync
