#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsync {

/// Raised for parameter sets that violate the model's domain.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Default ratio omega0 / gamma used when a configuration leaves it out.
inline constexpr double kDefaultOmega0OverGamma = 1.5e9;

/// Speeds above this are accepted but flagged: the model assumes v << c.
inline constexpr double kBetaWarnThreshold = 1e-6;

/// Rates in physical units (inverse time). gamma sets the time unit.
template <typename Scalar>
struct PhysicalParams {
    Scalar gamma{1};
    Scalar lambda{1};
    Scalar delta{0};   // omega0 - omega_c
    Scalar omega0{static_cast<Scalar>(kDefaultOmega0OverGamma)};
    Scalar beta{0};    // v / c
};

/**
 * Dimensionless parameters, everything measured in units of gamma.
 *
 * lambdaBar = x1 - i x3 is the complex spectral rate and thetaM the complex
 * motion rate beta (lambdaBar + i x2). The kernel splits into two Lorentzian
 * modes with rates yPlus = lambdaBar + thetaM and yMinus = lambdaBar - thetaM.
 */
template <typename Scalar>
struct ScaledParams {
    using Complex = std::complex<Scalar>;

    Scalar x1{};  // lambda / gamma
    Scalar x2{};  // omega0 / gamma
    Scalar x3{};  // delta / gamma
    Scalar beta{};
    Complex lambdaBar{};
    Complex thetaM{};
    Complex yPlus{};
    Complex yMinus{};

    /// Non-fatal validity notes (large speed, beta * x2 far outside the regime studied).
    std::vector<std::string> warnings;
};

template <typename Scalar>
struct InitialQubitState {
    std::complex<Scalar> c0{};  // amplitude of |g>
    std::complex<Scalar> c1{};  // amplitude of |e>
    Scalar normalization{1};    // factor applied by validate_state

    Scalar excited_population() const { return std::norm(c1); }
    /// rho_eg(0) = C1 C0*
    std::complex<Scalar> coherence() const { return c1 * std::conj(c0); }
};

template <typename Scalar>
void check_physical(const PhysicalParams<Scalar>& p)
{
    using std::isfinite;
    if (!isfinite(p.gamma) || !isfinite(p.lambda) || !isfinite(p.delta) || !isfinite(p.omega0)
        || !isfinite(p.beta)) {
        throw ParamError("parameters must be finite");
    }
    if (!(p.gamma > 0)) throw ParamError("gamma must be positive");
    if (!(p.lambda > 0)) throw ParamError("lambda must be positive");
    if (!(p.omega0 > 0)) throw ParamError("omega0 must be positive");
    if (!(p.beta >= 0) || !(p.beta < 1)) throw ParamError("beta must lie in [0, 1)");
}

template <typename Scalar>
ScaledParams<Scalar> scale(const PhysicalParams<Scalar>& p)
{
    using Complex = std::complex<Scalar>;
    check_physical(p);

    ScaledParams<Scalar> s;
    s.x1 = p.lambda / p.gamma;
    s.x2 = p.omega0 / p.gamma;
    s.x3 = p.delta / p.gamma;
    s.beta = p.beta;

    const Scalar one{1};
    s.lambdaBar = Complex(s.x1, -s.x3);
    s.thetaM = Complex(s.beta * s.x1, s.beta * (s.x2 - s.x3));
    s.yPlus = Complex((one + s.beta) * s.x1, s.beta * s.x2 - (one + s.beta) * s.x3);
    s.yMinus = Complex((one - s.beta) * s.x1, -s.beta * s.x2 - (one - s.beta) * s.x3);

    if (s.beta > static_cast<Scalar>(kBetaWarnThreshold)) {
        s.warnings.emplace_back("beta exceeds 1e-6; the classical-motion approximation assumes beta << 1");
    }
    if (s.beta * s.x2 > Scalar{10}) {
        s.warnings.emplace_back("beta * omega0 / gamma exceeds 10; continuum-limit kernel validity is untested there");
    }
    return s;
}

template <typename Scalar>
InitialQubitState<Scalar> validate_state(const InitialQubitState<Scalar>& s)
{
    using std::isfinite;
    using std::sqrt;
    const Scalar n2 = std::norm(s.c0) + std::norm(s.c1);
    if (!isfinite(n2)) throw ParamError("initial state amplitudes must be finite");
    if (!(n2 > 0)) throw ParamError("initial state is the zero vector");

    InitialQubitState<Scalar> out;
    const Scalar factor = Scalar{1} / sqrt(n2);
    out.c0 = s.c0 * factor;
    out.c1 = s.c1 * factor;
    out.normalization = factor;
    return out;
}

/// (|e> + |g>) / sqrt(2), the initial state used by every figure preset.
template <typename Scalar>
InitialQubitState<Scalar> symmetric_state()
{
    return validate_state(InitialQubitState<Scalar>{{1, 0}, {1, 0}});
}

using PhysicalParamsd = PhysicalParams<double>;
using ScaledParamsd = ScaledParams<double>;
using InitialQubitStated = InitialQubitState<double>;

}  // namespace qsync
