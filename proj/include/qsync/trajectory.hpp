#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qsync/amplitude.hpp"
#include "qsync/oracle.hpp"
#include "qsync/params.hpp"

namespace qsync {

template <typename Scalar>
struct AmplitudeTrajectory {
    std::vector<std::complex<Scalar>> values;
    bool used_oracle{false};
};

/// Survival amplitude on a grid: the three-exponential closed form, or the
/// convolution-state integrator when the characteristic roots are degenerate.
template <typename Scalar>
AmplitudeTrajectory<Scalar> amplitude_trajectory(const ScaledParams<Scalar>& sp, std::span<const Scalar> tau_grid,
                                                 const IntegratorOptions& opt = {})
{
    AmplitudeTrajectory<Scalar> out;
    const auto roots = solve_cubic(build_cubic(sp));
    if (roots.degenerate) {
        out.used_oracle = true;
        if (!tau_grid.empty() && tau_grid.front() != Scalar{0}) {
            std::vector<Scalar> padded{Scalar{0}};
            padded.insert(padded.end(), tau_grid.begin(), tau_grid.end());
            out.values = solve_volterra<Scalar>(sp, padded, opt);
            out.values.erase(out.values.begin());
        } else {
            out.values = solve_volterra(sp, tau_grid, opt);
        }
    } else {
        out.values = eval_amplitude_grid(residues(sp, roots), tau_grid);
    }
    check_amplitude_bound<Scalar>(out.values, tau_grid);
    return out;
}

}  // namespace qsync
