#include "qsync/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsync/amplitude.hpp"
#include "qsync/csv.hpp"
#include "qsync/experiments.hpp"
#include "qsync/oracle.hpp"
#include "qsync/random.hpp"
#include "qsync/state.hpp"

namespace qsync {

namespace {

using cd = std::complex<double>;
using T = VerifyTolerances;

struct Draw {
    PhysicalParamsd params;
    InitialQubitStated state;
    std::vector<double> angles;  // theta, phi pairs, then sync phis
};

void run_case(VerifyCase& vc, const Draw& d, double a0_factor)
{
    const double eps = std::numeric_limits<double>::epsilon();
    vc.params = d.params;
    vc.state = d.state;
    std::vector<std::string> failures;
    const auto fail_if = [&failures](bool bad, const char* what) {
        if (bad) failures.emplace_back(what);
    };

    const auto sp = scale(d.params);
    auto cubic = build_cubic(sp);
    const auto expanded = expand_characteristic(sp);
    vc.cubic_mismatch = std::max({std::abs(cubic.a2 - expanded.a2) / (eps * std::abs(cubic.a2)),
                                  std::abs(cubic.a1 - expanded.a1) / (eps * (std::abs(sp.yPlus * sp.yMinus) + sp.x1)),
                                  std::abs(cubic.a0 - expanded.a0) / (eps * std::abs(cubic.a0))});
    fail_if(!(vc.cubic_mismatch <= T::cubic_ulps), "cubic expansion");

    cubic.a0 *= a0_factor;
    const auto roots = solve_cubic(cubic);
    for (const auto& q : roots.roots) vc.root_residual = std::max(vc.root_residual, std::abs(cubic(q)));
    fail_if(!(vc.root_residual <= T::residual * std::max(1.0, std::abs(cubic.a0))), "root residual");

    std::vector<double> grid(kVerifyGridPoints);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid[k] = kVerifyHorizon * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
    }
    const auto oracle = solve_volterra<double>(sp, grid);

    std::vector<cd> analytic;
    try {
        const auto sol = residues(sp, roots);
        const auto m = residue_moments(sol);
        vc.moment_errors[0] = std::abs(m[0] - 1.0);
        vc.moment_errors[1] = std::abs(m[1]);
        vc.moment_errors[2] = std::abs(m[2] + sp.x1 / 4.0);
        fail_if(!(vc.moment_errors[0] <= T::sum_c), "sum of residues");
        fail_if(!(vc.moment_errors[1] <= T::sum_qc), "first residue moment");
        fail_if(!(vc.moment_errors[2] <= T::sum_q2c), "second residue moment");
        analytic = eval_amplitude_grid<double>(sol, grid);
        vc.max_divergence = max_divergence<double>(analytic, oracle);
    } catch (const DegenerateRootsError&) {
        // Degenerate draws are evaluated by the integrator alone.
        analytic = oracle;
        vc.max_divergence = 0;
    } catch (const PhysicalityError&) {
        vc.max_divergence = std::numeric_limits<double>::infinity();
    }
    fail_if(!(vc.max_divergence <= T::divergence), "analytic vs oracle");

    vc.min_determinant = std::numeric_limits<double>::infinity();
    for (const auto& e : oracle) {
        vc.max_abs_amplitude = std::max(vc.max_abs_amplitude, std::abs(e));
        if (std::abs(e) <= 1.0 + T::unit_disk) {
            vc.min_determinant = std::min(vc.min_determinant, density_matrix(d.state, e).determinant());
        }
    }
    fail_if(!(vc.max_abs_amplitude <= 1.0 + T::unit_disk), "unit disk");
    fail_if(!(vc.min_determinant >= -T::positivity), "positivity");

    // Phase-space checks at the oracle amplitude of a random grid time.
    const auto pick = static_cast<std::size_t>(d.angles.back()) % oracle.size();
    const auto rho = density_matrix(d.state, oracle[pick]);
    for (int k = 0; k < kHusimiProbesPerCase; ++k) {
        const double th = d.angles[2 * k], ph = d.angles[2 * k + 1];
        vc.husimi_error = std::max(vc.husimi_error, std::abs(husimi_q(rho, th, ph) - husimi_q_direct(rho, th, ph)));
    }
    fail_if(!(vc.husimi_error <= T::husimi), "husimi closed form");
    for (int k = 0; k < kSyncProbesPerCase; ++k) {
        const double ph = d.angles[2 * kHusimiProbesPerCase + k];
        const double s = sync_measure(rho, ph);
        vc.sync_error = std::max(vc.sync_error, std::abs(s - sync_measure_by_quadrature(rho, ph, 16)));
        vc.max_abs_sync = std::max(vc.max_abs_sync, std::abs(s));
    }
    fail_if(!(vc.sync_error <= T::sync), "sync quadrature");
    fail_if(!(vc.max_abs_sync <= 0.125 + 1e-15), "sync bound");

    vc.pass = failures.empty();
    for (const auto& f : failures) vc.failure += (vc.failure.empty() ? "" : "; ") + f;
}

}  // namespace

PhysicalParamsd draw_parameters(Rng& rng)
{
    PhysicalParamsd p;
    p.gamma = 1.0;
    p.lambda = rng.log_uniform(0.005, 10.0);
    p.delta = rng.uniform(-1.0, 1.0);
    p.beta = rng.uniform(0.0, 3e-10);
    p.omega0 = kDefaultOmega0OverGamma;
    return p;
}

bool VerifyReport::all_pass() const
{
    return std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.pass; });
}

VerifyReport run_verification(const VerifyOptions& opt)
{
    // All randomness is drawn up front so the report does not depend on scheduling.
    Rng rng(opt.seed);
    std::vector<Draw> draws(static_cast<std::size_t>(std::max(0, opt.count)));
    for (auto& d : draws) {
        d.params = draw_parameters(rng);
        d.state = validate_state(InitialQubitStated{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                                    {rng.uniform(-1, 1), rng.uniform(-1, 1)}});
        for (int k = 0; k < kHusimiProbesPerCase; ++k) {
            d.angles.push_back(rng.uniform(0.0, std::numbers::pi));
            d.angles.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
        }
        for (int k = 0; k < kSyncProbesPerCase; ++k) d.angles.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
        d.angles.push_back(static_cast<double>(rng.next() % kVerifyGridPoints));
    }

    VerifyReport rep;
    rep.cases.resize(draws.size());
    parallel_for(draws.size(), opt.threads, [&](std::size_t i) {
        rep.cases[i].case_id = static_cast<int>(i);
        try {
            run_case(rep.cases[i], draws[i], opt.a0_factor);
        } catch (const std::exception& e) {
            rep.cases[i].pass = false;
            rep.cases[i].max_divergence = std::numeric_limits<double>::infinity();
            rep.cases[i].failure = e.what();
        }
    });
    return rep;
}

void write_verify_csv(std::ostream& os, const VerifyReport& report)
{
    os << "case_id,max_divergence,pass\n";
    for (const auto& c : report.cases) {
        os << c.case_id << ',' << format_double(c.max_divergence) << ',' << (c.pass ? "true" : "false") << '\n';
    }
}

}  // namespace qsync
