#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qsync/amplitude.hpp"
#include "qsync/oracle.hpp"
#include "test_support.hpp"

using namespace qsync;
using namespace qsync::test;
using cd = std::complex<double>;

TEST(ReduceKernel, RestingQubitSingleEffectiveMode)
{
    const auto km = reduce_kernel(scaled(5.0, 0.0, 0.0));
    EXPECT_EQ(km.ratePlus, cd(5.0, 0.0));
    EXPECT_EQ(km.rateMinus, cd(5.0, 0.0));
    EXPECT_DOUBLE_EQ((km.weightPlus + km.weightMinus).real(), 1.25);
}

TEST(ReduceKernel, DetunedAtRest)
{
    const auto km = reduce_kernel(scaled(0.01, 0.3, 0.0));
    EXPECT_EQ(km.ratePlus, cd(0.01, -0.3));
    EXPECT_EQ(km.rateMinus, cd(0.01, -0.3));
}

TEST(ReduceKernel, MovingQubitSplitsModes)
{
    const auto sp = scaled(0.01, 0.0, 1e-10);
    const auto km = reduce_kernel(sp);
    EXPECT_LT(std::abs(km.ratePlus - cd(0.01 - 1e-12, -0.15)), 1e-15);
    EXPECT_LT(std::abs(km.rateMinus - cd(0.01 + 1e-12, 0.15)), 1e-15);
    EXPECT_LT(std::abs(km.ratePlus - sp.yMinus), 1e-15);
    EXPECT_LT(std::abs(km.rateMinus - sp.yPlus), 1e-15);
}

TEST(ReduceKernelProperty, ReconstructsClosedFormKernel)
{
    Rng rng(17);
    for (int k = 0; k < 50; ++k) {
        const auto sp = random_scaled(rng);
        const auto km = reduce_kernel(sp);
        for (int j = 0; j < 20; ++j) {
            const double tau = rng.uniform(0.0, 50.0);
            const cd ref = kernel_closed_form(sp, tau);
            EXPECT_LT(std::abs(km(tau) - ref), 1e-12 * std::max(1.0, sp.x1));
        }
    }
}

TEST(SolveVolterra, InitialConditions)
{
    const auto sp = scaled(2.0, 0.3, 1e-10);
    const double h = 1e-4;
    const auto e = solve_volterra<double>(sp, std::vector<double>{0.0, h});
    EXPECT_EQ(e[0], cd(1.0, 0.0));
    // E(h) = 1 - (x1/8) h^2 + O(h^3), so the forward difference vanishes with h.
    EXPECT_LT(std::abs((e[1] - 1.0) / h), sp.x1 * h);
    EXPECT_NEAR(((e[1] - 1.0) / (h * h)).real(), -sp.x1 / 8.0, 1e-3);
}

TEST(SolveVolterra, WeakCouplingMatchesReference)
{
    const auto e = solve_volterra<double>(scaled(5.0, 0.0, 0.0), std::vector<double>{0.0, 3.0, 5.0});
    EXPECT_LT(std::abs(e[1] - kWeakE3), 1e-8);
    EXPECT_LT(std::abs(e[2] - kWeakE5), 1e-8);
    EXPECT_NEAR(std::abs(e[2]), 0.283, 5e-4);
}

TEST(SolveVolterra, SingleModeTextbookSolution)
{
    // All kernel weight in one Lorentzian mode: E'' + lb E' + g E = 0.
    for (const auto& [x1, x3] : {std::pair{0.04, 0.3}, std::pair{3.0, -0.5}, std::pair{0.01, 0.0}}) {
        const cd lb(x1, -x3);
        const cd g = x1 / 4.0;
        const KernelModesd km{lb, lb, g, cd(0.0)};
        const auto grid = uniform_grid(0.0, 100.0, 501);
        const auto e = solve_volterra<double>(km, grid);
        const cd D = std::sqrt(lb * lb - 4.0 * g);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid[k];
            const cd ref = std::exp(-lb * t / 2.0) * (std::cosh(D * t / 2.0) + lb / D * std::sinh(D * t / 2.0));
            EXPECT_LT(std::abs(e[k] - ref), 1e-7) << x1 << " " << t;
        }
    }
}

TEST(SolveVolterra, GridValidation)
{
    const auto sp = scaled(1.0, 0.0, 0.0);
    EXPECT_THROW(solve_volterra<double>(sp, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(solve_volterra<double>(sp, std::vector<double>{0.0, 2.0, 1.0}), std::invalid_argument);
    EXPECT_TRUE(solve_volterra<double>(sp, std::vector<double>{}).empty());
}

TEST(SolveVolterra, StepSizeUnderflowReportsTau)
{
    const KernelModesd stiff{cd(1e17, 0.0), cd(1e17, 0.0), cd(1e33, 0.0), cd(1e33, 0.0)};
    try {
        solve_volterra<double>(stiff, std::vector<double>{0.0, 1.0});
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GE(e.tau(), 0.0);
        EXPECT_NE(std::string(e.what()).find("tau"), std::string::npos);
    }
}

TEST(MaxDivergence, Basics)
{
    const std::vector<cd> a{cd(1.0), cd(0.5, 0.2), cd(-0.1, 0.3)};
    EXPECT_EQ(max_divergence<double>(a, a), 0.0);
    std::vector<cd> b = a;
    for (auto& z : b) z += 1e-5;
    EXPECT_NEAR(max_divergence<double>(a, b), 1e-5, 1e-15);
    EXPECT_THROW(max_divergence<double>(a, std::vector<cd>{cd(1.0)}), std::invalid_argument);
}

TEST(OracleProperty, AgreesWithClosedForm)
{
    Rng rng(23);
    const auto grid = uniform_grid(0.0, 100.0, 1001);
    for (int k = 0; k < 60; ++k) {
        const auto sp = random_scaled(rng);
        const auto analytic = eval_amplitude_grid<double>(solve_amplitude(sp), grid);
        const auto oracle = solve_volterra<double>(sp, grid);
        EXPECT_LE(max_divergence<double>(analytic, oracle), 1e-6);
        for (const auto& e : oracle) EXPECT_LE(std::abs(e), 1.0 + 1e-8);
    }
}

TEST(OracleProperty, ConvergesUnderToleranceHalving)
{
    Rng rng(29);
    const auto grid = uniform_grid(0.0, 100.0, 201);
    IntegratorOptions tight;
    tight.rtol /= 2;
    tight.atol /= 2;
    for (int k = 0; k < 20; ++k) {
        const auto sp = random_scaled(rng);
        const auto base = solve_volterra<double>(sp, grid);
        const auto fine = solve_volterra<double>(sp, grid, tight);
        EXPECT_LT(max_divergence<double>(base, fine), 1e-8);
    }
}
