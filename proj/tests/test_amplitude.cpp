#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qsync/amplitude.hpp"
#include "test_support.hpp"

using namespace qsync;
using namespace qsync::test;
using cd = std::complex<double>;

namespace {

double cabs(cd z) { return std::abs(z); }

// Closed form at beta = 0: the cubic factors as (q + y)(q^2 + y q + x1/4)
// and E is the two-exponential solution of the quadratic.
cd two_exponential(double x1, double x3, double tau)
{
    const cd y(x1, -x3);
    const cd disc = std::sqrt(y * y - x1);
    const cd qp = (-y + disc) / 2.0, qm = (-y - disc) / 2.0;
    return (qp * std::exp(qm * tau) - qm * std::exp(qp * tau)) / (qp - qm);
}

}  // namespace

TEST(BuildCubic, WeakCouplingAtRest)
{
    const auto c = build_cubic(scaled(5.0, 0.0, 0.0));
    EXPECT_EQ(c.a2, cd(10.0, 0.0));
    EXPECT_EQ(c.a1, cd(26.25, 0.0));
    EXPECT_EQ(c.a0, cd(6.25, 0.0));
}

TEST(BuildCubic, StrongCouplingAtRest)
{
    const auto c = build_cubic(scaled(0.01, 0.0, 0.0));
    EXPECT_NEAR(cabs(c.a2 - 0.02), 0.0, 1e-17);
    EXPECT_NEAR(cabs(c.a1 - 0.0026), 0.0, 1e-17);
    EXPECT_NEAR(cabs(c.a0 - 0.000025), 0.0, 1e-19);
}

TEST(BuildCubic, DetunedMatchesLaplaceExpansion)
{
    const auto sp = scaled(0.01, 0.3, 0.0);
    const auto c = build_cubic(sp);
    EXPECT_NEAR(cabs(c.a2 - cd(0.02, -0.6)), 0.0, 1e-16);
    EXPECT_NEAR(cabs(c.a1 - cd(-0.0874, -0.006)), 0.0, 1e-16);
    EXPECT_NEAR(cabs(c.a0 - cd(0.000025, -0.00075)), 0.0, 1e-18);

    const auto e = expand_characteristic(sp);
    EXPECT_NEAR(cabs(c.a2 - e.a2), 0.0, 1e-16);
    EXPECT_NEAR(cabs(c.a1 - e.a1), 0.0, 1e-16);
    EXPECT_NEAR(cabs(c.a0 - e.a0), 0.0, 1e-18);
}

TEST(BuildCubicProperty, MatchesLaplaceExpansionEverywhere)
{
    Rng rng(101);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < 1000; ++k) {
        const auto sp = random_scaled(rng);
        const auto c = build_cubic(sp);
        const auto e = expand_characteristic(sp);
        EXPECT_LE(cabs(c.a2 - e.a2), 4 * eps * cabs(c.a2));
        EXPECT_LE(cabs(c.a1 - e.a1), 4 * eps * (cabs(sp.yPlus * sp.yMinus) + sp.x1));
        EXPECT_LE(cabs(c.a0 - e.a0), 4 * eps * cabs(c.a0));
    }
}

TEST(SolveCubic, WeakCouplingRoots)
{
    const auto r = solve_cubic(CubicCoefficientsd{10.0, 26.25, 6.25});
    EXPECT_FALSE(r.degenerate);
    EXPECT_NEAR(cabs(r.roots[0] - (-5.0 + std::sqrt(20.0)) / 2.0), 0.0, 1e-14);
    EXPECT_NEAR(cabs(r.roots[1] - (-5.0 - std::sqrt(20.0)) / 2.0), 0.0, 1e-14);
    EXPECT_NEAR(cabs(r.roots[2] + 5.0), 0.0, 1e-14);
    EXPECT_NEAR(r.roots[0].real(), -0.2639320225002103, 1e-14);
    EXPECT_NEAR(r.roots[1].real(), -4.7360679774997897, 1e-14);
}

TEST(SolveCubic, StrongCouplingRoots)
{
    const auto r = solve_cubic(CubicCoefficientsd{0.02, 0.0026, 0.000025});
    const double w = std::sqrt(0.0025 - 0.000025);
    EXPECT_NEAR(w, 0.049749371855331, 1e-14);
    EXPECT_NEAR(cabs(r.roots[0] - cd(-0.005, w)), 0.0, 1e-15);
    EXPECT_NEAR(cabs(r.roots[1] - cd(-0.005, -w)), 0.0, 1e-15);
    EXPECT_NEAR(cabs(r.roots[2] - cd(-0.01, 0.0)), 0.0, 1e-15);
}

TEST(SolveCubic, TripleRootCollapses)
{
    for (const cd root : {cd(-0.3, 0.2), cd(-2.0, 0.0), cd(1.5, -4.0), cd(-1e-2, 7e-3)}) {
        // (q - r)^3 from its elementary symmetric polynomials
        const CubicCoefficientsd c{-3.0 * root, 3.0 * root * root, -root * root * root};
        const auto r = solve_cubic(c);
        EXPECT_TRUE(r.degenerate);
        for (const auto& q : r.roots) EXPECT_LT(cabs(q - root), 1e-8) << root;
    }
}

TEST(SolveCubic, DoubleRootAtResonanceIsDegenerate)
{
    // beta = 0, delta = 0, lambda = gamma: q^2 + q + 1/4 has the double root -1/2.
    const auto r = solve_cubic(build_cubic(scaled(1.0, 0.0, 0.0)));
    EXPECT_TRUE(r.degenerate);
    EXPECT_LT(cabs(r.roots[0] + 0.5), 1e-8);
    EXPECT_LT(cabs(r.roots[1] + 0.5), 1e-8);
    EXPECT_LT(cabs(r.roots[2] + 1.0), 1e-12);
    EXPECT_THROW(residues(scaled(1.0, 0.0, 0.0), r), DegenerateRootsError);
}

TEST(SolveCubic, NearbyButSeparatedRootsAreNotDegenerate)
{
    // roots -1, -1 + 1e-4, -2
    const cd a(-1.0), b(-1.0 + 1e-4), c(-2.0);
    const CubicCoefficientsd cc{-(a + b + c), a * b + b * c + a * c, -a * b * c};
    const auto r = solve_cubic(cc);
    EXPECT_FALSE(r.degenerate);
    EXPECT_LT(cabs(r.roots[0] - b), 1e-10);
    EXPECT_LT(cabs(r.roots[1] - a), 1e-10);
}

TEST(SolveCubicProperty, ResidualsAndOrdering)
{
    Rng rng(202);
    for (int k = 0; k < 1000; ++k) {
        const auto sp = random_scaled(rng, 3e-9);
        const auto c = build_cubic(sp);
        const auto r = solve_cubic(c);
        for (const auto& q : r.roots) {
            EXPECT_LE(cabs(c(q)), 1e-10 * std::max(1.0, cabs(c.a0)));
            EXPECT_LE(q.real(), 1e-12);
        }
        EXPECT_GE(r.roots[0].real(), r.roots[1].real() - 1e-12);
        EXPECT_GE(r.roots[1].real(), r.roots[2].real() - 1e-12);
    }
}

TEST(Residues, SpuriousRootCancelsAtRest)
{
    const auto sol = solve_amplitude(scaled(5.0, 0.0, 0.0));
    EXPECT_NEAR(cabs(sol.roots[2] + 5.0), 0.0, 1e-14);
    EXPECT_LT(cabs(sol.coeffs[2]), 1e-14);
    const auto m = residue_moments(sol);
    EXPECT_LT(cabs(m[0] - 1.0), 1e-14);
}

TEST(Residues, ConjugatePairAtStrongCoupling)
{
    const auto sol = solve_amplitude(scaled(0.01, 0.0, 0.0));
    const cd qp = sol.roots[0], qm = sol.roots[1];
    EXPECT_LT(cabs(sol.coeffs[0] - (-qm / (qp - qm))), 1e-12);
    EXPECT_LT(cabs(sol.coeffs[1] - (qp / (qp - qm))), 1e-12);
    EXPECT_LT(cabs(sol.coeffs[2]), 1e-12);
}

TEST(ResiduesProperty, MomentIdentities)
{
    Rng rng(303);
    for (int k = 0; k < 1000; ++k) {
        const auto sp = random_scaled(rng, 3e-9);
        const auto m = residue_moments(solve_amplitude(sp));
        EXPECT_LT(cabs(m[0] - 1.0), 1e-10);
        EXPECT_LT(cabs(m[1]), 1e-10);
        EXPECT_LT(cabs(m[2] + sp.x1 / 4.0), 1e-9);
    }
}

TEST(EvalAmplitude, UnityAtTimeZero)
{
    Rng rng(404);
    for (int k = 0; k < 100; ++k) {
        EXPECT_LT(cabs(eval_amplitude(solve_amplitude(random_scaled(rng)), 0.0) - 1.0), 1e-12);
    }
}

TEST(EvalAmplitude, FrozenReferenceValues)
{
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(5.0, 0.0, 0.0)), 5.0) - kWeakE5), 1e-12);
    EXPECT_NEAR(std::abs(kWeakE5), 0.283, 5e-4);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(5.0, 0.0, 0.0)), 3.0) - kWeakE3), 1e-12);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(5.0, 0.0, 1e-11)), 5.0) - kWeakMovingE5), 1e-11);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(5.0, 5.0, 1e-11)), 5.0) - kWeakDetunedE5), 1e-11);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(0.01, 0.0, 0.0)), 100.0) - kStrongRestE100), 1e-11);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(0.01, 0.0, 1e-11)), 100.0) - kStrongSlowE100), 1e-10);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(0.01, 0.0, 1e-10)), 100.0) - kStrongFastE100), 1e-10);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(0.01, 0.3, 1e-11)), 100.0) - kStrongDetunedE100), 1e-10);
    EXPECT_LT(cabs(eval_amplitude(solve_amplitude(scaled(0.37, -0.42, 2.2e-10)), 37.0) - kGenericE37), 1e-11);
}

TEST(EvalAmplitude, VacuumRabiFirstMinimum)
{
    const auto sol = solve_amplitude(scaled(0.01, 0.0, 0.0));
    const double w = sol.roots[0].imag();
    EXPECT_NEAR(std::numbers::pi / w, 63.1, 0.05);
    const auto grid = uniform_grid(0.0, 100.0, 10001);
    const auto e = eval_amplitude_grid<double>(sol, grid);
    // At rest E is real; its first trough is the first backflow of the excitation.
    std::size_t first = 0;
    for (std::size_t k = 1; k + 1 < e.size(); ++k) {
        EXPECT_LT(std::abs(e[k].imag()), 1e-12);
        if (e[k].real() < e[k - 1].real() && e[k].real() <= e[k + 1].real()) {
            first = k;
            break;
        }
    }
    ASSERT_GT(first, 0u);
    EXPECT_NEAR(grid[first], kStrongRestFirstTrough, 0.011);
}

TEST(EvalAmplitude, GridMatchesScalarCalls)
{
    const auto sol = solve_amplitude(scaled(0.2, 0.1, 1e-10));
    EXPECT_EQ(eval_amplitude_grid<double>(sol, std::vector<double>{0.0}).front(), cd(1.0, 0.0));
    const std::vector<double> g{0.5, 2.0, 30.0};
    const auto v = eval_amplitude_grid<double>(sol, g);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(v[k], eval_amplitude(sol, g[k]));
    EXPECT_THROW(eval_amplitude_grid<double>(sol, std::vector<double>{1.0, 0.5}), std::invalid_argument);
}

TEST(EvalAmplitude, ErrorPaths)
{
    const auto sol = solve_amplitude(scaled(0.2, 0.1, 0.0));
    EXPECT_THROW(eval_amplitude(sol, -1.0), std::invalid_argument);

    AmplitudeSolutiond unstable;
    unstable.roots = {cd(0.1, 0.0), cd(-1.0, 0.0), cd(-2.0, 0.0)};
    unstable.coeffs = {cd(0.5), cd(0.25), cd(0.25)};
    EXPECT_NO_THROW(eval_amplitude(unstable, 0.0));
    EXPECT_THROW(eval_amplitude(unstable, 1.0), PhysicalityError);
}

TEST(EvalAmplitude, LargeTimeUnderflowsCleanly)
{
    const auto sol = solve_amplitude(scaled(10.0, 0.5, 3e-10));
    const cd e = eval_amplitude(sol, 1e6);
    EXPECT_TRUE(std::isfinite(e.real()) && std::isfinite(e.imag()));
    EXPECT_LT(cabs(e), 1e-30);
}

TEST(EvalAmplitudeProperty, ZeroSpeedReducesToTwoExponentials)
{
    Rng rng(505);
    const auto grid = uniform_grid(0.0, 100.0, 1001);
    for (int k = 0; k < 200; ++k) {
        const double x1 = rng.log_uniform(0.005, 10.0), x3 = rng.uniform(-1.0, 1.0);
        if (std::abs(x1 - 1.0) < 1e-3 && std::abs(x3) < 1e-3) continue;
        const auto sol = solve_amplitude(scaled(x1, x3, 0.0));
        for (const double t : grid) EXPECT_LT(cabs(eval_amplitude(sol, t) - two_exponential(x1, x3, t)), 1e-10);
    }
}

TEST(EvalAmplitudeProperty, DecayAndUnitDiskBound)
{
    Rng rng(606);
    const auto grid = uniform_grid(0.0, 200.0, 2001);
    for (int k = 0; k < 300; ++k) {
        const auto sol = solve_amplitude(random_scaled(rng, 3e-9));
        for (const auto& q : sol.roots) EXPECT_LE(q.real(), 1e-12);
        for (const auto& e : eval_amplitude_grid<double>(sol, grid)) EXPECT_LE(cabs(e), 1.0 + 1e-8);
    }
}

TEST(EvalAmplitude, ExtendedPrecisionInstantiation)
{
    PhysicalParams<long double> p;
    p.gamma = 1.0L;
    p.lambda = 0.37L;
    p.delta = -0.42L;
    p.omega0 = 1.5e9L;
    p.beta = 2.2e-10L;
    const auto sol = solve_amplitude(scale(p));
    const auto e = eval_amplitude(sol, 37.0L);
    EXPECT_LT(std::abs(std::complex<double>(static_cast<double>(e.real()), static_cast<double>(e.imag())) - kGenericE37),
              1e-13);
}
