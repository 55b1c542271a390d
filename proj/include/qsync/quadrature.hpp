#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qsync {

template <typename Scalar>
struct QuadratureRule {
    std::vector<Scalar> nodes;
    std::vector<Scalar> weights;
};

/**
 * Gauss-Legendre rule on [-1, 1] by the Golub-Welsch construction, with each
 * node refined by Newton iteration on the Legendre recurrence. Nodes ascend.
 */
template <typename Scalar>
QuadratureRule<Scalar> gauss_legendre(int n)
{
    using std::abs;
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");

    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix J = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const Scalar kk(k);
        const Scalar off = kk / std::sqrt(Scalar{4} * kk * kk - Scalar{1});
        J(k, k - 1) = off;
        J(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(J);

    QuadratureRule<Scalar> rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        Scalar x = eig.eigenvalues()(i);
        Scalar dp{1};
        for (int it = 0; it < 3; ++it) {
            Scalar p0{1}, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar p2 = ((Scalar(2 * k - 1)) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
                p0 = p1;
                p1 = p2;
            }
            dp = Scalar(n) * (x * p1 - p0) / (x * x - Scalar{1});
            const Scalar dx = p1 / dp;
            x -= dx;
            if (abs(dx) < std::numeric_limits<Scalar>::epsilon()) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = Scalar{2} / ((Scalar{1} - x * x) * dp * dp);
    }
    return rule;
}

/// Gauss-Legendre rule mapped onto [a, b].
template <typename Scalar>
QuadratureRule<Scalar> gauss_legendre(int n, Scalar a, Scalar b)
{
    auto rule = gauss_legendre<Scalar>(n);
    const Scalar half = (b - a) / Scalar{2};
    const Scalar mid = (b + a) / Scalar{2};
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

}  // namespace qsync
