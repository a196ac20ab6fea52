#pragma once

// Seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "nvne/hermitian.hpp"
#include "nvne/lie_poisson.hpp"

namespace nvne::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    Matrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(normal(), normal());
        }
        return m;
    }

    /// GUE-like Hermitian matrix with unit-variance entries.
    HermitianOperator hermitian(Eigen::Index dim) {
        const Matrix a = ginibre(dim, dim);
        return HermitianOperator::hermitian_part(a + a.adjoint());
    }

    /// rank-r density matrix from a dim x r Ginibre factor.
    DensityMatrix density(Eigen::Index dim, Eigen::Index rank = -1) {
        if (rank < 0) rank = dim;
        const Matrix g = ginibre(dim, rank);
        return validate_density(g * g.adjoint());
    }

    DensityMatrix pure(Eigen::Index dim) {
        return DensityMatrix::pure(ginibre(dim, 1).col(0));
    }

    BlochParams bloch() {
        return {uniform(), uniform(0.0, std::numbers::pi), uniform(-std::numbers::pi, std::numbers::pi)};
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double frobenius(const Matrix& m) { return m.norm(); }

/// Random smooth nonlinear functional without an analytic gradient:
///   Tr(A X) + c1 Tr(B X)^2 + c2 Tr(C X^2) + c3 sin(Tr(D X)).
inline ObservableFunctional random_functional(Rng& rng, Eigen::Index dim) {
    const Matrix a = rng.hermitian(dim).matrix();
    const Matrix b = rng.hermitian(dim).matrix();
    const Matrix c = rng.hermitian(dim).matrix();
    const Matrix d = rng.hermitian(dim).matrix();
    const double c1 = rng.normal(), c2 = rng.normal(), c3 = rng.normal();
    ObservableFunctional f;
    f.value = [=](const Matrix& x) {
        const double tb = (b * x).trace().real();
        return (a * x).trace().real() + c1 * tb * tb + c2 * (c * x * x).trace().real() +
               c3 * std::sin((d * x).trace().real());
    };
    return f;
}

}  // namespace nvne::testing
