#pragma once

#include <functional>

#include "nvne/deformation.hpp"
#include "nvne/hermitian.hpp"

namespace nvne {

/// What to do with a divided difference whose limit f'(lambda) diverges
/// (lambda = 0 with a power q < 1).
enum class DivergentSlope {
    Throw,  ///< DomainError
    Drop,   ///< use 0; the matching commutator entry vanishes anyway
};

/// Divided differences of f on a spectrum:
///   L_ij = (f(l_i) - f(l_j)) / (l_i - l_j)   for |l_i - l_j| > kDegenerateGap,
///   L_ij = f'((l_i + l_j)/2)                 otherwise.
/// Conjugating (L o X) back from the eigenbasis gives the derivative of the
/// matrix function in direction X.
inline constexpr double kDegenerateGap = 1e-10;
Eigen::MatrixXd divided_differences(const RealVector& eigenvalues, const DeformationFunction& f,
                                    DivergentSlope policy);

/// <H>_f = (Tr s) Tr[f(s / Tr s) H] for a Hermitian positive semidefinite s,
/// normalized or not. Linear under s -> c s. Throws ZeroTrace.
double hamiltonian_function(const HermitianOperator& state, const HermitianOperator& h,
                            const DeformationFunction& f);
double hamiltonian_function(const DensityMatrix& rho, const HermitianOperator& h,
                            const DeformationFunction& f);

/// Functional derivative of <H>_f:
///   H_eff = D f(s)[H] + (Tr f(s) H - Tr s f'(s) H) 1,   s = rho / Tr rho.
/// The scalar part is kept so that Tr(rho H_eff) = <H>_f holds exactly.
HermitianOperator effective_hamiltonian(const DensityMatrix& rho, const HermitianOperator& h,
                                        const DeformationFunction& f,
                                        DivergentSlope policy = DivergentSlope::Throw);
HermitianOperator effective_hamiltonian(const HermitianOperator& state, const HermitianOperator& h,
                                        const DeformationFunction& f,
                                        DivergentSlope policy = DivergentSlope::Throw);

/// Generator G with [G, rho] = [H, f(rho)], assembled from divided differences
/// in the rho eigenbasis. Never throws on degenerate or zero eigenvalues.
HermitianOperator generator(const DensityMatrix& rho, const HermitianOperator& h,
                            const DeformationFunction& f);

/// A real functional on Hermitian matrices, with an optional analytic
/// gradient. Gradients are defined by dA = Tr(grad A . dX) for Hermitian dX.
struct ObservableFunctional {
    std::function<double(const Matrix&)> value;
    std::function<Matrix(const Matrix&)> gradient;  // empty: finite differences
};

inline constexpr double kGradientStep = 1e-6;

/// Central differences along the real and imaginary matrix-element directions.
HermitianOperator finite_difference_gradient(const ObservableFunctional& a, const Matrix& at,
                                             double step = kGradientStep);
/// Analytic gradient when available, finite differences otherwise.
/// Throws GradientFailure for non-finite or non-Hermitian (beyond 1e-6) results.
HermitianOperator functional_gradient(const ObservableFunctional& a, const Matrix& at);

/// {A, B}(rho) = -i Tr(rho [grad A, grad B]).
double poisson_bracket(const ObservableFunctional& a, const ObservableFunctional& b,
                       const DensityMatrix& rho);

/// C_n = Tr rho^n.
double casimir(const DensityMatrix& rho, int n);
/// <H>_q = Tr(rho^q H).
double q_average(const DensityMatrix& rho, const HermitianOperator& h, double q);

ObservableFunctional casimir_functional(int n);
ObservableFunctional q_average_functional(const HermitianOperator& h, double q);
ObservableFunctional hamiltonian_functional(const HermitianOperator& h, const DeformationFunction& f);
/// X -> Tr(A X)
ObservableFunctional linear_functional(const HermitianOperator& a);
/// Pointwise product A(X) B(X).
ObservableFunctional product(ObservableFunctional a, ObservableFunctional b);

}  // namespace nvne
