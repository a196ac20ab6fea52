#pragma once

#include "nvne/hermitian.hpp"

namespace nvne {

/// Below this |q - 1| every q-functional switches to its q = 1 limit.
inline constexpr double kQOneThreshold = 1e-8;

/// Units: k_B = 1, so T = 1 / beta.
struct ThermoParams {
    double q = 1.0;
    double beta = 1.0;
    double mu = 1.0;

    double temperature() const { return 1.0 / beta; }
    bool is_gibbs() const;
    /// Throws DomainError unless q, beta and mu are positive and finite.
    void validate() const;
};

/// S_q = (1 - sum l^q) / (q - 1); von Neumann entropy -sum l ln l near q = 1.
double tsallis_entropy(const DensityMatrix& rho, double q);
/// U_q = Tr(rho^q H).
double internal_energy(const DensityMatrix& rho, const HermitianOperator& h, double q);
/// F_q = U_q - T S_q.
double free_energy(const DensityMatrix& rho, const HermitianOperator& h, const ThermoParams& p);

/// Energy-Casimir form of the same functional: U_q + Phi(C_1, C_q) with
/// Phi = -T (C_1 - C_q) / (q - 1), where C_1 = Tr rho and C_q = Tr rho^q.
double energy_casimir_function(const DensityMatrix& rho, const HermitianOperator& h,
                               const ThermoParams& p);

// -- spin 1/2 in H = -mu sz, state diag(lam, 1 - lam) -------------------------

/// F(lam) = -mu (lam^q - (1-lam)^q) - T (1 - lam^q - (1-lam)^q) / (q - 1)
double spin_free_energy(const ThermoParams& p, double lam);
/// dF/dlam, analytic.
double spin_free_energy_slope(const ThermoParams& p, double lam);
/// Central second difference of spin_free_energy, step 1e-5 (shrunk near the
/// ends of (0, 1) so the stencil stays inside).
double stability_second_derivative(const ThermoParams& p, double lam);

struct EquilibriumResult {
    double lam = 0.5;
    double free_energy = 0.0;
    double second_derivative = 0.0;
    DensityMatrix state = DensityMatrix::maximally_mixed(2);
};

/// Solves (lam / (1 - lam))^(q-1) = (1 + (q-1) beta mu) / (1 - (q-1) beta mu)
/// by bisection on (1/2, 1); Gibbs weights when |q - 1| < kQOneThreshold.
/// Throws OutOfDomain when |q - 1| beta mu >= 1, where the closed form fails.
/// Throws NumericalFailure if the root is not stationary (|dF/dlam| >= 1e-8).
EquilibriumResult spin_equilibrium(const ThermoParams& p);

/// General-dimension equilibrium by direct minimization of F_q over states
/// diagonal in the H eigenbasis (pairwise golden-section sweeps on the
/// populations). Numerical, no closed form; p.mu is ignored.
DensityMatrix numeric_equilibrium(const HermitianOperator& h, const ThermoParams& p);

}  // namespace nvne
