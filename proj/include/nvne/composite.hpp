#pragma once

#include "nvne/deformation.hpp"
#include "nvne/dynamics.hpp"
#include "nvne/hermitian.hpp"

namespace nvne {

/// Two noninteracting subsystems, each with its own Hamiltonian and power.
struct CompositeSystem {
    Eigen::Index dim_I = 2;
    Eigen::Index dim_II = 2;
    HermitianOperator h_I;
    HermitianOperator h_II;
    double q1 = 1.0;
    double q2 = 1.0;

    /// Throws DomainError / DimensionMismatch on inconsistent fields.
    void validate() const;
    std::pair<Eigen::Index, Eigen::Index> dims() const { return {dim_I, dim_II}; }
};

/// H_I_eff(rho_I) x 1 + 1 x H_II_eff(rho_II), reductions taken from `rho`.
/// Zero-eigenvalue entries where f' diverges are dropped (see DivergentSlope).
HermitianOperator joint_generator(const DensityMatrix& rho, const CompositeSystem& sys);

/// One unitary-midpoint step of the joint equation.
DensityMatrix composite_step(const DensityMatrix& rho, const CompositeSystem& sys, double dt,
                             Scheme scheme = Scheme::UnitaryMidpoint);

/// Integrates the joint state; the reductions are recomputed from it at every
/// stage. Invariants are logged for the joint state with the sum of the two
/// subsystem energies <H_I>_q1 + <H_II>_q2.
Trajectory evolve_composite(const DensityMatrix& rho0, const CompositeSystem& sys,
                            const IntegratorConfig& cfg);

struct ReductionReport {
    double max_deviation_I = 0.0;   ///< max_t || Tr_II rho(t) - rho_I(t) ||_tr
    double max_deviation_II = 0.0;  ///< max_t || Tr_I rho(t) - rho_II(t) ||_tr
    Trajectory reduced_I;           ///< independently evolved subsystem I
    Trajectory reduced_II;

    double max_deviation() const { return std::max(max_deviation_I, max_deviation_II); }
};

/// Evolves Tr_II rho(0) and Tr_I rho(0) on their own and compares them with
/// the reductions of the joint trajectory at every recorded time, using the
/// joint run's step size and scheme.
ReductionReport reduction_consistency(const Trajectory& joint, const CompositeSystem& sys,
                                      const IntegratorConfig& cfg);

}  // namespace nvne
