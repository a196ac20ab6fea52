#pragma once

#include <array>
#include <utility>
#include <vector>

#include "nvne/deformation.hpp"
#include "nvne/hermitian.hpp"

namespace nvne {

enum class Scheme {
    UnitaryMidpoint,  ///< second order
    UnitaryEuler,     ///< first order, kept for convergence studies
};

struct IntegratorConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    Scheme scheme = Scheme::UnitaryMidpoint;
    int record_every = 1;
    /// Restore <H>_f after every step with `project_energy`. The midpoint
    /// scheme alone keeps the spectrum to round-off but the energy only to O(dt^2).
    bool energy_projection = false;

    /// Throws DomainError on dt <= 0, t_final <= 0, dt > t_final or record_every < 1.
    void validate() const;
    /// ceil(t_final / dt), tolerant to round-off in the ratio.
    long step_count() const;
};

struct InvariantSample {
    std::array<double, 5> casimirs{};  ///< C_1 .. C_5
    double energy = 0.0;               ///< <H>_f
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<InvariantSample> invariants;

    std::size_t size() const noexcept { return times.size(); }
};

InvariantSample sample_invariants(const DensityMatrix& rho, const HermitianOperator& h,
                                  const DeformationFunction& f);

/// exp(-i G t) rho exp(+i G t), exponential taken through the spectrum of G.
Matrix conjugate(const Matrix& rho, const HermitianOperator& g, double t);

/// One unitary step of i rho' = [H, f(rho)]. The result is isospectral with
/// the input up to round-off.
DensityMatrix step(const DensityMatrix& rho, const HermitianOperator& h, const DeformationFunction& f,
                   double dt, Scheme scheme = Scheme::UnitaryMidpoint);

/// Moves rho along its unitary orbit, in direction i[f(rho), H], until
/// <H>_f equals `target` (Newton, at most `max_iter` corrections). The
/// spectrum is untouched. Returns rho unchanged at fixed points, where
/// [f(rho), H] = 0 and no orbit direction changes the energy.
DensityMatrix project_energy(const DensityMatrix& rho, const HermitianOperator& h,
                             const DeformationFunction& f, double target, int max_iter = 4);

/// Records t = 0, every `record_every`-th step and the final step.
Trajectory evolve(const DensityMatrix& rho0, const HermitianOperator& h, const DeformationFunction& f,
                  const IntegratorConfig& cfg);

/// Worst drift of each conserved quantity along a trajectory.
/// Eigenvalue drift is absolute (eigenvalues live in [0,1]); Casimir and energy
/// drifts are relative to max(|x(0)|, kRelativeDriftFloor).
struct DriftReport {
    double eigenvalue = 0.0;
    std::array<double, 5> casimir{};
    double energy = 0.0;
    double hermiticity = 0.0;  ///< max |rho - rho^dagger|
    double positivity = 0.0;   ///< max(0, -lowest eigenvalue)
    double trace = 0.0;        ///< max |Tr rho - 1|

    double max_casimir(int from = 1, int to = 5) const;
};

inline constexpr double kRelativeDriftFloor = 1e-6;

DriftReport invariant_report(const Trajectory& traj);

/// |d arg(rho_ij)/dt| from a least-squares fit of the unwrapped phase.
/// Throws SignalTooWeak if |rho_ij| < 1e-6 at any recorded time.
double precession_frequency(const Trajectory& traj, std::pair<Eigen::Index, Eigen::Index> element);

/// 2 mu (f(l1) - f(l2)) / (l1 - l2); f'(l) when l1 == l2.
double predicted_precession(const DeformationFunction& f, double mu, double lam1, double lam2);

}  // namespace nvne
