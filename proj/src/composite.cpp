#include "nvne/composite.hpp"

#include <algorithm>

#include "nvne/errors.hpp"
#include "nvne/lie_poisson.hpp"

namespace nvne {

void CompositeSystem::validate() const {
    if (dim_I < 1 || dim_II < 1) throw DimensionMismatch("composite: subsystem dimensions must be >= 1");
    if (h_I.dim() != dim_I) throw DimensionMismatch("composite: H_I does not match dim_I");
    if (h_II.dim() != dim_II) throw DimensionMismatch("composite: H_II does not match dim_II");
    if (!(q1 > 0.0) || !(q2 > 0.0)) throw DomainError("composite: q1 and q2 must be positive");
}

HermitianOperator joint_generator(const DensityMatrix& rho, const CompositeSystem& sys) {
    const DensityMatrix rho_I = partial_trace(rho, sys.dims(), Subsystem::I);
    const DensityMatrix rho_II = partial_trace(rho, sys.dims(), Subsystem::II);
    const HermitianOperator g_I = effective_hamiltonian(
        rho_I, sys.h_I, DeformationFunction::power_law(sys.q1), DivergentSlope::Drop);
    const HermitianOperator g_II = effective_hamiltonian(
        rho_II, sys.h_II, DeformationFunction::power_law(sys.q2), DivergentSlope::Drop);
    return HermitianOperator::hermitian_part(tensor_product(g_I.matrix(), identity(sys.dim_II)) +
                                             tensor_product(identity(sys.dim_I), g_II.matrix()));
}

DensityMatrix composite_step(const DensityMatrix& rho, const CompositeSystem& sys, double dt,
                             Scheme scheme) {
    if (!(dt > 0.0)) throw DomainError("composite_step: dt must be positive");
    const HermitianOperator g1 = joint_generator(rho, sys);
    if (scheme == Scheme::UnitaryEuler) return validate_density(conjugate(rho.matrix(), g1, dt));
    const DensityMatrix half = validate_density(conjugate(rho.matrix(), g1, 0.5 * dt));
    const HermitianOperator g2 = joint_generator(half, sys);
    return validate_density(conjugate(rho.matrix(), g2, dt));
}

namespace {

InvariantSample composite_invariants(const DensityMatrix& rho, const CompositeSystem& sys) {
    InvariantSample s;
    for (int n = 1; n <= 5; ++n) s.casimirs[n - 1] = casimir(rho, n);
    s.energy = q_average(partial_trace(rho, sys.dims(), Subsystem::I), sys.h_I, sys.q1) +
               q_average(partial_trace(rho, sys.dims(), Subsystem::II), sys.h_II, sys.q2);
    return s;
}

}  // namespace

Trajectory evolve_composite(const DensityMatrix& rho0, const CompositeSystem& sys,
                            const IntegratorConfig& cfg) {
    sys.validate();
    cfg.validate();
    if (rho0.dim() != sys.dim_I * sys.dim_II) {
        throw DimensionMismatch("evolve_composite: state dimension is not dim_I * dim_II");
    }
    const long steps = cfg.step_count();
    Trajectory traj;
    const auto record = [&](double t, const DensityMatrix& rho) {
        traj.times.push_back(t);
        traj.states.push_back(rho);
        traj.invariants.push_back(composite_invariants(rho, sys));
    };
    record(0.0, rho0);
    DensityMatrix rho = rho0;
    for (long k = 1; k <= steps; ++k) {
        rho = composite_step(rho, sys, cfg.dt, cfg.scheme);
        if (k % cfg.record_every == 0 || k == steps) record(static_cast<double>(k) * cfg.dt, rho);
    }
    return traj;
}

ReductionReport reduction_consistency(const Trajectory& joint, const CompositeSystem& sys,
                                      const IntegratorConfig& cfg) {
    ReductionReport report;
    if (joint.states.empty()) return report;
    IntegratorConfig sub = cfg;
    sub.energy_projection = false;

    const DensityMatrix& rho0 = joint.states.front();
    report.reduced_I = evolve(partial_trace(rho0, sys.dims(), Subsystem::I), sys.h_I,
                              DeformationFunction::power_law(sys.q1), sub);
    report.reduced_II = evolve(partial_trace(rho0, sys.dims(), Subsystem::II), sys.h_II,
                               DeformationFunction::power_law(sys.q2), sub);
    if (report.reduced_I.size() != joint.size() || report.reduced_II.size() != joint.size()) {
        throw DimensionMismatch("reduction_consistency: trajectory was not produced with this config");
    }
    for (std::size_t k = 0; k < joint.size(); ++k) {
        const Matrix& m = joint.states[k].matrix();
        report.max_deviation_I = std::max(
            report.max_deviation_I,
            trace_distance(partial_trace(m, sys.dims(), Subsystem::I), report.reduced_I.states[k].matrix()));
        report.max_deviation_II = std::max(
            report.max_deviation_II,
            trace_distance(partial_trace(m, sys.dims(), Subsystem::II), report.reduced_II.states[k].matrix()));
    }
    return report;
}

}  // namespace nvne
