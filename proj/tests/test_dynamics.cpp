#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nvne/dynamics.hpp"
#include "nvne/errors.hpp"
#include "nvne/lie_poisson.hpp"
#include "test_support.hpp"

using namespace nvne;
using nvne::testing::Rng;

namespace {

const HermitianOperator kMinusZ(-pauli_z());

IntegratorConfig config(double dt, double t_final, int record_every = 1, bool projection = false) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.record_every = record_every;
    cfg.energy_projection = projection;
    return cfg;
}

// Phase of rho_01 on a Bloch state with H = -mu sz advances at +omega.
double offdiag_phase(const DensityMatrix& rho) { return std::arg(rho.matrix()(0, 1)); }

double wrap(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

TEST(IntegratorConfigTest, Validation) {
    EXPECT_THROW(config(0.0, 1.0).validate(), DomainError);
    EXPECT_THROW(config(-1e-3, 1.0).validate(), DomainError);
    EXPECT_THROW(config(2.0, 1.0).validate(), DomainError);
    EXPECT_THROW(config(1e-3, 1.0, 0).validate(), DomainError);
    EXPECT_EQ(config(1e-3, 1.0).step_count(), 1000);
    EXPECT_EQ(config(0.3, 1.0).step_count(), 4);
}

TEST(Step, CommutingStateIsUnchanged) {
    const DensityMatrix rho = DensityMatrix::diagonal(Eigen::Vector2d(0.7, 0.3));
    const DensityMatrix next = step(rho, kMinusZ, DeformationFunction::power_law(2.0), 0.1);
    EXPECT_LE(max_abs(next.matrix() - rho.matrix()), 1e-15);
}

TEST(Step, PureStateMatchesLinearStep) {
    Rng rng(41);
    const DensityMatrix psi = rng.pure(3);
    const HermitianOperator h = rng.hermitian(3);
    const double dt = 1e-3;
    const Matrix linear = conjugate(psi.matrix(), h, dt);
    const DensityMatrix next = step(psi, h, DeformationFunction::power_law(2.0), dt);
    EXPECT_LE(max_abs(next.matrix() - linear), 50.0 * dt * dt * dt);
}

TEST(Step, SpinPhaseAdvance) {
    const DensityMatrix rho = bloch_state({0.75, std::numbers::pi / 2, 0.0});
    const double dt = 1e-3;
    const DensityMatrix next = step(rho, kMinusZ, DeformationFunction::power_law(2.0), dt);
    const BlochParams p = bloch_params(next);
    EXPECT_NEAR(wrap(p.psi - 0.0), -2.0 * dt, 1e-12);
    EXPECT_NEAR(p.lam, 0.75, 1e-14);
    EXPECT_NEAR(p.phi, std::numbers::pi / 2, 1e-12);
}

TEST(Step, RejectsBadStep) {
    EXPECT_THROW(step(DensityMatrix::maximally_mixed(2), kMinusZ, DeformationFunction::identity(), 0.0),
                 DomainError);
}

TEST(Evolve, MaximallyMixedIsConstant) {
    Rng rng(42);
    const Trajectory traj =
        evolve(DensityMatrix::maximally_mixed(3), rng.hermitian(3), DeformationFunction::power_law(2.0),
               config(1e-2, 10.0, 100));
    const DriftReport r = invariant_report(traj);
    EXPECT_LE(r.eigenvalue, 1e-12);
    EXPECT_LE(r.energy, 1e-10);
    for (const DensityMatrix& s : traj.states) EXPECT_LE(max_abs(s.matrix() - identity(3) / 3.0), 1e-12);
}

TEST(Evolve, RecordsRequestedTimes) {
    const Trajectory traj = evolve(bloch_state({0.75, 1.0, 0.0}), kMinusZ, DeformationFunction::power_law(2.0),
                                   config(0.1, 1.05, 3));
    // 11 steps: t = 0, 0.3, 0.6, 0.9 and the final step at 1.1.
    ASSERT_EQ(traj.size(), 5u);
    EXPECT_NEAR(traj.times.back(), 1.1, 1e-12);
    for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(Evolve, LinearAndQuadraticPrecessAtTwoMu) {
    for (double q : {1.0, 2.0}) {
        const Trajectory traj = evolve(bloch_state({0.75, std::numbers::pi / 2, 0.0}), kMinusZ,
                                       DeformationFunction::power_law(q), config(1e-3, 10.0, 10));
        EXPECT_NEAR(precession_frequency(traj, {0, 1}), 2.0, 1e-6) << "q=" << q;
        EXPECT_LE(invariant_report(traj).eigenvalue, 1e-9);
    }
}

TEST(Evolve, CubicPrecession) {
    const Trajectory traj = evolve(bloch_state({0.9, std::numbers::pi / 3, 0.4}), kMinusZ,
                                   DeformationFunction::power_law(3.0), config(1e-3, 10.0, 10));
    const double expect = 2.0 * (0.729 - 0.001) / 0.8;
    EXPECT_NEAR(expect, 1.82, 1e-12);
    EXPECT_NEAR(precession_frequency(traj, {0, 1}), expect, 1e-4);
    EXPECT_NEAR(predicted_precession(DeformationFunction::power_law(3.0), 1.0, 0.9, 0.1), expect, 1e-14);
}

TEST(Evolve, PhaseOfOffDiagonalIncreases) {
    const Trajectory traj = evolve(bloch_state({0.8, 1.0, 0.3}), kMinusZ, DeformationFunction::power_law(3.0),
                                   config(1e-3, 0.1, 100));
    const double omega = predicted_precession(DeformationFunction::power_law(3.0), 1.0, 0.8, 0.2);
    EXPECT_NEAR(wrap(offdiag_phase(traj.states.back()) - offdiag_phase(traj.states.front())), omega * 0.1, 1e-8);
}

TEST(Evolve, SpinLongRunInvariants) {
    const Trajectory traj = evolve(bloch_state({0.75, 1.1, 0.2}), kMinusZ, DeformationFunction::power_law(2.0),
                                   config(1e-3, 100.0, 1000));
    const DriftReport r = invariant_report(traj);
    EXPECT_LT(r.eigenvalue, 1e-9);
    EXPECT_LT(r.energy, 1e-8);
}

TEST(Evolve, SpectrumInvariance) {
    Rng rng(43);
    for (Eigen::Index d : {2, 3, 4}) {
        for (double q : {0.5, 1.0, 2.0, 3.0}) {
            const DensityMatrix rho0 = rng.density(d);
            const HermitianOperator h = rng.hermitian(d);
            const Trajectory traj = evolve(rho0, h, DeformationFunction::power_law(q), config(1e-3, 10.0, 500));
            const DriftReport r = invariant_report(traj);
            EXPECT_LT(r.eigenvalue, 1e-9) << "d=" << d << " q=" << q;
            EXPECT_LT(r.max_casimir(2, 5), 1e-8) << "d=" << d << " q=" << q;
            EXPECT_LE(r.hermiticity, 1e-15);
            EXPECT_LE(r.trace, 1e-13);
            EXPECT_EQ(r.positivity, 0.0);
        }
    }
}

TEST(Evolve, EnergyConservationWithProjection) {
    Rng rng(44);
    for (double q : {0.5, 2.0, 3.0}) {
        const DensityMatrix rho0 = rng.density(4);
        const HermitianOperator h = rng.hermitian(4);
        const auto f = DeformationFunction::power_law(q);
        const DriftReport raw = invariant_report(evolve(rho0, h, f, config(1e-3, 10.0, 500)));
        const DriftReport projected = invariant_report(evolve(rho0, h, f, config(1e-3, 10.0, 500, true)));
        EXPECT_LT(projected.energy, 1e-8) << "q=" << q;
        EXPECT_LT(projected.eigenvalue, 1e-9) << "q=" << q;
        // The bare scheme keeps the energy only to second order in dt.
        EXPECT_LE(projected.energy, raw.energy) << "q=" << q;
    }
}

TEST(ProjectEnergy, FixedPointIsUntouched) {
    const DensityMatrix rho = DensityMatrix::diagonal(Eigen::Vector2d(0.7, 0.3));
    const DensityMatrix out = project_energy(rho, kMinusZ, DeformationFunction::power_law(2.0), -0.1);
    EXPECT_LE(max_abs(out.matrix() - rho.matrix()), 0.0);
}

TEST(ProjectEnergy, RestoresTargetOnOrbit) {
    Rng rng(45);
    const DensityMatrix rho = rng.density(3);
    const HermitianOperator h = rng.hermitian(3);
    const auto f = DeformationFunction::power_law(2.0);
    const double e0 = hamiltonian_function(rho, h, f);
    const DensityMatrix moved = project_energy(rho, h, f, e0 + 1e-6);
    EXPECT_NEAR(hamiltonian_function(moved, h, f), e0 + 1e-6, 1e-14);
    EXPECT_LE((moved.eigenvalues() - rho.eigenvalues()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Evolve, PureStateStaysLinear) {
    Rng rng(46);
    const double dt = 1e-3, t = 10.0;
    for (double q : {0.5, 2.0, 3.0}) {
        const DensityMatrix psi = rng.pure(3);
        const HermitianOperator h = rng.hermitian(3);
        const Trajectory traj = evolve(psi, h, DeformationFunction::power_law(q), config(dt, t, 1000));
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const Matrix linear = conjugate(psi.matrix(), h, traj.times[k]);
            EXPECT_LT(trace_distance(traj.states[k].matrix(), linear), 1e-8 * traj.times[k] / dt + 1e-14);
        }
    }
}

TEST(Evolve, SecondOrderConvergence) {
    const DensityMatrix rho0 = bloch_state({0.8, std::numbers::pi / 3, 0.0});
    const auto f = DeformationFunction::power_law(3.0);
    const double t = 5.0;
    const auto deviation = [&](double dt) {
        const DensityMatrix coarse = evolve(rho0, kMinusZ, f, config(dt, t, 1 << 30)).states.back();
        const DensityMatrix fine = evolve(rho0, kMinusZ, f, config(dt / 10, t, 1 << 30)).states.back();
        return max_abs(coarse.matrix() - fine.matrix());
    };
    const double ratio = deviation(0.02) / deviation(0.01);
    EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(Evolve, EulerIsFirstOrder) {
    const DensityMatrix rho0 = bloch_state({0.8, std::numbers::pi / 3, 0.0});
    const auto f = DeformationFunction::power_law(3.0);
    auto cfg = config(0.01, 2.0, 1 << 30);
    cfg.scheme = Scheme::UnitaryEuler;
    const auto deviation = [&](double dt) {
        auto c = cfg;
        c.dt = dt;
        const DensityMatrix coarse = evolve(rho0, kMinusZ, f, c).states.back();
        c.dt = dt / 10;
        const DensityMatrix fine = evolve(rho0, kMinusZ, f, c).states.back();
        return max_abs(coarse.matrix() - fine.matrix());
    };
    EXPECT_NEAR(deviation(0.02) / deviation(0.01), 2.0, 0.4);
}

TEST(PrecessionFrequency, WeakSignal) {
    const Trajectory traj = evolve(DensityMatrix::diagonal(Eigen::Vector2d(0.7, 0.3)), kMinusZ,
                                   DeformationFunction::power_law(2.0), config(0.1, 1.0));
    EXPECT_THROW(precession_frequency(traj, {0, 1}), SignalTooWeak);
}

TEST(PrecessionFrequency, LarmorLawAndFrozenPolarAngle) {
    for (double q : {2.0, 3.0}) {
        for (double lam = 0.55; lam < 0.96; lam += 0.1) {
            const Trajectory traj = evolve(bloch_state({lam, std::numbers::pi / 3, 0.0}), kMinusZ,
                                           DeformationFunction::power_law(q), config(1e-3, 10.0, 10));
            const double expect = 2.0 * (std::pow(lam, q) - std::pow(1 - lam, q)) / (2 * lam - 1);
            EXPECT_NEAR(precession_frequency(traj, {0, 1}) / expect, 1.0, 1e-5);
            const double z0 = bloch_vector(traj.states.front())(2);
            for (const DensityMatrix& s : traj.states) EXPECT_NEAR(bloch_vector(s)(2), z0, 1e-9);
        }
    }
}
