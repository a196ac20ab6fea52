#include "nvne/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nvne/errors.hpp"
#include "nvne/lie_poisson.hpp"

namespace nvne {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw DomainError("integrator dt must be positive");
    if (!(t_final > 0.0)) throw DomainError("integrator t_final must be positive");
    if (dt > t_final) throw DomainError("integrator dt exceeds t_final");
    if (record_every < 1) throw DomainError("integrator record_every must be >= 1");
}

long IntegratorConfig::step_count() const {
    const double ratio = t_final / dt;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<long>(nearest);
    return static_cast<long>(std::ceil(ratio));
}

InvariantSample sample_invariants(const DensityMatrix& rho, const HermitianOperator& h,
                                  const DeformationFunction& f) {
    InvariantSample s;
    for (int n = 1; n <= 5; ++n) s.casimirs[n - 1] = casimir(rho, n);
    s.energy = hamiltonian_function(rho, h, f);
    return s;
}

Matrix conjugate(const Matrix& rho, const HermitianOperator& g, double t) {
    const SpectralDecomposition s = spectral_decompose(g);
    Eigen::VectorXcd phases(s.eigenvalues.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::polar(1.0, -s.eigenvalues(i) * t);
    }
    const Matrix u = s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
    return u * rho * u.adjoint();
}

DensityMatrix step(const DensityMatrix& rho, const HermitianOperator& h, const DeformationFunction& f,
                   double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
    const HermitianOperator g1 = generator(rho, h, f);
    if (scheme == Scheme::UnitaryEuler) {
        return validate_density(conjugate(rho.matrix(), g1, dt));
    }
    const DensityMatrix half = validate_density(conjugate(rho.matrix(), g1, 0.5 * dt));
    const HermitianOperator g2 = generator(half, h, f);
    return validate_density(conjugate(rho.matrix(), g2, dt));
}

DensityMatrix project_energy(const DensityMatrix& rho, const HermitianOperator& h,
                             const DeformationFunction& f, double target, int max_iter) {
    DensityMatrix out = rho;
    const double scale = std::max(1.0, std::abs(target));
    for (int it = 0; it < max_iter; ++it) {
        const Matrix fr = matrix_function(out.spectrum(), f).matrix();
        const double residual = (fr * h.matrix()).trace().real() - target;
        if (std::abs(residual) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
        // With K = i[f, H]:  dE/de along exp(-i e K) rho exp(i e K) is Tr([f,H]^2) <= 0.
        const Matrix c = commutator(fr, h.matrix());
        const double slope = (c * c).trace().real();
        if (!(slope < 0.0) || std::abs(slope) < 1e-300) break;
        const double angle = -residual / slope;
        // Near-fixed points the orbit direction degenerates; refuse large rotations.
        if (std::abs(angle) * c.norm() > 1e-2) break;
        const HermitianOperator k = HermitianOperator::hermitian_part(cplx(0.0, 1.0) * c);
        out = validate_density(conjugate(out.matrix(), k, angle));
    }
    return out;
}

Trajectory evolve(const DensityMatrix& rho0, const HermitianOperator& h, const DeformationFunction& f,
                  const IntegratorConfig& cfg) {
    cfg.validate();
    if (rho0.dim() != h.dim()) throw DimensionMismatch("evolve: state and Hamiltonian dimensions differ");
    const long steps = cfg.step_count();

    Trajectory traj;
    const auto record = [&](double t, const DensityMatrix& rho) {
        traj.times.push_back(t);
        traj.states.push_back(rho);
        traj.invariants.push_back(sample_invariants(rho, h, f));
    };
    record(0.0, rho0);

    const double energy0 = traj.invariants.front().energy;
    DensityMatrix rho = rho0;
    for (long k = 1; k <= steps; ++k) {
        rho = step(rho, h, f, cfg.dt, cfg.scheme);
        if (cfg.energy_projection) rho = project_energy(rho, h, f, energy0);
        if (k % cfg.record_every == 0 || k == steps) record(static_cast<double>(k) * cfg.dt, rho);
    }
    return traj;
}

double DriftReport::max_casimir(int from, int to) const {
    double worst = 0.0;
    for (int n = from; n <= to; ++n) worst = std::max(worst, casimir[n - 1]);
    return worst;
}

DriftReport invariant_report(const Trajectory& traj) {
    DriftReport r;
    if (traj.states.empty()) return r;
    const RealVector ev0 = traj.states.front().eigenvalues();
    const InvariantSample& inv0 = traj.invariants.front();
    const auto relative = [](double x, double x0) {
        return std::abs(x - x0) / std::max(std::abs(x0), kRelativeDriftFloor);
    };
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const DensityMatrix& rho = traj.states[k];
        // Recompute from the stored matrix rather than trusting the cached spectrum.
        const SpectralDecomposition s = spectral_decompose(rho.matrix());
        r.eigenvalue = std::max(r.eigenvalue, (s.eigenvalues - ev0).cwiseAbs().maxCoeff());
        r.positivity = std::max(r.positivity, std::max(0.0, -s.eigenvalues.minCoeff()));
        r.hermiticity = std::max(r.hermiticity, max_abs(rho.matrix() - rho.matrix().adjoint()));
        r.trace = std::max(r.trace, std::abs(rho.matrix().trace().real() - 1.0));
        const InvariantSample& inv = traj.invariants[k];
        for (int n = 0; n < 5; ++n) {
            r.casimir[n] = std::max(r.casimir[n], relative(inv.casimirs[n], inv0.casimirs[n]));
        }
        r.energy = std::max(r.energy, relative(inv.energy, inv0.energy));
    }
    return r;
}

double precession_frequency(const Trajectory& traj, std::pair<Eigen::Index, Eigen::Index> element) {
    const auto [i, j] = element;
    if (traj.size() < 2) throw SignalTooWeak("precession_frequency: need at least two samples");
    std::vector<double> phase(traj.size());
    double previous = 0.0;
    double offset = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Matrix& m = traj.states[k].matrix();
        if (i >= m.rows() || j >= m.cols()) throw DimensionMismatch("precession_frequency: bad element");
        const cplx z = m(i, j);
        if (std::abs(z) < 1e-6) {
            throw SignalTooWeak("|rho_" + std::to_string(i) + std::to_string(j) + "| < 1e-6 at t = " +
                                std::to_string(traj.times[k]));
        }
        const double raw = std::arg(z);
        if (k > 0) {
            double jump = raw - previous;
            while (jump > std::numbers::pi) {
                offset -= 2.0 * std::numbers::pi;
                jump -= 2.0 * std::numbers::pi;
            }
            while (jump < -std::numbers::pi) {
                offset += 2.0 * std::numbers::pi;
                jump += 2.0 * std::numbers::pi;
            }
        }
        previous = raw;
        phase[k] = raw + offset;
    }
    // Least-squares slope on centred data.
    const double n = static_cast<double>(traj.size());
    double t_mean = 0.0, p_mean = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        t_mean += traj.times[k];
        p_mean += phase[k];
    }
    t_mean /= n;
    p_mean /= n;
    double stt = 0.0, stp = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double dt = traj.times[k] - t_mean;
        stt += dt * dt;
        stp += dt * (phase[k] - p_mean);
    }
    return std::abs(stp / stt);
}

double predicted_precession(const DeformationFunction& f, double mu, double lam1, double lam2) {
    if (std::abs(lam1 - lam2) <= kDegenerateGap) return 2.0 * mu * f.derivative(0.5 * (lam1 + lam2));
    return 2.0 * mu * (f(lam1) - f(lam2)) / (lam1 - lam2);
}

}  // namespace nvne
