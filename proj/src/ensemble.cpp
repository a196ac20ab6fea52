#include "nvne/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nvne/errors.hpp"

namespace nvne {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    if (!(b > a)) throw DomainError("gauss_legendre: empty interval");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

double EnsembleSpec::normalization() const {
    double total = 0.0;
    for (const EnsembleNode& node : ensemble_nodes(*this)) total += node.weight;
    return total;
}

void EnsembleSpec::validate() const {
    if (n_lam < 1 || n_phi < 1 || n_psi < 1) throw DomainError("ensemble: node counts must be >= 1");
    if (!(lam_min >= 0.0 && lam_max <= 1.0 && lam_max > lam_min)) {
        throw DomainError("ensemble: lambda range must be a non-empty subset of [0, 1]");
    }
    if (!weight) throw DomainError("ensemble: no weight function");
    if (h.dim() != 2) throw DimensionMismatch("ensemble: spin-1/2 Hamiltonian (2x2) required");
    const double norm = normalization();
    if (!(std::abs(norm - 1.0) <= 1e-8)) {
        throw NumericalFailure("ensemble: weight integrates to " + std::to_string(norm) + ", not 1");
    }
}

EnsembleSpec make_ensemble(WeightPreset preset, const DeformationFunction& f, double mu, int n_lam,
                           int n_phi, int n_psi) {
    if (!(mu > 0.0)) throw DomainError("make_ensemble: mu must be positive");
    EnsembleSpec spec;
    spec.n_lam = n_lam;
    spec.n_phi = n_phi;
    spec.n_psi = n_psi;
    spec.f = f;
    spec.h = HermitianOperator(-mu * pauli_z());
    if (preset == WeightPreset::Paper) {
        spec.weight = [](double, double, double psi) { return std::sin(0.5 * psi) / 8.0; };
    } else {
        spec.lam_min = 0.5;
        spec.weight = [](double, double, double psi) { return std::sin(0.5 * psi) / 4.0; };
    }
    return spec;
}

std::vector<EnsembleNode> ensemble_nodes(const EnsembleSpec& spec) {
    const QuadratureRule lam = gauss_legendre(spec.n_lam, spec.lam_min, spec.lam_max);
    const QuadratureRule phi = gauss_legendre(spec.n_phi, 0.0, std::numbers::pi);
    const QuadratureRule psi = gauss_legendre(spec.n_psi, 0.0, 2.0 * std::numbers::pi);
    std::vector<EnsembleNode> nodes;
    nodes.reserve(lam.nodes.size() * phi.nodes.size() * psi.nodes.size());
    for (std::size_t a = 0; a < lam.nodes.size(); ++a) {
        for (std::size_t b = 0; b < phi.nodes.size(); ++b) {
            for (std::size_t c = 0; c < psi.nodes.size(); ++c) {
                const BlochParams p{lam.nodes[a], phi.nodes[b], psi.nodes[c]};
                const double w = spec.weight(p.lam, p.phi, p.psi) * std::sin(p.phi) * lam.weights[a] *
                                 phi.weights[b] * psi.weights[c];
                nodes.push_back({p, w});
            }
        }
    }
    return nodes;
}

bool has_closed_form(const EnsembleSpec& spec) {
    return spec.h.dim() == 2 && std::abs(spec.h.matrix()(0, 1)) <= kHermitianTol;
}

namespace {

double field_strength(const EnsembleSpec& spec) {
    return 0.5 * (spec.h.matrix()(1, 1).real() - spec.h.matrix()(0, 0).real());
}

// Same parametrization as bloch_state, without the validation pass.
Matrix node_matrix(const BlochParams& p0, double omega, double t) {
    const double r = 2.0 * p0.lam - 1.0;
    const double z = r * std::cos(p0.phi);
    const cplx off = -0.5 * r * std::sin(p0.phi) * std::polar(1.0, -(p0.psi - omega * t));
    Matrix m(2, 2);
    m << 0.5 + 0.5 * z, off, std::conj(off), 0.5 - 0.5 * z;
    return m;
}

DensityMatrix integrate_to(const DensityMatrix& rho0, const HermitianOperator& h,
                           const DeformationFunction& f, double t, IntegratorConfig cfg) {
    if (t == 0.0) return rho0;
    cfg.t_final = t;
    cfg.dt = std::min(cfg.dt, t);
    cfg.record_every = std::max(1, static_cast<int>(cfg.step_count()));
    return evolve(rho0, h, f, cfg).states.back();
}

}  // namespace

DensityMatrix node_state(const EnsembleSpec& spec, const BlochParams& p0, double t) {
    if (!has_closed_form(spec)) throw DomainError("node_state: Hamiltonian is not diagonal");
    const double omega = predicted_precession(spec.f, field_strength(spec), p0.lam, 1.0 - p0.lam);
    return bloch_state({p0.lam, p0.phi, p0.psi - omega * t});
}

DensityMatrix ensemble_average(const EnsembleSpec& spec, double t, const IntegratorConfig& cfg) {
    spec.validate();
    if (!(t >= 0.0)) throw DomainError("ensemble_average: t must be >= 0");
    Matrix sum = Matrix::Zero(2, 2);
    if (has_closed_form(spec)) {
        const double mu = field_strength(spec);
        for (const EnsembleNode& node : ensemble_nodes(spec)) {
            const double omega = predicted_precession(spec.f, mu, node.params.lam, 1.0 - node.params.lam);
            sum += node.weight * node_matrix(node.params, omega, t);
        }
    } else {
        for (const EnsembleNode& node : ensemble_nodes(spec)) {
            sum += node.weight * integrate_to(bloch_state(node.params), spec.h, spec.f, t, cfg).matrix();
        }
    }
    return validate_density(sum);
}

DensityMatrix ensemble_average(const std::vector<std::pair<double, DensityMatrix>>& mixture,
                               const HermitianOperator& h, const DeformationFunction& f, double t,
                               const IntegratorConfig& cfg) {
    if (mixture.empty()) throw DomainError("ensemble_average: empty mixture");
    if (!(t >= 0.0)) throw DomainError("ensemble_average: t must be >= 0");
    Matrix sum = Matrix::Zero(h.dim(), h.dim());
    for (const auto& [w, rho] : mixture) {
        if (!(w >= 0.0)) throw DomainError("ensemble_average: negative mixture weight");
        sum += w * integrate_to(rho, h, f, t, cfg).matrix();
    }
    return validate_density(sum);
}

DensityMatrix dephasing_analytic(double t, const DeformationFunction& f, double mu, int n_lam,
                                 WeightPreset preset) {
    if (n_lam < 16) throw DomainError("dephasing_analytic: n_lam must be >= 16");
    const bool paper = preset == WeightPreset::Paper;
    const double prefactor = std::numbers::pi / (paper ? 24.0 : 12.0);
    const QuadratureRule rule = gauss_legendre(n_lam, paper ? 0.0 : 0.5, 1.0);
    double cx = 0.0, cy = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double lam = rule.nodes[k];
        const double omega = predicted_precession(f, mu, lam, 1.0 - lam);
        cx += rule.weights[k] * (2.0 * lam - 1.0) * std::cos(omega * t);
        cy += rule.weights[k] * (2.0 * lam - 1.0) * std::sin(omega * t);
    }
    const Matrix m = 0.5 * identity(2) + prefactor * (cx * pauli_x() - cy * pauli_y());
    return validate_density(m);
}

NodeCheck cross_check_nodes(const EnsembleSpec& spec, const IntegratorConfig& cfg, std::size_t stride) {
    spec.validate();
    cfg.validate();
    if (stride < 1) throw DomainError("cross_check_nodes: stride must be >= 1");
    NodeCheck check;
    const std::vector<EnsembleNode> nodes = ensemble_nodes(spec);
    for (std::size_t k = 0; k < nodes.size(); k += stride) {
        const Trajectory traj = evolve(bloch_state(nodes[k].params), spec.h, spec.f, cfg);
        const DriftReport drift = invariant_report(traj);
        check.max_eigenvalue_drift = std::max(check.max_eigenvalue_drift, drift.eigenvalue);
        const DensityMatrix exact = node_state(spec, nodes[k].params, traj.times.back());
        check.max_closed_form_deviation = std::max(
            check.max_closed_form_deviation, max_abs(traj.states.back().matrix() - exact.matrix()));
        ++check.nodes_checked;
    }
    return check;
}

}  // namespace nvne
