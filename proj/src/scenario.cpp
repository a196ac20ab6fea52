#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "nvne/composite.hpp"
#include "nvne/errors.hpp"
#include "nvne/lie_poisson.hpp"
#include "nvne/scenario.hpp"
#include "nvne/thermo.hpp"

namespace nvne {

using nlohmann::json;

namespace {

class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    Matrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        Matrix g(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) {
                const double re = normal();
                g(r, c) = cplx(re, normal());
            }
        }
        return g;
    }

    HermitianOperator hermitian(Eigen::Index dim) {
        const Matrix g = ginibre(dim, dim);
        return HermitianOperator::hermitian_part(0.5 * (g + g.adjoint()));
    }

    DensityMatrix density(Eigen::Index dim, Eigen::Index rank) {
        const Matrix g = ginibre(dim, rank);
        const Matrix m = g * g.adjoint();
        return validate_density(m / m.trace().real());
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

HermitianOperator build_hamiltonian(const HamiltonianSpec& spec, Eigen::Index dim, Random& rng) {
    if (spec.preset == "spin-z") return HermitianOperator(-spec.mu * pauli_z());
    if (spec.preset == "random") return rng.hermitian(dim);
    return HermitianOperator(spec.matrix);
}

DensityMatrix build_state(const StateSpec& s, Eigen::Index dim, Random& rng, const ThermoParams* thermo) {
    if (s.type == "bloch") return bloch_state({s.lam, s.phi, s.psi});
    if (s.type == "matrix") return validate_density(s.matrix);
    if (s.type == "pure") return DensityMatrix::pure(s.vector);
    if (s.type == "random") return rng.density(dim, s.rank == 0 ? dim : s.rank);
    if (s.type == "pure-random") return rng.density(dim, 1);
    if (s.type == "bell") {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
        psi(0) = psi(3) = 1.0;
        return DensityMatrix::pure(psi);
    }
    if (s.type == "equilibrium") return bloch_state({spin_equilibrium(*thermo).lam, s.phi, s.psi});
    return DensityMatrix::maximally_mixed(dim);
}

// Tr(AX) + c1 Tr(BX)^2 + c2 Tr(CX^2) + c3 sin(Tr(DX)); gradient by finite differences.
ObservableFunctional random_functional(Random& rng, Eigen::Index dim) {
    const Matrix a = rng.hermitian(dim).matrix(), b = rng.hermitian(dim).matrix();
    const Matrix c = rng.hermitian(dim).matrix(), d = rng.hermitian(dim).matrix();
    const double c1 = rng.normal(), c2 = rng.normal(), c3 = rng.normal();
    ObservableFunctional f;
    f.value = [=](const Matrix& x) {
        const double tb = (b * x).trace().real();
        return (a * x).trace().real() + c1 * tb * tb + c2 * (c * x * x).trace().real() +
               c3 * std::sin((d * x).trace().real());
    };
    return f;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string label_prefix(const std::string& label) { return label.empty() ? "" : "[" + label + "] "; }

class ReportBuilder {
public:
    explicit ReportBuilder(RunReport& r) : r_(r) {}

    void at_most(const std::string& name, double value, double threshold, std::string note = {}) {
        add(name, value, "<=", threshold, value <= threshold, std::move(note));
    }
    void below(const std::string& name, double value, double threshold, std::string note = {}) {
        add(name, value, "<", threshold, value < threshold, std::move(note));
    }
    void above(const std::string& name, double value, double threshold, std::string note = {}) {
        add(name, value, ">", threshold, value > threshold, std::move(note));
    }
    void add(const std::string& name, double value, std::string relation, double threshold, bool passed,
             std::string note) {
        r_.checks.push_back({prefix_ + name, value, std::move(relation), threshold, passed && std::isfinite(value),
                             std::move(note)});
    }
    void quantity(const std::string& name, double value) { r_.quantities.emplace_back(prefix_ + name, value); }
    void set_label(const std::string& label) { prefix_ = label_prefix(label); }

private:
    RunReport& r_;
    std::string prefix_;
};

double max_eigenvalue_drift(const DensityMatrix& a, const DensityMatrix& b) {
    return (a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff();
}

double spin_mu(const HermitianOperator& h) { return 0.5 * (h.matrix()(1, 1) - h.matrix()(0, 0)).real(); }

DensityMatrix final_state(const DensityMatrix& rho0, const HermitianOperator& h, const DeformationFunction& f,
                          IntegratorConfig cfg) {
    cfg.record_every = static_cast<int>(std::min<long>(cfg.step_count(), 1L << 30));
    return evolve(rho0, h, f, cfg).states.back();
}

std::string run_label(bool sweep_q, double q, bool sweep_lam, double lam) {
    std::string label;
    if (sweep_q) label += "q=" + format_double(q);
    if (sweep_lam) label += std::string(label.empty() ? "" : " ") + "lambda=" + format_double(lam);
    return label;
}

void run_evolve(const ScenarioConfig& cfg, ScenarioResult& out, Random& rng) {
    ReportBuilder rb(out.report);
    const Tolerances& tol = cfg.tolerances;
    const auto checks = cfg.effective_checks();
    const auto wants = [&](const char* c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    const HermitianOperator h = build_hamiltonian(cfg.hamiltonian, cfg.dimension, rng);

    const std::vector<double> qs = cfg.sweep.q.empty() ? std::vector<double>{cfg.q} : cfg.sweep.q;
    const std::vector<double> lams =
        cfg.sweep.lam.empty() ? std::vector<double>{cfg.initial_state.lam} : cfg.sweep.lam;
    out.plot.columns = {"run", "t", "offdiag_abs", "eigenvalue_drift"};

    for (double q : qs) {
        for (double lam : lams) {
            const std::string label = run_label(!cfg.sweep.q.empty(), q, !cfg.sweep.lam.empty(), lam);
            rb.set_label(label);
            const auto f = DeformationFunction::power_law(q);
            StateSpec spec = cfg.initial_state;
            spec.lam = lam;
            const ThermoParams thermo{q, cfg.beta, cfg.hamiltonian.mu};
            const DensityMatrix rho0 = build_state(spec, cfg.dimension, rng, &thermo);
            const Trajectory traj = evolve(rho0, h, f, cfg.integrator);

            const double run_index = static_cast<double>(out.trajectories.size());
            for (std::size_t k = 0; k < traj.size(); ++k) {
                const double offdiag = cfg.dimension > 1 ? std::abs(traj.states[k].matrix()(0, 1)) : 0.0;
                out.plot.rows.push_back(
                    {run_index, traj.times[k], offdiag, max_eigenvalue_drift(traj.states[k], traj.states.front())});
            }

            const DriftReport drift = invariant_report(traj);
            rb.quantity("drift.eigenvalue", drift.eigenvalue);
            for (int n = 1; n <= 5; ++n) rb.quantity("drift.C" + std::to_string(n), drift.casimir[n - 1]);
            rb.quantity("drift.energy", drift.energy);
            if (wants("invariants")) {
                rb.below("invariants.eigenvalue_drift", drift.eigenvalue, tol.eigenvalue);
                rb.below("invariants.casimir_drift_C2_C5", drift.max_casimir(2, 5), tol.casimir);
                rb.below("invariants.energy_drift", drift.energy, tol.energy);
            }
            if (wants("precession")) {
                const double big = rho0.eigenvalues().maxCoeff();
                const double predicted = std::abs(predicted_precession(f, spin_mu(h), big, 1.0 - big));
                const double measured = precession_frequency(traj, {0, 1});
                rb.quantity("omega_predicted", predicted);
                rb.quantity("omega_measured", measured);
                rb.below("precession.relative_error", std::abs(measured - predicted) / predicted, tol.precession);
                const double z0 = bloch_vector(traj.states.front())(2);
                double dz = 0.0;
                for (const DensityMatrix& s : traj.states) dz = std::max(dz, std::abs(bloch_vector(s)(2) - z0));
                rb.below("precession.sigma_z_variation", dz, tol.sigma_z);
            }
            if (wants("linear-reference")) {
                double worst = 0.0;
                for (std::size_t k = 0; k < traj.size(); ++k) {
                    const Matrix exact = conjugate(rho0.matrix(), h, traj.times[k]);
                    worst = std::max(worst, trace_distance(traj.states[k].matrix(), exact));
                }
                rb.below("linear_reference.max_trace_distance", worst, tol.linear_reference);
            }
            if (wants("stability")) {
                const EquilibriumResult eq = spin_equilibrium(thermo);
                const double initial = trace_distance(rho0, eq.state);
                double worst = 0.0;
                for (const DensityMatrix& s : traj.states) worst = std::max(worst, trace_distance(s, eq.state));
                rb.quantity("stability.initial_distance", initial);
                rb.at_most("stability.max_distance", worst, tol.stability_factor * initial);
            }
            if (wants("convergence")) {
                // Each step size is measured against its own dt/10 reference run.
                const auto error = [&](double dt) {
                    IntegratorConfig run = cfg.integrator, ref = cfg.integrator;
                    run.dt = dt;
                    ref.dt = dt / 10;
                    return trace_distance(final_state(rho0, h, f, run), final_state(rho0, h, f, ref));
                };
                const double e1 = error(cfg.integrator.dt);
                const double e2 = error(cfg.integrator.dt / 2);
                const double ratio = e1 / e2;
                rb.quantity("convergence.error_dt", e1);
                rb.quantity("convergence.error_half_dt", e2);
                rb.quantity("convergence.ratio", ratio);
                rb.at_most("convergence.ratio_deviation", std::abs(ratio / tol.convergence_ratio - 1.0),
                           tol.convergence_band, "ratio " + format_double(ratio));
            }
            out.trajectories.emplace_back(label, traj);
        }
    }
}

void run_composite(const ScenarioConfig& cfg, ScenarioResult& out, Random& rng) {
    ReportBuilder rb(out.report);
    const Tolerances& tol = cfg.tolerances;
    const auto checks = cfg.effective_checks();
    const auto wants = [&](const char* c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };

    CompositeSystem sys;
    sys.dim_I = cfg.dimension;
    sys.dim_II = cfg.dimension_II;
    sys.h_I = build_hamiltonian(cfg.hamiltonian, cfg.dimension, rng);
    sys.h_II = build_hamiltonian(cfg.hamiltonian_II, cfg.dimension_II, rng);
    sys.q1 = cfg.q1;
    sys.q2 = cfg.q2;
    const DensityMatrix rho0 = build_state(cfg.initial_state, sys.dim_I * sys.dim_II, rng, nullptr);

    const Trajectory joint = evolve_composite(rho0, sys, cfg.integrator);
    const ReductionReport red = reduction_consistency(joint, sys, cfg.integrator);
    const DriftReport drift = invariant_report(joint);

    out.plot.columns = {"t", "reduction_I", "reduction_II"};
    for (std::size_t k = 0; k < joint.size(); ++k) {
        out.plot.rows.push_back(
            {joint.times[k],
             trace_distance(partial_trace(joint.states[k], sys.dims(), Subsystem::I), red.reduced_I.states[k]),
             trace_distance(partial_trace(joint.states[k], sys.dims(), Subsystem::II), red.reduced_II.states[k])});
    }

    rb.quantity("entanglement.purity_I", casimir(partial_trace(rho0, sys.dims(), Subsystem::I), 2));
    rb.quantity("drift.eigenvalue", drift.eigenvalue);
    for (int n = 1; n <= 5; ++n) rb.quantity("drift.C" + std::to_string(n), drift.casimir[n - 1]);
    if (wants("reduction")) {
        rb.below("reduction.max_trace_distance_I", red.max_deviation_I, tol.reduction);
        rb.below("reduction.max_trace_distance_II", red.max_deviation_II, tol.reduction);
    }
    if (wants("invariants")) {
        rb.below("invariants.eigenvalue_drift", drift.eigenvalue, tol.eigenvalue);
        rb.below("invariants.casimir_drift_C1_C5", drift.max_casimir(1, 5), tol.casimir);
    }
    out.trajectories.emplace_back("joint", joint);
    out.trajectories.emplace_back("reduced_I", red.reduced_I);
    out.trajectories.emplace_back("reduced_II", red.reduced_II);
}

double gibbs_lambda(double beta_mu) { return 1.0 / (1.0 + std::exp(-2.0 * beta_mu)); }

// Inverts (lam / (1 - lam))^(q - 1) = (1 + x) / (1 - x) directly.
double closed_form_lambda(const ThermoParams& p) {
    if (p.is_gibbs()) return gibbs_lambda(p.beta * p.mu);
    const double x = (p.q - 1.0) * p.beta * p.mu;
    const double odds = std::pow((1.0 + x) / (1.0 - x), 1.0 / (p.q - 1.0));
    return odds / (1.0 + odds);
}

void run_equilibrium(const ScenarioConfig& cfg, ScenarioResult& out, Random& rng) {
    ReportBuilder rb(out.report);
    const Tolerances& tol = cfg.tolerances;
    const auto checks = cfg.effective_checks();
    const auto wants = [&](const char* c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    const HermitianOperator h = build_hamiltonian(cfg.hamiltonian, cfg.dimension, rng);

    if (cfg.hamiltonian.preset != "spin-z") {
        const ThermoParams p{cfg.q, cfg.beta, 1.0};
        const DensityMatrix rho = numeric_equilibrium(h, p);
        rb.quantity("free_energy", free_energy(rho, h, p));
        rb.quantity("internal_energy", internal_energy(rho, h, p.q));
        rb.quantity("entropy", tsallis_entropy(rho, p.q));
        out.plot.columns = {"level", "population"};
        const RealVector pops = rho.eigenvalues();
        for (Eigen::Index k = 0; k < pops.size(); ++k) out.plot.rows.push_back({static_cast<double>(k), pops(k)});
        Trajectory single;
        single.times = {0.0};
        single.states = {rho};
        single.invariants = {sample_invariants(rho, h, DeformationFunction::power_law(p.q))};
        out.trajectories.emplace_back("", single);
        return;
    }

    const double mu = cfg.hamiltonian.mu;
    std::vector<std::pair<std::string, ThermoParams>> runs{{"", {cfg.q, cfg.beta, mu}}};
    for (double q : cfg.sweep.q.empty() && !cfg.sweep.x.empty() ? std::vector<double>{cfg.q} : cfg.sweep.q) {
        const std::vector<double> xs =
            cfg.sweep.x.empty() ? std::vector<double>{std::abs(q - 1.0) * cfg.beta * mu} : cfg.sweep.x;
        for (double x : xs) {
            const double beta = cfg.sweep.x.empty() ? cfg.beta : x / (std::abs(q - 1.0) * mu);
            runs.push_back({"q=" + format_double(q) + " x=" + format_double(x), {q, beta, mu}});
        }
    }

    out.plot.columns = {"run", "lambda", "free_energy"};
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& [label, p] = runs[r];
        rb.set_label(label);
        const EquilibriumResult eq = spin_equilibrium(p);
        rb.quantity("lambda_eq", eq.lam);
        rb.quantity("free_energy", eq.free_energy);
        rb.quantity("second_derivative", eq.second_derivative);
        if (wants("stationary")) rb.at_most("stationary.abs_slope", std::abs(spin_free_energy_slope(p, eq.lam)), tol.slope);
        if (wants("stable")) rb.above("stable.second_derivative", eq.second_derivative, 0.0);
        if (wants("closed-form")) rb.at_most("closed_form.lambda_error", std::abs(eq.lam - closed_form_lambda(p)), tol.lambda);
        for (int k = 1; k < 200; ++k) {
            const double lam = k / 200.0;
            out.plot.rows.push_back({static_cast<double>(r), lam, spin_free_energy(p, lam)});
        }
        Trajectory single;
        single.times = {0.0};
        single.states = {eq.state};
        single.invariants = {sample_invariants(eq.state, h, DeformationFunction::power_law(p.q))};
        out.trajectories.emplace_back(label, single);
    }

    rb.set_label("");
    if (wants("gibbs-limit")) {
        const double target = gibbs_lambda(cfg.beta * mu);
        double worst = 0.0;
        for (double q : {1.0, 1.0 + 1e-6, 1.0 - 1e-6}) {
            worst = std::max(worst, std::abs(spin_equilibrium({q, cfg.beta, mu}).lam - target));
        }
        rb.quantity("gibbs_lambda", target);
        rb.at_most("gibbs_limit.lambda_error", worst, tol.gibbs);
    }
}

void run_ensemble(const ScenarioConfig& cfg, ScenarioResult& out) {
    ReportBuilder rb(out.report);
    const Tolerances& tol = cfg.tolerances;
    const EnsembleOptions& e = cfg.ensemble;
    const auto checks = cfg.effective_checks();
    const auto wants = [&](const char* c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    const auto f = DeformationFunction::power_law(cfg.q);
    const double mu = cfg.hamiltonian.mu;

    const EnsembleSpec spec = make_ensemble(e.preset, f, mu, e.n_lam, e.n_phi, e.n_psi);
    spec.validate();
    rb.quantity("normalization", spec.normalization());
    const IntegratorConfig none;

    if (wants("analytic")) {
        double worst = 0.0;
        for (double t : e.times) {
            const Matrix quad = ensemble_average(spec, t, none).matrix();
            worst = std::max(worst, max_abs(quad - dephasing_analytic(t, f, mu, e.n_lam, e.preset).matrix()));
        }
        rb.at_most("analytic.max_abs_deviation", worst, tol.analytic);
    }

    out.plot.columns = {"t", "offdiag_abs", "analytic_offdiag_abs"};
    Trajectory average;
    double window_max = 0.0;
    std::vector<double> times;
    for (long k = 0; k * e.plot_dt < e.decay_time - 1e-9; ++k) times.push_back(k * e.plot_dt);
    times.push_back(e.decay_time);
    for (double t : times) {
        const DensityMatrix avg = ensemble_average(spec, t, none);
        const double offdiag = std::abs(avg.matrix()(0, 1));
        if (t <= e.window + 1e-12) window_max = std::max(window_max, offdiag);
        out.plot.rows.push_back({t, offdiag, std::abs(dephasing_analytic(t, f, mu, e.n_lam, e.preset).matrix()(0, 1))});
        average.times.push_back(t);
        average.states.push_back(avg);
        average.invariants.push_back(sample_invariants(avg, spec.h, f));
    }
    const double final_offdiag = std::abs(average.states.back().matrix()(0, 1));
    rb.quantity("offdiag_window_max", window_max);
    rb.quantity("offdiag_at_decay_time", final_offdiag);

    if (wants("decay")) {
        const bool signal = window_max > tol.noise_floor;
        const double threshold = tol.decay_fraction * window_max;
        rb.add("decay.offdiag_at_decay_time", final_offdiag, "<", threshold, signal && final_offdiag < threshold,
               signal ? "" : "no coherence above the noise floor on the window (max |rho01| = " +
                                 format_double(window_max) + ")");
    }
    if (wants("node-drift")) {
        IntegratorConfig node = cfg.integrator;
        node.t_final = e.decay_time;
        const NodeCheck nc = cross_check_nodes(spec, node, static_cast<std::size_t>(e.node_stride));
        rb.quantity("nodes_checked", static_cast<double>(nc.nodes_checked));
        rb.quantity("node_closed_form_deviation", nc.max_closed_form_deviation);
        rb.below("node_drift.max_eigenvalue_drift", nc.max_eigenvalue_drift, tol.node_drift);
    }
    out.trajectories.emplace_back("ensemble_average", std::move(average));
}

void run_bracket(const ScenarioConfig& cfg, ScenarioResult& out, Random& rng) {
    ReportBuilder rb(out.report);
    const Tolerances& tol = cfg.tolerances;
    const BracketOptions& b = cfg.bracket;
    const auto checks = cfg.effective_checks();
    const auto wants = [&](const char* c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    const Eigen::Index d = cfg.dimension;
    const HermitianOperator h = build_hamiltonian(cfg.hamiltonian, d, rng);

    out.plot.columns = {"sample", "casimir_bracket", "q_average_bracket", "antisymmetry"};
    double casimir_worst = 0.0, qavg_worst = 0.0, anti_worst = 0.0;
    for (int k = 0; k < b.functionals; ++k) {
        const DensityMatrix rho = rng.density(d, d);
        const ObservableFunctional fa = random_functional(rng, d);
        const ObservableFunctional fb = random_functional(rng, d);
        double cas = 0.0, qa = 0.0, anti = 0.0;
        if (wants("casimir")) {
            for (int n = 1; n <= b.max_casimir; ++n) {
                cas = std::max(cas, std::abs(poisson_bracket(casimir_functional(n), fa, rho)));
            }
        }
        if (wants("q-average")) {
            for (int n = 1; n <= b.max_q; ++n) {
                for (int m = 1; m <= b.max_q; ++m) {
                    qa = std::max(qa, std::abs(poisson_bracket(q_average_functional(h, n),
                                                               q_average_functional(h, m), rho)));
                }
            }
        }
        if (wants("antisymmetry")) {
            anti = std::abs(poisson_bracket(fa, fb, rho) + poisson_bracket(fb, fa, rho));
        }
        out.plot.rows.push_back({static_cast<double>(k), cas, qa, anti});
        casimir_worst = std::max(casimir_worst, cas);
        qavg_worst = std::max(qavg_worst, qa);
        anti_worst = std::max(anti_worst, anti);
    }
    if (wants("casimir")) rb.at_most("casimir.max_abs_bracket", casimir_worst, tol.bracket);
    if (wants("q-average")) rb.at_most("q_average.max_abs_bracket", qavg_worst, tol.bracket);
    if (wants("antisymmetry")) rb.at_most("antisymmetry.max_abs_sum", anti_worst, tol.antisymmetry);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write " + path.string());
    file << text;
    if (!file) throw IoError("write failed for " + path.string());
}

std::string plot_csv(const PlotTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
    return out.str();
}

json finite_or_string(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }

}  // namespace

bool RunReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json to_json(const RunReport& report) {
    json checks = json::array();
    for (const Check& c : report.checks) {
        json entry = {{"name", c.name},
                      {"value", finite_or_string(c.value)},
                      {"relation", c.relation},
                      {"threshold", c.threshold},
                      {"passed", c.passed}};
        if (!c.note.empty()) entry["note"] = c.note;
        checks.push_back(std::move(entry));
    }
    json quantities = json::object();
    for (const auto& [name, value] : report.quantities) quantities[name] = finite_or_string(value);
    return {{"scenario_id", report.scenario_id},
            {"kind", to_string(report.kind)},
            {"passed", report.passed()},
            {"checks", checks},
            {"quantities", quantities},
            {"wall_seconds", report.wall_seconds}};
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t";
    const Eigen::Index d = traj.states.empty() ? 0 : traj.states.front().dim();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) out << ",re_rho_" << i << j << ",im_rho_" << i << j;
    }
    out << ",C1,C2,C3,C4,C5,Hq\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_double(traj.times[k]);
        const Matrix& m = traj.states[k].matrix();
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                out << ',' << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
            }
        }
        const InvariantSample& s = traj.invariants[k];
        for (double c : s.casimirs) out << ',' << format_double(c);
        out << ',' << format_double(s.energy) << '\n';
    }
    return out.str();
}

ScenarioResult execute(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result;
    result.report.scenario_id = cfg.id;
    result.report.kind = cfg.kind;
    Random rng(cfg.seed.value_or(0));
    switch (cfg.kind) {
        case ScenarioKind::Evolve: run_evolve(cfg, result, rng); break;
        case ScenarioKind::Composite: run_composite(cfg, result, rng); break;
        case ScenarioKind::Equilibrium: run_equilibrium(cfg, result, rng); break;
        case ScenarioKind::Ensemble: run_ensemble(cfg, result); break;
        case ScenarioKind::BracketCheck: run_bracket(cfg, result, rng); break;
    }
    result.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void emit_outputs(const ScenarioResult& result, const ScenarioConfig& cfg, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create output directory " + directory.string() + ": " + ec.message());

    json files = json::array();
    if (cfg.output.wants("trajectory")) {
        const bool single = result.trajectories.size() == 1;
        for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
            const auto& [label, traj] = result.trajectories[k];
            const std::string name = single ? "trajectory.csv" : "trajectory_" + std::to_string(k) + ".csv";
            write_file(directory / name, trajectory_csv(traj));
            files.push_back({{"label", label}, {"file", name}});
        }
    }
    if (cfg.output.wants("plot") && !result.plot.columns.empty()) {
        write_file(directory / "plot.csv", plot_csv(result.plot));
    }
    if (cfg.output.wants("summary")) {
        const json summary = {{"config", to_json(cfg)}, {"report", to_json(result.report)}, {"trajectories", files}};
        write_file(directory / "summary.json", summary.dump(2) + "\n");
    }
}

RunReport run_scenario(const ScenarioConfig& cfg) {
    const ScenarioResult result = execute(cfg);
    emit_outputs(result, cfg, cfg.output.directory);
    return result.report;
}

}  // namespace nvne
