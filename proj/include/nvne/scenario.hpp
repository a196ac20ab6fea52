#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvne/dynamics.hpp"
#include "nvne/ensemble.hpp"
#include "nvne/hermitian.hpp"

namespace nvne {

enum class ScenarioKind { Evolve, Composite, Equilibrium, Ensemble, BracketCheck };

std::string to_string(ScenarioKind kind);

/// Either explicit entries or a named preset ("spin-z" = -mu sz, "random").
struct HamiltonianSpec {
    std::string preset;
    double mu = 1.0;
    Matrix matrix;

    bool operator==(const HamiltonianSpec&) const;
};

/// type: maximally-mixed | bloch | matrix | pure | random | pure-random | bell | equilibrium.
/// For "equilibrium" the Bloch angles tilt the thermal spin state.
struct StateSpec {
    std::string type = "maximally-mixed";
    double lam = 1.0;
    double phi = 0.0;
    double psi = 0.0;
    Matrix matrix;
    Eigen::VectorXcd vector;
    int rank = 0;  ///< random states, 0 = full rank

    bool operator==(const StateSpec&) const;
};

struct EnsembleOptions {
    WeightPreset preset = WeightPreset::Paper;
    int n_lam = 32;
    int n_phi = 32;
    int n_psi = 32;
    std::vector<double> times{0.0, 1.0, 5.0, 20.0};
    double window = 20.0;      ///< coherence maximum taken over [0, window]
    double decay_time = 200.0;
    double plot_dt = 0.5;
    /// Every n-th node is also integrated numerically (with the integrator
    /// step size) up to decay_time to monitor its spectrum.
    int node_stride = 1021;

    bool operator==(const EnsembleOptions&) const = default;
};

struct BracketOptions {
    int functionals = 20;
    int max_casimir = 4;
    int max_q = 3;

    bool operator==(const BracketOptions&) const = default;
};

/// Parameter grids; an empty list means "use the scalar setting".
struct SweepOptions {
    std::vector<double> q;
    std::vector<double> lam;
    std::vector<double> x;  ///< |q - 1| beta mu for equilibrium grids

    bool operator==(const SweepOptions&) const = default;
};

struct Tolerances {
    double eigenvalue = 1e-9;
    double casimir = 1e-8;
    double energy = 1e-8;
    double precession = 1e-5;
    double sigma_z = 1e-9;
    double linear_reference = 1e-7;
    double stability_factor = 2.0;
    double convergence_ratio = 4.0;
    double convergence_band = 0.2;
    double reduction = 1e-7;
    double slope = 1e-8;
    double lambda = 1e-10;
    double gibbs = 1e-6;
    double analytic = 1e-5;
    double decay_fraction = 0.1;
    double noise_floor = 1e-12;
    double node_drift = 1e-9;
    double bracket = 1e-6;
    double antisymmetry = 1e-8;

    bool operator==(const Tolerances&) const = default;
};

struct OutputOptions {
    std::string directory = "nvne-out";
    std::vector<std::string> formats{"trajectory", "summary", "plot"};

    bool wants(const std::string& format) const;
    bool operator==(const OutputOptions&) const = default;
};

struct ScenarioConfig {
    std::string id = "scenario";
    ScenarioKind kind = ScenarioKind::Evolve;
    std::optional<std::uint64_t> seed;

    int dimension = 2;
    HamiltonianSpec hamiltonian;
    double q = 1.0;
    // composite only; the first factor uses dimension/hamiltonian
    int dimension_II = 2;
    HamiltonianSpec hamiltonian_II;
    double q1 = 1.0;
    double q2 = 1.0;

    StateSpec initial_state;
    IntegratorConfig integrator;
    double beta = 1.0;
    EnsembleOptions ensemble;
    BracketOptions bracket;
    SweepOptions sweep;
    std::vector<std::string> checks;
    Tolerances tolerances;
    OutputOptions output;

    /// Throws ConfigError naming the first offending key.
    void validate() const;
    /// The checks to run: `checks` or the default set for the kind.
    std::vector<std::string> effective_checks() const;

    bool operator==(const ScenarioConfig&) const;
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& cfg);

/// One asserted tolerance: passed iff `value relation threshold`.
struct Check {
    std::string name;
    double value = 0.0;
    std::string relation = "<=";
    double threshold = 0.0;
    bool passed = false;
    std::string note;
};

struct RunReport {
    std::string scenario_id;
    ScenarioKind kind = ScenarioKind::Evolve;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> quantities;
    double wall_seconds = 0.0;

    bool passed() const;
};

nlohmann::json to_json(const RunReport& report);

/// A column-oriented table for plot-ready CSV output.
struct PlotTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
    RunReport report;
    std::vector<std::pair<std::string, Trajectory>> trajectories;  ///< label, run
    PlotTable plot;
};

/// Runs the scenario without touching the filesystem.
ScenarioResult execute(const ScenarioConfig& cfg);

/// Writes trajectory CSVs, summary.json and plot.csv (as selected by
/// cfg.output.formats) into `directory`. Throws IoError.
void emit_outputs(const ScenarioResult& result, const ScenarioConfig& cfg, const std::filesystem::path& directory);

/// execute + emit_outputs into cfg.output.directory.
RunReport run_scenario(const ScenarioConfig& cfg);

/// Trajectory CSV text: t, re/im of every entry (column-major), C1..C5, Hq.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace nvne
