#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nvne/errors.hpp"
#include "nvne/scenario.hpp"

using namespace nvne;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json spin_evolve_json() {
    return json::parse(R"({
        "id": "spin",
        "kind": "evolve",
        "system": {"dimension": 2, "hamiltonian": {"preset": "spin-z", "mu": 1.0}, "q": 2},
        "initial_state": {"type": "bloch", "lambda": 0.75, "phi": 1.0, "psi": 0.3},
        "integrator": {"dt": 1e-3, "t_final": 2.0, "record_every": 10},
        "checks": ["invariants", "precession"]
    })");
}

std::string config_key_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

double quantity(const RunReport& r, const std::string& name) {
    for (const auto& [n, v] : r.quantities) {
        if (n == name) return v;
    }
    ADD_FAILURE() << "missing quantity " << name;
    return std::nan("");
}

std::vector<std::vector<double>> read_csv(const fs::path& path, std::string& header) {
    std::ifstream in(path);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nvne-test-" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(ScenarioConfigTest, ShippedConfigsRoundTrip) {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(NVNE_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        const ScenarioConfig cfg = load_config(entry.path());
        EXPECT_EQ(parse_config(to_json(cfg)), cfg) << entry.path();
        EXPECT_EQ(parse_config(json::parse(to_json(cfg).dump())), cfg) << entry.path();
    }
    EXPECT_GE(seen, 9);
}

TEST(ScenarioConfigTest, ExplicitEntriesRoundTrip) {
    json j = spin_evolve_json();
    j["seed"] = -7;
    EXPECT_EQ(config_key_error(j), "seed");
    j["seed"] = 7;
    j["system"]["hamiltonian"] = {{"matrix", {{{0.5, 0.0}, {0.1, -0.2}}, {{0.1, 0.2}, {-0.5, 0.0}}}}};
    j["initial_state"] = {{"type", "pure"}, {"vector", {{0.6, 0.0}, {0.0, 0.8}}}};
    j["checks"] = {"invariants", "linear-reference"};
    j["tolerances"] = {{"eigenvalue", 3e-10}};
    const ScenarioConfig cfg = parse_config(j);
    EXPECT_EQ(cfg.hamiltonian.matrix(0, 1), cplx(0.1, -0.2));
    EXPECT_EQ(cfg.tolerances.eigenvalue, 3e-10);
    EXPECT_EQ(*cfg.seed, 7u);
    EXPECT_EQ(parse_config(to_json(cfg)), cfg);
    ScenarioConfig other = cfg;
    other.initial_state.vector(1) = cplx(0.0, 0.8000001);
    EXPECT_FALSE(other == cfg);
}

TEST(ScenarioConfigTest, SummaryConfigReparses) {
    ScenarioConfig cfg = parse_config(spin_evolve_json());
    const fs::path dir = scratch("summary");
    cfg.output.directory = dir.string();
    run_scenario(cfg);
    const json summary = json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(parse_config(summary.at("config")), cfg);
    EXPECT_TRUE(summary.at("report").at("passed").get<bool>());
    for (const json& c : summary.at("report").at("checks")) {
        EXPECT_TRUE(c.contains("threshold"));
        EXPECT_TRUE(c.contains("relation"));
    }
}

TEST(ScenarioConfigTest, ErrorsNameTheKey) {
    json j = spin_evolve_json();
    j["integrator"]["dt"] = 0.0;
    EXPECT_EQ(config_key_error(j), "integrator.dt");
    j["integrator"]["dt"] = -1e-3;
    EXPECT_EQ(config_key_error(j), "integrator.dt");
    j["integrator"]["dt"] = "small";
    EXPECT_EQ(config_key_error(j), "integrator.dt");

    j = spin_evolve_json();
    j["integrator"]["t_final"] = -1.0;
    EXPECT_EQ(config_key_error(j), "integrator.t_final");
    j = spin_evolve_json();
    j["integrator"]["record_every"] = 0;
    EXPECT_EQ(config_key_error(j), "integrator.record_every");
    j = spin_evolve_json();
    j["kind"] = "teleport";
    EXPECT_EQ(config_key_error(j), "kind");
    j.erase("kind");
    EXPECT_EQ(config_key_error(j), "kind");
    j = spin_evolve_json();
    j["system"]["q"] = 0.0;
    EXPECT_EQ(config_key_error(j), "system.q");
    j = spin_evolve_json();
    j["integrator"]["steps"] = 10;
    EXPECT_EQ(config_key_error(j), "integrator.steps");
    j = spin_evolve_json();
    j["checks"] = {"telepathy"};
    EXPECT_EQ(config_key_error(j), "checks");
    j = spin_evolve_json();
    j["initial_state"]["lambda"] = 1.5;
    EXPECT_EQ(config_key_error(j), "initial_state.lambda");
    j = spin_evolve_json();
    j["system"]["hamiltonian"] = {{"preset", "random"}};
    j["checks"] = {"invariants"};
    EXPECT_EQ(config_key_error(j), "seed");
    j = spin_evolve_json();
    j["system"]["hamiltonian"] = {{"matrix", {{1.0, {0.0, 1.0}}, {{0.0, 1.0}, -1.0}}}};
    EXPECT_EQ(config_key_error(j), "system.hamiltonian.matrix");
    j["system"]["hamiltonian"] = {{"matrix", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}};
    EXPECT_EQ(config_key_error(j), "system.hamiltonian.matrix");
    j = spin_evolve_json();
    j["checks"] = {"invariants"};
    j["initial_state"] = {{"type", "matrix"}, {"matrix", {{1.2, 0.0}, {0.0, -0.2}}}};
    EXPECT_EQ(config_key_error(j), "initial_state.matrix");
    j = spin_evolve_json();
    j["tolerances"] = {{"eigenvalue", -1.0}};
    EXPECT_EQ(config_key_error(j), "tolerances.eigenvalue");
    j["tolerances"] = {{"eigenvalues", 1.0}};
    EXPECT_EQ(config_key_error(j), "tolerances.eigenvalues");
    j = spin_evolve_json();
    j["output"] = {{"formats", {"csv"}}};
    EXPECT_EQ(config_key_error(j), "output.formats");

    json eq = json::parse(R"({"kind": "equilibrium", "system": {"hamiltonian": {"preset": "spin-z"}, "q": 3},
                              "thermo": {"beta": 0.4}})");
    EXPECT_EQ(config_key_error(eq), "<no error>");
    eq["thermo"]["beta"] = 0.6;
    EXPECT_EQ(config_key_error(eq), "thermo.beta");
    eq["thermo"]["beta"] = -1.0;
    EXPECT_EQ(config_key_error(eq), "thermo.beta");

    const json ens = json::parse(R"({"kind": "ensemble", "system": {"hamiltonian": {"preset": "spin-z"}, "q": 3},
                                     "ensemble": {"n_lambda": 8}})");
    EXPECT_EQ(config_key_error(ens), "ensemble.n_lambda");
    const json br = json::parse(R"({"kind": "bracket-check", "system": {"dimension": 3,
                                    "hamiltonian": {"matrix": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]}}})");
    EXPECT_EQ(config_key_error(br), "seed");
}

TEST(ScenarioConfigTest, UnreadableFileIsIoError) {
    EXPECT_THROW(load_config("/nonexistent/nvne.json"), IoError);
    const fs::path dir = scratch("badjson");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    try {
        load_config(dir / "bad.json");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "<file>");
    }
}

TEST(RunScenario, SpinPrecessionExample) {
    const RunReport r = execute(parse_config(spin_evolve_json())).report;
    EXPECT_TRUE(r.passed());
    EXPECT_NEAR(quantity(r, "omega_measured"), 2.0, 1e-5);
    EXPECT_EQ(quantity(r, "omega_predicted"), 2.0);
}

TEST(RunScenario, EquilibriumExample) {
    const json j = json::parse(R"({"kind": "equilibrium", "system": {"hamiltonian": {"preset": "spin-z", "mu": 1},
                                   "q": 2}, "thermo": {"beta": 0.5}, "checks": ["stationary", "stable", "closed-form"]})");
    const RunReport r = execute(parse_config(j)).report;
    EXPECT_TRUE(r.passed());
    EXPECT_NEAR(quantity(r, "lambda_eq"), 0.75, 1e-12);
    EXPECT_GT(quantity(r, "second_derivative"), 0.0);
}

TEST(RunScenario, FailedCheckIsReported) {
    json j = spin_evolve_json();
    j["system"]["q"] = 3;
    j["checks"] = {"linear-reference"};
    j["tolerances"] = {{"linear_reference", 1e-15}};
    const RunReport r = execute(parse_config(j)).report;
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(r.checks[0].threshold, 1e-15);
}

TEST(RunScenario, DeterministicOutputs) {
    json j = json::parse(R"({"kind": "evolve", "seed": 99, "system": {"dimension": 3,
                             "hamiltonian": {"preset": "random"}, "q": 2.5},
                             "initial_state": {"type": "random", "rank": 2},
                             "integrator": {"dt": 1e-2, "t_final": 1.0, "record_every": 5}})");
    ScenarioConfig cfg = parse_config(j);
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    cfg.output.directory = a.string();
    run_scenario(cfg);
    cfg.output.directory = b.string();
    run_scenario(cfg);
    EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
    EXPECT_EQ(slurp(a / "plot.csv"), slurp(b / "plot.csv"));
    EXPECT_FALSE(slurp(a / "trajectory.csv").empty());

    j["seed"] = 100;
    const ScenarioResult other = execute(parse_config(j));
    EXPECT_NE(trajectory_csv(other.trajectories[0].second), slurp(a / "trajectory.csv"));
}

TEST(EmitOutputs, TrajectoryHeaderIsColumnMajor) {
    const ScenarioResult r = execute(parse_config(spin_evolve_json()));
    const std::string csv = trajectory_csv(r.trajectories[0].second);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "t,re_rho_00,im_rho_00,re_rho_10,im_rho_10,re_rho_01,im_rho_01,re_rho_11,im_rho_11,C1,C2,C3,C4,C5,Hq");
}

TEST(EmitOutputs, MaximallyMixedHasConstantCasimirs) {
    json j = spin_evolve_json();
    j["initial_state"] = {{"type", "maximally-mixed"}};
    j["checks"] = {"invariants"};
    ScenarioConfig cfg = parse_config(j);
    const fs::path dir = scratch("mixed");
    emit_outputs(execute(cfg), cfg, dir);
    std::string header;
    const auto rows = read_csv(dir / "trajectory.csv", header);
    ASSERT_GT(rows.size(), 10u);
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 15u);
        for (int c = 9; c < 14; ++c) EXPECT_EQ(row[c], rows[0][c]);
        EXPECT_NEAR(row[9], 1.0, 1e-15);
        EXPECT_NEAR(row[10], 0.5, 1e-15);
    }
}

TEST(EmitOutputs, QuadraticSpinEnergyColumnIsConstant) {
    ScenarioConfig cfg = parse_config(spin_evolve_json());
    cfg.integrator.t_final = 20.0;
    const fs::path dir = scratch("energy");
    emit_outputs(execute(cfg), cfg, dir);
    std::string header;
    const auto rows = read_csv(dir / "trajectory.csv", header);
    for (const auto& row : rows) EXPECT_NEAR(row.back(), rows[0].back(), 1e-8);
    EXPECT_NE(rows[0].back(), 0.0);
}

TEST(EmitOutputs, HalfRangeDephasingPlotDecays) {
    const json j = json::parse(R"({"kind": "ensemble", "system": {"hamiltonian": {"preset": "spin-z"}, "q": 3},
                                   "ensemble": {"preset": "half-range", "n_lambda": 128, "n_phi": 8, "n_psi": 16,
                                                "decay_time": 200, "plot_dt": 1.0},
                                   "checks": ["analytic", "decay"]})");
    ScenarioConfig cfg = parse_config(j);
    const fs::path dir = scratch("dephasing");
    const ScenarioResult result = execute(cfg);
    EXPECT_TRUE(result.report.passed());
    emit_outputs(result, cfg, dir);
    std::string header;
    const auto rows = read_csv(dir / "plot.csv", header);
    EXPECT_EQ(header, "t,offdiag_abs,analytic_offdiag_abs");
    ASSERT_EQ(rows.size(), 201u);
    EXPECT_GT(rows.front()[1], 0.05);
    EXPECT_LT(rows.back()[1], 0.01 * rows.front()[1]);
}

TEST(EmitOutputs, FormatsSelectFiles) {
    ScenarioConfig cfg = parse_config(spin_evolve_json());
    cfg.output.formats = {"summary"};
    const fs::path dir = scratch("formats");
    emit_outputs(execute(cfg), cfg, dir);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_FALSE(fs::exists(dir / "trajectory.csv"));
    EXPECT_FALSE(fs::exists(dir / "plot.csv"));
}

TEST(EmitOutputs, UnwritableDirectoryIsIoError) {
    const fs::path dir = scratch("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    ScenarioConfig cfg = parse_config(spin_evolve_json());
    EXPECT_THROW(emit_outputs(execute(cfg), cfg, dir / "file" / "sub"), IoError);
}
