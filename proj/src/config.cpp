#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "nvne/errors.hpp"
#include "nvne/scenario.hpp"
#include "nvne/thermo.hpp"

namespace nvne {

using nlohmann::json;

namespace {

struct KindName {
    ScenarioKind kind;
    const char* name;
};

constexpr KindName kKinds[] = {
    {ScenarioKind::Evolve, "evolve"},
    {ScenarioKind::Composite, "composite"},
    {ScenarioKind::Equilibrium, "equilibrium"},
    {ScenarioKind::Ensemble, "ensemble"},
    {ScenarioKind::BracketCheck, "bracket-check"},
};

struct ToleranceField {
    const char* name;
    double Tolerances::*member;
};

constexpr ToleranceField kToleranceFields[] = {
    {"eigenvalue", &Tolerances::eigenvalue},
    {"casimir", &Tolerances::casimir},
    {"energy", &Tolerances::energy},
    {"precession", &Tolerances::precession},
    {"sigma_z", &Tolerances::sigma_z},
    {"linear_reference", &Tolerances::linear_reference},
    {"stability_factor", &Tolerances::stability_factor},
    {"convergence_ratio", &Tolerances::convergence_ratio},
    {"convergence_band", &Tolerances::convergence_band},
    {"reduction", &Tolerances::reduction},
    {"slope", &Tolerances::slope},
    {"lambda", &Tolerances::lambda},
    {"gibbs", &Tolerances::gibbs},
    {"analytic", &Tolerances::analytic},
    {"decay_fraction", &Tolerances::decay_fraction},
    {"noise_floor", &Tolerances::noise_floor},
    {"node_drift", &Tolerances::node_drift},
    {"bracket", &Tolerances::bracket},
    {"antisymmetry", &Tolerances::antisymmetry},
};

const std::set<std::string> kFormats{"trajectory", "summary", "plot"};
const std::set<std::string> kStateTypes{"maximally-mixed", "bloch", "matrix", "pure",
                                        "random", "pure-random", "bell", "equilibrium"};

std::vector<std::string> allowed_checks(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Evolve: return {"invariants", "precession", "linear-reference", "stability", "convergence"};
        case ScenarioKind::Composite: return {"reduction", "invariants"};
        case ScenarioKind::Equilibrium: return {"stationary", "stable", "closed-form", "gibbs-limit"};
        case ScenarioKind::Ensemble: return {"analytic", "decay", "node-drift"};
        case ScenarioKind::BracketCheck: return {"casimir", "q-average", "antisymmetry"};
    }
    return {};
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Typed, path-aware view of one JSON object.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [key, value] : j_.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
                throw ConfigError(join(path_, key), "unknown key");
            }
        }
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    std::string key(const std::string& k) const { return join(path_, k); }

    Section child(const std::string& k) const {
        static const json kEmpty = json::object();
        return Section(has(k) ? j_.at(k) : kEmpty, key(k));
    }

    const json& at(const std::string& k) const { return j_.at(k); }
    auto items() const { return j_.items(); }

    double number(const std::string& k, double fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_number()) throw ConfigError(key(k), "expected a number");
        return at(k).get<double>();
    }

    int integer(const std::string& k, int fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_number_integer()) throw ConfigError(key(k), "expected an integer");
        return at(k).get<int>();
    }

    bool boolean(const std::string& k, bool fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_boolean()) throw ConfigError(key(k), "expected true or false");
        return at(k).get<bool>();
    }

    std::string string(const std::string& k, const std::string& fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_string()) throw ConfigError(key(k), "expected a string");
        return at(k).get<std::string>();
    }

    std::vector<double> numbers(const std::string& k, std::vector<double> fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_array()) throw ConfigError(key(k), "expected an array of numbers");
        std::vector<double> out;
        for (const json& v : at(k)) {
            if (!v.is_number()) throw ConfigError(key(k), "expected an array of numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& k, std::vector<std::string> fallback) const {
        if (!has(k)) return fallback;
        if (!at(k).is_array()) throw ConfigError(key(k), "expected an array of strings");
        std::vector<std::string> out;
        for (const json& v : at(k)) {
            if (!v.is_string()) throw ConfigError(key(k), "expected an array of strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

// Entries are [re, im] pairs or plain real numbers.
cplx parse_entry(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError(key, "entries must be numbers or [re, im] pairs");
}

Matrix parse_matrix(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError(key, "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Matrix m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
            throw ConfigError(key, "matrix must be square");
        }
        for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = parse_entry(row[static_cast<std::size_t>(c)], key);
    }
    return m;
}

Eigen::VectorXcd parse_vector(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError(key, "expected an array of entries");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = parse_entry(j[k], key);
    return v;
}

json entry_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(entry_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(entry_json(v(k)));
    return out;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

HamiltonianSpec parse_hamiltonian(const Section& s) {
    s.allow({"preset", "mu", "matrix"});
    HamiltonianSpec h;
    h.preset = s.string("preset", "");
    h.mu = s.number("mu", 1.0);
    if (s.has("matrix")) h.matrix = parse_matrix(s.at("matrix"), s.key("matrix"));
    return h;
}

json hamiltonian_json(const HamiltonianSpec& h) {
    return {{"preset", h.preset}, {"mu", h.mu}, {"matrix", matrix_json(h.matrix)}};
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

void validate_hamiltonian(const HamiltonianSpec& h, int dim, const std::string& key, bool has_seed) {
    if (h.preset == "spin-z") {
        require(dim == 2, key + ".preset", "spin-z needs a two-level system");
        require(std::isfinite(h.mu), key + ".mu", "must be finite");
    } else if (h.preset == "random") {
        require(has_seed, "seed", "a random Hamiltonian needs an explicit seed");
    } else if (h.preset.empty()) {
        require(h.matrix.rows() == dim, key + ".matrix", "expected a " + std::to_string(dim) + "x" +
                                                            std::to_string(dim) + " matrix");
        require(h.matrix.allFinite(), key + ".matrix", "entries must be finite");
        try {
            HermitianOperator check(h.matrix);
        } catch (const NotHermitian& e) {
            throw ConfigError(key + ".matrix", e.what());
        }
    } else {
        throw ConfigError(key + ".preset", "unknown preset '" + h.preset + "'");
    }
}

bool is_diagonal(const HamiltonianSpec& h) {
    if (h.preset == "spin-z") return true;
    if (!h.preset.empty()) return false;
    Matrix off = h.matrix;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
    for (const KindName& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "unknown";
}

bool HamiltonianSpec::operator==(const HamiltonianSpec& o) const {
    return preset == o.preset && mu == o.mu && same_matrix(matrix, o.matrix);
}

bool StateSpec::operator==(const StateSpec& o) const {
    return type == o.type && lam == o.lam && phi == o.phi && psi == o.psi && same_matrix(matrix, o.matrix) &&
           vector.size() == o.vector.size() && (vector.size() == 0 || vector == o.vector) && rank == o.rank;
}

bool OutputOptions::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
    return id == o.id && kind == o.kind && seed == o.seed && dimension == o.dimension &&
           hamiltonian == o.hamiltonian && q == o.q && dimension_II == o.dimension_II &&
           hamiltonian_II == o.hamiltonian_II && q1 == o.q1 && q2 == o.q2 && initial_state == o.initial_state &&
           integrator.dt == o.integrator.dt && integrator.t_final == o.integrator.t_final &&
           integrator.scheme == o.integrator.scheme && integrator.record_every == o.integrator.record_every &&
           integrator.energy_projection == o.integrator.energy_projection && beta == o.beta &&
           ensemble == o.ensemble && bracket == o.bracket && sweep == o.sweep && checks == o.checks &&
           tolerances == o.tolerances && output == o.output;
}

std::vector<std::string> ScenarioConfig::effective_checks() const {
    if (!checks.empty()) return checks;
    switch (kind) {
        case ScenarioKind::Evolve: return {"invariants"};
        case ScenarioKind::Equilibrium:
            return hamiltonian.preset == "spin-z" ? std::vector<std::string>{"stationary", "stable"}
                                                  : std::vector<std::string>{};
        default: return allowed_checks(kind);
    }
}

void ScenarioConfig::validate() const {
    require(!id.empty(), "id", "must not be empty");
    const bool seeded = seed.has_value();
    const auto wants_check = [&](const std::string& c) {
        const auto all = effective_checks();
        return std::find(all.begin(), all.end(), c) != all.end();
    };

    require(dimension >= 1 && dimension <= 16, "system.dimension", "must be between 1 and 16");
    require(finite_positive(q), "system.q", "must be positive");

    const bool integrates = kind == ScenarioKind::Evolve || kind == ScenarioKind::Composite ||
                            (kind == ScenarioKind::Ensemble && wants_check("node-drift"));
    if (integrates) {
        require(finite_positive(integrator.dt), "integrator.dt", "must be positive");
        require(finite_positive(integrator.t_final), "integrator.t_final", "must be positive");
        require(integrator.dt <= integrator.t_final, "integrator.dt", "must not exceed integrator.t_final");
        require(integrator.record_every >= 1, "integrator.record_every", "must be at least 1");
    }

    const auto allowed = allowed_checks(kind);
    for (const std::string& c : checks) {
        require(std::find(allowed.begin(), allowed.end(), c) != allowed.end(), "checks",
                "unknown check '" + c + "' for kind " + to_string(kind));
    }
    for (const ToleranceField& t : kToleranceFields) {
        require(finite_positive(tolerances.*t.member), std::string("tolerances.") + t.name, "must be positive");
    }
    require(!output.directory.empty(), "output.directory", "must not be empty");
    for (const std::string& f : output.formats) {
        require(kFormats.count(f) == 1, "output.formats", "unknown format '" + f + "'");
    }
    for (double v : sweep.q) require(finite_positive(v), "sweep.q", "values must be positive");

    int state_dim = dimension;
    switch (kind) {
        case ScenarioKind::Evolve:
            validate_hamiltonian(hamiltonian, dimension, "system.hamiltonian", seeded);
            require(sweep.x.empty(), "sweep.x", "only used by equilibrium scenarios");
            if (!sweep.lam.empty()) {
                require(initial_state.type == "bloch", "sweep.lambda", "needs a bloch initial state");
            }
            for (double v : sweep.lam) require(v >= 0.0 && v <= 1.0, "sweep.lambda", "values must lie in [0, 1]");
            if (wants_check("precession")) {
                require(dimension == 2 && is_diagonal(hamiltonian), "checks",
                        "precession needs a two-level system with diagonal Hamiltonian");
                require(initial_state.type == "bloch" || initial_state.type == "equilibrium", "checks",
                        "precession needs a bloch or equilibrium initial state");
                std::vector<double> lams = sweep.lam.empty() ? std::vector<double>{initial_state.lam} : sweep.lam;
                if (initial_state.type == "bloch") {
                    for (double l : lams) {
                        require(std::abs(2 * l - 1) * std::abs(std::sin(initial_state.phi)) > 1e-6, "initial_state",
                                "precession needs nonzero coherence (lambda != 1/2, phi not 0 or pi)");
                    }
                }
            }
            if (wants_check("stability")) {
                require(hamiltonian.preset == "spin-z", "checks", "stability needs the spin-z preset");
            }
            if (wants_check("convergence")) {
                const double steps = integrator.t_final / integrator.dt;
                require(std::abs(steps - std::round(steps)) < 1e-9 * steps, "integrator.dt",
                        "t_final must be a multiple of dt for the convergence check");
            }
            break;
        case ScenarioKind::Composite:
            validate_hamiltonian(hamiltonian, dimension, "system.hamiltonian", seeded);
            require(dimension_II >= 1 && dimension_II <= 16, "system.dimension_II", "must be between 1 and 16");
            validate_hamiltonian(hamiltonian_II, dimension_II, "system.hamiltonian_II", seeded);
            require(finite_positive(q1), "system.q1", "must be positive");
            require(finite_positive(q2), "system.q2", "must be positive");
            require(dimension * dimension_II <= 64, "system.dimension_II", "joint dimension must not exceed 64");
            state_dim = dimension * dimension_II;
            break;
        case ScenarioKind::Equilibrium: {
            validate_hamiltonian(hamiltonian, dimension, "system.hamiltonian", seeded);
            require(finite_positive(beta), "thermo.beta", "must be positive");
            require(sweep.lam.empty(), "sweep.lambda", "only used by evolve scenarios");
            const bool spin = hamiltonian.preset == "spin-z";
            for (const char* c : {"stationary", "stable", "closed-form", "gibbs-limit"}) {
                if (wants_check(c)) require(spin, "checks", std::string(c) + " needs the spin-z preset");
            }
            if (spin) {
                require(hamiltonian.mu > 0.0, "system.hamiltonian.mu", "must be positive for equilibrium");
                require(std::abs(q - 1.0) * beta * hamiltonian.mu < 1.0, "thermo.beta",
                        "outside the equilibrium domain |q - 1| beta mu < 1");
            }
            for (double v : sweep.x) require(v > 0.0 && v < 1.0, "sweep.x", "values must lie in (0, 1)");
            if (!sweep.x.empty()) {
                require(spin, "sweep.x", "needs the spin-z preset");
                for (double v : sweep.q) {
                    require(std::abs(v - 1.0) >= kQOneThreshold, "sweep.q", "values must differ from 1");
                }
            }
            break;
        }
        case ScenarioKind::Ensemble:
            require(dimension == 2 && hamiltonian.preset == "spin-z", "system.hamiltonian",
                    "ensembles need the spin-z preset");
            validate_hamiltonian(hamiltonian, dimension, "system.hamiltonian", seeded);
            require(ensemble.n_lam >= 16, "ensemble.n_lambda", "must be at least 16");
            require(ensemble.n_phi >= 1, "ensemble.n_phi", "must be at least 1");
            require(ensemble.n_psi >= 1, "ensemble.n_psi", "must be at least 1");
            for (double t : ensemble.times) require(std::isfinite(t) && t >= 0.0, "ensemble.times", "must be >= 0");
            require(finite_positive(ensemble.window), "ensemble.window", "must be positive");
            require(finite_positive(ensemble.decay_time), "ensemble.decay_time", "must be positive");
            require(finite_positive(ensemble.plot_dt), "ensemble.plot_dt", "must be positive");
            require(ensemble.node_stride >= 1, "ensemble.node_stride", "must be at least 1");
            break;
        case ScenarioKind::BracketCheck:
            validate_hamiltonian(hamiltonian, dimension, "system.hamiltonian", seeded);
            require(dimension >= 2, "system.dimension", "must be at least 2");
            require(seeded, "seed", "bracket checks draw random states and need an explicit seed");
            require(bracket.functionals >= 1, "bracket.functionals", "must be at least 1");
            require(bracket.max_casimir >= 1, "bracket.max_casimir", "must be at least 1");
            require(bracket.max_q >= 1, "bracket.max_q", "must be at least 1");
            break;
    }

    if (kind == ScenarioKind::Evolve || kind == ScenarioKind::Composite) {
        const StateSpec& s = initial_state;
        require(kStateTypes.count(s.type) == 1, "initial_state.type", "unknown state type '" + s.type + "'");
        if (s.type == "bloch") {
            require(state_dim == 2, "initial_state.type", "bloch states need a two-level system");
            require(s.lam >= 0.0 && s.lam <= 1.0, "initial_state.lambda", "must lie in [0, 1]");
            require(std::isfinite(s.phi), "initial_state.phi", "must be finite");
            require(std::isfinite(s.psi), "initial_state.psi", "must be finite");
        } else if (s.type == "equilibrium") {
            require(kind == ScenarioKind::Evolve && hamiltonian.preset == "spin-z", "initial_state.type",
                    "equilibrium states need the spin-z preset");
            require(finite_positive(beta), "thermo.beta", "must be positive");
            require(hamiltonian.mu > 0.0, "system.hamiltonian.mu", "must be positive for equilibrium");
            for (double v : sweep.q.empty() ? std::vector<double>{q} : sweep.q) {
                require(std::abs(v - 1.0) * beta * hamiltonian.mu < 1.0, "thermo.beta",
                        "outside the equilibrium domain |q - 1| beta mu < 1");
            }
        } else if (s.type == "matrix") {
            require(s.matrix.rows() == state_dim, "initial_state.matrix",
                    "expected a " + std::to_string(state_dim) + "x" + std::to_string(state_dim) + " matrix");
            try {
                validate_density(s.matrix);
            } catch (const NumericError& e) {
                throw ConfigError("initial_state.matrix", e.what());
            }
        } else if (s.type == "pure") {
            require(s.vector.size() == state_dim, "initial_state.vector",
                    "expected " + std::to_string(state_dim) + " entries");
            require(s.vector.allFinite() && s.vector.norm() > 0.0, "initial_state.vector", "must be a nonzero vector");
        } else if (s.type == "random" || s.type == "pure-random") {
            require(seeded, "seed", "a random initial state needs an explicit seed");
            require(s.rank >= 0 && s.rank <= state_dim, "initial_state.rank", "must lie in [0, dimension]");
        } else if (s.type == "bell") {
            require(state_dim == 4, "initial_state.type", "bell states need a 2x2 composite");
        }
    }
}

ScenarioConfig parse_config(const json& j) {
    const Section root(j, "");
    root.allow({"id", "kind", "seed", "system", "initial_state", "integrator", "thermo", "ensemble", "bracket",
                "sweep", "checks", "tolerances", "output"});
    ScenarioConfig cfg;
    cfg.id = root.string("id", cfg.id);

    if (!root.has("kind")) throw ConfigError("kind", "missing");
    const std::string kind = root.string("kind", "");
    const auto k = std::find_if(std::begin(kKinds), std::end(kKinds), [&](const KindName& n) { return kind == n.name; });
    if (k == std::end(kKinds)) throw ConfigError("kind", "unknown kind '" + kind + "'");
    cfg.kind = k->kind;

    if (root.has("seed")) {
        const json& seed = root.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("seed", "expected a non-negative integer");
        cfg.seed = root.at("seed").get<std::uint64_t>();
    }

    const Section system = root.child("system");
    system.allow({"dimension", "hamiltonian", "q", "dimension_II", "hamiltonian_II", "q1", "q2"});
    cfg.dimension = system.integer("dimension", cfg.dimension);
    cfg.hamiltonian = parse_hamiltonian(system.child("hamiltonian"));
    cfg.q = system.number("q", cfg.q);
    cfg.dimension_II = system.integer("dimension_II", cfg.dimension_II);
    cfg.hamiltonian_II = parse_hamiltonian(system.child("hamiltonian_II"));
    cfg.q1 = system.number("q1", cfg.q1);
    cfg.q2 = system.number("q2", cfg.q2);

    const Section state = root.child("initial_state");
    state.allow({"type", "lambda", "phi", "psi", "matrix", "vector", "rank"});
    StateSpec& s = cfg.initial_state;
    s.type = state.string("type", s.type);
    s.lam = state.number("lambda", s.lam);
    s.phi = state.number("phi", s.phi);
    s.psi = state.number("psi", s.psi);
    if (state.has("matrix")) s.matrix = parse_matrix(state.at("matrix"), state.key("matrix"));
    if (state.has("vector")) s.vector = parse_vector(state.at("vector"), state.key("vector"));
    s.rank = state.integer("rank", s.rank);

    const Section integ = root.child("integrator");
    integ.allow({"dt", "t_final", "record_every", "energy_projection", "scheme"});
    cfg.integrator.dt = integ.number("dt", cfg.integrator.dt);
    cfg.integrator.t_final = integ.number("t_final", cfg.integrator.t_final);
    cfg.integrator.record_every = integ.integer("record_every", cfg.integrator.record_every);
    cfg.integrator.energy_projection = integ.boolean("energy_projection", cfg.integrator.energy_projection);
    const std::string scheme = integ.string("scheme", "midpoint");
    if (scheme == "midpoint") {
        cfg.integrator.scheme = Scheme::UnitaryMidpoint;
    } else if (scheme == "euler") {
        cfg.integrator.scheme = Scheme::UnitaryEuler;
    } else {
        throw ConfigError("integrator.scheme", "expected 'midpoint' or 'euler'");
    }

    const Section thermo = root.child("thermo");
    thermo.allow({"beta"});
    cfg.beta = thermo.number("beta", cfg.beta);

    const Section ens = root.child("ensemble");
    ens.allow({"preset", "n_lambda", "n_phi", "n_psi", "times", "window", "decay_time", "plot_dt", "node_stride"});
    const std::string preset = ens.string("preset", "paper");
    if (preset == "paper") {
        cfg.ensemble.preset = WeightPreset::Paper;
    } else if (preset == "half-range") {
        cfg.ensemble.preset = WeightPreset::HalfRange;
    } else {
        throw ConfigError("ensemble.preset", "expected 'paper' or 'half-range'");
    }
    cfg.ensemble.n_lam = ens.integer("n_lambda", cfg.ensemble.n_lam);
    cfg.ensemble.n_phi = ens.integer("n_phi", cfg.ensemble.n_phi);
    cfg.ensemble.n_psi = ens.integer("n_psi", cfg.ensemble.n_psi);
    cfg.ensemble.times = ens.numbers("times", cfg.ensemble.times);
    cfg.ensemble.window = ens.number("window", cfg.ensemble.window);
    cfg.ensemble.decay_time = ens.number("decay_time", cfg.ensemble.decay_time);
    cfg.ensemble.plot_dt = ens.number("plot_dt", cfg.ensemble.plot_dt);
    cfg.ensemble.node_stride = ens.integer("node_stride", cfg.ensemble.node_stride);

    const Section br = root.child("bracket");
    br.allow({"functionals", "max_casimir", "max_q"});
    cfg.bracket.functionals = br.integer("functionals", cfg.bracket.functionals);
    cfg.bracket.max_casimir = br.integer("max_casimir", cfg.bracket.max_casimir);
    cfg.bracket.max_q = br.integer("max_q", cfg.bracket.max_q);

    const Section sw = root.child("sweep");
    sw.allow({"q", "lambda", "x"});
    cfg.sweep.q = sw.numbers("q", {});
    cfg.sweep.lam = sw.numbers("lambda", {});
    cfg.sweep.x = sw.numbers("x", {});

    cfg.checks = root.strings("checks", {});

    const Section tol = root.child("tolerances");
    for (const auto& item : tol.items()) {
        const std::string& key = item.key();
        const bool known = std::any_of(std::begin(kToleranceFields), std::end(kToleranceFields),
                                       [&](const ToleranceField& t) { return key == t.name; });
        if (!known) throw ConfigError("tolerances." + key, "unknown tolerance");
    }
    for (const ToleranceField& t : kToleranceFields) cfg.tolerances.*t.member = tol.number(t.name, cfg.tolerances.*t.member);

    const Section out = root.child("output");
    out.allow({"directory", "formats"});
    cfg.output.directory = out.string("directory", cfg.output.directory);
    cfg.output.formats = out.strings("formats", cfg.output.formats);

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const ScenarioConfig& cfg) {
    json tol = json::object();
    for (const ToleranceField& t : kToleranceFields) tol[t.name] = cfg.tolerances.*t.member;
    const StateSpec& s = cfg.initial_state;
    return {
        {"id", cfg.id},
        {"kind", to_string(cfg.kind)},
        {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
        {"system",
         {{"dimension", cfg.dimension},
          {"hamiltonian", hamiltonian_json(cfg.hamiltonian)},
          {"q", cfg.q},
          {"dimension_II", cfg.dimension_II},
          {"hamiltonian_II", hamiltonian_json(cfg.hamiltonian_II)},
          {"q1", cfg.q1},
          {"q2", cfg.q2}}},
        {"initial_state",
         {{"type", s.type},
          {"lambda", s.lam},
          {"phi", s.phi},
          {"psi", s.psi},
          {"matrix", matrix_json(s.matrix)},
          {"vector", vector_json(s.vector)},
          {"rank", s.rank}}},
        {"integrator",
         {{"dt", cfg.integrator.dt},
          {"t_final", cfg.integrator.t_final},
          {"record_every", cfg.integrator.record_every},
          {"energy_projection", cfg.integrator.energy_projection},
          {"scheme", cfg.integrator.scheme == Scheme::UnitaryMidpoint ? "midpoint" : "euler"}}},
        {"thermo", {{"beta", cfg.beta}}},
        {"ensemble",
         {{"preset", cfg.ensemble.preset == WeightPreset::Paper ? "paper" : "half-range"},
          {"n_lambda", cfg.ensemble.n_lam},
          {"n_phi", cfg.ensemble.n_phi},
          {"n_psi", cfg.ensemble.n_psi},
          {"times", cfg.ensemble.times},
          {"window", cfg.ensemble.window},
          {"decay_time", cfg.ensemble.decay_time},
          {"plot_dt", cfg.ensemble.plot_dt},
          {"node_stride", cfg.ensemble.node_stride}}},
        {"bracket",
         {{"functionals", cfg.bracket.functionals},
          {"max_casimir", cfg.bracket.max_casimir},
          {"max_q", cfg.bracket.max_q}}},
        {"sweep", {{"q", cfg.sweep.q}, {"lambda", cfg.sweep.lam}, {"x", cfg.sweep.x}}},
        {"checks", cfg.checks},
        {"tolerances", tol},
        {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}},
    };
}

}  // namespace nvne
