// experiment.cpp: Model construction and measured traces for CLI runs

#include "qsid/cli/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace qsid::cli {

namespace {

ComplexMatrix local_operator(const std::string& name, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    if (name == "identity") return ComplexMatrix::Identity(d, d);
    if (name == "a" || name == "adag" || name == "n") {
        if (dim < 2) throw ConfigError("operator '" + name + "' needs a factor of dimension >= 2");
        if (name == "a") return annihilation(dim);
        if (name == "adag") return creation(dim);
        return number_operator(dim);
    }
    if (dim != 2) throw ConfigError("operator '" + name + "' needs a qubit factor, got dimension " + std::to_string(dim));
    try {
        return pauli(name);
    } catch (const std::invalid_argument&) {
        throw ConfigError("unknown local operator '" + name + "'");
    }
}

ComplexMatrix local_state(const std::string& name, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    ComplexMatrix rho = ComplexMatrix::Zero(d, d);
    if (name == "mixed") return ComplexMatrix::Identity(d, d) / double(d);
    if (name == "vacuum" || name == "excited" || name == "ground" || name.rfind("fock:", 0) == 0) {
        Eigen::Index level = 0;
        if (name == "ground") {
            if (dim != 2) throw ConfigError("state 'ground' needs a qubit factor");
            level = 1;  // |g> is index 1 under sigma_z = diag(1, -1)
        } else if (name == "excited") {
            if (dim != 2) throw ConfigError("state 'excited' needs a qubit factor");
        } else if (name != "vacuum") {
            std::size_t k = 0;
            const auto digits = name.substr(5);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc() || ptr != digits.data() + digits.size() || k >= dim)
                throw ConfigError("state '" + name + "' is not a level of a " + std::to_string(dim) + "-level factor");
            level = static_cast<Eigen::Index>(k);
        }
        rho(level, level) = 1.0;
        return rho;
    }
    if (name == "plus_x" || name == "minus_x") {
        if (dim != 2) throw ConfigError("state '" + name + "' needs a qubit factor");
        const double s = name == "plus_x" ? 1.0 : -1.0;
        return 0.5 * (ComplexMatrix::Identity(2, 2) + s * pauli(Pauli::x));
    }
    throw ConfigError("unknown local state '" + name + "'");
}

ModelInstance generic_instance(const GenericModelConfig& g) {
    ModelInstance out;
    ModelSpec& m = out.model;
    m.space = HilbertSpace(g.factor_dims);

    // Hamiltonian unknowns first, in order of appearance, then rates.
    std::vector<std::string> names;
    std::vector<double> truth;
    bool all_truth = true;
    auto coefficient = [&](const GenericTerm& t) {
        if (!t.unknown) return Coefficient::known(*t.value);
        if (std::find(names.begin(), names.end(), *t.unknown) != names.end())
            throw ConfigError("unknown '" + *t.unknown + "' drives more than one term");
        names.push_back(*t.unknown);
        truth.push_back(t.truth.value_or(0.0));
        all_truth = all_truth && t.truth.has_value();
        return Coefficient::of_unknown(names.size() - 1);
    };
    for (const auto& t : g.hamiltonian) m.hamiltonian.push_back({t.name, build_operator(t.op, m.space), coefficient(t)});
    for (const auto& t : g.dissipators) m.dissipators.push_back({t.name, build_operator(t.op, m.space), coefficient(t)});
    m.unknown_names = names;
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model.generic: ") + e.what());
    }
    if (all_truth) out.theta_truth = truth;

    ComplexMatrix rho = local_state(g.initial_state[0], g.factor_dims[0]);
    for (std::size_t k = 1; k < g.factor_dims.size(); ++k) rho = kron(rho, local_state(g.initial_state[k], g.factor_dims[k]));
    out.rho0 = DensityMatrix::from_matrix(rho);
    out.observable = build_operator(g.observable, m.space);
    if (!is_hermitian(out.observable, 1e-12)) throw ConfigError("model.generic.observable is not Hermitian");
    return out;
}

ModelInstance jc_instance(models::JaynesCummingsSpec spec, std::size_t n_levels) {
    spec.n_levels = n_levels;
    auto built = models::build_jc_model(spec);
    ModelInstance out;
    out.rho0 = models::qubit_plus_x_state(built.model.space);
    out.observable = models::qubit_sigma_x(built.model.space);
    out.model = std::move(built.model);
    out.theta_truth = std::move(built.theta_truth);
    return out;
}

ModelInstance augmented_instance(models::AugmentedModelSpec spec, std::optional<std::size_t> n_levels) {
    if (n_levels)
        for (auto& a : spec.ancillas) a.n_levels = *n_levels;
    auto built = models::build_augmented_model(spec);
    ModelInstance out;
    out.rho0 = models::qubit_plus_x_state(built.model.space);
    out.observable = models::qubit_sigma_x(built.model.space);
    out.model = std::move(built.model);
    out.theta_truth = std::move(built.theta_truth);
    return out;
}

} // namespace

ComplexMatrix build_operator(const OperatorExpr& expr, const HilbertSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dimension());
    ComplexMatrix total = ComplexMatrix::Zero(d, d);
    for (const auto& p : expr) {
        if (p.ops.size() != space.factor_count()) throw ConfigError("operator product has the wrong number of factors");
        ComplexMatrix prod = local_operator(p.ops[0], space.factor_dim(0));
        for (std::size_t k = 1; k < p.ops.size(); ++k) prod = kron(prod, local_operator(p.ops[k], space.factor_dim(k)));
        total += p.coefficient * prod;
    }
    return total;
}

std::vector<double> order_values(const NamedValues& values, const std::vector<std::string>& names,
                                 const std::string& what) {
    std::vector<double> out;
    for (const auto& n : names) {
        const auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == n; });
        if (it == values.end()) throw ConfigError(what + " is missing unknown '" + n + "'");
        out.push_back(it->second);
    }
    for (const auto& [k, v] : values)
        if (std::find(names.begin(), names.end(), k) == names.end())
            throw ConfigError(what + " names '" + k + "', which is not an unknown of the model");
    return out;
}

Experiment build_experiment(const ExperimentConfig& c) {
    Experiment e;
    try {
        switch (c.model.kind) {
        case ModelKind::jc:
            e.truth = jc_instance(c.model.jc, c.model.jc.n_levels);
            e.identification = jc_instance(c.model.jc, c.model.jc_identification_levels);
            break;
        case ModelKind::augmented:
            e.truth = augmented_instance(c.model.augmented, std::nullopt);
            e.identification = augmented_instance(c.model.augmented, c.model.augmented_identification_levels);
            break;
        case ModelKind::generic:
            e.truth = generic_instance(c.model.generic);
            e.identification = e.truth;
            break;
        }
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("model: ") + ex.what());
    }
    for (std::size_t i = 0; i < c.starts.size(); ++i)
        e.starts.push_back(order_values(c.starts[i], e.identification.model.unknown_names,
                                        "identify.starts[" + std::to_string(i) + "]"));
    return e;
}

std::optional<ModelInstance> at_truncation(const ExperimentConfig& c, std::size_t n_levels) {
    switch (c.model.kind) {
    case ModelKind::jc: return jc_instance(c.model.jc, n_levels);
    case ModelKind::augmented: return augmented_instance(c.model.augmented, n_levels);
    case ModelKind::generic: return std::nullopt;
    }
    return std::nullopt;
}

ObservableTrace read_trace_file(const std::filesystem::path& path, const SamplingGrid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read measured trace '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "t,y") throw ConfigError(path.string() + ":1: expected header 't,y'", 1);
    ObservableTrace trace;
    trace.observable_name = "measured";
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        double t = 0.0, y = 0.0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument("no comma");
            std::size_t used = 0;
            t = std::stod(line.substr(0, comma), &used);
            y = std::stod(line.substr(comma + 1), &used);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": expected 't,y' numbers", row);
        }
        const std::size_t k = trace.values.size() + 1;
        if (std::abs(t - grid.time(k)) > 1e-9)
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": time " + line.substr(0, comma) +
                                  " does not match the grid", row);
        if (!std::isfinite(y)) throw ConfigError(path.string() + ":" + std::to_string(row) + ": y is not finite", row);
        trace.values.push_back(y);
    }
    if (trace.values.size() != grid.samples)
        throw ConfigError(path.string() + ": " + std::to_string(trace.values.size()) + " samples, grid has " +
                          std::to_string(grid.samples));
    return trace;
}

ObservableTrace measured_trace(const ExperimentConfig& c, const Experiment& e) {
    ObservableTrace trace;
    if (c.measured_file) {
        trace = read_trace_file(*c.measured_file, c.grid);
    } else {
        if (e.truth.theta_truth.size() != e.truth.model.unknown_count())
            throw ConfigError("no measured.file and the model has unknowns without a truth value");
        trace = simulate_trace(e.truth.model, e.truth.theta_truth, e.truth.rho0, e.truth.observable, c.grid,
                               {.keep_states = false, .dense_threshold = c.descent.dense_threshold,
                                .observable_name = "measured"})
                    .trace;
    }
    if (c.noise_sigma > 0.0) {
        std::mt19937_64 rng(c.noise_seed);
        std::normal_distribution<double> noise(0.0, c.noise_sigma);
        for (auto& y : trace.values) y += noise(rng);
    }
    return trace;
}

} // namespace qsid::cli
