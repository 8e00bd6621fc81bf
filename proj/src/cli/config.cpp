// config.cpp: YAML experiment configuration

#include "qsid/cli/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace qsid::cli {

ConfigError::ConfigError(const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(message), line_(line) {}

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::jc: return "jc";
    case ModelKind::augmented: return "augmented";
    case ModelKind::generic: return "generic";
    }
    return "?";
}

namespace {

// A mapping node together with its dotted path, for messages.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string* source)
        : node_(std::move(node)), path_(std::move(path)), source_(source) {
        if (node_ && !node_.IsMap()) fail("'" + path_ + "' must be a mapping", node_);
    }

    bool present() const { return node_ && node_.IsMap(); }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what, const YAML::Node& at) const {
        std::optional<std::size_t> line;
        if (at && at.Mark().line >= 0) line = static_cast<std::size_t>(at.Mark().line) + 1;
        throw ConfigError(*source_ + (line ? ":" + std::to_string(*line) : std::string()) + ": " + what, line);
    }
    [[noreturn]] void fail(const std::string& what) const { fail(what, node_); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!present()) return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) fail("unknown key '" + key + "' in '" + path_ + "'", kv.first);
        }
    }

    YAML::Node raw(const char* key) const { return present() ? node_[key] : YAML::Node(); }
    bool has(const char* key) const {
        const auto n = raw(key);
        return n && !n.IsNull();
    }

    Section sub(const char* key) const { return Section(raw(key), path_ + "." + key, source_); }

    template <typename T>
    T as(const YAML::Node& n, const std::string& name) const {
        if (!n.IsScalar()) fail("'" + name + "' must be a scalar", n);
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail("'" + name + "' has an invalid value '" + n.Scalar() + "'", n);
        }
    }

    template <typename T>
    void read(const char* key, T& target) const {
        if (has(key)) target = as<T>(raw(key), path_ + "." + key);
    }

    void read_size(const char* key, std::size_t& target) const {
        if (!has(key)) return;
        const auto n = raw(key);
        const auto v = as<long long>(n, path_ + "." + key);
        if (v < 0) fail("'" + path_ + "." + key + "' must be >= 0", n);
        target = static_cast<std::size_t>(v);
    }

    const YAML::Node& node() const { return node_; }
    const std::string* source() const { return source_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string* source_;
};

Complex read_complex(const Section& s, const YAML::Node& n, const std::string& name) {
    if (n.IsSequence()) {
        if (n.size() != 2) s.fail("'" + name + "' must be a number or [re, im]", n);
        return {s.as<double>(n[0], name), s.as<double>(n[1], name)};
    }
    return {s.as<double>(n, name), 0.0};
}

OperatorExpr read_operator(const Section& s, const YAML::Node& n, const std::string& name, std::size_t factors) {
    if (!n || !n.IsSequence() || n.size() == 0) s.fail("'" + name + "' must be a non-empty list of products", n);
    OperatorExpr out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string item = name + "[" + std::to_string(i) + "]";
        Section p(n[i], item, s.source());
        p.allow({"coefficient", "ops"});
        OperatorProduct prod;
        if (p.has("coefficient")) prod.coefficient = read_complex(p, p.raw("coefficient"), item + ".coefficient");
        const auto ops = p.raw("ops");
        if (!ops || !ops.IsSequence()) p.fail("'" + item + ".ops' must be a list of local operator names");
        for (const auto& o : ops) prod.ops.push_back(p.as<std::string>(o, item + ".ops"));
        if (prod.ops.size() != factors)
            p.fail("'" + item + ".ops' names " + std::to_string(prod.ops.size()) + " factors, model has " +
                   std::to_string(factors));
        out.push_back(std::move(prod));
    }
    return out;
}

std::vector<GenericTerm> read_generic_terms(const Section& g, const char* key, std::size_t factors,
                                            const char* value_key) {
    std::vector<GenericTerm> out;
    const auto n = g.raw(key);
    if (!n || n.IsNull()) return out;
    if (!n.IsSequence()) g.fail("'" + g.path() + "." + key + "' must be a list", n);
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string item = g.path() + "." + key + "[" + std::to_string(i) + "]";
        Section t(n[i], item, g.source());
        t.allow({"name", "operator", value_key, "unknown", "truth"});
        GenericTerm term;
        term.name = t.has("name") ? t.as<std::string>(t.raw("name"), item + ".name") : std::string(key) + std::to_string(i);
        term.op = read_operator(t, t.raw("operator"), item + ".operator", factors);
        if (t.has(value_key)) term.value = t.as<double>(t.raw(value_key), item + "." + value_key);
        if (t.has("unknown")) term.unknown = t.as<std::string>(t.raw("unknown"), item + ".unknown");
        if (t.has("truth")) term.truth = t.as<double>(t.raw("truth"), item + ".truth");
        if (term.value.has_value() == term.unknown.has_value())
            t.fail("'" + item + "' needs exactly one of '" + value_key + "' or 'unknown'");
        if (term.truth && !term.unknown) t.fail("'" + item + ".truth' only applies to unknown terms");
        out.push_back(std::move(term));
    }
    return out;
}

NamedValues read_named(const Section& s, const YAML::Node& n, const std::string& name) {
    if (!n || !n.IsMap()) s.fail("'" + name + "' must map unknown names to values", n);
    NamedValues out;
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        for (const auto& [k, v] : out)
            if (k == key) s.fail("'" + name + "' repeats '" + key + "'", kv.first);
        out.emplace_back(key, s.as<double>(kv.second, name + "." + key));
    }
    return out;
}

std::vector<models::AncillaSpec> read_ancillas(const Section& s, const YAML::Node& n, const std::string& name) {
    if (!n || !n.IsSequence() || n.size() == 0) s.fail("'" + name + "' must be a non-empty list", n);
    std::vector<models::AncillaSpec> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string item = name + "[" + std::to_string(i) + "]";
        Section a(n[i], item, s.source());
        a.allow({"omega", "gamma_bar", "beta", "mu", "n_levels"});
        models::AncillaSpec spec;
        if (!a.has("omega") || !a.has("gamma_bar")) a.fail("'" + item + "' needs omega and gamma_bar");
        a.read("omega", spec.omega);
        a.read("gamma_bar", spec.gamma_bar);
        if (a.has("beta")) spec.beta = a.as<double>(a.raw("beta"), item + ".beta");
        if (a.has("mu")) spec.mu = a.as<double>(a.raw("mu"), item + ".mu");
        a.read_size("n_levels", spec.n_levels);
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            a.fail(item + ": " + e.what());
        }
        out.push_back(spec);
    }
    return out;
}

NamedValues jc_start(double g, double gamma, double nu) {
    return {{"nu_q", nu}, {"g_d", g}, {"gamma_d", gamma}};
}

void apply_kind_defaults(ExperimentConfig& c) {
    switch (c.model.kind) {
    case ModelKind::jc:
        c.descent.step_size = 2e-4;
        c.descent.max_iters = 40000;
        break;
    case ModelKind::augmented:
        c.descent.step_size = 2e-3;
        c.descent.max_iters = 10000;
        break;
    case ModelKind::generic:
        break;
    }
}

std::vector<NamedValues> default_starts(const ModelConfig& m) {
    using std::numbers::pi;
    if (m.kind == ModelKind::jc) {
        std::vector<NamedValues> all{jc_start(0.6, 0.1 * pi, 3.0), jc_start(0.2, 0.15 * pi, 7.0),
                                     jc_start(0.5, 0.05 * pi, 5.0), jc_start(0.4, 0.25 * pi, 4.0)};
        const std::set<std::string> unknown = [&] {
            std::set<std::string> s;
            for (auto p : m.jc.unknowns) s.insert(models::to_string(p));
            return s;
        }();
        for (auto& start : all)
            std::erase_if(start, [&](const auto& kv) { return !unknown.count(kv.first); });
        return all;
    }
    if (m.kind == ModelKind::augmented && m.augmented.ancillas.size() == 2) {
        return {{{"omega_1", 9.4}, {"omega_2", 10.8}, {"mu_1", -1.45}, {"mu_2", -1.07},
                 {"gamma_bar_1", 1.56}, {"gamma_bar_2", 1.92}}};
    }
    return {};
}

models::AugmentedModelSpec default_augmented() {
    models::AugmentedModelSpec spec;
    spec.omega_0 = 10.0;
    spec.ancillas = {{.omega = 9.0, .gamma_bar = 2.0, .beta = 3.5, .mu = std::nullopt, .n_levels = 4},
                     {.omega = 11.0, .gamma_bar = 1.5, .beta = 3.0, .mu = std::nullopt, .n_levels = 4}};
    return spec;
}

void read_model(const Section& root, ExperimentConfig& c) {
    const Section m = root.sub("model");
    m.allow({"kind", "jc", "augmented", "generic"});
    std::string kind = "jc";
    m.read("kind", kind);
    if (kind == "jc") c.model.kind = ModelKind::jc;
    else if (kind == "augmented") c.model.kind = ModelKind::augmented;
    else if (kind == "generic") c.model.kind = ModelKind::generic;
    else m.fail("'model.kind' must be jc, augmented or generic", m.raw("kind"));
    for (const char* other : {"jc", "augmented", "generic"})
        if (other != kind && m.has(other)) m.fail("'model." + std::string(other) + "' given but model.kind is " + kind, m.raw(other));

    if (c.model.kind == ModelKind::jc) {
        const Section j = m.sub("jc");
        j.allow({"nu_q", "nu_0", "g_d", "gamma_d", "gamma_0", "truth_levels", "identification_levels", "unknowns"});
        auto& spec = c.model.jc;
        j.read("nu_q", spec.nu_q);
        j.read("nu_0", spec.nu_0);
        j.read("g_d", spec.g_d);
        j.read("gamma_d", spec.gamma_d);
        j.read("gamma_0", spec.gamma_0);
        j.read_size("truth_levels", spec.n_levels);
        j.read_size("identification_levels", c.model.jc_identification_levels);
        if (j.has("unknowns")) {
            const auto n = j.raw("unknowns");
            if (!n.IsSequence()) j.fail("'model.jc.unknowns' must be a list", n);
            spec.unknowns.clear();
            for (const auto& u : n) {
                try {
                    spec.unknowns.push_back(models::jc_parameter_from_string(j.as<std::string>(u, "model.jc.unknowns")));
                } catch (const std::invalid_argument& e) {
                    j.fail(e.what(), u);
                }
            }
        }
        try {
            spec.validate();
            if (c.model.jc_identification_levels < 2) throw std::invalid_argument("identification_levels must be >= 2");
        } catch (const std::invalid_argument& e) {
            j.fail(std::string("model.jc: ") + e.what());
        }
    } else if (c.model.kind == ModelKind::augmented) {
        const Section a = m.sub("augmented");
        a.allow({"omega_0", "ancillas", "identification_levels"});
        c.model.augmented = default_augmented();
        a.read("omega_0", c.model.augmented.omega_0);
        if (a.has("ancillas")) c.model.augmented.ancillas = read_ancillas(a, a.raw("ancillas"), "model.augmented.ancillas");
        c.model.augmented_identification_levels = c.model.augmented.ancillas.front().n_levels;
        a.read_size("identification_levels", c.model.augmented_identification_levels);
        if (c.model.augmented_identification_levels < 2) a.fail("'model.augmented.identification_levels' must be >= 2");
    } else {
        const Section g = m.sub("generic");
        if (!g.present()) m.fail("'model.generic' is required when model.kind is generic");
        g.allow({"factor_dims", "initial_state", "observable", "hamiltonian", "dissipators"});
        auto& gen = c.model.generic;
        const auto dims = g.raw("factor_dims");
        if (!dims || !dims.IsSequence() || dims.size() == 0) g.fail("'model.generic.factor_dims' must be a non-empty list");
        for (const auto& d : dims) {
            const auto v = g.as<long long>(d, "model.generic.factor_dims");
            if (v < 1) g.fail("'model.generic.factor_dims' entries must be >= 1", d);
            gen.factor_dims.push_back(static_cast<std::size_t>(v));
        }
        const auto init = g.raw("initial_state");
        if (!init || !init.IsSequence() || init.size() != gen.factor_dims.size())
            g.fail("'model.generic.initial_state' must name one local state per factor");
        for (const auto& s : init) gen.initial_state.push_back(g.as<std::string>(s, "model.generic.initial_state"));
        gen.observable = read_operator(g, g.raw("observable"), "model.generic.observable", gen.factor_dims.size());
        gen.hamiltonian = read_generic_terms(g, "hamiltonian", gen.factor_dims.size(), "value");
        gen.dissipators = read_generic_terms(g, "dissipators", gen.factor_dims.size(), "rate");
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& source_name) {
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg,
                          static_cast<std::size_t>(e.mark.line + 1));
    }
    if (!doc || doc.IsNull()) doc = YAML::Node(YAML::NodeType::Map);
    const Section root(doc, "", &source_name);
    root.allow({"model", "grid", "measured", "noise", "descent", "identify", "guess", "spectrum", "gradcheck", "io"});

    ExperimentConfig c;
    read_model(root, c);
    apply_kind_defaults(c);

    const Section grid = root.sub("grid");
    grid.allow({"dt", "samples"});
    grid.read("dt", c.grid.dt);
    grid.read_size("samples", c.grid.samples);
    try {
        c.grid.validate();
    } catch (const std::invalid_argument& e) {
        grid.fail(std::string("grid: ") + e.what());
    }

    const Section measured = root.sub("measured");
    measured.allow({"file"});
    if (measured.has("file")) {
        std::filesystem::path p = measured.as<std::string>(measured.raw("file"), "measured.file");
        c.measured_file = p.is_absolute() ? p : std::filesystem::absolute(base_dir / p).lexically_normal();
    }

    const Section noise = root.sub("noise");
    noise.allow({"sigma", "seed"});
    noise.read("sigma", c.noise_sigma);
    noise.read("seed", c.noise_seed);
    if (!(c.noise_sigma >= 0.0)) noise.fail("'noise.sigma' must be >= 0", noise.raw("sigma"));

    const Section d = root.sub("descent");
    d.allow({"step_size", "step_sizes", "max_iters", "objective_tolerance", "gradient_method", "clamp_rates",
             "dense_threshold", "fd_step"});
    d.read("step_size", c.descent.step_size);
    if (d.has("step_sizes")) {
        for (auto& [k, v] : read_named(d, d.raw("step_sizes"), "descent.step_sizes")) c.descent.step_size_overrides[k] = v;
    }
    d.read_size("max_iters", c.descent.max_iters);
    if (d.present() && d.raw("objective_tolerance")) {
        if (d.raw("objective_tolerance").IsNull()) c.descent.objective_tolerance.reset();
        else c.descent.objective_tolerance = d.as<double>(d.raw("objective_tolerance"), "descent.objective_tolerance");
    }
    if (d.has("gradient_method")) {
        try {
            c.descent.gradient_method = gradient_method_from_string(d.as<std::string>(d.raw("gradient_method"), "descent.gradient_method"));
        } catch (const std::invalid_argument& e) {
            d.fail(e.what(), d.raw("gradient_method"));
        }
    }
    d.read("clamp_rates", c.descent.clamp_rates);
    d.read_size("dense_threshold", c.descent.dense_threshold);
    d.read("fd_step", c.descent.fd_step);
    if (!(c.descent.step_size > 0.0)) d.fail("'descent.step_size' must be > 0", d.raw("step_size"));
    for (const auto& [k, v] : c.descent.step_size_overrides)
        if (!(v > 0.0)) d.fail("'descent.step_sizes." + k + "' must be > 0", d.raw("step_sizes"));
    if (!(c.descent.fd_step > 0.0)) d.fail("'descent.fd_step' must be > 0", d.raw("fd_step"));

    const Section ident = root.sub("identify");
    ident.allow({"starts", "consistency_levels"});
    if (ident.has("starts")) {
        const auto n = ident.raw("starts");
        if (!n.IsSequence() || n.size() == 0) ident.fail("'identify.starts' must be a non-empty list", n);
        for (std::size_t i = 0; i < n.size(); ++i)
            c.starts.push_back(read_named(ident, n[i], "identify.starts[" + std::to_string(i) + "]"));
    } else {
        c.starts = default_starts(c.model);
    }
    if (ident.has("consistency_levels")) {
        std::size_t v = 0;
        ident.read_size("consistency_levels", v);
        if (v < 2) ident.fail("'identify.consistency_levels' must be >= 2", ident.raw("consistency_levels"));
        c.consistency_levels = v;
    } else if (c.model.kind == ModelKind::jc) {
        c.consistency_levels = c.model.jc.n_levels;
    }

    const Section guess = root.sub("guess");
    guess.allow({"qubit_omega", "min_prominence", "window"});
    if (guess.has("qubit_omega")) c.guess_qubit_omega = guess.as<double>(guess.raw("qubit_omega"), "guess.qubit_omega");
    else if (c.model.kind == ModelKind::jc) c.guess_qubit_omega = c.model.jc.nu_q;
    else if (c.model.kind == ModelKind::augmented) c.guess_qubit_omega = c.model.augmented.omega_0;
    guess.read("min_prominence", c.guess_min_prominence);
    if (!(c.guess_min_prominence > 0.0 && c.guess_min_prominence < 1.0))
        guess.fail("'guess.min_prominence' must be in (0, 1)", guess.raw("min_prominence"));
    if (guess.has("window")) {
        try {
            c.guess_window = spectral::window_from_string(guess.as<std::string>(guess.raw("window"), "guess.window"));
        } catch (const std::invalid_argument& e) {
            guess.fail(e.what(), guess.raw("window"));
        }
    }

    const Section spec = root.sub("spectrum");
    spec.allow({"omega_min", "omega_max", "points", "ancillas"});
    spec.read("omega_min", c.spectrum_omega_min);
    spec.read("omega_max", c.spectrum_omega_max);
    spec.read_size("points", c.spectrum_points);
    if (!(c.spectrum_omega_max > c.spectrum_omega_min)) spec.fail("'spectrum.omega_max' must exceed omega_min");
    if (c.spectrum_points < 2) spec.fail("'spectrum.points' must be >= 2", spec.raw("points"));
    if (spec.has("ancillas")) c.spectrum_ancillas = read_ancillas(spec, spec.raw("ancillas"), "spectrum.ancillas");

    const Section gc = root.sub("gradcheck");
    gc.allow({"theta", "fd_step", "halving"});
    if (gc.has("theta")) c.gradcheck_theta = read_named(gc, gc.raw("theta"), "gradcheck.theta");
    gc.read("fd_step", c.gradcheck_fd_step);
    gc.read("halving", c.gradcheck_halving);
    if (!(c.gradcheck_fd_step > 0.0)) gc.fail("'gradcheck.fd_step' must be > 0", gc.raw("fd_step"));

    const Section io = root.sub("io");
    io.allow({"output_dir", "write_states"});
    if (io.has("output_dir")) c.output_dir = io.as<std::string>(io.raw("output_dir"), "io.output_dir");
    io.read("write_states", c.write_states);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(buf.str(), base, path.string());
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

void emit_operator(YAML::Emitter& out, const OperatorExpr& expr) {
    out << YAML::BeginSeq;
    for (const auto& p : expr) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "coefficient" << YAML::Value;
        if (p.coefficient.imag() == 0.0) out << num(p.coefficient.real());
        else out << YAML::Flow << YAML::BeginSeq << num(p.coefficient.real()) << num(p.coefficient.imag()) << YAML::EndSeq;
        out << YAML::Key << "ops" << YAML::Value << YAML::Flow << p.ops;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

void emit_terms(YAML::Emitter& out, const std::vector<GenericTerm>& terms, const char* value_key) {
    out << YAML::BeginSeq;
    for (const auto& t : terms) {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << t.name;
        out << YAML::Key << "operator" << YAML::Value;
        emit_operator(out, t.op);
        if (t.value) out << YAML::Key << value_key << YAML::Value << num(*t.value);
        if (t.unknown) out << YAML::Key << "unknown" << YAML::Value << *t.unknown;
        if (t.truth) out << YAML::Key << "truth" << YAML::Value << num(*t.truth);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

void emit_named(YAML::Emitter& out, const NamedValues& v) {
    out << YAML::Flow << YAML::BeginMap;
    for (const auto& [k, x] : v) out << YAML::Key << k << YAML::Value << num(x);
    out << YAML::EndMap;
}

void emit_ancillas(YAML::Emitter& out, const std::vector<models::AncillaSpec>& ancillas) {
    out << YAML::BeginSeq;
    for (const auto& a : ancillas) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "omega" << YAML::Value << num(a.omega);
        out << YAML::Key << "gamma_bar" << YAML::Value << num(a.gamma_bar);
        if (a.beta) out << YAML::Key << "beta" << YAML::Value << num(*a.beta);
        if (a.mu) out << YAML::Key << "mu" << YAML::Value << num(*a.mu);
        out << YAML::Key << "n_levels" << YAML::Value << a.n_levels;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

} // namespace

std::string emit_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.model.kind);
    if (c.model.kind == ModelKind::jc) {
        const auto& j = c.model.jc;
        out << YAML::Key << "jc" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "nu_q" << YAML::Value << num(j.nu_q);
        out << YAML::Key << "nu_0" << YAML::Value << num(j.nu_0);
        out << YAML::Key << "g_d" << YAML::Value << num(j.g_d);
        out << YAML::Key << "gamma_d" << YAML::Value << num(j.gamma_d);
        out << YAML::Key << "gamma_0" << YAML::Value << num(j.gamma_0);
        out << YAML::Key << "truth_levels" << YAML::Value << j.n_levels;
        out << YAML::Key << "identification_levels" << YAML::Value << c.model.jc_identification_levels;
        out << YAML::Key << "unknowns" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (auto u : j.unknowns) out << models::to_string(u);
        out << YAML::EndSeq << YAML::EndMap;
    } else if (c.model.kind == ModelKind::augmented) {
        out << YAML::Key << "augmented" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "omega_0" << YAML::Value << num(c.model.augmented.omega_0);
        out << YAML::Key << "identification_levels" << YAML::Value << c.model.augmented_identification_levels;
        out << YAML::Key << "ancillas" << YAML::Value;
        emit_ancillas(out, c.model.augmented.ancillas);
        out << YAML::EndMap;
    } else {
        const auto& g = c.model.generic;
        out << YAML::Key << "generic" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "factor_dims" << YAML::Value << YAML::Flow << g.factor_dims;
        out << YAML::Key << "initial_state" << YAML::Value << YAML::Flow << g.initial_state;
        out << YAML::Key << "observable" << YAML::Value;
        emit_operator(out, g.observable);
        out << YAML::Key << "hamiltonian" << YAML::Value;
        emit_terms(out, g.hamiltonian, "value");
        out << YAML::Key << "dissipators" << YAML::Value;
        emit_terms(out, g.dissipators, "rate");
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << num(c.grid.dt);
    out << YAML::Key << "samples" << YAML::Value << c.grid.samples << YAML::EndMap;

    if (c.measured_file) {
        out << YAML::Key << "measured" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "file" << YAML::Value << c.measured_file->string() << YAML::EndMap;
    }

    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "sigma" << YAML::Value << num(c.noise_sigma);
    out << YAML::Key << "seed" << YAML::Value << c.noise_seed << YAML::EndMap;

    out << YAML::Key << "descent" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "step_size" << YAML::Value << num(c.descent.step_size);
    if (!c.descent.step_size_overrides.empty()) {
        out << YAML::Key << "step_sizes" << YAML::Value;
        emit_named(out, NamedValues(c.descent.step_size_overrides.begin(), c.descent.step_size_overrides.end()));
    }
    out << YAML::Key << "max_iters" << YAML::Value << c.descent.max_iters;
    out << YAML::Key << "objective_tolerance" << YAML::Value;
    if (c.descent.objective_tolerance) out << num(*c.descent.objective_tolerance);
    else out << YAML::Null;
    out << YAML::Key << "gradient_method" << YAML::Value << to_string(c.descent.gradient_method);
    out << YAML::Key << "clamp_rates" << YAML::Value << c.descent.clamp_rates;
    out << YAML::Key << "dense_threshold" << YAML::Value << c.descent.dense_threshold;
    out << YAML::Key << "fd_step" << YAML::Value << num(c.descent.fd_step) << YAML::EndMap;

    out << YAML::Key << "identify" << YAML::Value << YAML::BeginMap;
    if (!c.starts.empty()) {
        out << YAML::Key << "starts" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : c.starts) emit_named(out, s);
        out << YAML::EndSeq;
    }
    if (c.consistency_levels) out << YAML::Key << "consistency_levels" << YAML::Value << *c.consistency_levels;
    out << YAML::EndMap;

    out << YAML::Key << "guess" << YAML::Value << YAML::BeginMap;
    if (c.guess_qubit_omega) out << YAML::Key << "qubit_omega" << YAML::Value << num(*c.guess_qubit_omega);
    out << YAML::Key << "min_prominence" << YAML::Value << num(c.guess_min_prominence);
    out << YAML::Key << "window" << YAML::Value << spectral::to_string(c.guess_window) << YAML::EndMap;

    out << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "omega_min" << YAML::Value << num(c.spectrum_omega_min);
    out << YAML::Key << "omega_max" << YAML::Value << num(c.spectrum_omega_max);
    out << YAML::Key << "points" << YAML::Value << c.spectrum_points;
    if (c.spectrum_ancillas) {
        out << YAML::Key << "ancillas" << YAML::Value;
        emit_ancillas(out, *c.spectrum_ancillas);
    }
    out << YAML::EndMap;

    out << YAML::Key << "gradcheck" << YAML::Value << YAML::BeginMap;
    if (c.gradcheck_theta) {
        out << YAML::Key << "theta" << YAML::Value;
        emit_named(out, *c.gradcheck_theta);
    }
    out << YAML::Key << "fd_step" << YAML::Value << num(c.gradcheck_fd_step);
    out << YAML::Key << "halving" << YAML::Value << c.gradcheck_halving << YAML::EndMap;

    out << YAML::Key << "io" << YAML::Value << YAML::BeginMap;
    if (c.output_dir) out << YAML::Key << "output_dir" << YAML::Value << c.output_dir->string();
    out << YAML::Key << "write_states" << YAML::Value << c.write_states << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

DescentConfig descent_config(const ExperimentConfig& c, const std::vector<std::string>& names) {
    DescentConfig d;
    for (const auto& [k, v] : c.descent.step_size_overrides)
        if (std::find(names.begin(), names.end(), k) == names.end())
            throw ConfigError("descent.step_sizes names '" + k + "', which is not an unknown of the model");
    if (c.descent.step_size_overrides.empty()) {
        d.step_sizes = {c.descent.step_size};
    } else {
        d.step_sizes.clear();
        for (const auto& n : names) {
            const auto it = c.descent.step_size_overrides.find(n);
            d.step_sizes.push_back(it == c.descent.step_size_overrides.end() ? c.descent.step_size : it->second);
        }
    }
    d.max_iters = c.descent.max_iters;
    d.objective_tolerance = c.descent.objective_tolerance;
    d.gradient_method = c.descent.gradient_method;
    d.clamp_rates = c.descent.clamp_rates;
    d.kernel.dense_threshold = c.descent.dense_threshold;
    d.kernel.fd_step = c.descent.fd_step;
    return d;
}

} // namespace qsid::cli
