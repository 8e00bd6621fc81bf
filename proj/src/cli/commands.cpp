// commands.cpp: CLI subcommands

#include "qsid/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qsid/cli/config.hpp"
#include "qsid/cli/experiment.hpp"
#include "qsid/cli/output.hpp"
#include "qsid/errors.hpp"

namespace qsid::cli {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const RunOptions& options, const std::string& command,
                            const std::optional<fs::path>& configured) {
    if (options.out) return *options.out;
    const char* env = std::getenv("QSID_OUTPUT_ROOT");
    const std::optional<fs::path> root = (env && *env) ? std::optional<fs::path>(env) : std::nullopt;
    if (configured) {
        if (configured->is_absolute() || !root) return *configured;
        return *root / *configured;
    }
    return root.value_or(fs::path("runs")) / (options.config.stem().string() + "-" + command);
}

namespace {

struct Context {
    const ExperimentConfig& config;
    RunWriter& writer;
    std::ostream& err;
    bool quiet;

    template <typename... Args>
    void log(fmt::format_string<Args...> f, Args&&... args) const {
        if (!quiet) fmt::print(err, "{}\n", fmt::format(f, std::forward<Args>(args)...));
    }
};

std::string num(double v) { return format_number(v); }

std::string trace_csv(const SamplingGrid& grid, const std::vector<double>& y) {
    std::string out = "t,y\n";
    for (std::size_t k = 0; k < y.size(); ++k) out += num(grid.time(k + 1)) + "," + num(y[k]) + "\n";
    return out;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += "," + n;
    return out;
}

bool log_iteration(std::size_t i, const ConvergenceRecord& rec, std::size_t max_iters) {
    if (max_iters <= 10000) return true;
    return i % 10 == 0 || i + 1 == rec.history.size();
}

double relative(double a, double ref) {
    return ref != 0.0 ? std::abs(a - ref) / std::abs(ref) : std::abs(a - ref);
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

IdentificationProblem make_problem(const ModelInstance& inst, const SamplingGrid& grid, ObservableTrace measured) {
    IdentificationProblem p;
    p.model = inst.model;
    p.rho0 = inst.rho0;
    p.observable = inst.observable;
    p.grid = grid;
    p.measured = std::move(measured);
    return p;
}

int cmd_simulate(const Context& ctx) {
    const auto& c = ctx.config;
    const Experiment e = build_experiment(c);
    if (e.truth.theta_truth.size() != e.truth.model.unknown_count())
        throw ConfigError("simulate needs a truth value for every unknown");
    const auto sim = simulate_trace(e.truth.model, e.truth.theta_truth, e.truth.rho0, e.truth.observable, c.grid,
                                    {.keep_states = c.write_states, .dense_threshold = c.descent.dense_threshold,
                                     .observable_name = "y"});
    ctx.writer.write("trace.csv", trace_csv(c.grid, sim.trace.values));
    if (c.write_states) {
        std::string s = "t,trace_defect,purity,hermiticity_defect\n";
        for (std::size_t k = 0; k < sim.states.size(); ++k) {
            const auto& rho = sim.states[k];
            s += num(c.grid.time(k + 1)) + "," + num(rho.trace_defect()) + "," + num(rho.purity()) + "," +
                 num(rho.hermiticity_defect()) + "\n";
        }
        ctx.writer.write("states.csv", s);
    }
    ctx.log("simulate: {} samples, propagated dimension {} ({})", c.grid.samples, sim.propagated_dimension,
            sim.dense ? "dense" : "matrix-free");
    return kExitOk;
}

int cmd_identify(const Context& ctx) {
    const auto& c = ctx.config;
    const Experiment e = build_experiment(c);
    if (e.starts.empty()) throw ConfigError("identify needs identify.starts");
    const auto& names = e.identification.model.unknown_names;
    const DescentConfig dc = descent_config(c, names);
    const ObservableTrace measured = measured_trace(c, e);
    ctx.writer.write("measured.csv", trace_csv(c.grid, measured.values));

    const IdentificationProblem problem = make_problem(e.identification, c.grid, measured);
    const ObjectiveKernel kernel(problem, dc.kernel);
    ctx.log("identify: {} unknowns, {} start(s), reduced dimension {} ({})", names.size(), e.starts.size(),
            kernel.reduced_dimension(), kernel.dense() ? "dense" : "matrix-free");

    std::vector<ConvergenceRecord> records(e.starts.size());
    std::vector<std::exception_ptr> errors(e.starts.size());
    const auto n = static_cast<std::ptrdiff_t>(e.starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < n; ++s) {
        const auto i = static_cast<std::size_t>(s);
        try {
            records[i] = descend(kernel, e.starts[i], dc);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& ex : errors)
        if (ex) std::rethrow_exception(ex);

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].failed()) continue;
        if (!best || records[i].objective_hat < records[*best].objective_hat) best = i;
    }

    std::string clamps = "start,iteration,parameter,unclamped_value\n";
    std::string summary = "start,status,iterations,objective" + join_names(names) +
                          ",failed_iteration,clamp_events,best,diagnostic\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::string conv = "iteration" + join_names(names) + ",J\n";
        for (std::size_t h = 0; h < r.history.size(); ++h) {
            if (!log_iteration(h, r, dc.max_iters)) continue;
            const auto& it = r.history[h];
            conv += std::to_string(it.iteration);
            for (double v : it.theta) conv += "," + num(v);
            conv += "," + num(it.objective) + "\n";
        }
        ctx.writer.write(fmt::format("convergence_start{}.csv", i + 1), conv);
        for (const auto& cl : r.clamps)
            clamps += fmt::format("{},{},{},{}\n", i + 1, cl.iteration, names[cl.parameter], num(cl.unclamped_value));
        summary += fmt::format("{},{},{},{}", i + 1, to_string(r.status), r.iterations, num(r.objective_hat));
        for (double v : r.theta_hat) summary += "," + num(v);
        summary += "," + (r.failed_iteration ? std::to_string(*r.failed_iteration) : std::string()) + "," +
                   std::to_string(r.clamps.size()) + "," + (best && *best == i ? "1" : "0") + "," +
                   csv_field(r.diagnostic) + "\n";
        ctx.log("  start {}: {} after {} iterations, J = {}", i + 1, to_string(r.status), r.iterations,
                num(r.objective_hat));
    }
    ctx.writer.write("summary.csv", summary);
    ctx.writer.write("clamps.csv", clamps);

    std::string report = "quantity,value\n";
    if (!best) {
        report += "best_start,\nstatus,all_starts_failed\n";
        ctx.writer.write("report.csv", report);
        ctx.err << "identify: every start failed\n";
        return kExitNonFinite;
    }
    const auto& r = records[*best];
    report += fmt::format("best_start,{}\nstatus,{}\niterations,{}\nobjective,{}\ngradient_method,{}\n", *best + 1,
                          to_string(r.status), r.iterations, num(r.objective_hat), to_string(dc.gradient_method));
    for (std::size_t p = 0; p < names.size(); ++p) report += names[p] + "," + num(r.theta_hat[p]) + "\n";

    if (c.model.kind == ModelKind::augmented) {
        const auto identified = models::ancillas_from_theta(c.model.augmented, r.theta_hat);
        for (std::size_t a = 0; a < identified.size(); ++a) {
            const bool physical = identified[a].gamma_bar > 0.0;
            report += fmt::format("beta_{},{}\n", a + 1,
                                  physical ? num(models::beta_from_mu(*identified[a].mu, identified[a].gamma_bar))
                                           : std::string("nan"));
        }
        bool all_positive = true;
        for (const auto& a : identified) all_positive = all_positive && a.gamma_bar > 0.0;
        if (all_positive) {
            const auto curve = spectral::reconstruct_spectrum(identified, c.spectrum_omega_min, c.spectrum_omega_max,
                                                              c.spectrum_points, c.model.augmented.ancillas);
            std::string s = "omega,S_identified,S_truth\n";
            double worst = 0.0;
            for (std::size_t i = 0; i < curve.omega.size(); ++i) {
                s += num(curve.omega[i]) + "," + num(curve.identified[i]) + "," + num((*curve.truth)[i]) + "\n";
                worst = std::max(worst, relative(curve.identified[i], (*curve.truth)[i]));
            }
            ctx.writer.write("spectrum.csv", s);
            report += "spectrum_max_relative_deviation," + num(worst) + "\n";
        }
    }

    if (c.consistency_levels) {
        if (const auto hi = at_truncation(c, *c.consistency_levels)) {
            const auto y_hi = simulate_trace(hi->model, r.theta_hat, hi->rho0, hi->observable, c.grid,
                                             {.keep_states = false, .dense_threshold = c.descent.dense_threshold});
            const auto y_lo = kernel.evaluate(r.theta_hat).predicted;
            double dev = 0.0;
            for (std::size_t k = 0; k < y_lo.size(); ++k) dev = std::max(dev, std::abs(y_hi.trace.values[k] - y_lo[k]));
            report += fmt::format("consistency_levels,{}\nconsistency_max_deviation,{}\n", *c.consistency_levels,
                                  num(dev));
        }
    }
    ctx.writer.write("report.csv", report);
    return kExitOk;
}

int cmd_guess(const Context& ctx) {
    const auto& c = ctx.config;
    if (!c.guess_qubit_omega) throw ConfigError("guess needs guess.qubit_omega for generic models");
    const Experiment e = build_experiment(c);
    const ObservableTrace measured = measured_trace(c, e);
    const auto spec = spectral::dft_trace(measured, c.grid, c.guess_window);
    const auto report = spectral::initial_guess(spec, *c.guess_qubit_omega, c.guess_min_prominence);

    std::string dft = "omega,amplitude\n";
    for (std::size_t j = 0; j < spec.frequencies.size(); ++j)
        dft += num(spec.frequencies[j]) + "," + num(spec.amplitudes[j]) + "\n";
    ctx.writer.write("dft.csv", dft);

    std::string peaks = "omega,amplitude,role\n";
    for (const auto& p : report.peaks) {
        const bool qubit = report.qubit_peak && report.qubit_peak->frequency == p.frequency;
        peaks += num(p.frequency) + "," + num(p.amplitude) + "," + (qubit ? "qubit" : "ancilla") + "\n";
    }
    ctx.writer.write("peaks.csv", peaks);

    std::string g = "quantity,value\n";
    g += fmt::format("suggested_r,{}\n", report.suggested_r);
    for (std::size_t i = 0; i < report.omega_guesses.size(); ++i)
        g += fmt::format("omega_guess_{},{}\n", i + 1, num(report.omega_guesses[i]));
    g += "qubit_peak," + (report.qubit_peak ? num(report.qubit_peak->frequency) : std::string()) + "\n";
    g += "bin_width," + num(report.bin_width) + "\n";
    g += "window," + spectral::to_string(c.guess_window) + "\n";
    g += "status," + csv_field(report.status) + "\n";
    ctx.writer.write("guess.csv", g);
    ctx.log("guess: R = {} ({})", report.suggested_r, report.status);
    return kExitOk;
}

int cmd_spectrum(const Context& ctx) {
    const auto& c = ctx.config;
    std::optional<std::vector<models::AncillaSpec>> truth;
    if (c.model.kind == ModelKind::augmented) truth = c.model.augmented.ancillas;
    const auto identified = c.spectrum_ancillas ? *c.spectrum_ancillas : truth.value_or(std::vector<models::AncillaSpec>{});
    if (identified.empty()) throw ConfigError("spectrum needs spectrum.ancillas or an augmented model");
    const auto curve =
        spectral::reconstruct_spectrum(identified, c.spectrum_omega_min, c.spectrum_omega_max, c.spectrum_points, truth);
    std::string s = curve.truth ? "omega,S_identified,S_truth\n" : "omega,S_identified\n";
    for (std::size_t i = 0; i < curve.omega.size(); ++i) {
        s += num(curve.omega[i]) + "," + num(curve.identified[i]);
        if (curve.truth) s += "," + num((*curve.truth)[i]);
        s += "\n";
    }
    ctx.writer.write("spectrum.csv", s);
    return kExitOk;
}

int cmd_gradcheck(const Context& ctx) {
    const auto& c = ctx.config;
    const Experiment e = build_experiment(c);
    const auto& names = e.identification.model.unknown_names;
    std::vector<double> theta;
    if (c.gradcheck_theta) theta = order_values(*c.gradcheck_theta, names, "gradcheck.theta");
    else if (!e.starts.empty()) theta = e.starts.front();
    else if (e.identification.theta_truth.size() == names.size()) theta = e.identification.theta_truth;
    else throw ConfigError("gradcheck needs gradcheck.theta");
    check_theta(e.identification.model, theta);

    struct Row {
        SamplingGrid grid;
        std::vector<double> paper, exact, fd;
    };
    auto evaluate = [&](const SamplingGrid& grid) {
        ExperimentConfig local = c;
        local.grid = grid;
        const auto problem = make_problem(e.identification, grid, measured_trace(local, e));
        const ObjectiveKernel kernel(problem, {.dense_threshold = c.descent.dense_threshold, .fd_step = c.gradcheck_fd_step});
        Row row{grid, kernel.evaluate(theta, GradientMethod::paper_approx).gradient, {},
                kernel.evaluate(theta, GradientMethod::finite_difference).gradient};
        try {
            row.exact = kernel.evaluate(theta, GradientMethod::exact_frechet).gradient;
        } catch (const Unsupported&) {
            row.exact.assign(theta.size(), std::nan(""));
        }
        return row;
    };

    std::vector<Row> rows{evaluate(c.grid)};
    if (c.gradcheck_halving && !c.measured_file)
        rows.push_back(evaluate({.dt = c.grid.dt / 2.0, .samples = 2 * c.grid.samples}));

    const Row& base = rows.front();
    std::string g = "parameter,value,paper_approx,exact_frechet,finite_difference,rel_paper_fd,rel_exact_fd\n";
    for (std::size_t p = 0; p < names.size(); ++p)
        g += names[p] + "," + num(theta[p]) + "," + num(base.paper[p]) + "," + num(base.exact[p]) + "," +
             num(base.fd[p]) + "," + num(relative(base.paper[p], base.fd[p])) + "," +
             num(relative(base.exact[p], base.fd[p])) + "\n";
    ctx.writer.write("gradcheck.csv", g);

    std::string d = "dt,samples,rel_l2_paper_fd,rel_l2_exact_fd,paper_ratio_to_previous\n";
    double previous = std::nan("");
    for (const auto& row : rows) {
        const double rp = rel_l2(row.paper, row.fd);
        d += num(row.grid.dt) + "," + std::to_string(row.grid.samples) + "," + num(rp) + "," +
             num(rel_l2(row.exact, row.fd)) + "," + (std::isnan(previous) ? std::string() : num(previous / rp)) + "\n";
        previous = rp;
    }
    ctx.writer.write("gradcheck_dt.csv", d);
    ctx.log("gradcheck: paper vs fd relative L2 {}", num(rel_l2(base.paper, base.fd)));
    return kExitOk;
}

} // namespace

int run_command(const std::string& command, const RunOptions& options, std::ostream& err) {
    using Handler = int (*)(const Context&);
    Handler handler = nullptr;
    if (command == "simulate") handler = cmd_simulate;
    else if (command == "identify") handler = cmd_identify;
    else if (command == "guess") handler = cmd_guess;
    else if (command == "spectrum") handler = cmd_spectrum;
    else if (command == "gradcheck") handler = cmd_gradcheck;
    else {
        err << "unknown command '" << command << "'\n";
        return kExitOther;
    }

    ExperimentConfig config;
    try {
        config = load_config(options.config);
        if (options.seed) config.noise_seed = *options.seed;
        if (options.starts) {
            if (*options.starts == 0 || *options.starts > config.starts.size())
                throw ConfigError(fmt::format("--starts {} but the config lists {} start(s)", *options.starts,
                                              config.starts.size()));
            config.starts.resize(*options.starts);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const std::string effective = emit_config(config);
    std::optional<RunWriter> writer;
    int code = kExitOk;
    std::string error;
    try {
        writer.emplace(resolve_output_dir(options, command, config.output_dir), command);
        writer->write("config.effective.yaml", effective);
        code = handler({config, *writer, err, options.quiet});
    } catch (const ConfigError& e) {
        error = e.what();
        err << "config error: " << error << "\n";
        code = kExitConfig;
    } catch (const NumericalFailure& e) {
        error = e.what();
        err << "numerical failure: " << error << "\n";
        code = kExitNumerical;
    } catch (const std::invalid_argument& e) {
        error = e.what();
        err << "invalid input: " << error << "\n";
        code = kExitConfig;
    } catch (const std::exception& e) {
        error = e.what();
        err << "error: " << error << "\n";
        code = kExitOther;
    }
    if (writer) {
        try {
            writer->finish(effective, code, error);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            if (code == kExitOk) code = kExitOther;
        }
    }
    return code;
}

} // namespace qsid::cli
