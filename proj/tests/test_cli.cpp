// test_cli.cpp: config parsing, run directories, exit codes, determinism

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsid/cli/commands.hpp"
#include "qsid/cli/config.hpp"
#include "qsid/cli/output.hpp"

namespace fs = std::filesystem;
using namespace qsid;
using namespace qsid::cli;

namespace {

// Removed when the test binary exits.
struct ScratchRegistry {
    std::vector<fs::path> dirs;
    ~ScratchRegistry() {
        std::error_code ec;
        for (const auto& d : dirs) fs::remove_all(d, ec);
    }
};

fs::path scratch_dir(const std::string& tag) {
    static ScratchRegistry registry;
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path p = fs::temp_directory_path() / ("qsid_test_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(p);
    registry.dirs.push_back(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

// A small JC problem: 3-level resonator, short trace, few iterations.
const char* kSmallJc = R"(model:
  kind: jc
  jc:
    truth_levels: 3
    identification_levels: 3
grid:
  dt: 0.05
  samples: 60
descent:
  max_iters: 20
identify:
  starts:
    - {nu_q: 6.3, g_d: 0.3, gamma_d: 0.6}
    - {nu_q: 6.0, g_d: 0.35, gamma_d: 0.65}
gradcheck:
  theta: {nu_q: 6.3, g_d: 0.28, gamma_d: 0.55}
)";

const char* kSmallAugmented = R"(model:
  kind: augmented
  augmented:
    omega_0: 10
    ancillas:
      - {omega: 9, gamma_bar: 2, beta: 3.5, n_levels: 2}
      - {omega: 11, gamma_bar: 1.5, beta: 3, n_levels: 2}
grid:
  dt: 0.02
  samples: 200
descent:
  max_iters: 5
spectrum:
  points: 11
)";

struct Run {
    int code;
    fs::path out;
    std::string err;
};

Run run(const std::string& command, const std::string& yaml, const std::string& tag, RunOptions extra = {}) {
    const fs::path dir = scratch_dir(tag);
    const fs::path cfg = dir / "config.yaml";
    std::ofstream(cfg) << yaml;
    extra.config = cfg;
    if (!extra.out) extra.out = dir / "out";
    extra.quiet = true;
    std::ostringstream err;
    const int code = run_command(command, extra, err);
    return {code, *extra.out, err.str()};
}

} // namespace

TEST_CASE("format_number round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, -6.1814, 1e-300, 2.6 * 2 * 3.141592653589793e-3}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("csv_field quotes only when needed") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
}

TEST_CASE("sha256_hex known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config: defaults follow the model kind") {
    const auto jc = parse_config("model: {kind: jc}\n", ".");
    CHECK(jc.descent.step_size == doctest::Approx(2e-4));
    CHECK(jc.descent.max_iters == 40000);
    REQUIRE(jc.starts.size() == 4);
    CHECK(jc.grid.dt == doctest::Approx(0.01));
    CHECK(jc.grid.samples == 1000);

    const auto aug = parse_config("model: {kind: augmented}\n", ".");
    CHECK(aug.descent.step_size == doctest::Approx(2e-3));
    CHECK(aug.descent.max_iters == 10000);
    REQUIRE(aug.starts.size() == 1);
    CHECK(aug.starts[0].size() == 6);
}

TEST_CASE("config: errors carry line numbers") {
    SUBCASE("unknown key") {
        try {
            parse_config("model:\n  kind: jc\ngrid:\n  dt: 0.01\n  sampels: 10\n", ".", "x.yaml");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.line());
            CHECK(*e.line() == 5);
            CHECK(std::string(e.what()).find("x.yaml:5") != std::string::npos);
            CHECK(std::string(e.what()).find("sampels") != std::string::npos);
        }
    }
    SUBCASE("wrong type") {
        try {
            parse_config("model:\n  kind: jc\ndescent:\n  step_size: fast\n", ".");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.line());
            CHECK(*e.line() == 4);
        }
    }
    SUBCASE("syntax") {
        CHECK_THROWS_AS(parse_config("model: [unclosed\n", "."), ConfigError);
    }
    SUBCASE("bad values") {
        CHECK_THROWS_AS(parse_config("grid: {dt: -1, samples: 10}\n", "."), ConfigError);
        CHECK_THROWS_AS(parse_config("grid: {dt: 0.1, samples: 0}\n", "."), ConfigError);
        CHECK_THROWS_AS(parse_config("model: {kind: qutrit}\n", "."), ConfigError);
        CHECK_THROWS_AS(parse_config("model: {kind: jc, augmented: {omega_0: 1}}\n", "."), ConfigError);
        CHECK_THROWS_AS(parse_config("descent: {step_sizes: {bogus: 1}}\n", "."), ConfigError);
        CHECK_THROWS_AS(parse_config("descent: {gradient_method: magic}\n", "."), ConfigError);
    }
}

TEST_CASE("config: emit then parse is a fixed point") {
    for (const char* text : {kSmallJc, kSmallAugmented, "model: {kind: jc}\n", "model: {kind: augmented}\n"}) {
        const auto first = emit_config(parse_config(text, "."));
        const auto second = emit_config(parse_config(first, "."));
        CHECK(first == second);
    }
}

TEST_CASE("config: generic model section") {
    const char* text = R"(model:
  kind: generic
  generic:
    factor_dims: [2]
    initial_state: [plus_x]
    observable: [{ops: [x]}]
    hamiltonian:
      - {name: w, operator: [{coefficient: 0.5, ops: [z]}], unknown: w, truth: 1.5}
    dissipators:
      - {name: decay, operator: [{ops: [minus]}], rate: 0.1}
grid: {dt: 0.05, samples: 40}
identify:
  starts: [{w: 1.2}]
descent: {step_size: 0.01, max_iters: 3}
)";
    const auto c = parse_config(text, ".");
    CHECK(c.model.kind == ModelKind::generic);
    REQUIRE(c.model.generic.hamiltonian.size() == 1);
    CHECK(*c.model.generic.hamiltonian[0].unknown == "w");
    CHECK(emit_config(parse_config(emit_config(c), ".")) == emit_config(c));

    const auto r = run("identify", text, "generic");
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(r.out / "report.csv"));

    // ops count must match factor count
    CHECK_THROWS_AS(parse_config(R"(model:
  kind: generic
  generic:
    factor_dims: [2, 3]
    initial_state: [excited, vacuum]
    observable: [{ops: [x]}]
)", "."), ConfigError);
}

TEST_CASE("simulate writes trace, states and manifest") {
    const auto r = run("simulate", kSmallJc, "sim");
    REQUIRE(r.code == kExitOk);
    const auto trace = slurp(r.out / "trace.csv");
    CHECK(trace.rfind("t,y\n", 0) == 0);
    CHECK(count_lines(trace) == 61);
    const auto states = slurp(r.out / "states.csv");
    CHECK(count_lines(states) == 61);

    const auto manifest = nlohmann::json::parse(slurp(r.out / "manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["version"] == kVersion);
    bool listed = false;
    for (const auto& f : manifest["files"]) {
        CHECK(f["sha256"] == sha256_hex(slurp(r.out / f["name"].get<std::string>())));
        listed = listed || f["name"] == "trace.csv";
    }
    CHECK(listed);
    CHECK(manifest["config_sha256"] == sha256_hex(slurp(r.out / "config.effective.yaml")));
}

TEST_CASE("simulate with a single sample writes one row") {
    std::string yaml = kSmallJc;
    yaml.replace(yaml.find("samples: 60"), 11, "samples: 1");
    const auto r = run("simulate", yaml, "k1");
    REQUIRE(r.code == kExitOk);
    CHECK(count_lines(slurp(r.out / "trace.csv")) == 2);
}

TEST_CASE("effective config reproduces the run") {
    const auto a = run("simulate", kSmallJc, "eff_a");
    REQUIRE(a.code == kExitOk);
    const auto b = run("simulate", slurp(a.out / "config.effective.yaml"), "eff_b");
    REQUIRE(b.code == kExitOk);
    CHECK(slurp(a.out / "trace.csv") == slurp(b.out / "trace.csv"));
    CHECK(slurp(a.out / "config.effective.yaml") == slurp(b.out / "config.effective.yaml"));
}

TEST_CASE("identify output tables") {
    const auto r = run("identify", kSmallJc, "ident");
    REQUIRE(r.code == kExitOk);
    for (const char* f : {"measured.csv", "convergence_start1.csv", "convergence_start2.csv", "summary.csv",
                          "clamps.csv", "report.csv", "config.effective.yaml", "manifest.json"})
        CHECK_MESSAGE(fs::exists(r.out / f), f);
    const auto conv = slurp(r.out / "convergence_start1.csv");
    CHECK(conv.rfind("iteration,nu_q,g_d,gamma_d,J\n", 0) == 0);
    CHECK(count_lines(conv) == 22);  // header + iterations 0..20
    const auto summary = slurp(r.out / "summary.csv");
    CHECK(count_lines(summary) == 3);
    const auto report = slurp(r.out / "report.csv");
    CHECK(report.find("best_start,") != std::string::npos);
    CHECK(report.find("gradient_method,paper_approx") != std::string::npos);
}

TEST_CASE("identify is bit-reproducible") {
    const auto a = run("identify", kSmallJc, "det_a");
    const auto b = run("identify", kSmallJc, "det_b");
    REQUIRE(a.code == kExitOk);
    REQUIRE(b.code == kExitOk);
    const auto ma = nlohmann::json::parse(slurp(a.out / "manifest.json"));
    const auto mb = nlohmann::json::parse(slurp(b.out / "manifest.json"));
    CHECK(ma["files"] == mb["files"]);
    CHECK(ma["config_sha256"] == mb["config_sha256"]);
}

TEST_CASE("identify with a zero iteration budget reports the start") {
    std::string yaml = kSmallJc;
    yaml.replace(yaml.find("max_iters: 20"), 13, "max_iters: 0");
    const auto r = run("identify", yaml, "zero");
    REQUIRE(r.code == kExitOk);
    const auto conv = slurp(r.out / "convergence_start1.csv");
    CHECK(count_lines(conv) == 2);
    CHECK(conv.find("\n0,6.2999999999999998,0.29999999999999999,0.59999999999999998,") != std::string::npos);
}

TEST_CASE("identify --starts and --seed overrides") {
    RunOptions o;
    o.starts = 1;
    const auto r = run("identify", kSmallJc, "starts", o);
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(r.out / "convergence_start1.csv"));
    CHECK_FALSE(fs::exists(r.out / "convergence_start2.csv"));

    RunOptions too_many;
    too_many.starts = 5;
    CHECK(run("identify", kSmallJc, "starts5", too_many).code == kExitConfig);

    // Noise: the seed changes y-hat; the same seed repeats it.
    const std::string noisy = std::string(kSmallJc) + "noise: {sigma: 0.01, seed: 3}\n";
    RunOptions s1, s2, s3;
    s1.seed = 11;
    s2.seed = 11;
    s3.seed = 12;
    const auto m1 = slurp(run("identify", noisy, "seed1", s1).out / "measured.csv");
    const auto m2 = slurp(run("identify", noisy, "seed2", s2).out / "measured.csv");
    const auto m3 = slurp(run("identify", noisy, "seed3", s3).out / "measured.csv");
    CHECK(m1 == m2);
    CHECK(m1 != m3);
}

TEST_CASE("identify exits 4 when every start diverges") {
    std::string yaml = kSmallJc;
    yaml.replace(yaml.find("max_iters: 20"), 13, "max_iters: 20\n  step_size: 1.0e308");
    const auto r = run("identify", yaml, "diverge");
    CHECK(r.code == kExitNonFinite);
    const auto report = slurp(r.out / "report.csv");
    CHECK(report.find("all_starts_failed") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(r.out / "manifest.json"))["exit_code"] == kExitNonFinite);
}

TEST_CASE("measured file is read and validated") {
    const auto sim = run("simulate", kSmallJc, "mf_sim");
    REQUIRE(sim.code == kExitOk);
    std::string yaml = std::string(kSmallJc) + "measured: {file: " + (sim.out / "trace.csv").string() + "}\n";
    yaml.replace(yaml.find("max_iters: 20"), 13, "max_iters: 0");
    const auto r = run("identify", yaml, "mf");
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(r.out / "measured.csv") == slurp(sim.out / "trace.csv"));

    // grid mismatch
    std::string bad = yaml;
    bad.replace(bad.find("dt: 0.05"), 8, "dt: 0.04");
    CHECK(run("identify", bad, "mf_bad").code == kExitConfig);
    // missing file
    std::string missing = std::string(kSmallJc) + "measured: {file: /nonexistent/trace.csv}\n";
    CHECK(run("identify", missing, "mf_missing").code != kExitOk);
}

TEST_CASE("config errors exit 2 and still leave a manifest") {
    const auto r = run("simulate", "model: {kind: jc}\ngrid: {dt: 0.01, samples: 10, extra: 1}\n", "cfgerr");
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("extra") != std::string::npos);
}

TEST_CASE("unknown command") {
    const auto r = run("teleport", kSmallJc, "badcmd");
    CHECK(r.code == kExitOther);
}

TEST_CASE("guess and spectrum on the augmented model") {
    const auto g = run("guess", kSmallAugmented, "guess");
    REQUIRE(g.code == kExitOk);
    CHECK(slurp(g.out / "dft.csv").rfind("omega,amplitude\n", 0) == 0);
    CHECK(fs::exists(g.out / "peaks.csv"));
    CHECK(fs::exists(g.out / "guess.csv"));

    const auto s = run("spectrum", kSmallAugmented, "spectrum");
    REQUIRE(s.code == kExitOk);
    CHECK(count_lines(slurp(s.out / "spectrum.csv")) == 12);
}

TEST_CASE("gradcheck agrees at the truth and at a generic point") {
    const auto r = run("gradcheck", kSmallJc, "gc");
    REQUIRE(r.code == kExitOk);
    const auto g = slurp(r.out / "gradcheck.csv");
    CHECK(g.rfind("parameter,value,paper_approx,exact_frechet,finite_difference,rel_paper_fd,rel_exact_fd\n", 0) == 0);
    CHECK(count_lines(g) == 4);
    CHECK(count_lines(slurp(r.out / "gradcheck_dt.csv")) == 3);

    // At the truth the residual is zero and so is every gradient.
    std::string at_truth = kSmallJc;
    at_truth.replace(at_truth.find("theta: {nu_q: 6.3, g_d: 0.28, gamma_d: 0.55}"), 44,
                     "theta: {nu_q: 6.1814, g_d: 0.3142, gamma_d: 0.6283}");
    const auto z = run("gradcheck", at_truth, "gc0");
    REQUIRE(z.code == kExitOk);
    std::istringstream rows(slurp(z.out / "gradcheck.csv"));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        std::vector<double> cells;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        while (std::getline(ls, cell, ',')) cells.push_back(cell.empty() ? 0.0 : std::stod(cell));
        CHECK(std::abs(cells[1]) < 1e-12);
        CHECK(std::abs(cells[2]) < 1e-12);
        CHECK(std::abs(cells[3]) < 1e-8);
    }
}

TEST_CASE("output directory resolution") {
    RunOptions o;
    o.config = "/x/y/exp.yaml";
    o.out = "/tmp/explicit";
    CHECK(resolve_output_dir(o, "identify", fs::path("ignored")) == fs::path("/tmp/explicit"));
    o.out.reset();
    ::unsetenv("QSID_OUTPUT_ROOT");
    CHECK(resolve_output_dir(o, "identify", std::nullopt) == fs::path("runs") / "exp-identify");
    CHECK(resolve_output_dir(o, "identify", fs::path("mine")) == fs::path("mine"));
    ::setenv("QSID_OUTPUT_ROOT", "/data", 1);
    CHECK(resolve_output_dir(o, "guess", std::nullopt) == fs::path("/data") / "exp-guess");
    CHECK(resolve_output_dir(o, "guess", fs::path("mine")) == fs::path("/data") / "mine");
    CHECK(resolve_output_dir(o, "guess", fs::path("/abs")) == fs::path("/abs"));
    ::unsetenv("QSID_OUTPUT_ROOT");
}
