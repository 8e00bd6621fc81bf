// test_ident.cpp: objective, gradients, descent and multi-start

#include "doctest.h"

#include <cmath>
#include <random>

#include "qsid/errors.hpp"
#include "qsid/ident.hpp"
#include "qsid/reference.hpp"
#include "test_support.hpp"

using namespace qsid;

namespace {

double rel(const std::vector<double>& a, const std::vector<double>& b) { return test::rel_l2(a, b); }

// JC on [2, n] with y-hat from the truth and theta drawn around it.
struct JcInstance {
    IdentificationProblem problem;
    std::vector<double> theta;
};

JcInstance random_jc(std::mt19937_64& rng, std::size_t n_levels, SamplingGrid grid) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    models::JaynesCummingsSpec truth{.n_levels = n_levels};
    JcInstance out{test::jc_problem(truth, grid), {}};
    out.theta = {truth.nu_q + 0.3 * u(rng), truth.g_d + 0.1 * u(rng), truth.gamma_d + 0.2 * u(rng)};
    return out;
}

IdentificationProblem with_mixed_start(IdentificationProblem p, std::mt19937_64& rng) {
    const auto d = static_cast<Eigen::Index>(p.model.space.dimension());
    p.rho0 = test::random_density(d, rng);
    return p;
}

} // namespace

TEST_CASE("objective examples") {
    const auto problem = test::jc_problem({.n_levels = 4}, {.dt = 0.01, .samples = 300});
    const auto truth = models::build_jc_model({.n_levels = 4}).theta_truth;
    CHECK(objective(problem, truth) <= 1e-20);

    auto shifted = problem;
    const double delta = 0.125;
    shifted.measured.values[17] += delta;
    CHECK(objective(shifted, truth) == doctest::Approx(delta * delta / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(objective(problem, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(objective(problem, std::vector<double>{6.0, 0.3, -0.1}), std::invalid_argument);
}

TEST_CASE("kernel agrees with the serial full-space reference") {
    std::mt19937_64 rng(31);
    const SamplingGrid grid{.dt = 0.02, .samples = 120};
    for (int trial = 0; trial < 2; ++trial) {
        auto inst = random_jc(rng, 3, grid);
        for (const auto& problem : {inst.problem, with_mixed_start(inst.problem, rng)}) {
            const ObjectiveKernel kernel(problem);
            const auto paper = kernel.evaluate(inst.theta, GradientMethod::paper_approx);
            const auto exact = kernel.evaluate(inst.theta, GradientMethod::exact_frechet);
            const double j_ref = reference::objective(problem, inst.theta);
            CHECK(std::abs(paper.objective - j_ref) <= 1e-10 * j_ref);
            CHECK(rel(paper.gradient, reference::gradient_paper(problem, inst.theta)) <= 1e-10);
            CHECK(rel(exact.gradient, reference::gradient_exact(problem, inst.theta)) <= 1e-10);
        }
    }

    auto aug = test::augmented_problem(test::two_lorentzian_truth(2), grid);
    std::vector<double> theta = models::build_augmented_model(test::two_lorentzian_truth(2)).theta_truth;
    for (auto& t : theta) t *= 1.05;
    const ObjectiveKernel kernel(aug);
    CHECK(kernel.reduced_dimension() < 64);
    CHECK(rel(kernel.evaluate(theta, GradientMethod::paper_approx).gradient,
              reference::gradient_paper(aug, theta)) <= 1e-10);
    CHECK(rel(kernel.evaluate(theta, GradientMethod::exact_frechet).gradient,
              reference::gradient_exact(aug, theta)) <= 1e-10);
}

TEST_CASE("matrix-free kernel matches the dense kernel") {
    std::mt19937_64 rng(37);
    auto inst = random_jc(rng, 3, {.dt = 0.02, .samples = 100});
    const ObjectiveKernel dense(inst.problem);
    const ObjectiveKernel free(inst.problem, {.dense_threshold = 0});
    CHECK(dense.dense());
    CHECK_FALSE(free.dense());
    const auto a = dense.evaluate(inst.theta, GradientMethod::paper_approx);
    const auto b = free.evaluate(inst.theta, GradientMethod::paper_approx);
    CHECK(std::abs(a.objective - b.objective) <= 1e-9 * a.objective);
    CHECK(rel(b.gradient, a.gradient) <= 1e-8);
    CHECK(rel(free.evaluate(inst.theta, GradientMethod::finite_difference).gradient,
              dense.evaluate(inst.theta, GradientMethod::exact_frechet).gradient) <= 1e-5);
    CHECK_THROWS_AS(free.evaluate(inst.theta, GradientMethod::exact_frechet), Unsupported);
}

TEST_CASE("zero residual gives zero gradients") {
    const auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.01, .samples = 200});
    const auto truth = models::build_jc_model({.n_levels = 3}).theta_truth;
    for (double g : gradient_paper(problem, truth)) CHECK(std::abs(g) < 1e-12);
    for (double g : gradient_exact(problem, truth)) CHECK(std::abs(g) < 1e-12);
    // central differences leave the O(h^2) third-derivative term
    for (double g : gradient_fd(problem, truth)) CHECK(std::abs(g) < 1e-8);
}

TEST_CASE("approximate gradient is first order in dt for K = 1") {
    // Only nu_q unknown, one sample; discrepancy to central differences shrinks with dt.
    const models::JaynesCummingsSpec truth{.n_levels = 3, .unknowns = {models::JcParameter::nu_q}};
    const std::vector<double> theta{6.9};
    double previous = 0.0;
    for (double dt : {0.04, 0.02, 0.01}) {
        const auto problem = test::jc_problem(truth, {.dt = dt, .samples = 1});
        const double err = rel(gradient_paper(problem, theta), gradient_fd(problem, theta));
        CHECK(err <= 5.0 * dt);
        // d<sigma_x>/dnu_q vanishes at t = 0 for |+x>, so the error falls at least linearly
        if (previous > 0.0) CHECK(previous / err >= 1.5);
        previous = err;
    }
}

TEST_CASE("exact gradient agrees with finite differences") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 3; ++trial) {
        auto inst = random_jc(rng, 4, {.dt = 0.01, .samples = 400});
        const auto exact = gradient_exact(inst.problem, inst.theta);
        CHECK(rel(gradient_fd(inst.problem, inst.theta, 1e-5), exact) <= 1e-6);
        // h sweep: both neighbours of the default sit on the plateau
        CHECK(rel(gradient_fd(inst.problem, inst.theta, 1e-4), exact) <= 1e-6);
        CHECK(rel(gradient_fd(inst.problem, inst.theta, 1e-6), exact) <= 1e-5);
    }
}

TEST_CASE("exact and approximate gradients coincide when the term commutes with L") {
    // Phase-covariant qubit: [sigma_z, .] commutes with the sigma_- dissipator.
    ModelSpec m;
    m.space = HilbertSpace({2});
    m.hamiltonian.push_back({"qubit", 0.5 * pauli(Pauli::z), Coefficient::of_unknown(0)});
    m.dissipators.push_back({"decay", pauli(Pauli::minus), Coefficient::known(0.4)});
    m.unknown_names = {"omega"};
    IdentificationProblem p;
    p.model = m;
    p.rho0 = DensityMatrix::from_matrix(0.5 * (ComplexMatrix::Identity(2, 2) + pauli(Pauli::x)));
    p.observable = pauli(Pauli::x);
    p.grid = {.dt = 0.05, .samples = 80};
    p.measured = simulate_trace(m, std::vector<double>{3.0}, p.rho0, p.observable, p.grid).trace;
    const std::vector<double> theta{3.4};
    const auto paper = gradient_paper(p, theta), exact = gradient_exact(p, theta);
    CHECK(std::abs(paper[0] - exact[0]) <= 1e-12 * std::abs(exact[0]));
}

TEST_CASE("zero operator direction gives a zero gradient component") {
    auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.02, .samples = 50});
    // theta = (nu_q, g_d, null, gamma_d): the rate moves behind the new Hamiltonian unknown
    problem.model.hamiltonian.push_back({"null", ComplexMatrix::Zero(6, 6), Coefficient::of_unknown(2)});
    problem.model.dissipators[0].rate = Coefficient::of_unknown(3);
    problem.model.unknown_names = {"nu_q", "g_d", "null", "gamma_d"};
    const std::vector<double> theta{6.5, 0.25, 1.0, 0.5};
    CHECK(gradient_paper(problem, theta)[2] == 0.0);
    CHECK(gradient_exact(problem, theta)[2] == 0.0);
}

TEST_CASE("negative approximate gradient is a descent direction") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        auto inst = random_jc(rng, 3, {.dt = 0.01, .samples = 300});
        const double j0 = objective(inst.problem, inst.theta);
        const auto g = gradient_paper(inst.problem, inst.theta);
        double gnorm = 0.0;
        for (double v : g) gnorm += v * v;
        std::vector<double> next = inst.theta;
        const double eps = 1e-4 / std::sqrt(gnorm);
        for (std::size_t p = 0; p < next.size(); ++p) next[p] -= eps * g[p];
        CHECK(objective(inst.problem, next) < j0);
    }
}

TEST_CASE("descend examples") {
    const auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.01, .samples = 200});
    const auto truth = models::build_jc_model({.n_levels = 3}).theta_truth;
    const auto at_truth = descend(problem, truth, {});
    CHECK(at_truth.status == DescentStatus::converged);
    CHECK(at_truth.iterations == 0);
    CHECK(at_truth.history.size() == 1);
    CHECK(at_truth.theta_hat == truth);

    const std::vector<double> start{6.4, 0.28, 0.5};
    const auto zero = descend(problem, start, {.max_iters = 0});
    CHECK(zero.history.size() == 1);
    CHECK(zero.status == DescentStatus::budget_exhausted);
    CHECK(zero.objective_hat == doctest::Approx(objective(problem, start)).epsilon(1e-14));

    const auto few = descend(problem, start, {.step_sizes = {1e-3}, .max_iters = 25});
    CHECK(few.history.size() == 26);
    CHECK(few.iterations == 25);
    for (std::size_t i = 1; i < few.history.size(); ++i) {
        CHECK(few.history[i].iteration == i);
        CHECK(few.history[i].objective <= few.history[i - 1].objective);
    }
    CHECK(few.objective_hat == few.history.back().objective);

    CHECK_THROWS_AS(descend(problem, start, {.step_sizes = {1e-3, 1e-3}}), std::invalid_argument);
    CHECK_THROWS_AS(descend(problem, start, {.step_sizes = {-1e-3}}), std::invalid_argument);
}

TEST_CASE("rate clamping and the physical region") {
    // Start near zero damping with a large rate step so the update overshoots below zero.
    const auto problem = test::jc_problem({.gamma_d = 0.0, .n_levels = 3}, {.dt = 0.01, .samples = 200});
    const std::vector<double> start{6.1814, 0.3142, 0.05};
    const DescentConfig clamp{.step_sizes = {1e-12, 1e-12, 1.0}, .max_iters = 3};
    const auto clamped = descend(problem, start, clamp);
    REQUIRE_FALSE(clamped.clamps.empty());
    CHECK(clamped.clamps[0].parameter == 2);
    CHECK(clamped.clamps[0].unclamped_value < 0.0);
    for (const auto& h : clamped.history) CHECK(h.theta[2] >= 0.0);

    DescentConfig strict = clamp;
    strict.clamp_rates = false;
    const auto left = descend(problem, start, strict);
    CHECK(left.status == DescentStatus::left_physical_region);
    CHECK(left.failed());
    REQUIRE(left.failed_iteration);
    CHECK(*left.failed_iteration == clamped.clamps[0].iteration);
}

TEST_CASE("non-finite update aborts with a diagnostic") {
    const auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.01, .samples = 200});
    const std::vector<double> start{6.4, 0.28, 0.5};
    const auto g = gradient_paper(problem, start);
    REQUIRE(std::abs(g[0]) > 2.0);
    const auto blown = descend(problem, start, {.step_sizes = {1e308}, .max_iters = 5});
    CHECK(blown.failed());
    CHECK(blown.status == DescentStatus::non_finite);
    REQUIRE(blown.failed_iteration.has_value());
    CHECK(*blown.failed_iteration == 1);
    CHECK_FALSE(blown.diagnostic.empty());
    CHECK(blown.history.size() == 1);
}

TEST_CASE("permutation invariance") {
    const auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.01, .samples = 200});
    const DescentConfig config{.step_sizes = {1e-3}, .max_iters = 30};
    const auto base = descend(problem, {6.4, 0.28, 0.5}, config);
    auto swapped = problem;
    swapped.model = problem.model.with_unknown_order({"g_d", "nu_q", "gamma_d"});
    const auto perm = descend(swapped, {0.28, 6.4, 0.5}, config);
    REQUIRE(perm.history.size() == base.history.size());
    for (std::size_t i = 0; i < base.history.size(); ++i) {
        CHECK(perm.history[i].objective == doctest::Approx(base.history[i].objective).epsilon(1e-12));
        CHECK(perm.history[i].theta[0] == doctest::Approx(base.history[i].theta[1]).epsilon(1e-12));
        CHECK(perm.history[i].theta[1] == doctest::Approx(base.history[i].theta[0]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(problem.model.with_unknown_order({"gamma_d", "nu_q", "g_d"}), std::invalid_argument);
}

TEST_CASE("determinism and multi-start") {
    const auto problem = test::jc_problem({.n_levels = 3}, {.dt = 0.01, .samples = 200});
    const DescentConfig config{.step_sizes = {1e-3}, .max_iters = 40};
    const std::vector<double> good{6.3, 0.3, 0.6}, other{6.0, 0.35, 0.7};
    const auto a = descend(problem, good, config);
    const auto b = descend(problem, good, config);
    CHECK(a.same_numbers(b));

    const auto single = multi_start(problem, {good}, config);
    CHECK(single.best_index == 0);
    CHECK(single.best().same_numbers(a));

    const auto pair = multi_start(problem, {other, good}, config);
    const std::vector<double> bad{2.0, 1.5, 3.0};
    const auto with_bad = multi_start(problem, {other, good, bad}, config);
    CHECK(with_bad.records.size() == 3);
    CHECK(with_bad.best().same_numbers(pair.best()));
    CHECK(with_bad.records[1].same_numbers(a));

    CHECK_THROWS_AS(multi_start(problem, {}, config), std::invalid_argument);
    const DescentConfig exploding{.step_sizes = {1e308}, .max_iters = 5};
    CHECK_THROWS_AS(multi_start(problem, {good, other}, exploding), NumericalFailure);
}
