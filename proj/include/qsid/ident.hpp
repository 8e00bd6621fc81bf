// ident.hpp: Trace-matching parameter identification by gradient descent

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsid/lindblad.hpp"
#include "qsid/terms.hpp"

namespace qsid {

struct IdentificationProblem {
    ModelSpec model;
    DensityMatrix rho0 = DensityMatrix::unchecked(ComplexMatrix::Identity(1, 1));
    ComplexMatrix observable;
    SamplingGrid grid;
    ObservableTrace measured;  // y-hat, length K

    void validate() const;
};

enum class GradientMethod { paper_approx, exact_frechet, finite_difference };

std::string to_string(GradientMethod m);
GradientMethod gradient_method_from_string(const std::string& name);

struct KernelOptions {
    std::size_t dense_threshold = 4096;
    double fd_step = 1e-5;
};

// Evaluates J and its gradient for one problem. Work happens on the part of
// vec(rho) that is reachable from rho0 and can influence tr[O rho]; that
// restriction is exact. Gradients use reverse accumulation over the stored
// trajectory, with per-parameter work spread over OpenMP threads.
//
// Rates are not sign-checked here so finite differences can straddle zero;
// the free functions below enforce the physical region.
class ObjectiveKernel {
public:
    explicit ObjectiveKernel(IdentificationProblem problem, KernelOptions options = {});

    struct Evaluation {
        double objective = 0.0;
        std::vector<double> predicted;
        std::vector<double> gradient;  // empty unless requested
    };

    Evaluation evaluate(std::span<const double> theta,
                        std::optional<GradientMethod> gradient = std::nullopt) const;
    double objective(std::span<const double> theta) const { return evaluate(theta).objective; }

    const IdentificationProblem& problem() const noexcept { return problem_; }
    std::size_t reduced_dimension() const noexcept { return basis_.size(); }
    bool dense() const noexcept { return dense_; }

private:
    IdentificationProblem problem_;
    KernelOptions options_;
    std::unique_ptr<LiouvillianTerms> terms_;
    Subspace basis_;
    bool dense_ = true;
    // Dense regime
    ComplexMatrix known_;
    std::vector<ComplexMatrix> unknown_;
    ComplexVector x0_;
    ComplexVector weight_;  // y = Re(weight^T x)
    // Matrix-free regime
    ComplexVector x0_full_;
    ComplexVector weight_full_;

    Evaluation evaluate_dense(std::span<const double> theta, std::optional<GradientMethod> g) const;
    Evaluation evaluate_matrix_free(std::span<const double> theta, std::optional<GradientMethod> g) const;
    std::vector<double> finite_difference(std::span<const double> theta) const;
};

// J = 1/2 sum_k (y_k - yhat_k)^2
double objective(const IdentificationProblem& problem, std::span<const double> theta);

// dJ/dtheta with dM/dtheta_p ~ dt L_p M.
std::vector<double> gradient_paper(const IdentificationProblem& problem, std::span<const double> theta);

// dJ/dtheta with the exact Frechet derivative of expm(dt L). Throws Unsupported
// above the dense threshold.
std::vector<double> gradient_exact(const IdentificationProblem& problem, std::span<const double> theta);

// Central differences (J(theta + h e_p) - J(theta - h e_p)) / 2h.
std::vector<double> gradient_fd(const IdentificationProblem& problem, std::span<const double> theta,
                                double h = 1e-5);

struct DescentConfig {
    std::vector<double> step_sizes{2e-4};  // one entry (shared) or one per unknown
    std::size_t max_iters = 40000;
    std::optional<double> objective_tolerance = 1e-10;
    GradientMethod gradient_method = GradientMethod::paper_approx;
    bool clamp_rates = true;
    KernelOptions kernel;

    void validate(std::size_t unknown_count) const;
    double step_size(std::size_t p) const { return step_sizes.size() == 1 ? step_sizes[0] : step_sizes[p]; }
};

struct IterationRecord {
    std::size_t iteration = 0;
    std::vector<double> theta;
    double objective = 0.0;

    bool operator==(const IterationRecord&) const = default;
};

struct ClampEvent {
    std::size_t iteration = 0;  // theta index of the record that was clamped
    std::size_t parameter = 0;
    double unclamped_value = 0.0;

    bool operator==(const ClampEvent&) const = default;
};

enum class DescentStatus { converged, budget_exhausted, non_finite, left_physical_region };

std::string to_string(DescentStatus s);

struct ConvergenceRecord {
    std::vector<std::string> unknown_names;
    std::vector<IterationRecord> history;  // entry i: theta_i and J(theta_i)
    std::vector<double> theta_hat;
    double objective_hat = 0.0;
    std::size_t iterations = 0;            // parameter updates performed
    DescentStatus status = DescentStatus::budget_exhausted;
    std::string diagnostic;
    std::optional<std::size_t> failed_iteration;
    std::vector<ClampEvent> clamps;
    double wall_seconds = 0.0;             // excluded from equality

    bool failed() const noexcept {
        return status == DescentStatus::non_finite || status == DescentStatus::left_physical_region;
    }
    bool same_numbers(const ConvergenceRecord& other) const;
};

// theta <- theta - eps (.) grad J until max_iters updates or J <= tolerance.
ConvergenceRecord descend(const IdentificationProblem& problem, std::vector<double> theta0,
                          const DescentConfig& config);
ConvergenceRecord descend(const ObjectiveKernel& kernel, std::vector<double> theta0,
                          const DescentConfig& config);

struct MultiStartResult {
    std::size_t best_index = 0;
    std::vector<ConvergenceRecord> records;

    const ConvergenceRecord& best() const { return records.at(best_index); }
};

// One descent per start (OpenMP across starts); best = lowest final J among
// starts that did not fail. Throws NumericalFailure when every start fails.
MultiStartResult multi_start(const IdentificationProblem& problem,
                             const std::vector<std::vector<double>>& starts,
                             const DescentConfig& config);

} // namespace qsid
