// ident.cpp: Objective kernel, gradients and the descent loop

#include "qsid/ident.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "qsid/errors.hpp"
#include "qsid/expm.hpp"

namespace qsid {

void IdentificationProblem::validate() const {
    model.validate();
    grid.validate();
    const auto d = static_cast<Eigen::Index>(model.space.dimension());
    if (rho0.dimension() != d) throw std::invalid_argument("problem: rho0 has wrong dimension");
    if (observable.rows() != d || observable.cols() != d)
        throw std::invalid_argument("problem: observable has wrong dimension");
    if (hermiticity_defect(observable) > 1e-12 * std::max(1.0, observable.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("problem: observable is not Hermitian");
    if (measured.values.size() != grid.samples)
        throw std::invalid_argument("problem: measured trace has " +
                                    std::to_string(measured.values.size()) + " samples, grid has " +
                                    std::to_string(grid.samples));
}

std::string to_string(GradientMethod m) {
    switch (m) {
    case GradientMethod::paper_approx: return "paper_approx";
    case GradientMethod::exact_frechet: return "exact_frechet";
    case GradientMethod::finite_difference: return "finite_difference";
    }
    return "?";
}

GradientMethod gradient_method_from_string(const std::string& name) {
    if (name == "paper_approx") return GradientMethod::paper_approx;
    if (name == "exact_frechet") return GradientMethod::exact_frechet;
    if (name == "finite_difference") return GradientMethod::finite_difference;
    throw std::invalid_argument("unknown gradient method '" + name +
                                "' (expected paper_approx, exact_frechet or finite_difference)");
}

std::string to_string(DescentStatus s) {
    switch (s) {
    case DescentStatus::converged: return "converged";
    case DescentStatus::budget_exhausted: return "budget_exhausted";
    case DescentStatus::non_finite: return "non_finite";
    case DescentStatus::left_physical_region: return "left_physical_region";
    }
    return "?";
}

namespace {

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

double half_sum_squares(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return 0.5 * s;
}

} // namespace

ObjectiveKernel::ObjectiveKernel(IdentificationProblem problem, KernelOptions options)
    : problem_(std::move(problem)), options_(options) {
    problem_.validate();
    if (!(options_.fd_step > 0.0)) throw std::invalid_argument("kernel: fd_step must be > 0");
    terms_ = std::make_unique<LiouvillianTerms>(problem_.model);
    const std::size_t d = problem_.model.space.dimension();
    x0_full_ = vectorize(problem_.rho0.matrix());
    weight_full_ = vectorize(problem_.observable.transpose());
    const auto forward = terms_->reachable(support(x0_full_));
    const auto backward = terms_->coreachable(support(weight_full_));
    basis_ = Subspace(intersect(forward, backward), d * d);
    dense_ = basis_.size() <= options_.dense_threshold;
    if (dense_) {
        known_ = terms_->known_restricted(basis_);
        unknown_.reserve(terms_->unknown_count());
        for (std::size_t p = 0; p < terms_->unknown_count(); ++p)
            unknown_.push_back(terms_->unknown_restricted(p, basis_));
        x0_ = basis_.restrict(x0_full_);
        weight_ = basis_.restrict(weight_full_);
    }
}

ObjectiveKernel::Evaluation ObjectiveKernel::evaluate(std::span<const double> theta,
                                                      std::optional<GradientMethod> gradient) const {
    if (theta.size() != problem_.model.unknown_count())
        throw std::invalid_argument("kernel: theta has wrong length");
    if (gradient == GradientMethod::finite_difference) {
        Evaluation e = evaluate(theta);
        e.gradient = finite_difference(theta);
        return e;
    }
    return dense_ ? evaluate_dense(theta, gradient) : evaluate_matrix_free(theta, gradient);
}

ObjectiveKernel::Evaluation ObjectiveKernel::evaluate_dense(std::span<const double> theta,
                                                            std::optional<GradientMethod> gradient) const {
    const std::size_t k_total = problem_.grid.samples;
    const double dt = problem_.grid.dt;
    const auto n = static_cast<Eigen::Index>(basis_.size());
    const auto kk = static_cast<Eigen::Index>(k_total);
    const auto& measured = problem_.measured.values;

    Evaluation out;
    out.predicted.assign(k_total, 0.0);
    std::vector<double> residual(k_total);
    if (n == 0) {
        for (std::size_t k = 0; k < k_total; ++k) residual[k] = -measured[k];
        out.objective = half_sum_squares(residual);
        if (gradient) out.gradient.assign(theta.size(), 0.0);
        return out;
    }

    ComplexMatrix l = known_;
    for (std::size_t p = 0; p < theta.size(); ++p) l += theta[p] * unknown_[p];
    const ComplexMatrix scaled = dt * l;
    const ComplexMatrix m = expm(scaled);

    ComplexMatrix states(n, kk);  // column k holds x_{k+1}
    ComplexVector x = x0_;
    for (Eigen::Index k = 0; k < kk; ++k) {
        states.col(k).noalias() = m * x;
        x = states.col(k);
        const double y = (weight_.transpose() * x)(0).real();
        out.predicted[static_cast<std::size_t>(k)] = y;
        residual[static_cast<std::size_t>(k)] = y - measured[static_cast<std::size_t>(k)];
    }
    out.objective = half_sum_squares(residual);
    if (!gradient) return out;

    // Adjoint sweep: mu_K = r_K w, mu_k = M^T mu_{k+1} + r_k w.
    const ComplexMatrix mt = m.transpose();
    ComplexMatrix adjoint(n, kk);
    ComplexVector mu = ComplexVector::Zero(n);
    for (Eigen::Index k = kk - 1; k >= 0; --k) {
        ComplexVector next = mt * mu;
        next += residual[static_cast<std::size_t>(k)] * weight_;
        mu.swap(next);
        adjoint.col(k) = mu;
    }

    const auto p_total = static_cast<std::ptrdiff_t>(theta.size());
    out.gradient.assign(theta.size(), 0.0);
    if (*gradient == GradientMethod::paper_approx) {
        // dJ/dtheta_p = dt Re sum_k mu_k^T L_p x_k
        const ComplexMatrix g = states * adjoint.transpose();
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t p = 0; p < p_total; ++p)
            out.gradient[static_cast<std::size_t>(p)] =
                dt * unknown_[static_cast<std::size_t>(p)].cwiseProduct(g.transpose()).sum().real();
    } else {
        // dJ/dtheta_p = Re sum_k mu_k^T F_p x_{k-1}
        ComplexMatrix previous(n, kk);
        previous.col(0) = x0_;
        if (kk > 1) previous.rightCols(kk - 1) = states.leftCols(kk - 1);
        const ComplexMatrix g = previous * adjoint.transpose();
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t p = 0; p < p_total; ++p) {
            const auto [expl, frechet] =
                expm_frechet(scaled, dt * unknown_[static_cast<std::size_t>(p)]);
            out.gradient[static_cast<std::size_t>(p)] = frechet.cwiseProduct(g.transpose()).sum().real();
        }
    }
    return out;
}

ObjectiveKernel::Evaluation ObjectiveKernel::evaluate_matrix_free(
    std::span<const double> theta, std::optional<GradientMethod> gradient) const {
    if (gradient == GradientMethod::exact_frechet)
        throw Unsupported("exact_frechet gradient requires the dense regime (restricted dimension " +
                          std::to_string(basis_.size()) + " > " +
                          std::to_string(options_.dense_threshold) + ")");
    const std::size_t k_total = problem_.grid.samples;
    const double dt = problem_.grid.dt;
    const auto d = static_cast<Eigen::Index>(terms_->hilbert_dim());
    const auto& measured = problem_.measured.values;
    const MatrixFreeOperator op = terms_->matrix_free(theta, dt);

    Evaluation out;
    out.predicted.assign(k_total, 0.0);
    std::vector<double> residual(k_total);
    std::vector<ComplexVector> states;
    if (gradient) states.reserve(k_total);
    ComplexVector x = x0_full_;
    for (std::size_t k = 0; k < k_total; ++k) {
        x = expm_action(op, x);
        const double y = (weight_full_.transpose() * x)(0).real();
        out.predicted[k] = y;
        residual[k] = y - measured[k];
        if (gradient) states.push_back(x);
    }
    out.objective = half_sum_squares(residual);
    if (!gradient) return out;

    // Forward recursion sigma_k = M sigma_{k-1} + dt L_p x_k per parameter.
    const auto p_total = static_cast<std::ptrdiff_t>(theta.size());
    out.gradient.assign(theta.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t p = 0; p < p_total; ++p) {
        ComplexVector sigma = ComplexVector::Zero(d * d);
        ComplexMatrix lp_rho;
        double g = 0.0;
        for (std::size_t k = 0; k < k_total; ++k) {
            if (k > 0) sigma = expm_action(op, sigma);
            const Eigen::Map<const ComplexMatrix> rho(states[k].data(), d, d);
            terms_->apply_unknown(static_cast<std::size_t>(p), rho, lp_rho);
            sigma += dt * Eigen::Map<const ComplexVector>(lp_rho.data(), lp_rho.size());
            g += residual[k] * (weight_full_.transpose() * sigma)(0).real();
        }
        out.gradient[static_cast<std::size_t>(p)] = g;
    }
    return out;
}

std::vector<double> ObjectiveKernel::finite_difference(std::span<const double> theta) const {
    const double h = options_.fd_step;
    const auto p_total = static_cast<std::ptrdiff_t>(theta.size());
    std::vector<double> grad(theta.size(), 0.0);
    const std::vector<double> base(theta.begin(), theta.end());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t p = 0; p < p_total; ++p) {
        std::vector<double> plus = base, minus = base;
        plus[static_cast<std::size_t>(p)] += h;
        minus[static_cast<std::size_t>(p)] -= h;
        const double jp = (dense_ ? evaluate_dense(plus, std::nullopt)
                                  : evaluate_matrix_free(plus, std::nullopt)).objective;
        const double jm = (dense_ ? evaluate_dense(minus, std::nullopt)
                                  : evaluate_matrix_free(minus, std::nullopt)).objective;
        grad[static_cast<std::size_t>(p)] = (jp - jm) / (2.0 * h);
    }
    return grad;
}

double objective(const IdentificationProblem& problem, std::span<const double> theta) {
    check_theta(problem.model, theta);
    return ObjectiveKernel(problem).objective(theta);
}

std::vector<double> gradient_paper(const IdentificationProblem& problem, std::span<const double> theta) {
    check_theta(problem.model, theta);
    return ObjectiveKernel(problem).evaluate(theta, GradientMethod::paper_approx).gradient;
}

std::vector<double> gradient_exact(const IdentificationProblem& problem, std::span<const double> theta) {
    check_theta(problem.model, theta);
    return ObjectiveKernel(problem).evaluate(theta, GradientMethod::exact_frechet).gradient;
}

std::vector<double> gradient_fd(const IdentificationProblem& problem, std::span<const double> theta,
                                double h) {
    if (!(h > 0.0)) throw std::invalid_argument("gradient_fd: h must be > 0");
    check_theta(problem.model, theta);
    KernelOptions options;
    options.fd_step = h;
    return ObjectiveKernel(problem, options).evaluate(theta, GradientMethod::finite_difference).gradient;
}

void DescentConfig::validate(std::size_t unknown_count) const {
    if (step_sizes.empty() || (step_sizes.size() != 1 && step_sizes.size() != unknown_count))
        throw std::invalid_argument("descent: step_sizes must have 1 or " +
                                    std::to_string(unknown_count) + " entries");
    for (double e : step_sizes)
        if (!(e > 0.0) || !std::isfinite(e))
            throw std::invalid_argument("descent: step sizes must be positive");
    if (objective_tolerance && !(*objective_tolerance >= 0.0))
        throw std::invalid_argument("descent: objective tolerance must be >= 0");
}

bool ConvergenceRecord::same_numbers(const ConvergenceRecord& o) const {
    return unknown_names == o.unknown_names && history == o.history && theta_hat == o.theta_hat &&
           (objective_hat == o.objective_hat ||
            (std::isnan(objective_hat) && std::isnan(o.objective_hat))) &&
           iterations == o.iterations && status == o.status && clamps == o.clamps &&
           failed_iteration == o.failed_iteration;
}

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

ConvergenceRecord descend(const IdentificationProblem& problem, std::vector<double> theta0,
                          const DescentConfig& config) {
    const ObjectiveKernel kernel(problem, config.kernel);
    return descend(kernel, std::move(theta0), config);
}

ConvergenceRecord descend(const ObjectiveKernel& kernel, std::vector<double> theta0,
                          const DescentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const ModelSpec& model = kernel.problem().model;
    check_theta(model, theta0);
    config.validate(model.unknown_count());

    ConvergenceRecord rec;
    rec.unknown_names = model.unknown_names;
    std::vector<double> theta = std::move(theta0);

    auto finish = [&] {
        if (!rec.history.empty()) {
            rec.theta_hat = rec.history.back().theta;
            rec.objective_hat = rec.history.back().objective;
            rec.iterations = rec.history.back().iteration;
        } else {
            rec.theta_hat = theta;
            rec.objective_hat = std::nan("");
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    for (std::size_t it = 0;; ++it) {
        const bool last = it >= config.max_iters;
        ObjectiveKernel::Evaluation eval;
        try {
            eval = kernel.evaluate(theta, last ? std::nullopt
                                               : std::optional<GradientMethod>(config.gradient_method));
        } catch (const NumericalFailure& e) {
            rec.status = DescentStatus::non_finite;
            rec.failed_iteration = it;
            rec.diagnostic = e.what();
            finish();
            return rec;
        }
        if (!std::isfinite(eval.objective)) {
            rec.status = DescentStatus::non_finite;
            rec.failed_iteration = it;
            rec.diagnostic = "objective is not finite at iteration " + std::to_string(it);
            finish();
            return rec;
        }
        rec.history.push_back({it, theta, eval.objective});
        if (config.objective_tolerance && eval.objective <= *config.objective_tolerance) {
            rec.status = DescentStatus::converged;
            break;
        }
        if (last) {
            rec.status = DescentStatus::budget_exhausted;
            break;
        }
        if (!all_finite(eval.gradient)) {
            rec.status = DescentStatus::non_finite;
            rec.failed_iteration = it;
            rec.diagnostic = "gradient is not finite at iteration " + std::to_string(it);
            break;
        }
        for (std::size_t p = 0; p < theta.size(); ++p) theta[p] -= config.step_size(p) * eval.gradient[p];
        if (!all_finite(theta)) {
            rec.status = DescentStatus::non_finite;
            rec.failed_iteration = it + 1;
            rec.diagnostic = "parameter update is not finite at iteration " + std::to_string(it + 1);
            break;
        }
        bool left_region = false;
        for (std::size_t p = model.hamiltonian_unknown_count(); p < theta.size(); ++p) {
            if (theta[p] >= 0.0) continue;
            if (config.clamp_rates) {
                rec.clamps.push_back({it + 1, p, theta[p]});
                theta[p] = 0.0;
            } else {
                left_region = true;
            }
        }
        if (left_region) {
            rec.status = DescentStatus::left_physical_region;
            rec.failed_iteration = it + 1;
            rec.diagnostic = "a rate became negative at iteration " + std::to_string(it + 1) +
                             " and clamp_rates is off";
            break;
        }
    }
    finish();
    return rec;
}

MultiStartResult multi_start(const IdentificationProblem& problem,
                             const std::vector<std::vector<double>>& starts,
                             const DescentConfig& config) {
    if (starts.empty()) throw std::invalid_argument("multi_start: no starting points");
    const ObjectiveKernel kernel(problem, config.kernel);
    MultiStartResult result;
    result.records.resize(starts.size());
    std::vector<std::exception_ptr> errors(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < n; ++s) {
        try {
            result.records[static_cast<std::size_t>(s)] =
                descend(kernel, starts[static_cast<std::size_t>(s)], config);
        } catch (...) {
            errors[static_cast<std::size_t>(s)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    bool found = false;
    std::string reasons;
    for (std::size_t s = 0; s < result.records.size(); ++s) {
        const auto& r = result.records[s];
        if (r.failed()) {
            reasons += " [start " + std::to_string(s) + ": " + r.diagnostic + "]";
            continue;
        }
        if (!found || r.objective_hat < result.records[result.best_index].objective_hat) {
            result.best_index = s;
            found = true;
        }
    }
    if (!found) throw NumericalFailure("multi_start: every start failed:" + reasons);
    return result;
}

} // namespace qsid
