// expm.cpp: Pade scaling-and-squaring exponential and truncated-Taylor action

#include "qsid/expm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qsid/errors.hpp"

namespace qsid {

namespace {

constexpr std::array<double, 4> kPadeB3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPadeB5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPadeB7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                        25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPadeB9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                         30270240.0,    2162160.0,    110880.0,     3960.0,
                                         90.0,          1.0};
constexpr std::array<double, 14> kPadeB13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

// r_m(A) = (V - U)^{-1} (V + U) for degrees 3..9 built from even powers.
template <std::size_t N>
ComplexMatrix pade_low(const ComplexMatrix& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    ComplexMatrix power = ident;
    ComplexMatrix u_inner = ComplexMatrix::Zero(n, n);
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; 2 * k + 1 < N; ++k) {
        u_inner += b[2 * k + 1] * power;
        v += b[2 * k] * power;
        if (2 * k + 3 < N + 1) power = power * a2;
    }
    const ComplexMatrix u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

ComplexMatrix pade13(const ComplexMatrix& a) {
    const auto& b = kPadeB13;
    const Eigen::Index n = a.rows();
    const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = a * a;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;
    const ComplexMatrix u_hi = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const ComplexMatrix u = a * (u_hi + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const ComplexMatrix v_hi = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    const ComplexMatrix v = v_hi + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

// Taylor degree bounds theta_m for double precision (Al-Mohy & Higham 2011, Table 3.1).
struct ThetaEntry {
    int m;
    double theta;
};
constexpr std::array<ThetaEntry, 35> kTaylorTheta{{
    {1, 2.29e-16}, {2, 2.58e-8}, {3, 1.39e-5}, {4, 3.40e-4}, {5, 2.40e-3}, {6, 9.07e-3},
    {7, 2.38e-2},  {8, 5.00e-2}, {9, 8.96e-2}, {10, 1.44e-1}, {11, 2.14e-1}, {12, 3.00e-1},
    {13, 4.00e-1}, {14, 5.14e-1}, {15, 6.41e-1}, {16, 7.81e-1}, {17, 9.31e-1}, {18, 1.09},
    {19, 1.26},    {20, 1.44},   {21, 1.62},    {22, 1.82},    {23, 2.01},    {24, 2.22},
    {25, 2.43},    {26, 2.64},   {27, 2.86},    {28, 3.08},    {29, 3.31},    {30, 3.54},
    {35, 4.7},     {40, 6.0},    {45, 7.2},     {50, 8.5},     {55, 9.9},
}};

struct TaylorPlan {
    int degree = 0;
    std::size_t steps = 1;
};

TaylorPlan plan_taylor(double norm) {
    TaylorPlan best;
    if (norm == 0.0) return best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& [m, theta] : kTaylorTheta) {
        const double s = std::ceil(norm / theta);
        const double cost = m * s;
        if (cost < best_cost) {
            best_cost = cost;
            best.degree = m;
            best.steps = static_cast<std::size_t>(s);
        }
    }
    return best;
}

template <typename Apply>
ComplexVector taylor_action(Apply&& apply, double norm, Complex shift, const ComplexVector& v,
                            const ExpmActionOptions& options) {
    if (!std::isfinite(norm)) throw NumericalFailure("expm_action: operator norm is not finite");
    const TaylorPlan plan = plan_taylor(norm);
    if (plan.degree == 0) return v * std::exp(shift);
    if (static_cast<double>(plan.steps) * plan.degree > static_cast<double>(options.max_products))
        throw NumericalFailure("expm_action: iteration budget exceeded (norm " +
                               std::to_string(norm) + ")");
    const Complex step_factor = std::exp(shift / static_cast<double>(plan.steps));
    ComplexVector f = v;
    ComplexVector b = v;
    ComplexVector tmp(v.size());
    for (std::size_t i = 0; i < plan.steps; ++i) {
        double c1 = b.lpNorm<Eigen::Infinity>();
        for (int j = 1; j <= plan.degree; ++j) {
            apply(b, tmp);
            b = tmp / (static_cast<double>(plan.steps) * j);
            const double c2 = b.lpNorm<Eigen::Infinity>();
            f += b;
            if (c1 + c2 <= options.tolerance * f.lpNorm<Eigen::Infinity>()) break;
            c1 = c2;
        }
        f *= step_factor;
        if (!f.allFinite()) throw NumericalFailure("expm_action: result is not finite", i);
        b = f;
    }
    return f;
}

} // namespace

double norm1(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

ComplexMatrix expm(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix is not square");
    if (!m.allFinite()) throw std::invalid_argument("expm: matrix has non-finite entries");
    const double norm = norm1(m);
    if (norm <= kTheta3) return pade_low(m, kPadeB3);
    if (norm <= kTheta5) return pade_low(m, kPadeB5);
    if (norm <= kTheta7) return pade_low(m, kPadeB7);
    if (norm <= kTheta9) return pade_low(m, kPadeB9);
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    ComplexMatrix r = pade13(m / std::ldexp(1.0, s));
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

std::pair<ComplexMatrix, ComplexMatrix> expm_frechet(const ComplexMatrix& a, const ComplexMatrix& e) {
    if (a.rows() != a.cols() || e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("expm_frechet: A and E must be square of equal size");
    const Eigen::Index n = a.rows();
    ComplexMatrix block = ComplexMatrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a;
    block.topRightCorner(n, n) = e;
    block.bottomRightCorner(n, n) = a;
    const ComplexMatrix x = expm(block);
    return {x.topLeftCorner(n, n), x.topRightCorner(n, n)};
}

ComplexVector expm_action(const ComplexMatrix& a, const ComplexVector& v,
                          const ExpmActionOptions& options) {
    if (a.rows() != a.cols() || a.cols() != v.size())
        throw std::invalid_argument("expm_action: dimension mismatch");
    if (!a.allFinite() || !v.allFinite())
        throw std::invalid_argument("expm_action: non-finite input");
    // Shifting by the mean diagonal shrinks the norm for dissipative generators.
    const Complex shift = a.size() ? a.trace() / static_cast<double>(a.rows()) : Complex{};
    ComplexMatrix shifted = a;
    shifted.diagonal().array() -= shift;
    double norm = norm1(shifted);
    Complex used_shift = shift;
    if (norm > norm1(a)) {
        shifted = a;
        norm = norm1(a);
        used_shift = 0.0;
    }
    auto apply = [&](const ComplexVector& in, ComplexVector& out) { out.noalias() = shifted * in; };
    return taylor_action(apply, norm, used_shift, v, options);
}

ComplexVector expm_action(const MatrixFreeOperator& a, const ComplexVector& v,
                          const ExpmActionOptions& options) {
    if (a.dim != v.size() || !a.apply)
        throw std::invalid_argument("expm_action: operator does not match vector length");
    return taylor_action(a.apply, a.norm1, Complex{}, v, options);
}

} // namespace qsid
