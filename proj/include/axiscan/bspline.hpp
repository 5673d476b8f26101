// Cubic B-spline basis and least-squares curve fitting.
#pragma once

#include "axiscan/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace axiscan {

/// Clamped cubic B-spline over [domain_lo, domain_hi].
struct FunctionalCurve {
    static constexpr int kDegree = 3;
    Eigen::VectorXd knots;         // full clamped knot vector
    Eigen::VectorXd coefficients;  // one control value per basis function
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    double fit_rms = 0.0;          // RMS residual of the originating fit

    int basis_count() const { return static_cast<int>(coefficients.size()); }

    double evaluate(double x) const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& xs) const;
};

namespace bspline {

/// Clamped uniform knot vector with `interior` interior knots on [a, b].
inline Eigen::VectorXd clamped_uniform_knots(double a, double b, int interior) {
    const int degree = FunctionalCurve::kDegree;
    Eigen::VectorXd knots(2 * (degree + 1) + interior);
    for (int i = 0; i <= degree; ++i) knots[i] = a;
    for (int k = 1; k <= interior; ++k)
        knots[degree + k] = a + (b - a) * k / (interior + 1);
    for (int i = 0; i <= degree; ++i) knots[degree + interior + 1 + i] = b;
    return knots;
}

/// Index of the knot span containing x (clamped to the valid range).
inline int find_span(const Eigen::VectorXd& knots, double x) {
    const int degree = FunctionalCurve::kDegree;
    const int n_basis = static_cast<int>(knots.size()) - degree - 1;
    if (x >= knots[n_basis]) return n_basis - 1;  // right end maps into last span
    if (x <= knots[degree]) return degree;
    int lo = degree, hi = n_basis;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x < knots[mid] ? hi : lo) = mid;
    }
    return lo;
}

/// The degree+1 basis values that are nonzero at x (Cox-de Boor recursion).
/// Returns the span; values[j] corresponds to basis function span-degree+j.
inline int basis_values(const Eigen::VectorXd& knots, double x, std::array<double, 4>& values) {
    const int degree = FunctionalCurve::kDegree;
    const int span = find_span(knots, x);
    std::array<double, 4> left{}, right{};
    values[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? values[r] / denom : 0.0;
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    return span;
}

/// Interior knot count used when fitting a profile of n points.
inline int interior_knots_for(std::size_t n_points) {
    return static_cast<int>(std::clamp<std::size_t>(n_points / 10, 8, 50));
}

}  // namespace bspline

inline double FunctionalCurve::evaluate(double x) const {
    const double cx = std::clamp(x, domain_lo, domain_hi);
    std::array<double, 4> vals;
    const int span = bspline::basis_values(knots, cx, vals);
    double result = 0.0;
    for (int j = 0; j <= kDegree; ++j)
        result += vals[j] * coefficients[span - kDegree + j];
    return result;
}

inline Eigen::VectorXd FunctionalCurve::evaluate(const Eigen::VectorXd& xs) const {
    Eigen::VectorXd out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out[i] = evaluate(xs[i]);
    return out;
}

/// Least-squares cubic B-spline fit of z over x. `smoothing` > 0 adds a
/// second-difference penalty on the coefficients; 0 is a plain fit.
/// Throws FitError when the data cannot support the basis.
inline FunctionalCurve fit_bspline(const std::vector<double>& xs, const std::vector<double>& zs,
                                   double smoothing = 0.0) {
    if (xs.size() != zs.size()) throw FitError("fit: x/z length mismatch");
    const std::size_t n = xs.size();
    if (n < 8) throw FitError("fit: fewer than 8 points");

    std::vector<double> sorted_x = xs;
    std::sort(sorted_x.begin(), sorted_x.end());
    int distinct = 1;
    for (std::size_t i = 1; i < n; ++i)
        if (sorted_x[i] != sorted_x[i - 1]) ++distinct;
    if (distinct < 5) throw FitError("fit: fewer than 5 distinct x values");

    const double a = sorted_x.front();
    const double b = sorted_x.back();
    if (!(b > a)) throw FitError("fit: zero-width domain");

    const int interior = bspline::interior_knots_for(n);
    const Eigen::VectorXd knots = bspline::clamped_uniform_knots(a, b, interior);
    const int nb = interior + FunctionalCurve::kDegree + 1;
    if (static_cast<int>(n) < nb)
        throw FitError("fit: underdetermined (fewer points than basis functions)");

    const int extra = smoothing > 0.0 ? nb - 2 : 0;
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<int>(n) + extra, nb);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(n) + extra);
    std::array<double, 4> vals;
    for (std::size_t i = 0; i < n; ++i) {
        const int span = bspline::basis_values(knots, xs[i], vals);
        for (int j = 0; j <= FunctionalCurve::kDegree; ++j)
            design(static_cast<int>(i), span - FunctionalCurve::kDegree + j) = vals[j];
        rhs[static_cast<int>(i)] = zs[i];
    }
    if (extra > 0) {
        const double w = std::sqrt(smoothing);
        for (int r = 0; r < extra; ++r) {
            design(static_cast<int>(n) + r, r) = w;
            design(static_cast<int>(n) + r, r + 1) = -2.0 * w;
            design(static_cast<int>(n) + r, r + 2) = w;
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < nb)
        throw FitError("fit: rank-deficient system (data does not cover all knot spans)");
    Eigen::VectorXd coef = qr.solve(rhs);
    if (!coef.allFinite()) throw FitError("fit: non-finite solution");

    FunctionalCurve curve;
    curve.knots = knots;
    curve.coefficients = std::move(coef);
    curve.domain_lo = a;
    curve.domain_hi = b;

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = curve.evaluate(xs[i]) - zs[i];
        ss += r * r;
    }
    curve.fit_rms = std::sqrt(ss / static_cast<double>(n));
    return curve;
}

}  // namespace axiscan
