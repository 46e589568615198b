#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fracdens {

// Compensated (Neumaier) accumulator.  Replication studies aggregate through
// this so that totals are reproducible to ~1e-12 regardless of chunking.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_total(std::span<const double> xs);

// ---------------- polynomials ----------------

// Dense univariate polynomial, coefficient c[k] on u^k.  Used for the kernel
// family, whose members are exact polynomials on [-1,1]; moments and extrema
// are then exact arithmetic rather than grid approximations.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    double operator()(double u) const;  // Horner
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    Polynomial derivative() const;
    Polynomial antiderivative() const;          // constant term 0
    double integrate(double a, double b) const;  // exact
    Polynomial times(const Polynomial& other) const;

    // Real roots inside [a,b], via the companion matrix; multiple roots are
    // reported once per numerically distinct eigenvalue.
    std::vector<double> real_roots_in(double a, double b) const;

    // max over [a,b] of |p|; exact up to root-finding on the derivative.
    double max_abs_on(double a, double b) const;

  private:
    std::vector<double> coeffs_;  // trimmed: no trailing zeros (except the zero poly)
};

// ---------------- quadrature ----------------

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) with bisection.  Handles integrable kinks
// (|u|^s factors, piecewise-polynomial kernels) by local refinement.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol = 1e-12, double rel_tol = 1e-12,
                                    int max_depth = 48);

// Semi-infinite integral of f over [0, inf) for integrands with exponential
// decay scale 1/rate: maps through successive finite panels until the tail
// contribution is negligible.
QuadratureResult integrate_exp_tail(const std::function<double(double)>& f, double rate,
                                    double abs_tol = 1e-12, double rel_tol = 1e-12);

// ---------------- statistics helpers ----------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    int n = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct WilsonInterval {
    double lower = 0.0;
    double upper = 1.0;
};

// Wilson score interval for a binomial proportion (default 95%).
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

double mean_of(std::span<const double> xs);
double variance_of(std::span<const double> xs);  // unbiased

}  // namespace fracdens
