#include "fracdens/numerics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracdens {

double compensated_total(std::span<const double> xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// ---------------- Polynomial ----------------

namespace {
void trim(std::vector<double>& c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
}
}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    trim(coeffs_);
}

double Polynomial::operator()(double u) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * u + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
    std::vector<double> a(coeffs_.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
    return Polynomial(std::move(a));
}

double Polynomial::integrate(double a, double b) const {
    const Polynomial f = antiderivative();
    return f(b) - f(a);
}

Polynomial Polynomial::times(const Polynomial& other) const {
    std::vector<double> prod(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < other.coeffs_.size(); ++j)
            prod[i + j] += coeffs_[i] * other.coeffs_[j];
    return Polynomial(std::move(prod));
}

std::vector<double> Polynomial::real_roots_in(double a, double b) const {
    const int n = degree();
    std::vector<double> roots;
    if (n < 1) return roots;
    if (n == 1) {
        const double r = -coeffs_[0] / coeffs_[1];
        if (r >= a && r <= b) roots.push_back(r);
        return roots;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs_[i] / coeffs_[n];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    const auto& eig = solver.eigenvalues();
    for (int i = 0; i < eig.size(); ++i) {
        if (std::abs(eig[i].imag()) > 1e-9 * std::max(1.0, std::abs(eig[i].real()))) continue;
        const double r = eig[i].real();
        if (r >= a - 1e-12 && r <= b + 1e-12) roots.push_back(std::clamp(r, a, b));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double Polynomial::max_abs_on(double a, double b) const {
    double best = std::max(std::abs((*this)(a)), std::abs((*this)(b)));
    for (double r : derivative().real_roots_in(a, b)) best = std::max(best, std::abs((*this)(r)));
    return best;
}

// ---------------- quadrature ----------------

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
    double kronrod;
    double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kKronrodNodes[i]);
        fv[14 - i] = f(c + h * kKronrodNodes[i]);
    }
    fv[7] = f(c);
    double kron = 0.0;
    for (int i = 0; i < 7; ++i) kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    kron += kKronrodWeights[7] * fv[7];
    kron *= h;
    // Gauss points are the odd-indexed Kronrod nodes.
    double gauss = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 3; ++i) gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    gauss *= h;
    const double diff = std::abs(kron - gauss);
    return {kron, std::pow(200.0 * diff, 1.5) < diff ? std::pow(200.0 * diff, 1.5) : diff};
}

void integrate_recursive(const std::function<double(double)>& f, double a, double b, double tol,
                         int depth, int max_depth, CompensatedSum& value, double& err_acc,
                         int& evals, bool& converged) {
    const PanelResult panel = gk15(f, a, b);
    evals += 15;
    if (panel.error <= tol || depth >= max_depth) {
        value.add(panel.kronrod);
        err_acc += panel.error;
        if (depth >= max_depth && panel.error > tol) converged = false;
        return;
    }
    const double c = 0.5 * (a + b);
    integrate_recursive(f, a, c, 0.5 * tol, depth + 1, max_depth, value, err_acc, evals, converged);
    integrate_recursive(f, c, b, 0.5 * tol, depth + 1, max_depth, value, err_acc, evals, converged);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_depth) {
    QuadratureResult out;
    if (!(a < b)) {
        out.converged = true;
        return out;
    }
    const PanelResult first = gk15(f, a, b);
    const double scale = std::max(std::abs(first.kronrod), 1e-300);
    const double tol = std::max(abs_tol, rel_tol * scale);
    CompensatedSum value;
    double err = 0.0;
    int evals = 15;
    bool converged = true;
    if (first.error <= tol) {
        value.add(first.kronrod);
        err = first.error;
    } else {
        const double c = 0.5 * (a + b);
        integrate_recursive(f, a, c, 0.5 * tol, 1, max_depth, value, err, evals, converged);
        integrate_recursive(f, c, b, 0.5 * tol, 1, max_depth, value, err, evals, converged);
    }
    out.value = value.value();
    out.error_estimate = err;
    out.evaluations = evals;
    out.converged = converged;
    return out;
}

QuadratureResult integrate_exp_tail(const std::function<double(double)>& f, double rate,
                                    double abs_tol, double rel_tol) {
    if (!(rate > 0.0)) throw std::invalid_argument("integrate_exp_tail: rate must be positive");
    const double unit = 1.0 / rate;
    QuadratureResult total;
    total.converged = true;
    double a = 0.0;
    // Panels of growing width; stop when a panel contributes a negligible share.
    for (int k = 0; k < 80; ++k) {
        const double b = a + unit * std::pow(2.0, std::min(k, 24));
        const QuadratureResult part = integrate_adaptive(f, a, b, abs_tol, rel_tol);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
        total.converged = total.converged && part.converged;
        a = b;
        const double scale = std::max(std::abs(total.value), 1.0e-300);
        if (k > 2 && std::abs(part.value) < std::max(abs_tol, 0.5 * rel_tol * scale)) return total;
    }
    total.converged = false;
    return total;
}

// ---------------- statistics helpers ----------------

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: mismatched lengths");
    LineFit fit;
    fit.n = static_cast<int>(x.size());
    if (fit.n < 2) throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(fit.n);
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    fit.slope_se = (fit.n > 2) ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0 || successes < 0 || successes > trials)
        throw std::invalid_argument("wilson_interval: invalid counts");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, (centre - half) / denom), std::min(1.0, (centre + half) / denom)};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    // Compare the ECDFs only between distinct values: consume every copy of
    // the current smallest value from both samples before evaluating the gap.
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
    return compensated_total(xs) / static_cast<double>(xs.size());
}

double variance_of(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance_of: need at least two points");
    const double m = mean_of(xs);
    CompensatedSum acc;
    for (double x : xs) acc.add((x - m) * (x - m));
    return acc.value() / static_cast<double>(xs.size() - 1);
}

}  // namespace fracdens
