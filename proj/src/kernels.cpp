#include "fracdens/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracdens/errors.hpp"

namespace fracdens {

Bandwidth::Bandwidth(std::vector<double> values) : h(std::move(values)) {
    if (h.empty()) throw std::invalid_argument("Bandwidth: empty");
    for (double v : h)
        if (!(v > 0.0) || !(v <= 1.0) || !std::isfinite(v))
            throw std::invalid_argument("Bandwidth: entries must lie in (0,1]");
}

double Bandwidth::v() const {
    double lo = h[0], prod = 1.0;
    for (double v : h) {
        lo = std::min(lo, v);
        prod *= v;
    }
    return lo * prod;
}

double Kernel::moment(int ell) const {
    if (ell < 0 || ell >= static_cast<int>(moments_.size()))
        throw std::invalid_argument("Kernel::moment: order out of tabulated range");
    return moments_[static_cast<std::size_t>(ell)];
}

double Kernel::abs_moment(double s) const {
    if (!(s >= 0.0)) throw std::invalid_argument("Kernel::abs_moment: s must be nonnegative");
    const Polynomial& p = poly_;
    auto f = [&](double u) { return std::pow(std::abs(u), s) * std::abs(p(u)); };
    // Splitting at the kernel's sign changes keeps the integrand smooth per panel.
    std::vector<double> cuts{-1.0, 0.0, 1.0};
    for (double r : p.real_roots_in(-1.0, 1.0)) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += integrate_adaptive(f, cuts[i], cuts[i + 1], 1e-13, 1e-13).value;
    return total;
}

double Kernel::squared_l2() const { return poly_.times(poly_).integrate(-1.0, 1.0); }

Kernel make_kernel(int order, int max_order) {
    if (order < 0) throw std::invalid_argument("make_kernel: order must be nonnegative");
    if (order > max_order)
        throw std::invalid_argument("make_kernel: order " + std::to_string(order) +
                                    " exceeds the configured cap " + std::to_string(max_order));
    // q(u) = sum_j c_j u^{2j}, j = 0..m.  Moment conditions on K = q * (1-u^2):
    //   int u^{2i} K du = delta_{i0},  i = 0..m,
    // using int_{-1}^{1} u^{2k}(1-u^2) du = 2/(2k+1) - 2/(2k+3).
    const int m = order / 2;
    Eigen::MatrixXd a(m + 1, m + 1);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            const int k = i + j;
            a(i, j) = 2.0 / (2.0 * k + 1.0) - 2.0 / (2.0 * k + 3.0);
        }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs[0] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd c = lu.solve(rhs);
    c += lu.solve(rhs - a * c);  // one step of iterative refinement

    const double residual = (a * c - rhs).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10))
        throw PreconditionError("make_kernel: moment system residual " + std::to_string(residual) +
                                " exceeds 1e-10 at order " + std::to_string(order) +
                                "; the basis is too ill-conditioned, use a smaller order");

    std::vector<double> q_coeffs(static_cast<std::size_t>(2 * m + 1), 0.0);
    for (int j = 0; j <= m; ++j) q_coeffs[static_cast<std::size_t>(2 * j)] = c[j];
    Kernel kernel;
    kernel.order_ = order;
    kernel.poly_ = Polynomial(std::move(q_coeffs)).times(Polynomial({1.0, 0.0, -1.0}));

    // Extrema of K and K' from exact critical points; K(+-1) = 0 by the
    // (1-u^2) factor, so these constants extend to the whole line.
    const Polynomial d1 = kernel.poly_.derivative();
    kernel.sup_ = kernel.poly_.max_abs_on(-1.0, 1.0);
    kernel.lipschitz_ = d1.max_abs_on(-1.0, 1.0);

    kernel.moments_.resize(static_cast<std::size_t>(order + 3));
    std::vector<double> mono{1.0};
    for (int ell = 0; ell <= order + 2; ++ell) {
        kernel.moments_[static_cast<std::size_t>(ell)] =
            kernel.poly_.times(Polynomial(mono)).integrate(-1.0, 1.0);
        mono.insert(mono.begin(), 0.0);
    }
    return kernel;
}

double eval_product(const Kernel& kernel, const Bandwidth& h, std::span<const double> u) {
    if (u.size() != h.h.size())
        throw std::invalid_argument("eval_product: dimension mismatch between point and bandwidth");
    double prod = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double z = u[i] / h.h[i];
        if (z < -1.0 || z > 1.0) return 0.0;
        prod *= kernel.poly()(z) / h.h[i];
    }
    return prod;
}

double product_lipschitz_bound(const Kernel& kernel, const Bandwidth& h) {
    return std::sqrt(static_cast<double>(h.dim())) * kernel.lipschitz() / h.v();
}

}  // namespace fracdens
