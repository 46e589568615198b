#pragma once

#include <span>
#include <vector>

#include "fracdens/numerics.hpp"

namespace fracdens {

// Product-form bandwidth vector, all entries in (0,1].
struct Bandwidth {
    explicit Bandwidth(std::vector<double> values);
    int dim() const { return static_cast<int>(h.size()); }
    // Effective volume statistic min_i(h_i) * prod_i(h_i).
    double v() const;
    std::vector<double> h;
};

// Compactly supported polynomial kernel K(u) = q(u)(1-u^2) on [-1,1], with
// q chosen so that K integrates to one and the moments u^l, 1 <= l <= order,
// vanish.  q uses even powers only, so odd moments vanish identically and the
// moment system is square and well conditioned for moderate orders.
class Kernel {
  public:
    int order() const { return order_; }
    const Polynomial& poly() const { return poly_; }
    double operator()(double u) const { return (u < -1.0 || u > 1.0) ? 0.0 : poly_(u); }

    double lipschitz() const { return lipschitz_; }  // max |K'| on [-1,1]
    double sup() const { return sup_; }              // max |K| on [-1,1]

    // Exact integral of u^l K(u) over [-1,1] (table precomputed to order+2).
    double moment(int ell) const;
    // Integral of |v|^s |K(v)| dv for real s >= 0, by adaptive quadrature.
    double abs_moment(double s) const;
    double squared_l2() const;  // integral of K^2

  private:
    friend Kernel make_kernel(int, int);
    int order_ = 0;
    Polynomial poly_;
    double lipschitz_ = 0.0;
    double sup_ = 0.0;
    std::vector<double> moments_;
};

// Builds the kernel of the requested order (order 0 and 1 coincide with the
// Epanechnikov kernel).  Throws PreconditionError if the moment system cannot
// be solved to 1e-10 residuals, which caps the usable order well below
// max_order in practice.
Kernel make_kernel(int order, int max_order = 20);

// Product kernel evaluation prod_i h_i^{-1} K(u_i / h_i).
double eval_product(const Kernel& kernel, const Bandwidth& h, std::span<const double> u);

// Lipschitz bound sqrt(d) * kappa_L / V_h for x -> prod_i h_i^{-1} K((x0-x)_i/h_i).
double product_lipschitz_bound(const Kernel& kernel, const Bandwidth& h);

}  // namespace fracdens
