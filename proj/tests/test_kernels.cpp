// Kernel family: moment conditions, Lipschitz certificates, and product
// evaluation.  Moments are cross-checked against an independent fixed-node
// Gauss-Legendre rule built here from the Legendre recurrence, not against
// the library's own quadrature.
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fracdens/kernels.hpp"

using namespace fracdens;

namespace {

// 64-point Gauss-Legendre rule on [-1,1]: nodes are Newton-refined roots of
// P_64, weights 2/((1-x^2) P'_64(x)^2).  Exact for polynomials up to degree
// 127, far beyond any kernel used here.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            // Standard initial guess, then Newton on P_n.
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    template <typename F>
    double integrate(F f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

}  // namespace

// =============================================================================
// Epanechnikov exact values (orders 0 and 1 coincide)
// =============================================================================

TEST(Kernels, EpanechnikovClosedForm) {
    for (int order : {0, 1}) {
        const Kernel k = make_kernel(order);
        EXPECT_NEAR(k.poly()(0.0), 0.75, 1e-14);
        EXPECT_NEAR(k.poly()(0.5), 0.75 * 0.75, 1e-14);
        EXPECT_NEAR(k.sup(), 0.75, 1e-14);
        EXPECT_NEAR(k.lipschitz(), 1.5, 1e-12);
        EXPECT_NEAR(k.moment(0), 1.0, 1e-12);
        EXPECT_NEAR(k.moment(1), 0.0, 1e-12);
        EXPECT_NEAR(k.moment(2), 0.2, 1e-12);
        EXPECT_NEAR(k.squared_l2(), 0.6, 1e-12);
        // int |u| K(u) du = 2 * (3/4) * (1/2 - 1/4) = 3/8.
        EXPECT_NEAR(k.abs_moment(1.0), 0.375, 1e-10);
    }
    // Outside the support the kernel vanishes.
    const Kernel k = make_kernel(1);
    EXPECT_DOUBLE_EQ(k(1.5), 0.0);
    EXPECT_DOUBLE_EQ(k(-1.01), 0.0);
    EXPECT_NEAR(k(0.0), 0.75, 1e-14);
}

TEST(Kernels, SecondOrderFamilyClosedForm) {
    // Orders 2 and 3 share q(u) = 45/32 - (105/32) u^2; the first nonzero
    // moment past the constraints is int u^4 K = -1/21.
    for (int order : {2, 3}) {
        const Kernel k = make_kernel(order);
        EXPECT_NEAR(k.moment(0), 1.0, 1e-12);
        EXPECT_NEAR(k.moment(2), 0.0, 1e-12);
        EXPECT_NEAR(k.moment(3), 0.0, 1e-12);
        EXPECT_NEAR(k.moment(4), -1.0 / 21.0, 1e-12);
        EXPECT_NEAR(k.poly()(0.0), 45.0 / 32.0, 1e-12);
    }
}

// =============================================================================
// Moment conditions against the independent quadrature oracle
// =============================================================================

TEST(Kernels, MomentResidualsAgainstGaussLegendre) {
    const GaussLegendre gl(64);
    for (int order = 0; order <= 5; ++order) {
        const Kernel k = make_kernel(order);
        for (int ell = 0; ell <= order; ++ell) {
            const double target = (ell == 0) ? 1.0 : 0.0;
            const double numeric =
                gl.integrate([&](double u) { return std::pow(u, ell) * k.poly()(u); });
            EXPECT_NEAR(numeric, target, 1e-10) << "order " << order << " moment " << ell;
            EXPECT_NEAR(k.moment(ell), numeric, 1e-10) << "tabulated moment disagrees";
        }
        // Odd moments vanish exactly: the basis is even.
        for (int ell = 1; ell <= order + 2; ell += 2) EXPECT_DOUBLE_EQ(k.moment(ell), 0.0);
    }
}

TEST(Kernels, AbsMomentMatchesQuadratureOracle) {
    // int |u|^s |K| = 2 int_0^1 u^s |K|, split at the known sign changes of K
    // so |K| is polynomial on every panel.  Substituting u = z^2 turns u^s
    // into z^{2s}, a polynomial for the tested s, so the fixed rule is exact
    // (u^{1.5} alone has unbounded curvature at 0 and would stall at ~1e-10).
    const GaussLegendre gl(64);
    const auto panel = [&](const Kernel& k, double s, double a, double b) {
        const double za = std::sqrt(a), zb = std::sqrt(b);
        const double mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
        return half * gl.integrate([&](double u) {
            const double z = mid + half * u;
            return 2.0 * std::pow(z, 2.0 * s + 1.0) * std::abs(k.poly()(z * z));
        });
    };
    for (int order : {1, 3}) {
        const Kernel k = make_kernel(order);
        // Epanechnikov is nonnegative; the order-3 member changes sign where
        // 45 - 105 u^2 = 0, i.e. at sqrt(3/7).
        std::vector<double> cuts{0.0, 1.0};
        if (order == 3) cuts = {0.0, std::sqrt(3.0 / 7.0), 1.0};
        for (double s : {1.0, 1.5, 2.0}) {
            double oracle = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                oracle += panel(k, s, cuts[i], cuts[i + 1]);
            oracle *= 2.0;
            EXPECT_NEAR(k.abs_moment(s), oracle, 1e-10) << "order " << order << " s " << s;
        }
    }
}

// =============================================================================
// Lipschitz certificate
// =============================================================================

TEST(Kernels, LipschitzCertificateHundredThousandPairs) {
    std::mt19937_64 rng(20250816u);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    for (int order = 0; order <= 5; ++order) {
        const Kernel k = make_kernel(order);
        const double bound = k.lipschitz();
        double worst = 0.0;
        for (int i = 0; i < 100'000; ++i) {
            const double u = box(rng);
            const double v = box(rng);
            if (std::abs(u - v) < 1e-12) continue;
            worst = std::max(worst, std::abs(k(u) - k(v)) / std::abs(u - v));
        }
        EXPECT_LE(worst, bound * (1.0 + 1e-12)) << "order " << order;
        // The bound is attained on [-1,1], so the certificate is not vacuous.
        EXPECT_GT(worst, 0.5 * bound) << "order " << order;
    }
}

// =============================================================================
// Product kernels and bandwidths
// =============================================================================

TEST(Bandwidths, EffectiveVolume) {
    EXPECT_DOUBLE_EQ(Bandwidth({0.5}).v(), 0.25);
    EXPECT_DOUBLE_EQ(Bandwidth({1.0, 1.0}).v(), 1.0);
    EXPECT_NEAR(Bandwidth({0.1, 0.2}).v(), 0.002, 1e-15);
    EXPECT_DOUBLE_EQ(Bandwidth({0.5, 0.2}).v(), 0.2 * 0.1);
}

TEST(Bandwidths, Validation) {
    EXPECT_THROW(Bandwidth({}), std::invalid_argument);
    EXPECT_THROW(Bandwidth({0.0}), std::invalid_argument);
    EXPECT_THROW(Bandwidth({-0.1}), std::invalid_argument);
    EXPECT_THROW(Bandwidth({1.5}), std::invalid_argument);
    EXPECT_THROW(Bandwidth({std::nan("")}), std::invalid_argument);
    EXPECT_NO_THROW(Bandwidth({1.0, 0.3}));
}

TEST(ProductKernel, PointValues) {
    const Kernel k = make_kernel(1);
    const std::vector<double> center{0.0};
    EXPECT_NEAR(eval_product(k, Bandwidth({1.0}), center), 0.75, 1e-14);

    const std::vector<double> outside{1.2};
    EXPECT_DOUBLE_EQ(eval_product(k, Bandwidth({1.0}), outside), 0.0);

    const std::vector<double> origin2{0.0, 0.0};
    EXPECT_NEAR(eval_product(k, Bandwidth({0.5, 0.5}), origin2), 2.25, 1e-12);

    const std::vector<double> partial{0.0, 2.0};
    EXPECT_DOUBLE_EQ(eval_product(k, Bandwidth({0.5, 0.5}), partial), 0.0);
}

TEST(ProductKernel, ScalingIdentity) {
    const Kernel k = make_kernel(3);
    const Bandwidth h({0.4, 0.25});
    const std::vector<double> u{0.1, -0.2};
    const double base = eval_product(k, h, u);
    for (double c : {0.5, 2.0}) {
        const Bandwidth ch({c * 0.4, c * 0.25});
        const std::vector<double> cu{c * 0.1, c * (-0.2)};
        EXPECT_NEAR(eval_product(k, ch, cu) * c * c, base, 1e-12) << "c " << c;
    }
}

TEST(ProductKernel, LipschitzBound) {
    const Kernel k = make_kernel(1);
    EXPECT_NEAR(product_lipschitz_bound(k, Bandwidth({1.0})), k.lipschitz(), 1e-14);
    EXPECT_NEAR(product_lipschitz_bound(k, Bandwidth({1.0, 1.0})),
                std::sqrt(2.0) * k.lipschitz(), 1e-14);
    // v(0.1) = 0.01, so the bound scales by 100.
    EXPECT_NEAR(product_lipschitz_bound(k, Bandwidth({0.1})), 100.0 * k.lipschitz(), 1e-10);
}

TEST(ProductKernel, EmpiricalProductLipschitzWithinBound) {
    // Random pairs in the 2-d box must respect sqrt(d) kappa_L / v(h).
    const Kernel k = make_kernel(1);
    const Bandwidth h({0.5, 0.25});
    const double bound = product_lipschitz_bound(k, h);
    std::mt19937_64 rng(7u);
    std::uniform_real_distribution<double> bx(-0.6, 0.6);
    std::uniform_real_distribution<double> by(-0.3, 0.3);
    double worst = 0.0;
    for (int i = 0; i < 20'000; ++i) {
        const std::vector<double> u{bx(rng), by(rng)};
        const std::vector<double> v{bx(rng), by(rng)};
        const double dist = std::hypot(u[0] - v[0], u[1] - v[1]);
        if (dist < 1e-12) continue;
        worst = std::max(worst, std::abs(eval_product(k, h, u) - eval_product(k, h, v)) / dist);
    }
    EXPECT_LE(worst, bound * (1.0 + 1e-12));
}

// =============================================================================
// Construction guards
// =============================================================================

TEST(Kernels, ConstructionGuards) {
    EXPECT_THROW(make_kernel(-1), std::invalid_argument);
    EXPECT_THROW(make_kernel(21), std::invalid_argument);
    EXPECT_THROW(make_kernel(8, 4), std::invalid_argument);
    EXPECT_NO_THROW(make_kernel(20));
    EXPECT_THROW(make_kernel(1).moment(99), std::invalid_argument);
}
