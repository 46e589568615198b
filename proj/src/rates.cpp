#include "fracdens/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracdens/errors.hpp"

namespace fracdens {

RateExponents rate_exponents(double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0)) throw std::invalid_argument("rate_exponents: H out of (0,1)");
    return {std::max(2.0 * hurst, 1.0), std::min(1.0, 2.0 - 2.0 * hurst)};
}

HolderClass::HolderClass(std::vector<double> s_in, std::vector<double> l_in)
    : s(std::move(s_in)), L(std::move(l_in)) {
    if (s.empty() || s.size() != L.size())
        throw std::invalid_argument("HolderClass: need matching nonempty s and L");
    for (double v : s)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("HolderClass: s_i must be positive");
    for (double v : L)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("HolderClass: L_i must be positive");
}

double HolderClass::min_s() const { return *std::min_element(s.begin(), s.end()); }

int strict_floor(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("strict_floor: s must be positive");
    const double f = std::floor(s);
    return (f == s) ? static_cast<int>(f) - 1 : static_cast<int>(f);
}

double harmonic_smoothness(std::span<const double> s) {
    if (s.empty()) throw std::invalid_argument("harmonic_smoothness: empty");
    double inv = 0.0;
    for (double v : s) {
        if (!(v > 0.0)) throw std::invalid_argument("harmonic_smoothness: s_i must be positive");
        inv += 1.0 / v;
    }
    return 1.0 / inv;
}

double gamma_exponent(const HolderClass& holder) {
    const double s_bar = harmonic_smoothness(holder.s);
    return s_bar / (2.0 * (1.0 + 1.0 / holder.min_s()) * s_bar + 2.0);
}

std::vector<double> oracle_bandwidth(const HolderClass& holder, double n_delta, double hurst) {
    if (!(n_delta > 0.0)) throw std::invalid_argument("oracle_bandwidth: n*delta must be positive");
    const double beta = rate_exponents(hurst).beta;
    const double gamma = gamma_exponent(holder);
    std::vector<double> h(holder.s.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = std::pow(n_delta, -beta * gamma / holder.s[i]);
    return h;
}

AdaptiveTarget adaptive_bandwidth_star(const HolderClass& holder, double n_delta, double hurst) {
    if (!(n_delta > 0.0)) throw std::invalid_argument("adaptive_bandwidth_star: n*delta must be positive");
    const double beta = rate_exponents(hurst).beta;
    const double x = std::pow(n_delta, beta);  // effective horizon
    if (!(x >= std::exp(1.0)))
        throw PreconditionError(
            "adaptive_bandwidth_star: (n*delta)^beta = " + std::to_string(x) +
            " is below e; the observation horizon is too short for level selection");
    const double log_x = std::log(x);
    const double loglog_x = std::log(log_x);
    const double gamma = gamma_exponent(holder);
    AdaptiveTarget out;
    const std::size_t d = holder.s.size();
    out.levels.resize(d);
    out.h.resize(d);
    out.log_corrected.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double y = (gamma / holder.s[i]) * (log_x - loglog_x);
        out.levels[i] = static_cast<int>(std::floor(y));
        out.h[i] = std::exp(-static_cast<double>(out.levels[i]));
        out.log_corrected[i] = std::pow(log_x / x, gamma / holder.s[i]);
    }
    return out;
}

TheoremConstants theorem_constants(const HolderClass& holder, const Kernel& kernel, double kappa,
                                   double p, double subgaussian_c) {
    if (!(p >= 1.0)) throw std::invalid_argument("theorem_constants: p must be >= 1");
    if (!(subgaussian_c > 0.0)) throw std::invalid_argument("theorem_constants: C must be positive");
    if (!(kappa > subgaussian_c))
        throw PreconditionError("theorem_constants: kappa = " + std::to_string(kappa) +
                                " must exceed the sub-Gaussian constant C = " +
                                std::to_string(subgaussian_c));
    const double d = static_cast<double>(holder.dim());
    TheoremConstants out;
    for (std::size_t i = 0; i < holder.s.size(); ++i) {
        const double fact = std::tgamma(static_cast<double>(strict_floor(holder.s[i])) + 1.0);
        out.lambda1 += holder.L[i] / fact * kernel.abs_moment(holder.s[i]);
    }
    const double moment_p = std::pow(p * std::tgamma(0.5 * (p + 1.0)), 1.0 / p);
    out.lambda2 = 2.0 * std::sqrt(d * subgaussian_c) * moment_p * kernel.lipschitz();
    const double e_term = std::exp(p * (kappa / subgaussian_c - 1.0));
    out.c0 = 6.0 * out.lambda2 * std::pow(e_term / (e_term - 1.0), d / p);
    out.c1 = 8.0 * std::sqrt(kappa * d * (d + 1.5) * p) * kernel.lipschitz() +
             7.0 * std::exp(static_cast<double>(kernel.order()) + 1.0) * out.lambda1 +
             out.lambda2 + out.c0;
    return out;
}

}  // namespace fracdens
