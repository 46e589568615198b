#include "fracdens/fbm.hpp"

#include <unsupported/Eigen/FFT>
#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "fracdens/errors.hpp"
#include "fracdens/rng.hpp"

namespace fracdens {

HurstParam::HurstParam(double h) : value(h) {
    if (!(h > 0.0) || !(h < 1.0) || !std::isfinite(h))
        throw std::invalid_argument("HurstParam: H must lie in (0,1), got " + std::to_string(h));
}

double fgn_autocovariance(double hurst, std::uint64_t lag, double delta) {
    if (!(hurst > 0.0) || !(hurst < 1.0)) throw std::invalid_argument("fgn_autocovariance: H out of (0,1)");
    if (!(delta > 0.0)) throw std::invalid_argument("fgn_autocovariance: delta must be positive");
    const double two_h = 2.0 * hurst;
    const double k = static_cast<double>(lag);
    const double scale = 0.5 * std::pow(delta, two_h);
    if (lag == 0) return scale * 2.0;  // |1|^{2H} - 0 + |-1|^{2H}
    return scale * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

}  // namespace

struct FgnEngine::Impl {
    double hurst;
    std::size_t steps;
    double delta;
    FgnMethod method;
    double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();

    // circulant_fft state
    std::size_t m = 0;                 // embedding ring size (2 * padded block)
    std::vector<double> sqrt_lambda;   // clamped sqrt of circulant eigenvalues

    // cholesky state
    Eigen::MatrixXd chol_lower;

    void build_circulant(double eigenvalue_tol) {
        const std::size_t block = next_pow2(std::max<std::size_t>(steps, 1));
        m = 2 * block;
        // Covariance ring: gamma(0..block), then mirrored gamma(block-1..1).
        std::vector<std::complex<double>> ring(m);
        for (std::size_t j = 0; j <= block; ++j) ring[j] = fgn_autocovariance(hurst, j, delta);
        for (std::size_t j = 1; j < block; ++j) ring[m - j] = ring[j];
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> spectrum(m);
        fft.fwd(spectrum, ring);
        double max_lambda = 0.0;
        min_eigenvalue = std::numeric_limits<double>::infinity();
        for (const auto& z : spectrum) {
            max_lambda = std::max(max_lambda, z.real());
            min_eigenvalue = std::min(min_eigenvalue, z.real());
        }
        if (min_eigenvalue < -eigenvalue_tol * max_lambda) {
            throw PreconditionError(
                "FgnEngine: circulant embedding of the fGN covariance is not nonnegative "
                "definite beyond tolerance (min eigenvalue " +
                std::to_string(min_eigenvalue) + "); use the cholesky method");
        }
        sqrt_lambda.resize(m);
        for (std::size_t j = 0; j < m; ++j) sqrt_lambda[j] = std::sqrt(std::max(spectrum[j].real(), 0.0));
    }

    void build_cholesky() {
        const Eigen::Index n = static_cast<Eigen::Index>(steps);
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double g = fgn_autocovariance(hurst, static_cast<std::uint64_t>(i - j), delta);
                cov(i, j) = g;
                cov(j, i) = g;
            }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw PreconditionError("FgnEngine: fGN covariance matrix failed Cholesky factorisation");
        chol_lower = llt.matrixL();
    }

    void sample_dim(std::uint64_t dim_seed, double* out, std::size_t stride) const {
        NormalSampler rng(dim_seed);
        switch (method) {
            case FgnMethod::white_noise: {
                const double scale = std::sqrt(delta);
                for (std::size_t k = 0; k < steps; ++k) out[k * stride] = scale * rng.normal();
                return;
            }
            case FgnMethod::cholesky: {
                Eigen::VectorXd z(static_cast<Eigen::Index>(steps));
                for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
                Eigen::VectorXd x = chol_lower.template triangularView<Eigen::Lower>() * z;
                for (std::size_t k = 0; k < steps; ++k) out[k * stride] = x[static_cast<Eigen::Index>(k)];
                return;
            }
            case FgnMethod::circulant_fft: {
                // Hermitian-symmetric Gaussian spectrum; FFT and 1/sqrt(m)
                // rescale yield a real block with the exact covariance.
                const std::size_t half = m / 2;
                std::vector<std::complex<double>> a(m);
                a[0] = sqrt_lambda[0] * rng.normal();
                a[half] = sqrt_lambda[half] * rng.normal();
                const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
                for (std::size_t j = 1; j < half; ++j) {
                    const double re = rng.normal() * inv_sqrt2;
                    const double im = rng.normal() * inv_sqrt2;
                    a[j] = sqrt_lambda[j] * std::complex<double>(re, im);
                    a[m - j] = std::conj(a[j]);
                }
                Eigen::FFT<double> fft;
                std::vector<std::complex<double>> y(m);
                fft.fwd(y, a);
                const double scale = 1.0 / std::sqrt(static_cast<double>(m));
                for (std::size_t k = 0; k < steps; ++k) out[k * stride] = y[k].real() * scale;
                return;
            }
            case FgnMethod::automatic:
                break;
        }
        throw std::logic_error("FgnEngine: unresolved synthesis method");
    }
};

FgnEngine::FgnEngine(HurstParam hurst, std::size_t steps, double delta, FgnMethod method,
                     std::size_t cholesky_threshold, double eigenvalue_tol)
    : impl_(std::make_unique<Impl>()) {
    if (steps == 0) throw std::invalid_argument("FgnEngine: steps must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("FgnEngine: delta must be positive");
    impl_->hurst = hurst.value;
    impl_->steps = steps;
    impl_->delta = delta;
    if (method == FgnMethod::automatic) {
        if (impl_->hurst == 0.5)
            method = FgnMethod::white_noise;
        else if (steps <= cholesky_threshold)
            method = FgnMethod::cholesky;
        else
            method = FgnMethod::circulant_fft;
    }
    if (method == FgnMethod::white_noise && impl_->hurst != 0.5)
        throw std::invalid_argument("FgnEngine: white_noise synthesis requires H = 1/2");
    impl_->method = method;
    switch (method) {
        case FgnMethod::circulant_fft:
            impl_->build_circulant(eigenvalue_tol);
            break;
        case FgnMethod::cholesky:
            impl_->build_cholesky();
            break;
        default:
            break;
    }
}

FgnEngine::~FgnEngine() = default;
FgnEngine::FgnEngine(FgnEngine&&) noexcept = default;
FgnEngine& FgnEngine::operator=(FgnEngine&&) noexcept = default;

FgnSample FgnEngine::sample(int dim, std::uint64_t seed) const {
    if (dim <= 0) throw std::invalid_argument("FgnEngine::sample: dim must be positive");
    FgnSample out;
    out.steps = impl_->steps;
    out.dim = dim;
    out.delta = impl_->delta;
    out.method = impl_->method;
    out.increments.resize(impl_->steps * static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j)
        impl_->sample_dim(derive_seed(seed, static_cast<std::uint64_t>(j)),
                          out.increments.data() + j, static_cast<std::size_t>(dim));
    return out;
}

double FgnEngine::hurst() const { return impl_->hurst; }
std::size_t FgnEngine::steps() const { return impl_->steps; }
double FgnEngine::delta() const { return impl_->delta; }
FgnMethod FgnEngine::method() const { return impl_->method; }
double FgnEngine::min_embedding_eigenvalue() const { return impl_->min_eigenvalue; }

FgnSample generate_fgn(HurstParam hurst, std::size_t steps, double delta, int dim,
                       std::uint64_t seed, FgnMethod method) {
    return FgnEngine(hurst, steps, delta, method).sample(dim, seed);
}

std::vector<double> cumulate_to_fbm(const FgnSample& sample) {
    const std::size_t d = static_cast<std::size_t>(sample.dim);
    std::vector<double> path((sample.steps + 1) * d, 0.0);
    for (std::size_t k = 0; k < sample.steps; ++k)
        for (std::size_t j = 0; j < d; ++j)
            path[(k + 1) * d + j] = path[k * d + j] + sample.increments[k * d + j];
    return path;
}

}  // namespace fracdens
