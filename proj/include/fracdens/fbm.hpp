#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace fracdens {

// Hurst index, validated to the open interval (0,1).
struct HurstParam {
    explicit HurstParam(double h);
    double value;
};

// Autocovariance of fractional Gaussian noise increments on a step-delta grid:
//   gamma(k) = (delta^{2H}/2) (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
// Summing gamma over an k x k block telescopes to (k*delta)^{2H}, the variance
// of the fBm value at time k*delta; tests pin that identity to 1e-9 relative.
double fgn_autocovariance(double hurst, std::uint64_t lag, double delta);

enum class FgnMethod {
    automatic,      // white_noise when H = 1/2, cholesky below the threshold, else circulant
    circulant_fft,  // exact synthesis via circulant embedding of the covariance
    cholesky,       // exact synthesis via a dense Cholesky factor (small step counts)
    white_noise,    // H = 1/2 only: independent N(0, delta) increments
};

struct FgnSample {
    std::size_t steps = 0;
    int dim = 0;
    double delta = 0.0;
    FgnMethod method = FgnMethod::automatic;     // method actually used
    std::vector<double> increments;              // steps x dim, row-major
};

// Reusable synthesis operator for fixed (H, steps, delta).  Construction does
// the heavy lifting (covariance spectrum or Cholesky factor); sample() is
// comparatively cheap, const, and safe to call from many threads.  Dimensions
// are independent streams seeded by derive_seed(seed, dim_index).
class FgnEngine {
  public:
    FgnEngine(HurstParam hurst, std::size_t steps, double delta,
              FgnMethod method = FgnMethod::automatic, std::size_t cholesky_threshold = 2048,
              double eigenvalue_tol = 1e-12);
    ~FgnEngine();
    FgnEngine(FgnEngine&&) noexcept;
    FgnEngine& operator=(FgnEngine&&) noexcept;
    FgnEngine(const FgnEngine&) = delete;
    FgnEngine& operator=(const FgnEngine&) = delete;

    FgnSample sample(int dim, std::uint64_t seed) const;

    double hurst() const;
    std::size_t steps() const;
    double delta() const;
    FgnMethod method() const;  // resolved method, never automatic
    // Smallest circulant eigenvalue before clamping (circulant method only;
    // NaN otherwise).  Diagnostic for the embedding nonnegativity margin.
    double min_embedding_eigenvalue() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around FgnEngine.
FgnSample generate_fgn(HurstParam hurst, std::size_t steps, double delta, int dim,
                       std::uint64_t seed, FgnMethod method = FgnMethod::automatic);

// Cumulative sums: (steps+1) x dim path of fBm values starting at zero.
std::vector<double> cumulate_to_fbm(const FgnSample& sample);

}  // namespace fracdens
