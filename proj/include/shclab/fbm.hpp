#pragma once

#include <complex>
#include <vector>

#include "shclab/rng.hpp"

namespace shclab {

/// Fractional Gaussian noise on n unit steps with Hurst index H.
/// Davies-Harte circulant embedding; one complex FFT of size 2n yields two
/// independent sequences. Falls back to a Cholesky factor of the Toeplitz
/// covariance when the embedding has negative eigenvalues.
class FbmGenerator {
  public:
    FbmGenerator(int n, double hurst);
    ~FbmGenerator();
    FbmGenerator(const FbmGenerator&) = delete;
    FbmGenerator& operator=(const FbmGenerator&) = delete;

    int n() const { return n_; }
    double hurst() const { return hurst_; }
    bool uses_cholesky() const { return cholesky_; }

    /// Writes two independent noise sequences of length n each into a and b.
    /// in/out are scratch buffers of size 2n.
    void sample_pair(RngStream& rng, std::vector<std::complex<double>>& in,
                     std::vector<std::complex<double>>& out, double* a, double* b) const;

    /// Autocovariance of unit-step fGn at lag k.
    static double autocovariance(long k, double hurst);

  private:
    int n_;
    double hurst_;
    bool cholesky_ = false;
    std::vector<double> sqrt_eig_;  // sqrt(lambda_k / 2n)
    std::vector<double> chol_;      // row-major lower factor
    void* plan_ = nullptr;
};

}  // namespace shclab
