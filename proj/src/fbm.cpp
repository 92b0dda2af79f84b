#include "shclab/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>

namespace shclab {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double FbmGenerator::autocovariance(long k, double hurst) {
    const double h2 = 2.0 * hurst;
    const double a = std::abs(static_cast<double>(k));
    return 0.5 * (std::pow(a + 1.0, h2) - 2.0 * std::pow(a, h2) + std::pow(std::abs(a - 1.0), h2));
}

FbmGenerator::FbmGenerator(int n, double hurst) : n_(n), hurst_(hurst) {
    if (n < 1) throw std::invalid_argument("fbm grid needs at least one step");
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
    const int m = 2 * n;
    std::vector<std::complex<double>> row(m), eig(m);
    for (int k = 0; k <= n; ++k) row[k] = autocovariance(k, hurst);
    for (int k = 1; k < n; ++k) row[m - k] = autocovariance(k, hurst);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto* in = reinterpret_cast<fftw_complex*>(row.data());
        auto* out = reinterpret_cast<fftw_complex*>(eig.data());
        fftw_plan p = fftw_plan_dft_1d(m, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    double lam_max = 0.0, lam_min = 0.0;
    for (const auto& e : eig) {
        lam_max = std::max(lam_max, e.real());
        lam_min = std::min(lam_min, e.real());
    }
    if (lam_min < -1e-10 * lam_max) {
        std::fprintf(stderr, "warning: circulant embedding not positive (min eigenvalue %.3g), using Cholesky\n",
                     lam_min);
        cholesky_ = true;
        Eigen::MatrixXd cov(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) cov(i, j) = autocovariance(i - j, hurst);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw std::runtime_error("fGn covariance is not positive definite");
        const Eigen::MatrixXd L = llt.matrixL();
        chol_.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) chol_[static_cast<std::size_t>(i) * n + j] = L(i, j);
        return;
    }
    sqrt_eig_.resize(m);
    for (int k = 0; k < m; ++k) sqrt_eig_[k] = std::sqrt(std::max(0.0, eig[k].real()) / m);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(row.data()),
                             reinterpret_cast<fftw_complex*>(eig.data()), FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
}

FbmGenerator::~FbmGenerator() {
    if (plan_) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

void FbmGenerator::sample_pair(RngStream& rng, std::vector<std::complex<double>>& in,
                               std::vector<std::complex<double>>& out, double* a, double* b) const {
    const int n = n_;
    if (cholesky_) {
        in.resize(n);
        for (int i = 0; i < n; ++i) in[i] = {rng.normal(), rng.normal()};
        for (int i = 0; i < n; ++i) {
            double sa = 0.0, sb = 0.0;
            const double* row = chol_.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j <= i; ++j) {
                sa += row[j] * in[j].real();
                sb += row[j] * in[j].imag();
            }
            a[i] = sa;
            b[i] = sb;
        }
        return;
    }
    const int m = 2 * n;
    in.resize(m);
    out.resize(m);
    for (int k = 0; k < m; ++k) {
        const double z1 = rng.normal(), z2 = rng.normal();
        in[k] = {sqrt_eig_[k] * z1, sqrt_eig_[k] * z2};
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    for (int k = 0; k < n; ++k) {
        a[k] = out[k].real();
        b[k] = out[k].imag();
    }
}

}  // namespace shclab
