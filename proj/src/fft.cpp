#include "radocc/fft.hpp"

#include "radocc/errors.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace radocc {

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0) {
        throw ConfigError("FFT size " + std::to_string(n) + " is not a power of two");
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
    twiddle_[0] = {1.0, 0.0};
    bit_reverse_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        }
        bit_reverse_[i] = r;
    }
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) {
        throw ConfigError("FFT input length " + std::to_string(data.size()) +
                          " does not match plan size " + std::to_string(n_));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t r = bit_reverse_[i];
        if (r > i) std::swap(data[i], data[r]);
    }
    // Real arithmetic keeps the butterflies free of the libgcc NaN-recovery path.
    auto* d = reinterpret_cast<double*>(data.data());
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const auto& w = twiddle_[k * stride];
                const std::size_t a = 2 * (start + k);
                const std::size_t b = 2 * (start + k + half);
                const double vr = d[b] * w.real() - d[b + 1] * w.imag();
                const double vi = d[b] * w.imag() + d[b + 1] * w.real();
                const double ur = d[a];
                const double ui = d[a + 1];
                d[a] = ur + vr;
                d[a + 1] = ui + vi;
                d[b] = ur - vr;
                d[b + 1] = ui - vi;
            }
        }
    }
}

}  // namespace radocc
