#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace radocc {

/// In-place iterative radix-2 DFT, forward kernel e^{-j 2 pi k n / N},
/// unnormalized. Twiddles are precomputed once per size.
///
/// Differences of bit-identical inputs are formed exactly, so a constant
/// input sequence produces exact zeros outside bin 0.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }
    void forward(std::span<std::complex<double>> data) const;

private:
    std::size_t n_;
    std::vector<std::complex<double>> twiddle_;
    std::vector<std::size_t> bit_reverse_;
};

}  // namespace radocc
