#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fdm::detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 FFT. Length must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

inline void fft_forward(std::vector<std::complex<double>>& a) { fft(a, false); }
inline void fft_inverse(std::vector<std::complex<double>>& a) { fft(a, true); }

}  // namespace fdm::detail
