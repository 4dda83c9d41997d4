#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include "fdm/signal.hpp"

namespace fdm::wavelet {

// Analytic Morse wavelet, defined in the frequency domain as
// U(w) * a * w^beta * exp(-w^gamma).
struct MorseParams {
    double beta = 20.0;   // time-domain decay
    double gamma = 3.0;   // frequency-domain decay
    double norm_const = 0.0;  // a_{beta,gamma}

    // Frequency (rad/sample) of the wavelet's magnitude peak: (beta/gamma)^(1/gamma).
    double peak_omega() const;

    // norm_const chosen so the frequency-domain peak equals 2 (analytic
    // unit-amplitude convention); any positive constant only rescales
    // scalograms uniformly.
    static MorseParams standard(double beta = 20.0, double gamma = 3.0);
};

double morse_wavelet_freq(const MorseParams& params, double omega);

struct ScaleGrid {
    std::vector<double> scales;      // strictly ascending
    std::vector<double> peak_freqs;  // Hz, aligned with scales (descending)
    double s_min = 0.0, s_max = 0.0;
    double fs = 0.0;

    int size() const { return static_cast<int>(scales.size()); }
};

// Logarithmically spaced scales whose peak frequencies run from one cycle per
// frame up to Nyquist.
ScaleGrid build_scale_grid(double fs, int num_scales, const MorseParams& params, int frame_len);

struct CwtMatrix {
    int frame_index = 0;
    int rows = 0;  // scales
    int cols = 0;  // time samples (frame length)
    std::vector<std::complex<double>> values;  // row-major

    std::complex<double>& at(int s, int m) { return values[static_cast<std::size_t>(s) * cols + m]; }
    const std::complex<double>& at(int s, int m) const {
        return values[static_cast<std::size_t>(s) * cols + m];
    }
};

struct Scalogram {
    int frame_index = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major, nonnegative

    double& at(int s, int m) { return values[static_cast<std::size_t>(s) * cols + m]; }
    double at(int s, int m) const { return values[static_cast<std::size_t>(s) * cols + m]; }
};

// Filter-bank CWT: the frame is zero-padded to the next power of two, its DFT
// multiplied per scale by the Morse response at s*omega (analytic: negative
// frequencies zeroed), and inverse-transformed.
CwtMatrix cwt_frame(const signal::Frame& frame, const ScaleGrid& grid, const MorseParams& params);

// Elementwise squared magnitude of the CWT matrix.
Scalogram scalogram(const CwtMatrix& cwt);

// CSV matrix export (rows = scales, columns = time) for golden-file tests.
void write_scalogram_csv(const std::filesystem::path& path, const Scalogram& sc);

}  // namespace fdm::wavelet
