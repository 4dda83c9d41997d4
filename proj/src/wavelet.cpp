#include "fdm/wavelet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fdm/detail/fft.hpp"
#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::wavelet {

double MorseParams::peak_omega() const {
    return std::pow(beta / gamma, 1.0 / gamma);
}

MorseParams MorseParams::standard(double beta, double gamma) {
    if (!(beta > 0.0) || !(gamma > 0.0)) {
        throw std::invalid_argument("MorseParams: beta and gamma must be positive");
    }
    MorseParams p;
    p.beta = beta;
    p.gamma = gamma;
    // peak value of w^beta exp(-w^gamma) is exp(r ln r - r) with r = beta/gamma
    const double r = beta / gamma;
    p.norm_const = 2.0 * std::exp(r - r * std::log(r));
    return p;
}

double morse_wavelet_freq(const MorseParams& params, double omega) {
    if (!std::isfinite(omega)) throw std::invalid_argument("morse_wavelet_freq: non-finite omega");
    if (omega <= 0.0) return 0.0;
    // evaluate in log space to survive large beta
    const double lg =
        std::log(params.norm_const) + params.beta * std::log(omega) - std::pow(omega, params.gamma);
    return std::exp(lg);
}

ScaleGrid build_scale_grid(double fs, int num_scales, const MorseParams& params, int frame_len) {
    if (num_scales < 1) throw std::invalid_argument("build_scale_grid: need at least one scale");
    if (!(fs > 0.0)) throw std::invalid_argument("build_scale_grid: fs must be positive");
    if (frame_len < 2) throw std::invalid_argument("build_scale_grid: frame length must be >= 2");

    const double wp = params.peak_omega();
    // scale with peak response at frequency f (Hz): s = wp * fs / (2 pi f)
    const double f_max = fs / 2.0;                        // Nyquist
    const double f_min = fs / static_cast<double>(frame_len);  // one cycle per frame
    ScaleGrid g;
    g.fs = fs;
    g.s_min = wp * fs / (2.0 * std::numbers::pi * f_max);
    g.s_max = wp * fs / (2.0 * std::numbers::pi * f_min);

    if (num_scales == 1) {
        g.scales.push_back(std::sqrt(g.s_min * g.s_max));
    } else {
        const double ratio = g.s_max / g.s_min;
        for (int i = 0; i < num_scales; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(num_scales - 1);
            g.scales.push_back(g.s_min * std::pow(ratio, frac));
        }
    }
    for (double s : g.scales) {
        g.peak_freqs.push_back(wp * fs / (2.0 * std::numbers::pi * s));
    }
    return g;
}

CwtMatrix cwt_frame(const signal::Frame& frame, const ScaleGrid& grid, const MorseParams& params) {
    const int m = static_cast<int>(frame.samples.size());
    if (m < 2) throw std::invalid_argument("cwt_frame: frame length must be >= 2");
    for (double v : frame.samples) {
        if (!std::isfinite(v)) throw std::invalid_argument("cwt_frame: non-finite sample");
    }

    const std::size_t nfft = detail::next_pow2(static_cast<std::size_t>(m));
    std::vector<std::complex<double>> spectrum(nfft, {0.0, 0.0});
    for (int i = 0; i < m; ++i) spectrum[static_cast<std::size_t>(i)] = {frame.samples[i], 0.0};
    detail::fft_forward(spectrum);

    CwtMatrix out;
    out.frame_index = frame.index;
    out.rows = grid.size();
    out.cols = m;
    out.values.resize(static_cast<std::size_t>(out.rows) * m);

    std::vector<std::complex<double>> band(nfft);
    for (int si = 0; si < grid.size(); ++si) {
        const double s = grid.scales[static_cast<std::size_t>(si)];
        // positive-frequency bins only (k = 0 .. nfft/2); the rest stay zero
        band.assign(nfft, {0.0, 0.0});
        for (std::size_t k = 0; k <= nfft / 2; ++k) {
            const double omega =
                2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nfft);
            const double h = morse_wavelet_freq(params, s * omega);
            if (h != 0.0) band[k] = spectrum[k] * h;
        }
        detail::fft_inverse(band);
        for (int i = 0; i < m; ++i) {
            out.at(si, i) = band[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

Scalogram scalogram(const CwtMatrix& cwt) {
    Scalogram sc;
    sc.frame_index = cwt.frame_index;
    sc.rows = cwt.rows;
    sc.cols = cwt.cols;
    sc.values.resize(cwt.values.size());
    for (std::size_t i = 0; i < cwt.values.size(); ++i) {
        sc.values[i] = std::norm(cwt.values[i]);
    }
    return sc;
}

void write_scalogram_csv(const std::filesystem::path& path, const Scalogram& sc) {
    io::CsvWriter w(path);
    w.comment(" scalogram frame=" + std::to_string(sc.frame_index) + " rows=" +
              std::to_string(sc.rows) + " cols=" + std::to_string(sc.cols));
    for (int r = 0; r < sc.rows; ++r) {
        std::vector<std::string> cells;
        cells.reserve(static_cast<std::size_t>(sc.cols));
        for (int c = 0; c < sc.cols; ++c) cells.push_back(io::format_double(sc.at(r, c)));
        w.row(cells);
    }
}

}  // namespace fdm::wavelet
