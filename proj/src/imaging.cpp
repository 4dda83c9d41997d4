#include "fdm/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::imaging {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Compression constant of the intensity ramp. The dB-like ramp keeps weak
// time-frequency structure (harmonics, transients) visible after the
// downstream half-range binarization; the value is version-pinned because
// classifier inputs must be reproducible.
constexpr double kIntensityCompression = 700.0;

// Piecewise-linear heat map over a log-compressed intensity ramp. The
// composite map is strictly monotone in scalogram energy and its luminosity
// 0.299R + 0.587G + 0.114B preserves energy order.
void heat_rgb(double u, double& r, double& g, double& b) {
    const double v =
        std::log1p(kIntensityCompression * u) / std::log1p(kIntensityCompression);
    r = 255.0 * clamp01(3.0 * v);
    g = 255.0 * clamp01(3.0 * v - 1.0);
    b = 255.0 * clamp01(3.0 * v - 2.0);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw std::runtime_error("stack file: truncated header");
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

}  // namespace

int channels_from_kappa(double kappa, double fs) {
    if (!(kappa > 0.0) || !(fs > 0.0)) {
        throw std::invalid_argument("channels_from_kappa: kappa and fs must be positive");
    }
    const int c = static_cast<int>(std::lround(kappa * fs));
    if (c < 1) throw std::invalid_argument("channels_from_kappa: resolves to zero channels");
    return c;
}

RgbFrame colorize(const wavelet::Scalogram& sc) {
    RgbFrame img;
    img.frame_index = sc.frame_index;
    img.rows = sc.rows;
    img.cols = sc.cols;
    img.pixels.resize(sc.values.size() * 3);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : sc.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < sc.values.size(); ++i) {
        const double v = span > 0.0 ? (sc.values[i] - lo) / span : 0.0;
        heat_rgb(v, img.pixels[i * 3], img.pixels[i * 3 + 1], img.pixels[i * 3 + 2]);
    }
    return img;
}

GrayFrame to_grayscale(const RgbFrame& img) {
    GrayFrame g;
    g.frame_index = img.frame_index;
    g.rows = img.rows;
    g.cols = img.cols;
    g.pixels.resize(static_cast<std::size_t>(img.rows) * img.cols);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        g.pixels[i] = 0.299 * img.pixels[i * 3] + 0.587 * img.pixels[i * 3 + 1] +
                      0.114 * img.pixels[i * 3 + 2];
    }
    return g;
}

std::vector<MultiChannelImage> stack_channels(const std::vector<GrayFrame>& frames, int c_prime) {
    if (c_prime < 1) throw std::invalid_argument("stack_channels: cPrime must be >= 1");
    if (frames.size() < static_cast<std::size_t>(c_prime)) {
        throw std::invalid_argument("stack_channels: fewer frames than cPrime");
    }
    const int rows = frames.front().rows;
    const int cols = frames.front().cols;
    for (const auto& f : frames) {
        if (f.rows != rows || f.cols != cols) {
            throw std::invalid_argument("stack_channels: inconsistent frame dimensions");
        }
    }
    std::vector<MultiChannelImage> out;
    out.reserve(frames.size() - static_cast<std::size_t>(c_prime) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(c_prime) <= frames.size(); ++i) {
        MultiChannelImage m;
        m.first_frame_index = frames[i].frame_index;
        m.rows = rows;
        m.cols = cols;
        m.channels = c_prime;
        m.pixels.resize(static_cast<std::size_t>(rows) * cols * c_prime);
        for (int ch = 0; ch < c_prime; ++ch) {
            const auto& src = frames[i + static_cast<std::size_t>(ch)];
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    m.pixels[(static_cast<std::size_t>(r) * cols + c) * c_prime + ch] =
                        src.at(r, c);
                }
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

ScalogramStack resize(const MultiChannelImage& img, int zeta) {
    if (zeta < 1) throw std::invalid_argument("resize: zeta must be >= 1");
    ScalogramStack s;
    s.first_frame_index = img.first_frame_index;
    s.side = zeta;
    s.channels = img.channels;
    s.pixels.resize(static_cast<std::size_t>(zeta) * zeta * img.channels);
    for (int px = 0; px < zeta; ++px) {
        const int sr = static_cast<int>((static_cast<long>(px) * img.rows) / zeta);
        for (int py = 0; py < zeta; ++py) {
            const int sc = static_cast<int>((static_cast<long>(py) * img.cols) / zeta);
            for (int ch = 0; ch < img.channels; ++ch) {
                s.at(px, py, ch) = img.at(sr, sc, ch);
            }
        }
    }
    return s;
}

void write_stack_file(const std::filesystem::path& path, std::span<const ScalogramStack> stacks) {
    if (stacks.empty()) throw std::invalid_argument("write_stack_file: no stacks");
    const int side = stacks.front().side;
    const int channels = stacks.front().channels;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_u32(out, static_cast<std::uint32_t>(side));
    write_u32(out, static_cast<std::uint32_t>(side));
    write_u32(out, static_cast<std::uint32_t>(channels));
    std::vector<float> buf;
    for (const auto& s : stacks) {
        if (s.side != side || s.channels != channels) {
            throw std::invalid_argument("write_stack_file: inconsistent stack shapes");
        }
        buf.resize(s.pixels.size());
        for (std::size_t i = 0; i < s.pixels.size(); ++i) buf[i] = static_cast<float>(s.pixels[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
}

std::vector<ScalogramStack> read_stack_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::uint32_t side = read_u32(in);
    const std::uint32_t side2 = read_u32(in);
    const std::uint32_t channels = read_u32(in);
    if (side != side2) throw std::runtime_error("stack file: non-square header");
    const std::size_t per = static_cast<std::size_t>(side) * side * channels;
    std::vector<ScalogramStack> out;
    std::vector<float> buf(per);
    while (in.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(per * sizeof(float)))) {
        ScalogramStack s;
        s.side = static_cast<int>(side);
        s.channels = static_cast<int>(channels);
        s.pixels.assign(buf.begin(), buf.end());
        out.push_back(std::move(s));
    }
    if (in.gcount() != 0 && static_cast<std::size_t>(in.gcount()) != per * sizeof(float)) {
        throw std::runtime_error("stack file: truncated payload");
    }
    return out;
}

void write_stack_index(const std::filesystem::path& path, std::span<const StackIndexRow> rows,
                       const std::vector<std::string>& comments) {
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    w.row({"stackIndex", "firstFrame", "lastFrame", "label"});
    for (const auto& r : rows) {
        w.row({std::to_string(r.stack_index), std::to_string(r.first_frame),
               std::to_string(r.last_frame), std::to_string(r.label)});
    }
}

std::vector<StackIndexRow> read_stack_index(const std::filesystem::path& path) {
    const io::CsvFile f = io::read_csv_file(path);
    std::vector<StackIndexRow> rows;
    for (const auto& r : f.rows) {
        if (r.size() < 4) throw std::runtime_error("stack index: short row");
        rows.push_back({static_cast<int>(io::parse_long(r[0])), static_cast<int>(io::parse_long(r[1])),
                        static_cast<int>(io::parse_long(r[2])), static_cast<int>(io::parse_long(r[3]))});
    }
    return rows;
}

}  // namespace fdm::imaging
