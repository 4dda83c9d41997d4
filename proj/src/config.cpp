#include "fdm/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fdm/io/num.hpp"

namespace fdm::config {

namespace {

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
Field make_field(T RunConfig::* member) {
    return Field{
        [member](const RunConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
                return io::format_double(c.*member);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return c.*member;
            } else {
                return std::to_string(c.*member);
            }
        },
        [member](RunConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, double>) {
                c.*member = io::parse_double(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                c.*member = v;
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                c.*member = static_cast<std::uint64_t>(std::stoull(v));
            } else if constexpr (std::is_same_v<T, std::size_t>) {
                c.*member = static_cast<std::size_t>(std::stoull(v));
            } else {
                c.*member = static_cast<T>(io::parse_long(v));
            }
        }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"preset", make_field(&RunConfig::preset)},
        {"seed", make_field(&RunConfig::seed)},
        {"jobs", make_field(&RunConfig::jobs)},
        {"samples", make_field(&RunConfig::samples)},
        {"fs", make_field(&RunConfig::fs)},
        {"partitions", make_field(&RunConfig::partitions)},
        {"components", make_field(&RunConfig::components)},
        {"freq_min", make_field(&RunConfig::freq_min)},
        {"freq_max", make_field(&RunConfig::freq_max)},
        {"amp_min", make_field(&RunConfig::amp_min)},
        {"amp_max", make_field(&RunConfig::amp_max)},
        {"frame_len", make_field(&RunConfig::frame_len)},
        {"overlap", make_field(&RunConfig::overlap)},
        {"lambda", make_field(&RunConfig::lambda)},
        {"scales", make_field(&RunConfig::scales)},
        {"beta", make_field(&RunConfig::beta)},
        {"gamma", make_field(&RunConfig::gamma)},
        {"zeta", make_field(&RunConfig::zeta)},
        {"kappa", make_field(&RunConfig::kappa)},
        {"c_prime", make_field(&RunConfig::c_prime)},
        {"dim", make_field(&RunConfig::dim)},
        {"delay", make_field(&RunConfig::delay)},
        {"h_min", make_field(&RunConfig::h_min)},
        {"h_max", make_field(&RunConfig::h_max)},
        {"folds", make_field(&RunConfig::folds)},
        {"rho", make_field(&RunConfig::rho)},
        {"entropy_margin", make_field(&RunConfig::entropy_margin)},
        {"epsilon", make_field(&RunConfig::epsilon)},
        {"tau_c", make_field(&RunConfig::tau_c)},
        {"lookback", make_field(&RunConfig::lookback)},
        {"horizon", make_field(&RunConfig::horizon)},
        {"n_models", make_field(&RunConfig::n_models)},
        {"hidden", make_field(&RunConfig::hidden)},
        {"conv_width", make_field(&RunConfig::conv_width)},
        {"stack_stride", make_field(&RunConfig::stack_stride)},
        {"classifier_epochs", make_field(&RunConfig::classifier_epochs)},
        {"forecaster_epochs", make_field(&RunConfig::forecaster_epochs)},
        {"sim_ts", make_field(&RunConfig::sim_ts)},
        {"sim_duration", make_field(&RunConfig::sim_duration)},
        {"wheel_radius", make_field(&RunConfig::wheel_radius)},
        {"wheelbase", make_field(&RunConfig::wheelbase)},
        {"k_v", make_field(&RunConfig::k_v)},
        {"k_omega", make_field(&RunConfig::k_omega)},
        {"dest_x", make_field(&RunConfig::dest_x)},
        {"dest_y", make_field(&RunConfig::dest_y)},
        {"sim_frame_len", make_field(&RunConfig::sim_frame_len)},
        {"sim_overlap", make_field(&RunConfig::sim_overlap)},
        {"sim_dead_band", make_field(&RunConfig::sim_dead_band)},
        {"attack_amplitude", make_field(&RunConfig::attack_amplitude)},
        {"attack_f0", make_field(&RunConfig::attack_f0)},
        {"attack_f1", make_field(&RunConfig::attack_f1)},
        {"attack_start", make_field(&RunConfig::attack_start)},
        {"attack_end", make_field(&RunConfig::attack_end)},
    };
    return table;
}

}  // namespace

int RunConfig::levels() const {
    const int r = static_cast<int>(std::floor(rho * n_models));
    if (r < 2) throw std::invalid_argument("RunConfig: rho*n_models must give at least 2 levels");
    return r;
}

pipeline::StageOneParams RunConfig::stage1() const {
    pipeline::StageOneParams p;
    p.framing = signal::FrameConfig{frame_len, overlap, lambda};
    p.morse = wavelet::MorseParams::standard(beta, gamma);
    p.scales = scales;
    p.zeta = zeta;
    p.c_prime = c_prime;
    p.fs = fs;
    return p;
}

pipeline::StageOneParams RunConfig::sim_stage1() const {
    pipeline::StageOneParams p = stage1();
    p.framing = signal::FrameConfig{sim_frame_len, sim_overlap, 0.0};
    p.fs = 1.0 / sim_ts;
    return p;
}

pipeline::EntropyParams RunConfig::entropy_params() const {
    pipeline::EntropyParams p;
    p.dim = dim;
    p.delay = delay;
    p.h_min = h_min;
    p.h_max = h_max;
    p.folds = folds;
    return p;
}

std::string RunConfig::canonical_string() const {
    std::ostringstream os;
    for (const auto& [key, field] : fields()) os << key << '=' << field.get(*this) << '\n';
    return os.str();
}

std::string RunConfig::hash() const {
    std::ostringstream os;
    os << std::hex << io::fnv1a(canonical_string());
    return os.str();
}

std::vector<std::string> RunConfig::stamp() const {
    return {" config=" + hash() + " seed=" + std::to_string(seed)};
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "desk") {
        c.preset = "desk";
        return c;
    }
    if (name == "paper") {
        c.preset = "paper";
        c.scales = 92;
        c.zeta = 227;
        c.kappa = 0.08;
        c.c_prime = 8;
        c.dim = 4;
        c.delay = 1;
        c.h_min = 2;
        c.h_max = 64;
        c.folds = 10;
        c.stack_stride = 1;
        c.hidden = 32;
        c.conv_width = 16;
        return c;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (expected paper or desk)");
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    // first pass: pick the preset, then layer overrides in file order
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::string preset_name = "desk";
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: expected key=value, got '" + line + "'");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "preset") preset_name = value;
        pairs.emplace_back(std::move(key), std::move(value));
    }
    RunConfig cfg = preset(preset_name);
    for (const auto& [key, value] : pairs) apply_override(cfg, key, value);
    return cfg;
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config " + path.string());
    out << "# run configuration (hash " << cfg.hash() << ")\n" << cfg.canonical_string();
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

}  // namespace fdm::config
