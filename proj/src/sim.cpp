#include "fdm/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::sim {

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

RobotState step_robot(const RobotState& state, double omega_left, double omega_right,
                      const RobotParams& params, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_robot: dt must be positive");
    if (!std::isfinite(omega_left) || !std::isfinite(omega_right)) {
        throw std::invalid_argument("step_robot: non-finite wheel speeds");
    }
    RobotState next = state;
    next.nu = 0.5 * params.wheel_radius * (omega_right + omega_left);
    next.omega = params.wheel_radius / params.wheelbase * (omega_right - omega_left);
    next.x3 = wrap_angle(state.x3 + next.omega * dt);
    // the updated heading drives the translation
    next.x1 = state.x1 + next.nu * std::cos(next.x3) * dt;
    next.x2 = state.x2 + next.nu * std::sin(next.x3) * dt;
    return next;
}

std::pair<double, double> wheel_speeds(double nu, double omega, const RobotParams& params) {
    double wl = (nu - omega * params.wheelbase / 2.0) / params.wheel_radius;
    double wr = (nu + omega * params.wheelbase / 2.0) / params.wheel_radius;
    // scale both wheels together so saturation preserves the commanded curvature
    const double peak = std::max(std::abs(wl), std::abs(wr));
    if (peak > params.wheel_speed_max) {
        const double s = params.wheel_speed_max / peak;
        wl *= s;
        wr *= s;
    }
    return {wl, wr};
}

void NetworkTopology::validate() const {
    if (robots < 1) throw std::invalid_argument("NetworkTopology: need at least one robot");
    if (adjacency.size() != static_cast<std::size_t>(robots) ||
        bias.size() != static_cast<std::size_t>(robots)) {
        throw std::invalid_argument("NetworkTopology: matrix sizes do not match robot count");
    }
    for (int i = 0; i < robots; ++i) {
        if (adjacency[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(robots)) {
            throw std::invalid_argument("NetworkTopology: adjacency row size mismatch");
        }
        if (adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] != 0.0) {
            throw std::invalid_argument("NetworkTopology: nonzero diagonal");
        }
    }
}

NetworkTopology NetworkTopology::paper_default() {
    NetworkTopology t;
    t.robots = 4;
    t.adjacency = {{0, 0, 0, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}};
    t.bias = {{{0.0, 0.0}}, {{3.0, 0.0}}, {{3.0, 3.0}}, {{0.0, 3.0}}};
    return t;
}

std::vector<std::array<double, 2>> consensus_step(
    const NetworkTopology& topology, const std::vector<std::array<double, 2>>& own_measured,
    const std::vector<std::vector<std::optional<std::array<double, 2>>>>& received) {
    topology.validate();
    const int n = topology.robots;
    if (own_measured.size() != static_cast<std::size_t>(n) ||
        received.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("consensus_step: state sizes do not match the topology");
    }
    std::vector<std::array<double, 2>> psi(static_cast<std::size_t>(n), {0.0, 0.0});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (topology.adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 0.0) {
                continue;
            }
            const auto& y_ji = received[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!y_ji) {
                throw std::invalid_argument("consensus_step: missing link data " +
                                            std::to_string(j + 1) + "->" + std::to_string(i + 1));
            }
            for (int a = 0; a < 2; ++a) {
                psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] +=
                    (*y_ji)[static_cast<std::size_t>(a)] -
                    own_measured[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
            }
        }
        for (int a = 0; a < 2; ++a) {
            psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] +=
                topology.bias[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        }
    }
    return psi;
}

double inject_scenario(const LinkTarget& link, const LinkTarget& active,
                       const signal::AttackSignal& atk, double t, double clean) {
    if (link.kind == LinkTarget::Kind::none || active.kind == LinkTarget::Kind::none) return clean;
    if (link.kind != active.kind) return clean;
    if (link.robot != active.robot) return clean;
    if (link.kind == LinkTarget::Kind::inter_robot && link.from != active.from) return clean;
    return clean + atk.value_at(t);
}

ScenarioConfig ScenarioConfig::paper_default() {
    ScenarioConfig c;
    c.initial_positions = {{{40.0, 45.0}}, {{41.0, 44.0}}, {{39.0, 44.0}}, {{41.0, 46.0}}};
    return c;
}

std::vector<double> FormationLog::channel(int robot, int axis) const {
    std::vector<double> out;
    out.reserve(trajectories[static_cast<std::size_t>(robot)].size());
    for (const auto& s : trajectories[static_cast<std::size_t>(robot)]) {
        out.push_back(axis == 0 ? s.x1 : s.x2);
    }
    return out;
}

FormationLog run_formation(const ScenarioConfig& config) {
    config.topology.validate();
    const int n = config.topology.robots;
    if (config.initial_positions.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("run_formation: initial positions do not match robot count");
    }
    if (config.attack_link.kind != LinkTarget::Kind::none) {
        const int r = config.attack_link.robot;
        if (r < 0 || r >= n) throw std::invalid_argument("run_formation: unknown attacked robot");
        if (config.attack_link.kind == LinkTarget::Kind::inter_robot) {
            const int f = config.attack_link.from;
            if (f < 0 || f >= n ||
                config.topology.adjacency[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)] ==
                    0.0) {
                throw std::invalid_argument("run_formation: attacked link is not in the topology");
            }
        }
    }

    const double dt = config.robot.ts;
    const long steps = static_cast<long>(std::llround(config.duration / dt));
    if (steps < 1) throw std::invalid_argument("run_formation: duration shorter than one step");

    std::vector<RobotState> states(static_cast<std::size_t>(n));
    std::vector<std::array<double, 2>> refs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        states[static_cast<std::size_t>(i)].x1 = config.initial_positions[static_cast<std::size_t>(i)][0];
        states[static_cast<std::size_t>(i)].x2 = config.initial_positions[static_cast<std::size_t>(i)][1];
        refs[static_cast<std::size_t>(i)] = config.initial_positions[static_cast<std::size_t>(i)];
    }
    // leader guidance: a constant-speed straight line toward the destination
    const std::array<double, 2> start = config.initial_positions[0];
    const double mission_len = std::hypot(config.destination[0] - start[0],
                                          config.destination[1] - start[1]);
    auto leader_waypoint = [&](double t) {
        if (mission_len < 1e-12) return config.destination;
        const double frac = std::min(1.0, config.cruise_speed * t / mission_len);
        return std::array<double, 2>{start[0] + frac * (config.destination[0] - start[0]),
                                     start[1] + frac * (config.destination[1] - start[1])};
    };

    // per-channel mitigation of the attacked link (X and Y independently)
    std::optional<ensemble::StageOneSelector> selector_x, selector_y;
    std::optional<ensemble::MitigationChannel> channel_x, channel_y;
    const bool mitigate = config.mitigation != nullptr &&
                          config.attack_link.kind != LinkTarget::Kind::none;
    if (mitigate) {
        const auto& p = *config.mitigation;
        if (p.clf == nullptr || p.table == nullptr || p.models.empty()) {
            throw std::invalid_argument("run_formation: incomplete mitigation pipeline");
        }
        selector_x.emplace(*p.clf, *p.table);
        selector_y.emplace(*p.clf, *p.table);
        channel_x.emplace(p.stage1, *selector_x, p.models, p.lookback, p.horizon, p.dead_band);
        channel_y.emplace(p.stage1, *selector_y, p.models, p.lookback, p.horizon, p.dead_band);
    }

    FormationLog log;
    log.ts = dt;
    log.robots = n;
    log.trajectories.assign(static_cast<std::size_t>(n), {});
    log.references.assign(static_cast<std::size_t>(n), {});

    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        log.times.push_back(t);
        for (int i = 0; i < n; ++i) {
            log.trajectories[static_cast<std::size_t>(i)].push_back(states[static_cast<std::size_t>(i)]);
            log.references[static_cast<std::size_t>(i)].push_back(refs[static_cast<std::size_t>(i)]);
        }

        // measurements and the per-subsystem controller-side view
        std::vector<std::array<double, 2>> clean(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            clean[static_cast<std::size_t>(i)] = {states[static_cast<std::size_t>(i)].x1,
                                                  states[static_cast<std::size_t>(i)].x2};
        }
        std::vector<std::array<double, 2>> controller_view = clean;
        if (config.attack_link.kind == LinkTarget::Kind::sensor_to_controller) {
            const int a = config.attack_link.robot;
            double x = inject_scenario(config.attack_link, config.attack_link, config.attack, t,
                                       clean[static_cast<std::size_t>(a)][0]);
            double y = clean[static_cast<std::size_t>(a)][1];
            if (mitigate) {
                auto rx = channel_x->push(t, x);
                auto ry = channel_y->push(t, y);
                log.mitigation_x.push_back(rx);
                log.mitigation_y.push_back(ry);
                x = rx.y_breve;
                y = ry.y_breve;
            }
            controller_view[static_cast<std::size_t>(a)] = {x, y};
        }

        // communicated variables; Scenario II corrupts one directed link
        std::vector<std::vector<std::optional<std::array<double, 2>>>> received(
            static_cast<std::size_t>(n),
            std::vector<std::optional<std::array<double, 2>>>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (config.topology.adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                    0.0) {
                    continue;
                }
                std::array<double, 2> y_ji = clean[static_cast<std::size_t>(j)];
                if (config.attack_link.kind == LinkTarget::Kind::inter_robot &&
                    config.attack_link.robot == i && config.attack_link.from == j) {
                    y_ji[0] = inject_scenario(config.attack_link, config.attack_link, config.attack,
                                              t, y_ji[0]);
                    if (mitigate) {
                        auto rx = channel_x->push(t, y_ji[0]);
                        auto ry = channel_y->push(t, y_ji[1]);
                        log.mitigation_x.push_back(rx);
                        log.mitigation_y.push_back(ry);
                        y_ji[0] = rx.y_breve;
                        y_ji[1] = ry.y_breve;
                    }
                }
                received[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = y_ji;
            }
        }

        // distributed reference update: the consensus term acts as a velocity
        // field around the measured position; the leader follows its mission
        // line (its adjacency row is zero, so psi[0] = bias[0])
        const auto psi = consensus_step(config.topology, controller_view, received);
        refs[0] = leader_waypoint(t + dt);
        for (int i = 1; i < n; ++i) {
            for (int a = 0; a < 2; ++a) {
                refs[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] =
                    controller_view[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] +
                    psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
            }
        }

        // local tracking controller and kinematic step
        for (int i = 0; i < n; ++i) {
            auto& s = states[static_cast<std::size_t>(i)];
            const auto& v = refs[static_cast<std::size_t>(i)];
            const auto& y = controller_view[static_cast<std::size_t>(i)];
            const double dx = v[0] - y[0];
            const double dy = v[1] - y[1];
            const double dist = std::hypot(dx, dy);
            double nu_cmd = 0.0, omega_cmd = 0.0;
            if (dist > 1e-9) {
                const double heading = std::atan2(dy, dx);
                const double err = wrap_angle(heading - s.x3);
                nu_cmd = config.robot.k_v * dist * std::max(std::cos(err), 0.0);
                omega_cmd = config.robot.k_omega * err;
            }
            const auto [wl, wr] = wheel_speeds(nu_cmd, omega_cmd, config.robot);
            s = step_robot(s, wl, wr, config.robot, dt);
            if (std::abs(s.x1) > 1e6 || std::abs(s.x2) > 1e6) {
                throw std::runtime_error("run_formation: controller divergence at robot " +
                                         std::to_string(i + 1) + ", t=" + std::to_string(t));
            }
        }
    }
    return log;
}

void write_trajectory_csv(const std::filesystem::path& path, const FormationLog& log,
                          const LinkTarget& attacked, bool mitigated,
                          const std::vector<std::string>& comments) {
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    w.row({"t", "robot", "x1", "x2", "x3", "v1", "v2", "attacked", "mitigated"});
    for (std::size_t step = 0; step < log.times.size(); ++step) {
        for (int i = 0; i < log.robots; ++i) {
            const auto& s = log.trajectories[static_cast<std::size_t>(i)][step];
            const auto& v = log.references[static_cast<std::size_t>(i)][step];
            const bool is_attacked =
                attacked.kind != LinkTarget::Kind::none && attacked.robot == i;
            w.row({io::format_double(log.times[step]), std::to_string(i + 1),
                   io::format_double(s.x1), io::format_double(s.x2), io::format_double(s.x3),
                   io::format_double(v[0]), io::format_double(v[1]),
                   is_attacked ? "1" : "0", mitigated ? "1" : "0"});
        }
    }
}

double trajectory_deviation_rmse(const FormationLog& run, const FormationLog& reference,
                                 int robot) {
    const auto& a = run.trajectories.at(static_cast<std::size_t>(robot));
    const auto& b = reference.trajectories.at(static_cast<std::size_t>(robot));
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("trajectory_deviation_rmse: log length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dx = a[i].x1 - b[i].x1;
        const double dy = a[i].x2 - b[i].x2;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace fdm::sim
