#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdm/ensemble.hpp"
#include "fdm/signal.hpp"

namespace fdm::sim {

struct RobotState {
    double x1 = 0.0;  // m
    double x2 = 0.0;  // m
    double x3 = 0.0;  // rad, wrapped to (-pi, pi]
    double nu = 0.0;     // m/s
    double omega = 0.0;  // rad/s
};

struct RobotParams {
    double wheel_radius = 0.10;  // R, m
    double wheelbase = 0.50;     // O, m
    double ts = 0.05;            // sampling period, s
    double wheel_speed_max = 20.0;  // rad/s saturation
    double k_v = 1.0;   // tracking gain on distance
    double k_omega = 2.0;  // tracking gain on heading error
};

double wrap_angle(double a);

// Unicycle update: nu = R/2 (wR + wL), omega = R/O (wR - wL); the heading is
// advanced first and the new heading drives the position update.
RobotState step_robot(const RobotState& state, double omega_left, double omega_right,
                      const RobotParams& params, double dt);

// Wheel speeds realizing (nu, omega), saturated symmetrically.
std::pair<double, double> wheel_speeds(double nu, double omega, const RobotParams& params);

struct NetworkTopology {
    int robots = 4;
    std::vector<std::vector<double>> adjacency;      // alpha_ij in {0,1}, zero diagonal
    std::vector<std::array<double, 2>> bias;         // formation offsets, m

    void validate() const;
    static NetworkTopology paper_default();
};

// psi_i = sum_j alpha_ij (y_received[j->i] - y_i) + b_i. received[i][j] must
// be populated for every alpha_ij = 1.
std::vector<std::array<double, 2>> consensus_step(
    const NetworkTopology& topology, const std::vector<std::array<double, 2>>& own_measured,
    const std::vector<std::vector<std::optional<std::array<double, 2>>>>& received);

struct LinkTarget {
    enum class Kind { none, sensor_to_controller, inter_robot };
    Kind kind = Kind::none;
    int robot = 0;  // attacked subsystem (Scenario I) or receiver i (Scenario II)
    int from = 0;   // sender j for inter-robot links

    static LinkTarget none_link() { return {}; }
    static LinkTarget sensor(int robot) { return {Kind::sensor_to_controller, robot, 0}; }
    static LinkTarget link(int from, int to) { return {Kind::inter_robot, to, from}; }
};

// Adds the attack value on the targeted link only; other paths untouched.
double inject_scenario(const LinkTarget& link, const LinkTarget& active,
                       const signal::AttackSignal& atk, double t, double clean);

struct ScenarioConfig {
    RobotParams robot;
    NetworkTopology topology = NetworkTopology::paper_default();
    std::vector<std::array<double, 2>> initial_positions;  // defaults spread near (40,45)
    std::array<double, 2> destination{4.0, 7.0};
    double cruise_speed = 1.5;  // leader guidance speed, m/s
    double duration = 15.0;     // s
    LinkTarget attack_link = LinkTarget::none_link();
    signal::AttackSignal attack;
    // Mitigation wraps the X and Y channels of the attacked link when set.
    const ensemble::MitigationPipeline* mitigation = nullptr;

    static ScenarioConfig paper_default();
};

struct FormationLog {
    double ts = 0.0;
    int robots = 0;
    std::vector<double> times;
    // trajectories[i][step] is robot i's state
    std::vector<std::vector<RobotState>> trajectories;
    std::vector<std::vector<std::array<double, 2>>> references;  // v_t per robot
    std::vector<ensemble::MitigationRecord> mitigation_x, mitigation_y;

    std::vector<double> channel(int robot, int axis) const;  // measured positions
};

FormationLog run_formation(const ScenarioConfig& config);

void write_trajectory_csv(const std::filesystem::path& path, const FormationLog& log,
                          const LinkTarget& attacked, bool mitigated,
                          const std::vector<std::string>& comments = {});

// RMSE over time of the position deviation ||p(t) - p_ref(t)|| for one robot.
double trajectory_deviation_rmse(const FormationLog& run, const FormationLog& reference,
                                 int robot);

}  // namespace fdm::sim
