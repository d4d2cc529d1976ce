#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "comap/config.hpp"

namespace comap {

namespace presetdetail {

// Rectangular patrol loop with a continuously rotating heading: 8 waypoints
// (corners and edge midpoints), one full turn per circuit.
inline TrajectorySpec patrol_loop(double x0, double y0, double x1, double y1,
                                  int loops) {
    TrajectorySpec traj;
    traj.loops = loops;
    const double xm = 0.5 * (x0 + x1);
    const double ym = 0.5 * (y0 + y1);
    const Vec2 ring[8] = {{x0, y0}, {xm, y0}, {x1, y0}, {x1, ym},
                          {x1, y1}, {xm, y1}, {x0, y1}, {x0, ym}};
    for (int k = 0; k < 8; ++k) {
        traj.waypoints.push_back({ring[k], k * std::numbers::pi / 4.0});
    }
    return traj;
}

}  // namespace presetdetail

// Two agents, one per room half, connected through a doorway; maps are
// exchanged only every 30 iterations (~3% of rounds).
inline ExperimentConfig preset_split_room() {
    ExperimentConfig cfg;
    cfg.scene.bounds = {{0.0, 0.0}, {1.0, 1.0}};
    cfg.scene.walls = true;
    cfg.scene.shapes = {
        Rect{{0.5, 0.175}, {0.02, 0.175}},  // divider below the doorway
        Rect{{0.5, 0.825}, {0.02, 0.175}},  // divider above the doorway
        Circle{{0.25, 0.65}, 0.08},
        Rect{{0.75, 0.3}, {0.06, 0.06}},
    };
    cfg.agents = {presetdetail::patrol_loop(0.12, 0.15, 0.36, 0.85, 3),
                  presetdetail::patrol_loop(0.64, 0.15, 0.88, 0.85, 3)};
    cfg.comm.graph = GraphKind::Full;
    cfg.comm.period = 30;
    cfg.comm.success_rate = 1.0;
    cfg.run.out_dir = "out/split_room";
    return cfg;
}

// Three agents patrolling horizontal bands of one room over a full graph;
// intended to be swept over message success rates.
inline ExperimentConfig preset_success_sweep() {
    ExperimentConfig cfg;
    cfg.scene.bounds = {{0.0, 0.0}, {1.0, 1.0}};
    cfg.scene.walls = true;
    cfg.scene.shapes = {
        Circle{{0.35, 0.35}, 0.045},
        Rect{{0.65, 0.65}, {0.08, 0.035}},
    };
    cfg.agents = {presetdetail::patrol_loop(0.12, 0.13, 0.88, 0.27, 3),
                  presetdetail::patrol_loop(0.12, 0.43, 0.88, 0.57, 3),
                  presetdetail::patrol_loop(0.12, 0.73, 0.88, 0.87, 3)};
    cfg.comm.graph = GraphKind::Full;
    cfg.comm.success_rate = 0.5;
    cfg.sweep_success_rates = {1.0, 0.8, 0.5, 0.2};
    cfg.run.out_dir = "out/success_sweep";
    return cfg;
}

// Chain-connected agents, one vertical strip each, at 50% message success.
// The agent count is meant to be overridden (4, 5, 6, ...).
inline ExperimentConfig preset_agent_scaling(int n_agents = 4) {
    ExperimentConfig cfg;
    cfg.scene.bounds = {{0.0, 0.0}, {1.0, 1.0}};
    cfg.scene.walls = true;
    cfg.agents.clear();
    for (int k = 0; k < n_agents; ++k) {
        const double x0 = static_cast<double>(k) / n_agents + 0.04;
        const double x1 = static_cast<double>(k + 1) / n_agents - 0.04;
        cfg.agents.push_back(presetdetail::patrol_loop(x0, 0.1, x1, 0.9, 3));
    }
    cfg.comm.graph = GraphKind::Chain;
    cfg.comm.success_rate = 0.5;
    cfg.run.out_dir = "out/agent_scaling";
    return cfg;
}

inline std::optional<ExperimentConfig> preset(const std::string& name) {
    if (name == "split-room") return preset_split_room();
    if (name == "success-sweep") return preset_success_sweep();
    if (name == "agent-scaling") return preset_agent_scaling();
    return std::nullopt;
}

inline std::vector<std::string> preset_names() {
    return {"split-room", "success-sweep", "agent-scaling"};
}

}  // namespace comap
