#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "comap/consensus.hpp"
#include "comap/decoder.hpp"
#include "comap/grid.hpp"
#include "comap/network.hpp"
#include "comap/objective.hpp"
#include "comap/scene.hpp"
#include "comap/uncertainty.hpp"

namespace comap {

using json = nlohmann::json;

struct Waypoint {
    Vec2 pos;
    double heading = 0.0;
};

struct TrajectorySpec {
    std::vector<Waypoint> waypoints;
    int loops = 1;           // times the waypoint cycle is traversed over a run
    int scans_per_iter = 1;  // extra scans rotate the heading by full turns
};

struct SensorConfig {
    double fov = 1.8;
    int n_rays = 48;
    double max_range = 0.9;
    double noise_std = 0.005;
};

struct DecoderConfig {
    Decoder::Kind kind = Decoder::Kind::FixedAffine;
    uint64_t seed = 7;
};

enum class OptimizerKind { Ramen, Cadmm, Dsgd, Dsgt };

inline const char* optimizer_tag(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Ramen: return "ramen";
        case OptimizerKind::Cadmm: return "cadmm";
        case OptimizerKind::Dsgd: return "dsgd";
        case OptimizerKind::Dsgt: return "dsgt";
    }
    return "ramen";
}

inline std::optional<OptimizerKind> parse_optimizer(const std::string& tag) {
    if (tag == "ramen") return OptimizerKind::Ramen;
    if (tag == "cadmm") return OptimizerKind::Cadmm;
    if (tag == "dsgd") return OptimizerKind::Dsgd;
    if (tag == "dsgt") return OptimizerKind::Dsgt;
    return std::nullopt;
}

struct CommConfig {
    GraphKind graph = GraphKind::Full;
    double success_rate = 1.0;  // Bernoulli delivery probability (1 - drop)
    int period = 0;             // > 0 switches to periodic exchange
};

struct RunConfig {
    int64_t iterations = 600;
    int trials = 5;
    uint64_t seed = 1;
    std::string out_dir = "out";
    int metric_every = 50;
    int metric_resolution = 256;
    int contour_samples = 500;
    double completion_threshold = 0.02;
};

struct ExperimentConfig {
    Scene scene;
    std::vector<TrajectorySpec> agents;
    SensorConfig sensor;
    GridConfig grid;
    DecoderConfig decoder;
    LossConfig loss;
    OptimizerKind optimizer = OptimizerKind::Ramen;
    ConsensusConfig consensus;
    WeightBounds weights;
    CommConfig comm;
    RunConfig run;
    std::vector<double> sweep_success_rates;  // empty: single run

    int n_agents() const { return static_cast<int>(agents.size()); }
};

// ---------------------------------------------------------------------------
// JSON input. Parsing is lenient about omitted fields (defaults apply) and
// records a "path: message" entry for everything malformed.

namespace cfgdetail {

inline bool want_num(const json& j, const char* key, const std::string& path,
                     double& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return false;
    if (!j[key].is_number()) {
        errors.push_back(path + ": expected a number");
        return false;
    }
    out = j[key].get<double>();
    return true;
}

inline bool want_int(const json& j, const char* key, const std::string& path,
                     int64_t& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return false;
    if (!j[key].is_number_integer()) {
        errors.push_back(path + ": expected an integer");
        return false;
    }
    out = j[key].get<int64_t>();
    return true;
}

inline bool want_vec2(const json& j, const char* key, const std::string& path,
                      Vec2& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return false;
    const json& v = j[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        errors.push_back(path + ": expected [x, y]");
        return false;
    }
    out = {v[0].get<double>(), v[1].get<double>()};
    return true;
}

}  // namespace cfgdetail

inline Scene scene_from_json(const json& j, std::vector<std::string>& errors,
                             const std::string& path = "scene") {
    Scene scene;
    scene.shapes.clear();
    if (j.contains("bounds")) {
        cfgdetail::want_vec2(j["bounds"], "min", path + ".bounds.min", scene.bounds.lo,
                             errors);
        cfgdetail::want_vec2(j["bounds"], "max", path + ".bounds.max", scene.bounds.hi,
                             errors);
    }
    if (j.contains("walls")) {
        if (j["walls"].is_boolean()) {
            scene.walls = j["walls"].get<bool>();
        } else {
            errors.push_back(path + ".walls: expected a boolean");
        }
    }
    if (j.contains("shapes")) {
        if (!j["shapes"].is_array()) {
            errors.push_back(path + ".shapes: expected an array");
        } else {
            int idx = 0;
            for (const json& s : j["shapes"]) {
                const std::string sp = path + ".shapes[" + std::to_string(idx++) + "]";
                const std::string kind = s.value("kind", "");
                if (kind == "circle") {
                    Circle c;
                    cfgdetail::want_vec2(s, "center", sp + ".center", c.center, errors);
                    double r = 0.0;
                    if (cfgdetail::want_num(s, "radius", sp + ".radius", r, errors)) {
                        c.radius = r;
                    }
                    scene.shapes.emplace_back(c);
                } else if (kind == "rect") {
                    Rect r;
                    cfgdetail::want_vec2(s, "center", sp + ".center", r.center, errors);
                    cfgdetail::want_vec2(s, "half_extents", sp + ".half_extents",
                                         r.half_extents, errors);
                    scene.shapes.emplace_back(r);
                } else {
                    errors.push_back(sp + ".kind: expected \"circle\" or \"rect\"");
                }
            }
        }
    }
    return scene;
}

// Throwing single-document form for standalone scene files.
inline Scene scene_from_json(const json& j) {
    std::vector<std::string> errors;
    Scene scene = scene_from_json(j, errors);
    if (errors.empty()) {
        auto sem = scene.validate();
        errors.insert(errors.end(), sem.begin(), sem.end());
    }
    if (!errors.empty()) throw std::runtime_error("scene: " + errors.front());
    return scene;
}

inline json scene_to_json(const Scene& scene) {
    json j;
    j["bounds"] = {{"min", {scene.bounds.lo.x, scene.bounds.lo.y}},
                   {"max", {scene.bounds.hi.x, scene.bounds.hi.y}}};
    j["walls"] = scene.walls;
    json shapes = json::array();
    for (const Shape& s : scene.shapes) {
        std::visit(
            [&](const auto& shape) {
                using T = std::decay_t<decltype(shape)>;
                if constexpr (std::is_same_v<T, Circle>) {
                    shapes.push_back({{"kind", "circle"},
                                      {"center", {shape.center.x, shape.center.y}},
                                      {"radius", shape.radius}});
                } else {
                    shapes.push_back(
                        {{"kind", "rect"},
                         {"center", {shape.center.x, shape.center.y}},
                         {"half_extents", {shape.half_extents.x, shape.half_extents.y}}});
                }
            },
            s);
    }
    j["shapes"] = shapes;
    return j;
}

struct ParseResult {
    ExperimentConfig config;
    std::vector<std::string> errors;
};

inline ParseResult config_from_json(const json& j) {
    ParseResult res;
    ExperimentConfig& cfg = res.config;
    std::vector<std::string>& errors = res.errors;
    using namespace cfgdetail;

    if (j.contains("scene")) cfg.scene = scene_from_json(j["scene"], errors);

    if (j.contains("agents")) {
        if (!j["agents"].is_array()) {
            errors.push_back("agents: expected an array");
        } else {
            int ai = 0;
            for (const json& a : j["agents"]) {
                const std::string ap = "agents[" + std::to_string(ai++) + "]";
                TrajectorySpec traj;
                if (a.contains("waypoints") && a["waypoints"].is_array()) {
                    int wi = 0;
                    for (const json& w : a["waypoints"]) {
                        const std::string wp = ap + ".waypoints[" + std::to_string(wi++) + "]";
                        Waypoint way;
                        want_vec2(w, "pos", wp + ".pos", way.pos, errors);
                        want_num(w, "heading", wp + ".heading", way.heading, errors);
                        traj.waypoints.push_back(way);
                    }
                } else if (a.contains("waypoints")) {
                    errors.push_back(ap + ".waypoints: expected an array");
                }
                int64_t tmp;
                if (want_int(a, "loops", ap + ".loops", tmp, errors)) {
                    traj.loops = static_cast<int>(tmp);
                }
                if (want_int(a, "scans_per_iter", ap + ".scans_per_iter", tmp, errors)) {
                    traj.scans_per_iter = static_cast<int>(tmp);
                }
                cfg.agents.push_back(std::move(traj));
            }
        }
    }

    if (j.contains("sensor")) {
        const json& s = j["sensor"];
        want_num(s, "fov", "sensor.fov", cfg.sensor.fov, errors);
        int64_t tmp;
        if (want_int(s, "n_rays", "sensor.n_rays", tmp, errors)) {
            cfg.sensor.n_rays = static_cast<int>(tmp);
        }
        want_num(s, "max_range", "sensor.max_range", cfg.sensor.max_range, errors);
        want_num(s, "noise_std", "sensor.noise_std", cfg.sensor.noise_std, errors);
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.contains("levels")) {
            if (!g["levels"].is_array()) {
                errors.push_back("grid.levels: expected an array of resolutions");
            } else {
                cfg.grid.resolutions.clear();
                for (const json& r : g["levels"]) {
                    if (!r.is_number_integer()) {
                        errors.push_back("grid.levels: expected integers");
                        break;
                    }
                    cfg.grid.resolutions.push_back(r.get<int>());
                }
            }
        }
        int64_t tmp;
        if (want_int(g, "feature_dim", "grid.feature_dim", tmp, errors)) {
            cfg.grid.feature_dim = static_cast<int>(tmp);
        }
        want_num(g, "truncation", "grid.truncation", cfg.grid.truncation, errors);
        if (want_int(g, "samples_per_ray", "grid.samples_per_ray", tmp, errors)) {
            cfg.grid.samples_per_ray = static_cast<int>(tmp);
        }
        if (want_int(g, "oneblob_bins", "grid.oneblob_bins", tmp, errors)) {
            cfg.grid.oneblob_bins = static_cast<int>(tmp);
        }
    }
    cfg.grid.bounds = cfg.scene.bounds;  // shared by construction

    if (j.contains("decoder")) {
        const json& d = j["decoder"];
        const std::string kind = d.value("kind", "fixed-affine");
        if (kind == "identity-sum") {
            cfg.decoder.kind = Decoder::Kind::IdentitySum;
        } else if (kind == "fixed-affine") {
            cfg.decoder.kind = Decoder::Kind::FixedAffine;
        } else {
            errors.push_back("decoder.kind: expected \"identity-sum\" or \"fixed-affine\"");
        }
        int64_t tmp;
        if (want_int(d, "seed", "decoder.seed", tmp, errors)) {
            cfg.decoder.seed = static_cast<uint64_t>(tmp);
        }
    }

    if (j.contains("loss")) {
        const json& l = j["loss"];
        want_num(l, "lambda_d", "loss.lambda_d", cfg.loss.lambda_d, errors);
        want_num(l, "lambda_sdf", "loss.lambda_sdf", cfg.loss.lambda_sdf, errors);
        want_num(l, "lambda_fs", "loss.lambda_fs", cfg.loss.lambda_fs, errors);
        want_num(l, "lambda_smooth", "loss.lambda_smooth", cfg.loss.lambda_smooth,
                 errors);
        int64_t tmp;
        if (want_int(l, "rays_per_step", "loss.rays_per_step", tmp, errors)) {
            cfg.loss.rays_per_step = static_cast<int>(tmp);
        }
        if (want_int(l, "smooth_probes", "loss.smooth_probes", tmp, errors)) {
            cfg.loss.smooth_probes = static_cast<int>(tmp);
        }
    }

    if (j.contains("consensus")) {
        const json& c = j["consensus"];
        if (c.contains("optimizer")) {
            const std::string tag = c["optimizer"].is_string()
                                        ? c["optimizer"].get<std::string>()
                                        : std::string();
            if (auto k = parse_optimizer(tag)) {
                cfg.optimizer = *k;
            } else {
                errors.push_back(
                    "consensus.optimizer: expected ramen | cadmm | dsgd | dsgt");
            }
        }
        want_num(c, "rho", "consensus.rho", cfg.consensus.rho, errors);
        int64_t tmp;
        if (want_int(c, "steps", "consensus.steps", tmp, errors)) {
            cfg.consensus.steps = static_cast<int>(tmp);
        }
        want_num(c, "lr", "consensus.lr", cfg.consensus.lr, errors);
        want_num(c, "momentum", "consensus.momentum", cfg.consensus.momentum, errors);
    }

    if (j.contains("weights")) {
        const json& w = j["weights"];
        want_num(w, "beta_l", "weights.beta_l", cfg.weights.beta_l, errors);
        want_num(w, "beta_u", "weights.beta_u", cfg.weights.beta_u, errors);
        want_num(w, "w_min", "weights.w_min", cfg.weights.w_min, errors);
    }

    if (j.contains("comm")) {
        const json& c = j["comm"];
        const std::string graph = c.value("graph", "full");
        if (graph == "full") {
            cfg.comm.graph = GraphKind::Full;
        } else if (graph == "chain") {
            cfg.comm.graph = GraphKind::Chain;
        } else {
            errors.push_back("comm.graph: expected \"full\" or \"chain\"");
        }
        want_num(c, "success_rate", "comm.success_rate", cfg.comm.success_rate, errors);
        int64_t tmp;
        if (want_int(c, "period", "comm.period", tmp, errors)) {
            cfg.comm.period = static_cast<int>(tmp);
        }
    }

    if (j.contains("run")) {
        const json& r = j["run"];
        int64_t tmp;
        if (want_int(r, "iterations", "run.iterations", tmp, errors)) {
            cfg.run.iterations = tmp;
        }
        if (want_int(r, "trials", "run.trials", tmp, errors)) {
            cfg.run.trials = static_cast<int>(tmp);
        }
        if (want_int(r, "seed", "run.seed", tmp, errors)) {
            cfg.run.seed = static_cast<uint64_t>(tmp);
        }
        if (r.contains("out")) {
            if (r["out"].is_string()) {
                cfg.run.out_dir = r["out"].get<std::string>();
            } else {
                errors.push_back("run.out: expected a string");
            }
        }
        if (want_int(r, "metric_every", "run.metric_every", tmp, errors)) {
            cfg.run.metric_every = static_cast<int>(tmp);
        }
        if (want_int(r, "metric_resolution", "run.metric_resolution", tmp, errors)) {
            cfg.run.metric_resolution = static_cast<int>(tmp);
        }
        if (want_int(r, "contour_samples", "run.contour_samples", tmp, errors)) {
            cfg.run.contour_samples = static_cast<int>(tmp);
        }
        want_num(r, "completion_threshold", "run.completion_threshold",
                 cfg.run.completion_threshold, errors);
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        if (s.contains("success_rates")) {
            if (!s["success_rates"].is_array()) {
                errors.push_back("sweep.success_rates: expected an array");
            } else {
                for (const json& v : s["success_rates"]) {
                    if (!v.is_number()) {
                        errors.push_back("sweep.success_rates: expected numbers");
                        break;
                    }
                    cfg.sweep_success_rates.push_back(v.get<double>());
                }
            }
        }
    }
    return res;
}

// Semantic validation across the assembled config; returns "path: message"
// entries for everything that would make the run ill-defined.
inline std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> errors = cfg.scene.validate();
    auto add = [&](std::vector<std::string> more) {
        errors.insert(errors.end(), more.begin(), more.end());
    };
    add(cfg.grid.validate());
    add(cfg.loss.validate());
    add(cfg.consensus.validate());
    add(cfg.weights.validate());

    if (cfg.agents.empty()) errors.push_back("agents: need at least one agent");
    for (size_t i = 0; i < cfg.agents.size(); ++i) {
        const std::string path = "agents[" + std::to_string(i) + "]";
        if (cfg.agents[i].waypoints.empty()) {
            errors.push_back(path + ".waypoints: need at least one waypoint");
        }
        if (cfg.agents[i].loops < 1) errors.push_back(path + ".loops: must be >= 1");
        if (cfg.agents[i].scans_per_iter < 1) {
            errors.push_back(path + ".scans_per_iter: must be >= 1");
        }
    }

    SensorPose probe;
    probe.fov = cfg.sensor.fov;
    probe.n_rays = cfg.sensor.n_rays;
    probe.max_range = cfg.sensor.max_range;
    for (const std::string& e : comap::validate(probe)) errors.push_back(e);
    if (cfg.sensor.noise_std < 0.0) {
        errors.push_back("sensor.noise_std: must be >= 0");
    }

    if (cfg.comm.success_rate < 0.0 || cfg.comm.success_rate > 1.0) {
        errors.push_back("comm.success_rate: must be in [0, 1]");
    }
    if (cfg.comm.period < 0) errors.push_back("comm.period: must be >= 0");

    if (cfg.run.iterations < 0) errors.push_back("run.iterations: must be >= 0");
    if (cfg.run.trials < 1) errors.push_back("run.trials: must be >= 1");
    if (cfg.run.metric_every < 1) errors.push_back("run.metric_every: must be >= 1");
    if (cfg.run.metric_resolution < 8) {
        errors.push_back("run.metric_resolution: must be >= 8");
    }
    if (cfg.run.contour_samples < 1) {
        errors.push_back("run.contour_samples: must be >= 1");
    }
    if (!(cfg.run.completion_threshold > 0.0)) {
        errors.push_back("run.completion_threshold: must be > 0");
    }
    for (double r : cfg.sweep_success_rates) {
        if (r < 0.0 || r > 1.0) {
            errors.push_back("sweep.success_rates: values must be in [0, 1]");
            break;
        }
    }
    return errors;
}

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["scene"] = scene_to_json(cfg.scene);
    json agents = json::array();
    for (const TrajectorySpec& a : cfg.agents) {
        json waypoints = json::array();
        for (const Waypoint& w : a.waypoints) {
            waypoints.push_back({{"pos", {w.pos.x, w.pos.y}}, {"heading", w.heading}});
        }
        agents.push_back({{"waypoints", waypoints},
                          {"loops", a.loops},
                          {"scans_per_iter", a.scans_per_iter}});
    }
    j["agents"] = agents;
    j["sensor"] = {{"fov", cfg.sensor.fov},
                   {"n_rays", cfg.sensor.n_rays},
                   {"max_range", cfg.sensor.max_range},
                   {"noise_std", cfg.sensor.noise_std}};
    j["grid"] = {{"levels", cfg.grid.resolutions},
                 {"feature_dim", cfg.grid.feature_dim},
                 {"truncation", cfg.grid.truncation},
                 {"samples_per_ray", cfg.grid.samples_per_ray},
                 {"oneblob_bins", cfg.grid.oneblob_bins}};
    j["decoder"] = {{"kind", cfg.decoder.kind == Decoder::Kind::IdentitySum
                                 ? "identity-sum"
                                 : "fixed-affine"},
                    {"seed", cfg.decoder.seed}};
    j["loss"] = {{"lambda_d", cfg.loss.lambda_d},
                 {"lambda_sdf", cfg.loss.lambda_sdf},
                 {"lambda_fs", cfg.loss.lambda_fs},
                 {"lambda_smooth", cfg.loss.lambda_smooth},
                 {"rays_per_step", cfg.loss.rays_per_step},
                 {"smooth_probes", cfg.loss.smooth_probes}};
    j["consensus"] = {{"optimizer", optimizer_tag(cfg.optimizer)},
                      {"rho", cfg.consensus.rho},
                      {"steps", cfg.consensus.steps},
                      {"lr", cfg.consensus.lr},
                      {"momentum", cfg.consensus.momentum}};
    j["weights"] = {{"beta_l", cfg.weights.beta_l},
                    {"beta_u", cfg.weights.beta_u},
                    {"w_min", cfg.weights.w_min}};
    j["comm"] = {{"graph", cfg.comm.graph == GraphKind::Full ? "full" : "chain"},
                 {"success_rate", cfg.comm.success_rate},
                 {"period", cfg.comm.period}};
    j["run"] = {{"iterations", cfg.run.iterations},
                {"trials", cfg.run.trials},
                {"seed", cfg.run.seed},
                {"out", cfg.run.out_dir},
                {"metric_every", cfg.run.metric_every},
                {"metric_resolution", cfg.run.metric_resolution},
                {"contour_samples", cfg.run.contour_samples},
                {"completion_threshold", cfg.run.completion_threshold}};
    if (!cfg.sweep_success_rates.empty()) {
        j["sweep"] = {{"success_rates", cfg.sweep_success_rates}};
    }
    return j;
}

inline uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Hash of the canonical (sorted-key) serialization of the parsed config;
// stable under key reordering and unknown-field noise in the input file.
inline uint64_t config_hash(const ExperimentConfig& cfg) {
    json j = config_to_json(cfg);
    j["run"].erase("out");  // output location is not semantically meaningful
    return fnv1a64(j.dump());
}

inline ParseResult load_config_file(const std::string& path) {
    ParseResult res;
    std::ifstream in(path);
    if (!in) {
        res.errors.push_back("config: cannot open " + path);
        return res;
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        res.errors.push_back("config: " + path + " is not valid JSON");
        return res;
    }
    return config_from_json(j);
}

}  // namespace comap
