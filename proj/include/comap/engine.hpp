#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/config.hpp"
#include "comap/consensus.hpp"
#include "comap/csv.hpp"
#include "comap/metrics.hpp"
#include "comap/network.hpp"
#include "comap/serialize.hpp"
#include "comap/svg.hpp"
#include "comap/uncertainty.hpp"

namespace comap {

// Last received snapshot from a neighbor; immutable until the next delivery.
struct NeighborCache {
    std::vector<double> theta;
    UncertaintyCounts counts;
    std::vector<double> tracker;
    int64_t t_old = -1;
};

struct AgentState {
    int id = 0;
    std::vector<double> theta;
    std::vector<double> dual;
    UncertaintyCounts counts;
    DsgtState dsgt;
    std::map<int, NeighborCache> cache;
    ObservationBatch store;
};

struct MetricRow {
    int trial = 0;
    int agent = 0;
    int64_t iter = 0;
    double artifacts = 0.0;  // NaN when the map has no surface
    double holes = 0.0;
    double completion = 0.0;
    double disagreement = 0.0;
};

struct TraceEvent {
    int trial = 0;
    int64_t iter = 0;
    CommEvent event;
};

struct RunRecord {
    uint64_t config_hash = 0;
    std::vector<MetricRow> rows;
    std::vector<std::vector<std::vector<double>>> final_params;  // [trial][agent]
    std::vector<TraceEvent> trace;
    UncertaintyCounts uncertainty;  // trial 0, agent 0, end of run
    double seconds = 0.0;
};

// Piecewise-linear pose along the (closed) waypoint loop; headings follow the
// shortest arc between consecutive waypoints. Extra scans per iteration set
// off the heading by whole-turn fractions for wider coverage.
inline SensorPose trajectory_pose(const TrajectorySpec& traj, const SensorConfig& sensor,
                                  int64_t t, int64_t total_iters, int scan_index) {
    SensorPose pose;
    pose.fov = sensor.fov;
    pose.n_rays = sensor.n_rays;
    pose.max_range = sensor.max_range;
    const size_t n_wp = traj.waypoints.size();
    if (n_wp == 0) throw std::invalid_argument("trajectory_pose: no waypoints");
    if (n_wp == 1) {
        pose.position = traj.waypoints[0].pos;
        pose.heading = traj.waypoints[0].heading;
    } else {
        const double u = total_iters > 1
                             ? static_cast<double>(t) / static_cast<double>(total_iters - 1)
                             : 0.0;
        double cycle = u * traj.loops;
        cycle -= std::floor(cycle);
        const double s = cycle * static_cast<double>(n_wp);
        const size_t k = std::min(static_cast<size_t>(s), n_wp - 1);
        const double f = s - static_cast<double>(k);
        const Waypoint& a = traj.waypoints[k];
        const Waypoint& b = traj.waypoints[(k + 1) % n_wp];
        pose.position = a.pos + f * (b.pos - a.pos);
        const double two_pi = 2.0 * std::numbers::pi;
        const double dh = std::remainder(b.heading - a.heading, two_pi);
        pose.heading = a.heading + f * dh;
    }
    if (traj.scans_per_iter > 1) {
        pose.heading += 2.0 * std::numbers::pi * scan_index /
                        static_cast<double>(traj.scans_per_iter);
    }
    return pose;
}

namespace enginedetail {

// Local-objective adapter over the agent's observation store. Optionally ORs
// each step's touched mask into a per-iteration union used by the counter.
struct MappingObjective {
    const GridConfig* grid = nullptr;
    const Decoder* dec = nullptr;
    const ObservationBatch* data = nullptr;
    const LossConfig* loss = nullptr;
    ObjectiveWorkspace* ws = nullptr;
    std::vector<uint8_t>* touch_union = nullptr;

    void operator()(std::span<const double> theta, std::mt19937_64& rng,
                    GradReport& out) const {
        const Minibatch mb = draw_minibatch(*data, *grid, *loss, rng, *ws);
        eval_objective(*grid, *dec, theta, mb, *loss, out, *ws);
        if (touch_union) {
            for (size_t i = 0; i < out.mask.size(); ++i) {
                (*touch_union)[i] |= out.mask[i];
            }
        }
    }
};

}  // namespace enginedetail

inline Decoder make_decoder(const ExperimentConfig& cfg) {
    return cfg.decoder.kind == Decoder::Kind::IdentitySum
               ? Decoder::identity_sum(cfg.grid)
               : Decoder::fixed_affine(cfg.grid, cfg.decoder.seed);
}

inline RunRecord run_experiment(const ExperimentConfig& cfg) {
    {
        const std::vector<std::string> errors = validate(cfg);
        if (!errors.empty()) {
            throw std::invalid_argument("run_experiment: invalid config: " +
                                        errors.front());
        }
    }
    const auto wall_start = std::chrono::steady_clock::now();

    const GridConfig& grid = cfg.grid;
    const Decoder dec = make_decoder(cfg);
    const size_t n = grid.param_count();
    const int n_agents = cfg.n_agents();
    const int64_t total_iters = cfg.run.iterations;
    const bool with_tracker = cfg.optimizer == OptimizerKind::Dsgt;

    RunRecord rec;
    rec.config_hash = config_hash(cfg);

    // Contours are extracted over a slightly padded box so wall surfaces on
    // the room boundary produce sign changes instead of vanishing.
    const Aabb eval_bounds{
        {grid.bounds.lo.x - 2.0 * grid.bounds.width() / cfg.run.metric_resolution,
         grid.bounds.lo.y - 2.0 * grid.bounds.height() / cfg.run.metric_resolution},
        {grid.bounds.hi.x + 2.0 * grid.bounds.width() / cfg.run.metric_resolution,
         grid.bounds.hi.y + 2.0 * grid.bounds.height() / cfg.run.metric_resolution}};
    const ZeroSet gt_contour = extract_zero_set(
        [&](Vec2 p) { return gt_sdf(cfg.scene, p); }, eval_bounds,
        cfg.run.metric_resolution, cfg.run.contour_samples);

    CommGraph graph = topology(cfg.comm.graph, n_agents);
    graph.policy.drop_prob = 1.0 - cfg.comm.success_rate;
    graph.policy.period = cfg.comm.period;
    const size_t msg_bytes = wire_size(n, with_tracker);

    ObjectiveWorkspace ows;
    PrimalScratch primal_scratch;
    GradReport step_report;
    std::vector<double> mix_scratch;
    std::vector<uint8_t> touch_union(n);
    GradReport union_report;

    for (int trial = 0; trial < cfg.run.trials; ++trial) {
        std::vector<AgentState> agents(static_cast<size_t>(n_agents));
        for (int a = 0; a < n_agents; ++a) {
            agents[static_cast<size_t>(a)].id = a;
            agents[static_cast<size_t>(a)].theta.assign(n, 0.0);
            agents[static_cast<size_t>(a)].dual.assign(n, 0.0);
            agents[static_cast<size_t>(a)].counts.assign(n, 0u);
        }

        const auto emit_metrics = [&](int64_t iter) {
            std::vector<const std::vector<double>*> thetas;
            thetas.reserve(agents.size());
            for (const AgentState& a : agents) thetas.push_back(&a.theta);
            const double dis = disagreement(thetas);
            FieldScratch scratch;
            scratch.configure(grid, dec);
            for (const AgentState& a : agents) {
                const ZeroSet pred = extract_zero_set(
                    [&](Vec2 p) { return query_sdf(grid, dec, a.theta, p, scratch); },
                    eval_bounds, cfg.run.metric_resolution, cfg.run.contour_samples);
                const auto art = artifacts(pred, gt_contour);
                const auto hol = holes(pred, gt_contour);
                MetricRow row;
                row.trial = trial;
                row.agent = a.id;
                row.iter = iter;
                row.artifacts = art.value_or(std::numeric_limits<double>::quiet_NaN());
                row.holes = hol.value_or(std::numeric_limits<double>::quiet_NaN());
                row.completion =
                    completion_ratio(pred, gt_contour, cfg.run.completion_threshold);
                row.disagreement = dis;
                rec.rows.push_back(row);
            }
        };
        emit_metrics(0);

        for (int64_t t = 0; t < total_iters; ++t) {
            // Capture: every agent scans at its scripted pose and stores the
            // observations for replay.
            for (AgentState& a : agents) {
                const TrajectorySpec& traj = cfg.agents[static_cast<size_t>(a.id)];
                for (int s = 0; s < traj.scans_per_iter; ++s) {
                    const SensorPose pose =
                        trajectory_pose(traj, cfg.sensor, t, total_iters, s);
                    const uint64_t scan_seed = derive_seed(
                        cfg.run.seed, Stream::Capture,
                        static_cast<uint64_t>(trial), static_cast<uint64_t>(a.id),
                        static_cast<uint64_t>(t) * 16 + static_cast<uint64_t>(s));
                    a.store.append(capture_scan(cfg.scene, pose, grid.samples_per_ray,
                                                grid.truncation, cfg.sensor.noise_std,
                                                scan_seed));
                }
            }

            // Broadcast: snapshots travel in the wire encoding; receivers
            // overwrite their cache entry for the sender.
            std::mt19937_64 comm_rng = seeded_rng(cfg.run.seed, Stream::Comm,
                                                  static_cast<uint64_t>(trial),
                                                  static_cast<uint64_t>(t));
            const std::vector<CommEvent> events = broadcast_round(
                graph, t, comm_rng, msg_bytes, [&](int from, int to, int64_t iter) {
                    const AgentState& sender = agents[static_cast<size_t>(from)];
                    const std::span<const double> tracker =
                        with_tracker && sender.dsgt.initialized
                            ? std::span<const double>(sender.dsgt.tracker)
                            : std::span<const double>();
                    const std::vector<uint8_t> bytes =
                        encode_wire(sender.theta, static_cast<uint32_t>(grid.levels()),
                                    sender.counts, tracker);
                    WireMessage msg = decode_wire(bytes);
                    NeighborCache& cache = agents[static_cast<size_t>(to)].cache[from];
                    cache.theta = std::move(msg.theta);
                    cache.counts = std::move(msg.counts);
                    cache.tracker = std::move(msg.tracker);
                    cache.t_old = iter;
                });
            for (const CommEvent& e : events) rec.trace.push_back({trial, t, e});

            // Per-agent update, deterministic round-robin. All neighbor reads
            // go through the caches filled above.
            for (AgentState& a : agents) {
                std::fill(touch_union.begin(), touch_union.end(), 0);
                enginedetail::MappingObjective objective{&grid, &dec, &a.store,
                                                         &cfg.loss, &ows, &touch_union};
                std::mt19937_64 rng = seeded_rng(cfg.run.seed, Stream::Minibatch,
                                                 static_cast<uint64_t>(trial),
                                                 static_cast<uint64_t>(a.id),
                                                 static_cast<uint64_t>(t));
                switch (cfg.optimizer) {
                    case OptimizerKind::Ramen: {
                        std::vector<WeightPair> weights;
                        std::vector<NeighborTerm> links;
                        weights.reserve(a.cache.size());
                        links.reserve(a.cache.size());
                        for (const auto& [jid, cache] : a.cache) {
                            weights.push_back(
                                compute_weights(a.counts, cache.counts, cfg.weights));
                            links.push_back(
                                {cache.theta, weights.back().w_ij, weights.back().w_ji});
                        }
                        ramen_primal(a.theta, a.dual, cfg.consensus, links, objective,
                                     rng, primal_scratch);
                        ramen_dual(a.dual, a.theta, cfg.consensus.rho, links);
                        break;
                    }
                    case OptimizerKind::Cadmm: {
                        std::vector<std::span<const double>> others;
                        others.reserve(a.cache.size());
                        for (const auto& [jid, cache] : a.cache) {
                            others.emplace_back(cache.theta);
                        }
                        cadmm_primal(a.theta, a.dual, cfg.consensus, others, objective,
                                     rng, primal_scratch);
                        cadmm_dual(a.dual, a.theta, cfg.consensus.rho, others);
                        break;
                    }
                    case OptimizerKind::Dsgd: {
                        std::vector<std::span<const double>> others;
                        for (const auto& [jid, cache] : a.cache) {
                            others.emplace_back(cache.theta);
                        }
                        dsgd_step(a.theta, cfg.consensus.lr, others, objective, rng,
                                  step_report, mix_scratch);
                        break;
                    }
                    case OptimizerKind::Dsgt: {
                        std::vector<std::span<const double>> others;
                        std::vector<std::span<const double>> trackers;
                        for (const auto& [jid, cache] : a.cache) {
                            if (cache.tracker.size() == n) {
                                others.emplace_back(cache.theta);
                                trackers.emplace_back(cache.tracker);
                            }
                        }
                        dsgt_step(a.theta, a.dsgt, cfg.consensus.lr, others, trackers,
                                  objective, rng, step_report, mix_scratch);
                        break;
                    }
                }
                union_report.mask.assign(touch_union.begin(), touch_union.end());
                update_counts(a.counts, union_report);
            }

            if ((t + 1) % cfg.run.metric_every == 0 || t + 1 == total_iters) {
                emit_metrics(t + 1);
            }
        }

        std::vector<std::vector<double>> finals;
        finals.reserve(agents.size());
        for (const AgentState& a : agents) finals.push_back(a.theta);
        rec.final_params.push_back(std::move(finals));
        if (trial == 0) rec.uncertainty = agents[0].counts;
    }

    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                wall_start)
                      .count();
    return rec;
}

// ---------------------------------------------------------------------------
// Output emission.

inline void emit_outputs(const RunRecord& rec, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path out(cfg.run.out_dir);
    fs::create_directories(out);

    {
        std::ofstream csv(out / "metrics.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("emit_outputs: cannot write metrics.csv");
        csv << "trial,agent,iter,artifacts,holes,completion,disagreement\n";
        for (const MetricRow& r : rec.rows) {
            csv << r.trial << ',' << r.agent << ',' << r.iter << ','
                << fmt_double(r.artifacts) << ',' << fmt_double(r.holes) << ','
                << fmt_double(r.completion) << ',' << fmt_double(r.disagreement)
                << '\n';
        }
    }

    {
        // Per-iteration aggregate over trials and agents.
        std::map<int64_t, std::vector<double>> by_iter;
        for (const MetricRow& r : rec.rows) by_iter[r.iter].push_back(r.completion);
        std::ofstream csv(out / "summary.csv", std::ios::binary);
        csv << "iter,completion_mean,completion_std\n";
        PlotSeries series;
        series.label = optimizer_tag(cfg.optimizer);
        for (const auto& [iter, values] : by_iter) {
            const MeanStd ms = mean_std(values);
            csv << iter << ',' << fmt_double(ms.mean) << ',' << fmt_double(ms.stddev)
                << '\n';
            series.x.push_back(static_cast<double>(iter));
            series.y.push_back(ms.mean);
            series.yerr.push_back(ms.stddev);
        }
        std::ofstream svg(out / "completion_vs_iteration.svg", std::ios::binary);
        svg << line_plot_svg("completion vs iteration", "iteration", "completion (%)",
                             {series});
    }

    {
        std::ofstream jsonl(out / "messages.jsonl", std::ios::binary);
        for (const TraceEvent& ev : rec.trace) {
            jsonl << "{\"trial\":" << ev.trial << ",\"iter\":" << ev.iter
                  << ",\"from\":" << ev.event.from << ",\"to\":" << ev.event.to
                  << ",\"delivered\":" << (ev.event.delivered ? "true" : "false")
                  << ",\"bytes\":" << ev.event.bytes << "}\n";
        }
    }

    if (!rec.uncertainty.empty()) {
        std::ofstream csv(out / "uncertainty.csv", std::ios::binary);
        write_uncertainty_csv(csv, export_uncertainty(rec.uncertainty, cfg.grid));
    }

    for (size_t trial = 0; trial < rec.final_params.size(); ++trial) {
        for (size_t agent = 0; agent < rec.final_params[trial].size(); ++agent) {
            save_params((out / ("params_trial" + std::to_string(trial) + "_agent" +
                                std::to_string(agent) + ".bin"))
                            .string(),
                        rec.final_params[trial][agent],
                        static_cast<uint32_t>(cfg.grid.levels()));
        }
    }

    {
        std::ofstream js(out / "config.json", std::ios::binary);
        json j = config_to_json(cfg);
        j["config_hash"] = rec.config_hash;
        js << j.dump(2) << '\n';
    }
}

struct SweepPoint {
    double success_rate = 0.0;
    double completion_mean = 0.0;
    double completion_std = 0.0;
};

// Runs the config once per success rate, each into its own subdirectory, and
// aggregates final-iteration completion into a summary CSV and plot.
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& base) {
    namespace fs = std::filesystem;
    std::vector<SweepPoint> points;
    const fs::path root(base.run.out_dir);
    fs::create_directories(root);
    for (double rate : base.sweep_success_rates) {
        ExperimentConfig cfg = base;
        cfg.sweep_success_rates.clear();
        cfg.comm.success_rate = rate;
        cfg.comm.period = 0;
        const int pct = static_cast<int>(std::lround(rate * 100.0));
        cfg.run.out_dir = (root / ("success_" + std::to_string(pct))).string();
        const RunRecord rec = run_experiment(cfg);
        emit_outputs(rec, cfg);

        int64_t last_iter = 0;
        for (const MetricRow& r : rec.rows) last_iter = std::max(last_iter, r.iter);
        std::vector<double> finals;
        for (const MetricRow& r : rec.rows) {
            if (r.iter == last_iter) finals.push_back(r.completion);
        }
        const MeanStd ms = mean_std(finals);
        points.push_back({rate, ms.mean, ms.stddev});
    }

    std::ofstream csv(root / "sweep_summary.csv", std::ios::binary);
    csv << "success_rate,completion_mean,completion_std\n";
    PlotSeries series;
    series.label = optimizer_tag(base.optimizer);
    for (const SweepPoint& p : points) {
        csv << fmt_double(p.success_rate) << ',' << fmt_double(p.completion_mean) << ','
            << fmt_double(p.completion_std) << '\n';
        series.x.push_back(p.success_rate);
        series.y.push_back(p.completion_mean);
        series.yerr.push_back(p.completion_std);
    }
    std::ofstream svg(root / "completion_vs_success.svg", std::ios::binary);
    svg << line_plot_svg("completion vs communication success", "success rate",
                         "completion (%)", {series});
    return points;
}

}  // namespace comap
