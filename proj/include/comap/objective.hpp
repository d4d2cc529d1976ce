#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/field.hpp"
#include "comap/sensor.hpp"

namespace comap {

struct LossConfig {
    double lambda_d = 0.1;
    double lambda_sdf = 10.0;
    double lambda_fs = 1.0;
    double lambda_smooth = 0.01;
    int rays_per_step = 64;
    int smooth_probes = 16;

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (lambda_d < 0 || lambda_sdf < 0 || lambda_fs < 0 || lambda_smooth < 0) {
            errors.push_back("loss: all lambda weights must be >= 0");
        }
        if (rays_per_step < 1) errors.push_back("loss.rays_per_step: must be >= 1");
        if (smooth_probes < 0) errors.push_back("loss.smooth_probes: must be >= 0");
        return errors;
    }
};

struct GradReport {
    double loss = 0.0;
    std::vector<double> grad;
    std::vector<uint8_t> mask;  // true exactly where grad != 0

    void refresh_mask() {
        mask.resize(grad.size());
        for (size_t i = 0; i < grad.size(); ++i) mask[i] = grad[i] != 0.0;
    }
};

// Adjacent finest-level vertex pair for the smoothness penalty, stored as
// row-major vertex ids.
struct ProbePair {
    uint32_t va = 0;
    uint32_t vb = 0;
};

// A drawn step: ray indices into the observation store plus smoothness probe
// edges. Probes are sampled from edges of cells that contain sample points of
// the drawn rays, which keeps every gradient inside the batch's
// interpolation support.
struct Minibatch {
    const ObservationBatch* data = nullptr;
    std::vector<uint32_t> ray_ids;
    std::vector<ProbePair> probes;
};

struct ObjectiveWorkspace {
    FieldScratch field;
    std::vector<double> sample_sdf;
    std::vector<uint32_t> cells;
    std::vector<uint64_t> edges;
};

inline Minibatch draw_minibatch(const ObservationBatch& data, const GridConfig& cfg,
                                const LossConfig& loss, std::mt19937_64& rng,
                                ObjectiveWorkspace& ws) {
    if (data.rays.empty()) throw std::invalid_argument("draw_minibatch: empty batch");
    Minibatch mb;
    mb.data = &data;
    mb.ray_ids.reserve(static_cast<size_t>(loss.rays_per_step));
    std::uniform_int_distribution<uint32_t> pick(
        0, static_cast<uint32_t>(data.rays.size()) - 1);
    for (int i = 0; i < loss.rays_per_step; ++i) mb.ray_ids.push_back(pick(rng));

    if (loss.smooth_probes <= 0 || loss.lambda_smooth < 0.0) return mb;

    // Touched cells at the finest level.
    const int level = cfg.finest();
    const int res = cfg.resolutions[static_cast<size_t>(level)];
    ws.cells.clear();
    for (uint32_t id : mb.ray_ids) {
        const RayObs& ray = data.rays[id];
        for (uint32_t k = 0; k < ray.sample_count; ++k) {
            const SampleObs& s = data.samples[ray.sample_begin + k];
            const Vec2 p = ray.origin + static_cast<double>(s.distance) * ray.dir;
            const LevelInterp li = level_interp(cfg, level, p);
            ws.cells.push_back(static_cast<uint32_t>(li.iy) * res +
                               static_cast<uint32_t>(li.ix));
        }
    }
    std::sort(ws.cells.begin(), ws.cells.end());
    ws.cells.erase(std::unique(ws.cells.begin(), ws.cells.end()), ws.cells.end());

    // Vertex-pair edges of the touched cells.
    const uint32_t vps = static_cast<uint32_t>(res) + 1;
    ws.edges.clear();
    for (uint32_t cell : ws.cells) {
        const uint32_t ix = cell % static_cast<uint32_t>(res);
        const uint32_t iy = cell / static_cast<uint32_t>(res);
        const uint32_t v00 = iy * vps + ix;
        const uint32_t v10 = v00 + 1;
        const uint32_t v01 = v00 + vps;
        const uint32_t v11 = v01 + 1;
        const auto pack = [](uint32_t a, uint32_t b) {
            return (static_cast<uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
        };
        ws.edges.push_back(pack(v00, v10));
        ws.edges.push_back(pack(v01, v11));
        ws.edges.push_back(pack(v00, v01));
        ws.edges.push_back(pack(v10, v11));
    }
    std::sort(ws.edges.begin(), ws.edges.end());
    ws.edges.erase(std::unique(ws.edges.begin(), ws.edges.end()), ws.edges.end());
    if (ws.edges.empty()) return mb;

    std::uniform_int_distribution<size_t> pick_edge(0, ws.edges.size() - 1);
    mb.probes.reserve(static_cast<size_t>(loss.smooth_probes));
    for (int i = 0; i < loss.smooth_probes; ++i) {
        const uint64_t e = ws.edges[pick_edge(rng)];
        mb.probes.push_back({static_cast<uint32_t>(e >> 32),
                             static_cast<uint32_t>(e & 0xffffffffu)});
    }
    return mb;
}

namespace detail {

template <bool WithGrad>
inline double eval_objective_impl(const GridConfig& cfg, const Decoder& dec,
                                  std::span<const double> theta, const Minibatch& mb,
                                  const LossConfig& loss, std::span<double> grad,
                                  ObjectiveWorkspace& ws) {
    if (theta.size() != cfg.param_count()) {
        throw std::invalid_argument("objective: parameter vector length mismatch");
    }
    const ObservationBatch& data = *mb.data;
    const double tr = cfg.truncation;

    // Regime population counts over the whole step (means, not sums).
    size_t n_hit = 0, n_near = 0, n_fs = 0;
    for (uint32_t id : mb.ray_ids) {
        const RayObs& ray = data.rays[id];
        if (ray.hit) ++n_hit;
        for (uint32_t k = 0; k < ray.sample_count; ++k) {
            if (data.samples[ray.sample_begin + k].near_surface) {
                ++n_near;
            } else {
                ++n_fs;
            }
        }
    }

    double total = 0.0;
    ws.field.configure(cfg, dec);
    for (uint32_t id : mb.ray_ids) {
        const RayObs& ray = data.rays[id];
        ws.sample_sdf.resize(ray.sample_count);

        const bool depth_term = ray.hit && loss.lambda_d > 0.0 && n_hit > 0;
        double num = 0.0, den = 0.0;
        for (uint32_t k = 0; k < ray.sample_count; ++k) {
            const SampleObs& s = data.samples[ray.sample_begin + k];
            const double d = static_cast<double>(s.distance);
            const Vec2 p = ray.origin + d * ray.dir;
            const double sdf = query_sdf(cfg, dec, theta, p, ws.field);
            ws.sample_sdf[k] = sdf;
            if (s.near_surface) {
                if (loss.lambda_sdf > 0.0 && n_near > 0) {
                    const double r = sdf - static_cast<double>(s.target_sdf);
                    total += loss.lambda_sdf * r * r / static_cast<double>(n_near);
                }
            } else if (loss.lambda_fs > 0.0 && n_fs > 0) {
                const double r = sdf - tr;
                total += loss.lambda_fs * r * r / static_cast<double>(n_fs);
            }
            if (depth_term) {
                num += ray_weight(sdf, tr) * d;
                den += ray_weight(sdf, tr);
            }
        }

        double depth_coeff = 0.0;  // dL/d(depth_hat)
        double depth_hat = 0.0;
        double den_used = 0.0;
        if (depth_term) {
            constexpr double kFloor = 1e-8;
            den_used = std::max(den, kFloor);
            depth_hat = num / den_used;
            const double resid = depth_hat - ray.measured_depth;
            total += loss.lambda_d * resid * resid / static_cast<double>(n_hit);
            depth_coeff = 2.0 * loss.lambda_d * resid / static_cast<double>(n_hit);
        }

        if constexpr (WithGrad) {
            for (uint32_t k = 0; k < ray.sample_count; ++k) {
                const SampleObs& s = data.samples[ray.sample_begin + k];
                const double d = static_cast<double>(s.distance);
                const double sdf = ws.sample_sdf[k];
                double delta = 0.0;
                if (s.near_surface) {
                    if (loss.lambda_sdf > 0.0 && n_near > 0) {
                        delta += 2.0 * loss.lambda_sdf *
                                 (sdf - static_cast<double>(s.target_sdf)) /
                                 static_cast<double>(n_near);
                    }
                } else if (loss.lambda_fs > 0.0 && n_fs > 0) {
                    delta += 2.0 * loss.lambda_fs * (sdf - tr) / static_cast<double>(n_fs);
                }
                if (depth_term) {
                    // Through the normalized weighted mean; when the weight sum
                    // is floored the denominator is a constant.
                    const double dwd = den >= 1e-8 ? (d - depth_hat) / den_used
                                                   : d / den_used;
                    delta += depth_coeff * dwd * ray_weight_dds(sdf, tr);
                }
                if (delta != 0.0) {
                    const Vec2 p = ray.origin + d * ray.dir;
                    accumulate_sdf_grad(cfg, dec, p, delta, grad);
                }
            }
        }
    }

    // Smoothness: squared feature differences across sampled adjacent-vertex
    // edges on the finest level.
    if (loss.lambda_smooth > 0.0 && !mb.probes.empty()) {
        const int level = cfg.finest();
        const int res = cfg.resolutions[static_cast<size_t>(level)];
        const uint32_t vps = static_cast<uint32_t>(res) + 1;
        const double scale = loss.lambda_smooth / static_cast<double>(mb.probes.size());
        for (const ProbePair& pr : mb.probes) {
            const int axa = static_cast<int>(pr.va % vps);
            const int aya = static_cast<int>(pr.va / vps);
            const int bxb = static_cast<int>(pr.vb % vps);
            const int byb = static_cast<int>(pr.vb / vps);
            for (int c = 0; c < cfg.feature_dim; ++c) {
                const size_t ia = cfg.param_index(level, axa, aya, c);
                const size_t ib = cfg.param_index(level, bxb, byb, c);
                const double r = theta[ia] - theta[ib];
                total += scale * r * r;
                if constexpr (WithGrad) {
                    grad[ia] += 2.0 * scale * r;
                    grad[ib] -= 2.0 * scale * r;
                }
            }
        }
    }
    return total;
}

}  // namespace detail

inline void eval_objective(const GridConfig& cfg, const Decoder& dec,
                           std::span<const double> theta, const Minibatch& mb,
                           const LossConfig& loss, GradReport& out,
                           ObjectiveWorkspace& ws) {
    out.grad.assign(theta.size(), 0.0);
    out.loss = detail::eval_objective_impl<true>(cfg, dec, theta, mb, loss, out.grad, ws);
    out.refresh_mask();
}

inline double eval_objective_value(const GridConfig& cfg, const Decoder& dec,
                                   std::span<const double> theta, const Minibatch& mb,
                                   const LossConfig& loss, ObjectiveWorkspace& ws) {
    return detail::eval_objective_impl<false>(cfg, dec, theta, mb, loss, {}, ws);
}

// Convenience forms that draw the step themselves.
inline double objective(const GridConfig& cfg, const Decoder& dec,
                        std::span<const double> theta, const ObservationBatch& batch,
                        const LossConfig& loss, std::mt19937_64& rng) {
    ObjectiveWorkspace ws;
    const Minibatch mb = draw_minibatch(batch, cfg, loss, rng, ws);
    return eval_objective_value(cfg, dec, theta, mb, loss, ws);
}

inline GradReport objective_grad(const GridConfig& cfg, const Decoder& dec,
                                 std::span<const double> theta,
                                 const ObservationBatch& batch, const LossConfig& loss,
                                 std::mt19937_64& rng) {
    ObjectiveWorkspace ws;
    const Minibatch mb = draw_minibatch(batch, cfg, loss, rng, ws);
    GradReport out;
    eval_objective(cfg, dec, theta, mb, loss, out, ws);
    return out;
}

}  // namespace comap
