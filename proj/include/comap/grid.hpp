#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/geometry.hpp"

namespace comap {

// Multi-resolution dense 2D feature grid. Parameters are stored flattened:
// level-major, then vertex (row-major, iy * (res+1) + ix), then channel.
// The flattening is the stable bijection the uncertainty counters rely on.
struct GridConfig {
    std::vector<int> resolutions{8, 32};  // cells per axis, coarse to fine
    int feature_dim = 2;
    Aabb bounds{{0.0, 0.0}, {1.0, 1.0}};
    double truncation = 0.05;
    int samples_per_ray = 32;
    int oneblob_bins = 8;

    int levels() const { return static_cast<int>(resolutions.size()); }
    int finest() const { return levels() - 1; }

    size_t verts_per_side(int level) const {
        return static_cast<size_t>(resolutions[static_cast<size_t>(level)]) + 1;
    }
    size_t vertex_count(int level) const {
        const size_t v = verts_per_side(level);
        return v * v;
    }
    size_t level_offset(int level) const {
        size_t off = 0;
        for (int l = 0; l < level; ++l) {
            off += vertex_count(l) * static_cast<size_t>(feature_dim);
        }
        return off;
    }
    size_t param_count() const { return level_offset(levels()); }

    size_t param_index(int level, int ix, int iy, int channel) const {
        const size_t v = verts_per_side(level);
        return level_offset(level) +
               (static_cast<size_t>(iy) * v + static_cast<size_t>(ix)) *
                   static_cast<size_t>(feature_dim) +
               static_cast<size_t>(channel);
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (resolutions.empty()) errors.push_back("grid.levels: need at least one level");
        for (size_t l = 0; l < resolutions.size(); ++l) {
            if (resolutions[l] < 1) {
                errors.push_back("grid.levels[" + std::to_string(l) + "]: must be >= 1");
            }
            if (l > 0 && resolutions[l] <= resolutions[l - 1]) {
                errors.push_back("grid.levels: resolutions must be strictly increasing");
                break;
            }
        }
        if (feature_dim < 1) errors.push_back("grid.feature_dim: must be >= 1");
        if (!(truncation > 0.0)) errors.push_back("grid.truncation: must be > 0");
        if (samples_per_ray < 2) errors.push_back("grid.samples_per_ray: must be >= 2");
        if (oneblob_bins < 2) errors.push_back("grid.oneblob_bins: must be >= 2");
        if (bounds.width() <= 0.0 || bounds.height() <= 0.0) {
            errors.push_back("grid.bounds: must have positive extent");
        }
        return errors;
    }
};

// Bilinear interpolation stencil of one level: base vertex (ix, iy) and the
// four corner weights in order (0,0), (1,0), (0,1), (1,1).
struct LevelInterp {
    int ix = 0;
    int iy = 0;
    double w[4] = {0.0, 0.0, 0.0, 0.0};
};

inline LevelInterp level_interp(const GridConfig& cfg, int level, Vec2 p) {
    const int res = cfg.resolutions[static_cast<size_t>(level)];
    const Vec2 q = cfg.bounds.clamp(p);
    const double u = (q.x - cfg.bounds.lo.x) / cfg.bounds.width() * res;
    const double v = (q.y - cfg.bounds.lo.y) / cfg.bounds.height() * res;
    LevelInterp out;
    out.ix = std::min(static_cast<int>(u), res - 1);
    out.iy = std::min(static_cast<int>(v), res - 1);
    const double fx = u - out.ix;
    const double fy = v - out.iy;
    out.w[0] = (1.0 - fx) * (1.0 - fy);
    out.w[1] = fx * (1.0 - fy);
    out.w[2] = (1.0 - fx) * fy;
    out.w[3] = fx * fy;
    return out;
}

inline constexpr int kCornerDx[4] = {0, 1, 0, 1};
inline constexpr int kCornerDy[4] = {0, 0, 1, 1};

struct VertexWeight {
    int level = 0;
    int ix = 0;
    int iy = 0;
    double weight = 0.0;
};

// Interpolated features at p, level-major (levels() * feature_dim values).
// When `weight_map` is given it receives the touched vertices with their
// bilinear weights, i.e. the Jacobian structure of the lookup.
inline void interpolate(const GridConfig& cfg, std::span<const double> theta, Vec2 p,
                        std::span<double> features,
                        std::vector<VertexWeight>* weight_map = nullptr) {
    if (theta.size() != cfg.param_count()) {
        throw std::invalid_argument("interpolate: parameter vector length mismatch");
    }
    if (features.size() != static_cast<size_t>(cfg.levels() * cfg.feature_dim)) {
        throw std::invalid_argument("interpolate: feature buffer length mismatch");
    }
    if (weight_map) weight_map->clear();
    const int F = cfg.feature_dim;
    for (int l = 0; l < cfg.levels(); ++l) {
        const LevelInterp li = level_interp(cfg, l, p);
        for (int c = 0; c < F; ++c) features[static_cast<size_t>(l * F + c)] = 0.0;
        for (int corner = 0; corner < 4; ++corner) {
            const int ix = li.ix + kCornerDx[corner];
            const int iy = li.iy + kCornerDy[corner];
            const double w = li.w[corner];
            if (weight_map) weight_map->push_back({l, ix, iy, w});
            const size_t base = cfg.param_index(l, ix, iy, 0);
            for (int c = 0; c < F; ++c) {
                features[static_cast<size_t>(l * F + c)] +=
                    w * theta[base + static_cast<size_t>(c)];
            }
        }
    }
}

}  // namespace comap
