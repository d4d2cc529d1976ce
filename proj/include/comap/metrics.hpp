#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "comap/field.hpp"
#include "comap/geometry.hpp"

namespace comap {

using Segment = std::array<Vec2, 2>;

// Marching squares over a uniform grid of field samples. Sign convention:
// a corner counts as "inside" only when strictly negative, so exact zeros
// are treated as positive. Ambiguous saddle cells are split according to
// the field's sign at the cell center.
template <class Field>
std::vector<Segment> marching_squares(Field&& field, const Aabb& bounds,
                                      int resolution) {
    if (resolution < 8) throw std::invalid_argument("marching_squares: resolution >= 8");
    const int vps = resolution + 1;
    std::vector<double> values(static_cast<size_t>(vps) * vps);
    const double cw = bounds.width() / resolution;
    const double ch = bounds.height() / resolution;
    for (int iy = 0; iy < vps; ++iy) {
        for (int ix = 0; ix < vps; ++ix) {
            values[static_cast<size_t>(iy) * vps + ix] =
                field(Vec2{bounds.lo.x + ix * cw, bounds.lo.y + iy * ch});
        }
    }

    std::vector<Segment> segments;
    const auto edge_point = [](Vec2 a, Vec2 b, double va, double vb) {
        const double t = va / (va - vb);
        return Vec2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    };
    for (int cy = 0; cy < resolution; ++cy) {
        for (int cx = 0; cx < resolution; ++cx) {
            const double v00 = values[static_cast<size_t>(cy) * vps + cx];
            const double v10 = values[static_cast<size_t>(cy) * vps + cx + 1];
            const double v01 = values[static_cast<size_t>(cy + 1) * vps + cx];
            const double v11 = values[static_cast<size_t>(cy + 1) * vps + cx + 1];
            const int config = (v00 < 0.0 ? 1 : 0) | (v10 < 0.0 ? 2 : 0) |
                               (v01 < 0.0 ? 4 : 0) | (v11 < 0.0 ? 8 : 0);
            if (config == 0 || config == 15) continue;

            const Vec2 p00{bounds.lo.x + cx * cw, bounds.lo.y + cy * ch};
            const Vec2 p10{p00.x + cw, p00.y};
            const Vec2 p01{p00.x, p00.y + ch};
            const Vec2 p11{p00.x + cw, p00.y + ch};
            const Vec2 bottom = edge_point(p00, p10, v00, v10);
            const Vec2 top = edge_point(p01, p11, v01, v11);
            const Vec2 left = edge_point(p00, p01, v00, v01);
            const Vec2 right = edge_point(p10, p11, v10, v11);

            switch (config) {
                case 1: case 14: segments.push_back({left, bottom}); break;
                case 2: case 13: segments.push_back({bottom, right}); break;
                case 4: case 11: segments.push_back({left, top}); break;
                case 8: case 7: segments.push_back({top, right}); break;
                case 3: case 12: segments.push_back({left, right}); break;
                case 5: case 10: segments.push_back({bottom, top}); break;
                case 6: case 9: {
                    const Vec2 center{p00.x + 0.5 * cw, p00.y + 0.5 * ch};
                    const bool center_neg = field(center) < 0.0;
                    // config 6: negatives at (1,0) and (0,1); config 9 is the
                    // mirrored saddle. The center sign decides whether the two
                    // negative corners join through the middle.
                    const bool isolate_01_10 = (config == 6) != center_neg;
                    if (isolate_01_10) {
                        segments.push_back({left, top});
                        segments.push_back({bottom, right});
                    } else {
                        segments.push_back({left, bottom});
                        segments.push_back({top, right});
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return segments;
}

// Zero-level-set point sample: `samples` points spaced uniformly by arc
// length over the extracted contour segments.
struct ZeroSet {
    std::vector<Vec2> points;
};

inline ZeroSet sample_segments(const std::vector<Segment>& segments, int samples) {
    ZeroSet out;
    double total = 0.0;
    std::vector<double> lengths(segments.size());
    for (size_t i = 0; i < segments.size(); ++i) {
        lengths[i] = (segments[i][1] - segments[i][0]).norm();
        total += lengths[i];
    }
    if (segments.empty() || total <= 0.0 || samples <= 0) return out;
    out.points.reserve(static_cast<size_t>(samples));
    const double step = total / samples;
    size_t seg = 0;
    double consumed = 0.0;  // arc length before current segment
    for (int k = 0; k < samples; ++k) {
        const double target = (k + 0.5) * step;
        while (seg + 1 < segments.size() && consumed + lengths[seg] < target) {
            consumed += lengths[seg];
            ++seg;
        }
        const double local = lengths[seg] > 0.0
                                 ? std::clamp((target - consumed) / lengths[seg], 0.0, 1.0)
                                 : 0.0;
        const Vec2 a = segments[seg][0];
        const Vec2 b = segments[seg][1];
        out.points.push_back({a.x + local * (b.x - a.x), a.y + local * (b.y - a.y)});
    }
    return out;
}

template <class Field>
ZeroSet extract_zero_set(Field&& field, const Aabb& bounds, int resolution,
                         int samples) {
    return sample_segments(marching_squares(field, bounds, resolution), samples);
}

inline ZeroSet extract_zero_set(const GridConfig& cfg, const Decoder& dec,
                                std::span<const double> theta, int resolution,
                                int samples) {
    FieldScratch scratch;
    scratch.configure(cfg, dec);
    return extract_zero_set(
        [&](Vec2 p) { return query_sdf(cfg, dec, theta, p, scratch); }, cfg.bounds,
        resolution, samples);
}

inline double nearest_distance(Vec2 p, const ZeroSet& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : set.points) best = std::min(best, (p - q).norm());
    return best;
}

// Mean distance from reconstructed points to the nearest ground-truth point;
// empty reconstructions have no defined value ("no surface").
inline std::optional<double> artifacts(const ZeroSet& pred, const ZeroSet& gt) {
    if (pred.points.empty() || gt.points.empty()) return std::nullopt;
    double sum = 0.0;
    for (const Vec2& p : pred.points) sum += nearest_distance(p, gt);
    return sum / static_cast<double>(pred.points.size());
}

// Mean distance from ground-truth points to the nearest reconstructed point.
inline std::optional<double> holes(const ZeroSet& pred, const ZeroSet& gt) {
    if (pred.points.empty() || gt.points.empty()) return std::nullopt;
    double sum = 0.0;
    for (const Vec2& p : gt.points) sum += nearest_distance(p, pred);
    return sum / static_cast<double>(gt.points.size());
}

// Percentage of ground-truth points within `threshold` of the reconstruction.
inline double completion_ratio(const ZeroSet& pred, const ZeroSet& gt,
                               double threshold) {
    if (gt.points.empty()) return 0.0;
    if (pred.points.empty()) return 0.0;
    size_t covered = 0;
    for (const Vec2& p : gt.points) {
        if (nearest_distance(p, pred) <= threshold) ++covered;
    }
    return 100.0 * static_cast<double>(covered) / static_cast<double>(gt.points.size());
}

// Max pairwise infinity-norm distance between agents' parameter vectors.
inline double disagreement(std::span<const std::vector<double>* const> thetas) {
    double worst = 0.0;
    for (size_t i = 0; i < thetas.size(); ++i) {
        for (size_t j = i + 1; j < thetas.size(); ++j) {
            const std::vector<double>& a = *thetas[i];
            const std::vector<double>& b = *thetas[j];
            for (size_t k = 0; k < a.size(); ++k) {
                worst = std::max(worst, std::abs(a[k] - b[k]));
            }
        }
    }
    return worst;
}

}  // namespace comap
