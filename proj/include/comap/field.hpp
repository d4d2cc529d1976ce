#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "comap/decoder.hpp"
#include "comap/encoding.hpp"
#include "comap/grid.hpp"

namespace comap {

inline double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Bell-shaped rendering weight, peaking at the surface (s = 0).
inline double ray_weight(double s, double tr) {
    if (!(tr > 0.0)) throw std::invalid_argument("ray_weight: need tr > 0");
    return logistic(s / tr) * logistic(-s / tr);
}

// d(ray_weight)/ds.
inline double ray_weight_dds(double s, double tr) {
    const double a = s / tr;
    const double w = logistic(a) * logistic(-a);
    return w * (1.0 - 2.0 * logistic(a)) / tr;
}

// Reusable scratch for field queries; keeps hot paths allocation-free.
struct FieldScratch {
    std::vector<double> encoding;
    std::vector<double> features;

    void configure(const GridConfig& cfg, const Decoder& dec) {
        encoding.assign(dec.kind == Decoder::Kind::FixedAffine
                            ? static_cast<size_t>(2 * dec.bins)
                            : 0,
                        0.0);
        features.assign(static_cast<size_t>(cfg.levels() * cfg.feature_dim), 0.0);
    }
};

inline double query_sdf(const GridConfig& cfg, const Decoder& dec,
                        std::span<const double> theta, Vec2 p, FieldScratch& scratch) {
    if (theta.size() != cfg.param_count()) {
        throw std::invalid_argument("query_sdf: parameter vector length mismatch");
    }
    interpolate(cfg, theta, p, scratch.features);
    if (dec.kind == Decoder::Kind::FixedAffine) {
        one_blob_encode(p, cfg.bounds, dec.bins, scratch.encoding);
    }
    return dec.eval(scratch.encoding, scratch.features);
}

inline double query_sdf(const GridConfig& cfg, const Decoder& dec,
                        std::span<const double> theta, Vec2 p) {
    FieldScratch scratch;
    scratch.configure(cfg, dec);
    return query_sdf(cfg, dec, theta, p, scratch);
}

// Adds coeff * dS/dTheta at p into a dense gradient accumulator. The decoders
// are affine in the features, so the sparse Jacobian is the bilinear stencil
// scaled by the decoder's feature weights.
inline void accumulate_sdf_grad(const GridConfig& cfg, const Decoder& dec, Vec2 p,
                                double coeff, std::span<double> grad) {
    const int F = cfg.feature_dim;
    for (int l = 0; l < cfg.levels(); ++l) {
        const LevelInterp li = level_interp(cfg, l, p);
        for (int corner = 0; corner < 4; ++corner) {
            const double w = li.w[corner];
            if (w == 0.0) continue;
            const size_t base = cfg.param_index(l, li.ix + kCornerDx[corner],
                                                li.iy + kCornerDy[corner], 0);
            for (int c = 0; c < F; ++c) {
                const double dg = dec.feat_grad(l, c);
                if (dg != 0.0) grad[base + static_cast<size_t>(c)] += coeff * w * dg;
            }
        }
    }
}

// Sparse gradient of the SDF query with respect to the parameter vector;
// at most 4 * levels * feature_dim nonzeros.
inline std::vector<std::pair<size_t, double>> query_grad(const GridConfig& cfg,
                                                         const Decoder& dec,
                                                         std::span<const double> theta,
                                                         Vec2 p) {
    if (theta.size() != cfg.param_count()) {
        throw std::invalid_argument("query_grad: parameter vector length mismatch");
    }
    std::vector<std::pair<size_t, double>> out;
    const int F = cfg.feature_dim;
    for (int l = 0; l < cfg.levels(); ++l) {
        const LevelInterp li = level_interp(cfg, l, p);
        for (int corner = 0; corner < 4; ++corner) {
            const size_t base = cfg.param_index(l, li.ix + kCornerDx[corner],
                                                li.iy + kCornerDy[corner], 0);
            for (int c = 0; c < F; ++c) {
                const double g = li.w[corner] * dec.feat_grad(l, c);
                if (g != 0.0) out.emplace_back(base + static_cast<size_t>(c), g);
            }
        }
    }
    return out;
}

// Normalized weighted mean with a floored denominator; invariant to uniform
// rescaling of the weights.
inline double weighted_depth(std::span<const double> distances,
                             std::span<const double> weights) {
    constexpr double kFloor = 1e-8;
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < distances.size(); ++i) {
        num += weights[i] * distances[i];
        den += weights[i];
    }
    return num / std::max(den, kFloor);
}

// Rendered depth along a ray from the map's SDF at the given sample distances.
inline double render_depth(const GridConfig& cfg, const Decoder& dec,
                           std::span<const double> theta, Vec2 origin, Vec2 dir,
                           std::span<const double> distances, double tr) {
    if (distances.size() < 2) throw std::invalid_argument("render_depth: need M >= 2");
    FieldScratch scratch;
    scratch.configure(cfg, dec);
    std::vector<double> weights(distances.size());
    for (size_t i = 0; i < distances.size(); ++i) {
        const double s = query_sdf(cfg, dec, theta, origin + distances[i] * dir, scratch);
        weights[i] = ray_weight(s, tr);
    }
    return weighted_depth(distances, weights);
}

}  // namespace comap
