#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "comap/geometry.hpp"

namespace comap {

// One-blob encoding: per axis, Gaussian bump activations at `bins` evenly
// spaced centers, sigma = 1/bins, on coordinates normalized to [0, 1].
// Output layout: x-axis bins followed by y-axis bins (2*bins values).
inline void one_blob_encode(Vec2 p, const Aabb& bounds, int bins, std::span<double> out) {
    if (bins < 2) throw std::invalid_argument("one_blob_encode: need bins >= 2");
    if (out.size() != static_cast<size_t>(2 * bins)) {
        throw std::invalid_argument("one_blob_encode: output size must be 2*bins");
    }
    const Vec2 q = bounds.clamp(p);
    const double coords[2] = {(q.x - bounds.lo.x) / bounds.width(),
                              (q.y - bounds.lo.y) / bounds.height()};
    const double sigma = 1.0 / bins;
    const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int axis = 0; axis < 2; ++axis) {
        for (int k = 0; k < bins; ++k) {
            const double center = (k + 0.5) / bins;
            const double d = coords[axis] - center;
            out[static_cast<size_t>(axis * bins + k)] = std::exp(-d * d * inv_2s2);
        }
    }
}

}  // namespace comap
