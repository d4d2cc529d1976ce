#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/grid.hpp"
#include "comap/objective.hpp"

namespace comap {

// Per-parameter counts of nonzero-gradient updates; the frequency-based
// epistemic uncertainty proxy (more updates = lower uncertainty).
using UncertaintyCounts = std::vector<uint32_t>;

inline void update_counts(UncertaintyCounts& counts, const GradReport& report) {
    if (counts.size() != report.mask.size()) {
        throw std::invalid_argument("update_counts: length mismatch");
    }
    for (size_t i = 0; i < counts.size(); ++i) {
        counts[i] += report.mask[i] ? 1u : 0u;
    }
}

struct WeightBounds {
    double beta_l = 0.2;
    double beta_u = 1.0;
    double w_min = 1e-3;  // floor keeping every diagonal weight positive

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(beta_l > 0.0) || !(beta_l < beta_u)) {
            errors.push_back("weights: need 0 < beta_l < beta_u");
        }
        if (!(w_min > 0.0) || w_min > beta_l) {
            errors.push_back("weights.w_min: need 0 < w_min <= beta_l");
        }
        return errors;
    }
};

struct WeightPair {
    std::vector<double> w_ij;
    std::vector<double> w_ji;
    double epsilon = 0.0;
    double zeta = 0.0;
    bool degenerate = false;  // all counts equal: uniform fallback
};

// Linear scaling of the two agents' counts into consensus weights. A single
// (epsilon, zeta) computed from the elementwise count sum is applied to both
// sides, preserving the proportional relationship between the agents'
// counts. Each weight is clamped to [w_min, beta_u]; the affine map can
// otherwise go negative wherever a count falls below min(u_i + u_j).
inline WeightPair compute_weights(const UncertaintyCounts& u_i,
                                  const UncertaintyCounts& u_j,
                                  const WeightBounds& bounds) {
    if (u_i.size() != u_j.size()) {
        throw std::invalid_argument("compute_weights: length mismatch");
    }
    const size_t n = u_i.size();
    WeightPair out;
    out.w_ij.resize(n);
    out.w_ji.resize(n);

    uint64_t lo = ~0ull, hi = 0;
    for (size_t k = 0; k < n; ++k) {
        const uint64_t sum = static_cast<uint64_t>(u_i[k]) + u_j[k];
        lo = std::min(lo, sum);
        hi = std::max(hi, sum);
    }
    if (n == 0 || lo == hi) {
        const double w = 0.5 * (bounds.beta_l + bounds.beta_u);
        std::fill(out.w_ij.begin(), out.w_ij.end(), w);
        std::fill(out.w_ji.begin(), out.w_ji.end(), w);
        out.degenerate = true;
        return out;
    }
    out.epsilon = (bounds.beta_u - bounds.beta_l) / static_cast<double>(hi - lo);
    out.zeta = bounds.beta_l - out.epsilon * static_cast<double>(lo);
    for (size_t k = 0; k < n; ++k) {
        out.w_ij[k] = std::clamp(out.epsilon * u_i[k] + out.zeta, bounds.w_min,
                                 bounds.beta_u);
        out.w_ji[k] = std::clamp(out.epsilon * u_j[k] + out.zeta, bounds.w_min,
                                 bounds.beta_u);
    }
    return out;
}

struct VertexCount {
    int level = 0;
    int ix = 0;
    int iy = 0;
    uint64_t count = 0;  // summed over feature channels
};

// Unflattens the count vector through the grid bijection, one record per
// vertex with channel counts aggregated.
inline std::vector<VertexCount> export_uncertainty(const UncertaintyCounts& counts,
                                                   const GridConfig& cfg) {
    if (counts.size() != cfg.param_count()) {
        throw std::invalid_argument("export_uncertainty: length mismatch");
    }
    std::vector<VertexCount> records;
    records.reserve(counts.size() / static_cast<size_t>(cfg.feature_dim));
    for (int l = 0; l < cfg.levels(); ++l) {
        const int vps = static_cast<int>(cfg.verts_per_side(l));
        for (int iy = 0; iy < vps; ++iy) {
            for (int ix = 0; ix < vps; ++ix) {
                VertexCount rec{l, ix, iy, 0};
                for (int c = 0; c < cfg.feature_dim; ++c) {
                    rec.count += counts[cfg.param_index(l, ix, iy, c)];
                }
                records.push_back(rec);
            }
        }
    }
    return records;
}

inline void write_uncertainty_csv(std::ostream& out,
                                  const std::vector<VertexCount>& records) {
    out << "level,ix,iy,count\n";
    for (const VertexCount& r : records) {
        out << r.level << ',' << r.ix << ',' << r.iy << ',' << r.count << '\n';
    }
}

}  // namespace comap
