#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "comap/grid.hpp"
#include "comap/rng.hpp"

namespace comap {

// Decoder from (one-blob encoding, interpolated features) to an SDF value.
// Parameters are frozen for the whole mapping run; only the grid learns.
//
// identity-sum: s = sum over levels of the first feature channel. Keeps the
// objective convex per sample; used for algorithm verification.
// fixed-affine: s = w_enc . gamma(p) + w_feat . features + bias with weights
// drawn once from a named seed; the default for experiments.
struct Decoder {
    enum class Kind { IdentitySum, FixedAffine };

    Kind kind = Kind::IdentitySum;
    int feature_dim = 1;               // channels per level, from the grid
    int bins = 0;                      // one-blob bins (FixedAffine only)
    std::vector<double> enc_weights;   // 2 * bins
    std::vector<double> feat_weights;  // levels * feature_dim
    double bias = 0.0;

    static Decoder identity_sum(const GridConfig& cfg) {
        Decoder d;
        d.kind = Kind::IdentitySum;
        d.feature_dim = cfg.feature_dim;
        return d;
    }

    static Decoder fixed_affine(const GridConfig& cfg, uint64_t seed) {
        Decoder d;
        d.kind = Kind::FixedAffine;
        d.feature_dim = cfg.feature_dim;
        d.bins = cfg.oneblob_bins;
        std::mt19937_64 rng = seeded_rng(seed, Stream::DecoderInit);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        d.enc_weights.resize(static_cast<size_t>(2 * d.bins));
        for (double& w : d.enc_weights) w = 0.02 * gauss(rng);
        const size_t nf = static_cast<size_t>(cfg.levels() * cfg.feature_dim);
        d.feat_weights.resize(nf);
        for (double& w : d.feat_weights) {
            const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
            w = sign * (0.25 + 0.5 * uni(rng));  // magnitude bounded away from 0
        }
        d.bias = cfg.truncation;  // zero parameters decode to "all free space"
        return d;
    }

    double eval(std::span<const double> encoding, std::span<const double> features) const {
        if (kind == Kind::IdentitySum) {
            double s = 0.0;
            for (size_t i = 0; i < features.size();
                 i += static_cast<size_t>(feature_dim)) {
                s += features[i];
            }
            return s;
        }
        if (encoding.size() != enc_weights.size() ||
            features.size() != feat_weights.size()) {
            throw std::invalid_argument("Decoder::eval: input size mismatch");
        }
        double s = bias;
        for (size_t i = 0; i < encoding.size(); ++i) s += enc_weights[i] * encoding[i];
        for (size_t i = 0; i < features.size(); ++i) s += feat_weights[i] * features[i];
        return s;
    }

    // dS/dfeature for level l, channel c. Both decoders are affine in the
    // features, so the Jacobian is independent of the query point.
    double feat_grad(int level, int channel) const {
        if (kind == Kind::IdentitySum) return channel == 0 ? 1.0 : 0.0;
        return feat_weights[static_cast<size_t>(level * feature_dim + channel)];
    }
};

}  // namespace comap
