#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/rng.hpp"
#include "comap/scene.hpp"

namespace comap {

struct SensorPose {
    Vec2 position;
    double heading = 0.0;    // radians
    double fov = std::numbers::pi / 2.0;
    int n_rays = 1;
    double max_range = 1.0;
};

inline std::vector<std::string> validate(const SensorPose& pose) {
    std::vector<std::string> errors;
    if (!(pose.fov > 0.0) || pose.fov > 2.0 * std::numbers::pi + 1e-12) {
        errors.push_back("sensor.fov: must be in (0, 2*pi]");
    }
    if (pose.n_rays < 1) errors.push_back("sensor.n_rays: must be >= 1");
    if (!(pose.max_range > 0.0)) errors.push_back("sensor.max_range: must be > 0");
    return errors;
}

// One supervision point along a ray. `target_sdf` is the ray-wise depth
// difference clamped to the truncation band; `near_surface` marks samples
// inside the band.
struct SampleObs {
    float distance = 0.0f;
    float target_sdf = 0.0f;
    bool near_surface = false;
};

struct RayObs {
    Vec2 origin;
    Vec2 dir;  // unit
    double measured_depth = 0.0;
    bool hit = false;
    uint32_t sample_begin = 0;
    uint32_t sample_count = 0;
};

struct ObservationBatch {
    std::vector<RayObs> rays;
    std::vector<SampleObs> samples;

    void append(const ObservationBatch& other) {
        const uint32_t base = static_cast<uint32_t>(samples.size());
        for (RayObs r : other.rays) {
            r.sample_begin += base;
            rays.push_back(r);
        }
        samples.insert(samples.end(), other.samples.begin(), other.samples.end());
    }
};

struct TraceResult {
    double depth = 0.0;
    bool hit = false;
};

// Sphere tracing against the exact scene SDF. Steps by the SDF value, which
// for an exact distance field never overshoots a surface.
inline TraceResult sphere_trace(const Scene& scene, Vec2 origin, Vec2 dir,
                                double max_range) {
    constexpr double kSurfaceEps = 1e-5;
    constexpr int kMaxSteps = 256;
    double t = 0.0;
    for (int step = 0; step < kMaxSteps; ++step) {
        const double s = gt_sdf(scene, origin + t * dir);
        if (std::abs(s) < kSurfaceEps) return {t, true};
        t += s;
        if (t >= max_range) return {max_range, false};
    }
    // Step budget exhausted (grazing ray); report a hit only when the march
    // stalled at the surface.
    const double s = gt_sdf(scene, origin + t * dir);
    return {t, std::abs(s) < 1e-3};
}

// Stratified sample distances on (0, min(gt_depth + tr, max_range)] with
// per-bin jitter. Labels follow the ray-wise depth difference convention;
// a miss is encoded as gt_depth = +inf, which lands every sample in the
// free-space regime with target +tr.
inline void sample_along_ray(double gt_depth, double max_range, int n_samples, double tr,
                             std::mt19937_64& rng, std::vector<SampleObs>& out) {
    if (n_samples < 2) throw std::invalid_argument("sample_along_ray: need M >= 2");
    if (!(tr > 0.0)) throw std::invalid_argument("sample_along_ray: need tr > 0");
    const double d_max = std::min(gt_depth + tr, max_range);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < n_samples; ++k) {
        const double jitter = 1.0 - uni(rng);  // (0, 1]
        const double d = d_max * (static_cast<double>(k) + jitter) /
                         static_cast<double>(n_samples);
        SampleObs s;
        s.distance = static_cast<float>(d);
        const double diff = gt_depth - d;
        s.target_sdf = static_cast<float>(std::clamp(diff, -tr, tr));
        s.near_surface = std::abs(diff) < tr;
        out.push_back(s);
    }
}

// Simulated depth scan: per ray sphere-traced depth plus Gaussian noise, and
// M labeled samples along the ray. Pure function of its arguments.
inline ObservationBatch capture_scan(const Scene& scene, const SensorPose& pose,
                                     int samples_per_ray, double truncation,
                                     double noise_std, uint64_t seed) {
    if (gt_sdf(scene, pose.position) <= 0.0) {
        throw std::invalid_argument("capture_scan: sensor pose lies inside an obstacle");
    }
    auto pose_errors = validate(pose);
    if (!pose_errors.empty()) {
        throw std::invalid_argument("capture_scan: " + pose_errors.front());
    }

    ObservationBatch batch;
    batch.rays.reserve(static_cast<size_t>(pose.n_rays));
    batch.samples.reserve(static_cast<size_t>(pose.n_rays) * samples_per_ray);
    std::mt19937_64 rng = seeded_rng(seed, Stream::Capture);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int k = 0; k < pose.n_rays; ++k) {
        const double frac = pose.n_rays == 1
                                ? 0.0
                                : static_cast<double>(k) / (pose.n_rays - 1) - 0.5;
        const double angle = pose.heading + pose.fov * frac;
        RayObs ray;
        ray.origin = pose.position;
        ray.dir = {std::cos(angle), std::sin(angle)};
        const TraceResult trace = sphere_trace(scene, ray.origin, ray.dir, pose.max_range);
        ray.hit = trace.hit;
        if (trace.hit) {
            double depth = trace.depth;
            if (noise_std > 0.0) depth += noise_std * gauss(rng);
            ray.measured_depth = std::clamp(depth, 1e-4, pose.max_range);
        } else {
            ray.measured_depth = pose.max_range;
        }
        const double label_depth =
            trace.hit ? trace.depth : std::numeric_limits<double>::infinity();
        ray.sample_begin = static_cast<uint32_t>(batch.samples.size());
        sample_along_ray(label_depth, pose.max_range, samples_per_ray, truncation, rng,
                         batch.samples);
        ray.sample_count = static_cast<uint32_t>(samples_per_ray);
        batch.rays.push_back(ray);
    }
    return batch;
}

}  // namespace comap
