#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "comap/geometry.hpp"

namespace comap {

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

struct Rect {
    Vec2 center;
    Vec2 half_extents;
};

using Shape = std::variant<Circle, Rect>;

// Ground-truth world: solid primitives inside an axis-aligned room. With
// `walls` set, the room boundary itself counts as surface (free space is
// the inside of the box).
struct Scene {
    Aabb bounds{{0.0, 0.0}, {1.0, 1.0}};
    std::vector<Shape> shapes;
    bool walls = true;

    std::vector<std::string> validate() const;
};

inline double sdf(const Circle& c, Vec2 p) { return (p - c.center).norm() - c.radius; }

inline double sdf(const Rect& r, Vec2 p) {
    const double qx = std::abs(p.x - r.center.x) - r.half_extents.x;
    const double qy = std::abs(p.y - r.center.y) - r.half_extents.y;
    const double ox = std::max(qx, 0.0);
    const double oy = std::max(qy, 0.0);
    return std::sqrt(ox * ox + oy * oy) + std::min(std::max(qx, qy), 0.0);
}

// Distance to the room boundary, positive inside the box.
inline double wall_sdf(const Aabb& b, Vec2 p) {
    return std::min(std::min(p.x - b.lo.x, b.hi.x - p.x),
                    std::min(p.y - b.lo.y, b.hi.y - p.y));
}

inline double gt_sdf(const Scene& scene, Vec2 p) {
    double d = scene.walls ? wall_sdf(scene.bounds, p)
                           : std::numeric_limits<double>::infinity();
    for (const Shape& s : scene.shapes) {
        d = std::min(d, std::visit([&](const auto& shape) { return sdf(shape, p); }, s));
    }
    return d;
}

inline std::vector<std::string> Scene::validate() const {
    std::vector<std::string> errors;
    if (bounds.width() <= 0.0 || bounds.height() <= 0.0) {
        errors.push_back("scene.bounds: must have positive extent");
    }
    if (shapes.empty() && !walls) {
        errors.push_back("scene.shapes: empty shape list requires walls");
    }
    for (size_t i = 0; i < shapes.size(); ++i) {
        const std::string path = "scene.shapes[" + std::to_string(i) + "]";
        std::visit(
            [&](const auto& shape) {
                using T = std::decay_t<decltype(shape)>;
                if constexpr (std::is_same_v<T, Circle>) {
                    if (shape.radius <= 0.0) {
                        errors.push_back(path + ".radius: must be > 0");
                    }
                    const Vec2 c = shape.center;
                    const double r = shape.radius;
                    if (c.x - r < bounds.lo.x || c.x + r > bounds.hi.x ||
                        c.y - r < bounds.lo.y || c.y + r > bounds.hi.y) {
                        errors.push_back(path + ": circle extends outside scene bounds");
                    }
                } else {
                    if (shape.half_extents.x <= 0.0 || shape.half_extents.y <= 0.0) {
                        errors.push_back(path + ".half_extents: must be > 0");
                    }
                    const Vec2 c = shape.center;
                    const Vec2 h = shape.half_extents;
                    if (c.x - h.x < bounds.lo.x || c.x + h.x > bounds.hi.x ||
                        c.y - h.y < bounds.lo.y || c.y + h.y > bounds.hi.y) {
                        errors.push_back(path + ": rect extends outside scene bounds");
                    }
                }
            },
            shapes[i]);
    }
    return errors;
}

}  // namespace comap
