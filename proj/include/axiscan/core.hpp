// Shared primitives: vectors, bounding boxes, error types.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace axiscan {

using Vec3 = Eigen::Vector3d;

/// Base class for all recoverable errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input file could not be parsed; message carries the line/offset.
struct ParseError : Error {
    using Error::Error;
};

/// A profile could not be fit (too few points, rank-deficient system).
struct FitError : Error {
    using Error::Error;
};

/// Invalid configuration value (CLI/config-file level).
struct ConfigError : Error {
    using Error::Error;
};

constexpr double kUnevaluated = std::numeric_limits<double>::quiet_NaN();

inline bool is_unevaluated(double score) { return std::isnan(score); }

/// Axis-aligned bounding box. min <= max componentwise.
struct Aabb {
    Vec3 min{0, 0, 0};
    Vec3 max{0, 0, 0};

    Vec3 extent() const { return max - min; }

    double longest_edge() const { return extent().maxCoeff(); }

    /// Longest edge divided by the second-longest edge.
    double aspect_ratio() const {
        Vec3 e = extent();
        std::sort(e.data(), e.data() + 3);
        if (e[1] <= 0.0) throw Error("aspect_ratio: degenerate bounding box");
        return e[2] / e[1];
    }
};

/// Per-point binary ground truth (0 = nominal, 1 = anomalous).
using LabelVector = std::vector<std::uint8_t>;

struct PointCloud {
    std::vector<Vec3> points;
    LabelVector labels;          // empty, or one entry per point
    std::vector<double> scores;  // empty, or one entry per point; NaN = unevaluated

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_scores() const { return !scores.empty(); }

    Aabb bounds() const {
        if (points.empty()) throw Error("bounds: empty point cloud");
        Aabb box{points.front(), points.front()};
        for (const Vec3& p : points) {
            box.min = box.min.cwiseMin(p);
            box.max = box.max.cwiseMax(p);
        }
        return box;
    }

    /// Throws if labels/scores are present but not one-per-point, or if any
    /// coordinate is non-finite.
    void validate() const {
        if (has_labels() && labels.size() != points.size())
            throw Error("point cloud: label count does not match point count");
        if (has_scores() && scores.size() != points.size())
            throw Error("point cloud: score count does not match point count");
        for (const Vec3& p : points)
            if (!p.allFinite()) throw Error("point cloud: non-finite coordinate");
    }
};

struct NormalizeTransform {
    double scale = 1.0;  // normalized = (p - offset) * scale
    Vec3 offset{0, 0, 0};
};

/// Maps the bbox min corner to the origin and scales so the longest bbox
/// edge becomes 1. Labels and scores are carried through untouched.
inline std::pair<PointCloud, NormalizeTransform> normalize_to_unit_bbox(const PointCloud& cloud) {
    if (cloud.empty()) throw Error("normalize: empty point cloud");
    const Aabb box = cloud.bounds();
    const double longest = box.longest_edge();
    if (longest <= 0.0)
        throw Error("normalize: degenerate bounding box (all points identical)");

    NormalizeTransform t;
    t.offset = box.min;
    t.scale = 1.0 / longest;

    PointCloud out = cloud;
    for (Vec3& p : out.points) p = (p - t.offset) * t.scale;
    return {std::move(out), t};
}

}  // namespace axiscan
