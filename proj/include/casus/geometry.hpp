#pragma once

// Contour and mask primitives: validation, rasterization, Dice.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casus/types.hpp"

namespace casus {

enum class ContourIssue {
    TooFewPoints,
    EvenPointCount,
    LandmarkOutOfRange,
    LandmarkDuplicate,
    LandmarkOrder,
    SelfIntersection,
};

inline std::string to_string(ContourIssue c) {
    switch (c) {
        case ContourIssue::TooFewPoints: return "too few points";
        case ContourIssue::EvenPointCount: return "even point count";
        case ContourIssue::LandmarkOutOfRange: return "landmark out of range";
        case ContourIssue::LandmarkDuplicate: return "duplicate landmarks";
        case ContourIssue::LandmarkOrder: return "landmarks out of order";
        case ContourIssue::SelfIntersection: return "self-intersection";
    }
    return "unknown";
}

struct ContourValidation {
    std::optional<Contour> contour;  // set when valid
    std::vector<ContourIssue> issues;

    [[nodiscard]] bool ok() const { return contour.has_value(); }
    [[nodiscard]] bool has(ContourIssue c) const {
        return std::find(issues.begin(), issues.end(), c) != issues.end();
    }
};

namespace detail {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double eps = 1e-12) {
    if (std::abs(cross2(a, b, p)) > eps) return false;
    return p.x() >= std::min(a.x(), b.x()) - eps && p.x() <= std::max(a.x(), b.x()) + eps &&
           p.y() >= std::min(a.y(), b.y()) - eps && p.y() <= std::max(a.y(), b.y()) + eps;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross2(c, d, a);
    const double d2 = cross2(c, d, b);
    const double d3 = cross2(a, b, c);
    const double d4 = cross2(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(a, c, d)) return true;
    if (d2 == 0 && on_segment(b, c, d)) return true;
    if (d3 == 0 && on_segment(c, a, b)) return true;
    if (d4 == 0 && on_segment(d, a, b)) return true;
    return false;
}

}  // namespace detail

// Closed polygon over the point sequence (last point joins back to the
// first; with canonical landmarks that closing edge is the basal chord).
inline bool polygon_self_intersects(const std::vector<Vec2>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 3) return false;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        for (int j = i + 1; j < n; ++j) {
            // skip segments sharing an endpoint
            if (j == i || (j + 1) % n == i || j == (i + 1) % n) continue;
            if (detail::segments_intersect(a, b, pts[j], pts[(j + 1) % n])) return true;
        }
    }
    return false;
}

inline ContourValidation validate_contour(const std::vector<Vec2>& points, Landmarks landmarks,
                                          Eigen::Vector2d spacing_mm = {1.0, 1.0},
                                          View view = View::A4C, Frame frame = Frame::ED) {
    ContourValidation out;
    const int k = static_cast<int>(points.size());
    if (k < 5) out.issues.push_back(ContourIssue::TooFewPoints);
    if (k % 2 == 0) out.issues.push_back(ContourIssue::EvenPointCount);
    const int lm[3] = {landmarks.basal1, landmarks.apex, landmarks.basal2};
    bool in_range = true;
    for (int v : lm) {
        if (v < 0 || v >= k) {
            out.issues.push_back(ContourIssue::LandmarkOutOfRange);
            in_range = false;
            break;
        }
    }
    if (in_range) {
        if (lm[0] == lm[1] || lm[1] == lm[2] || lm[0] == lm[2])
            out.issues.push_back(ContourIssue::LandmarkDuplicate);
        else if (!(lm[0] < lm[1] && lm[1] < lm[2]))
            out.issues.push_back(ContourIssue::LandmarkOrder);
    }
    if (polygon_self_intersects(points)) out.issues.push_back(ContourIssue::SelfIntersection);
    if (out.issues.empty()) {
        Contour c;
        c.points = points;
        c.landmarks = landmarks;
        c.spacing_mm = spacing_mm;
        c.view = view;
        c.frame = frame;
        out.contour = std::move(c);
    }
    return out;
}

inline ContourValidation validate_contour(const Contour& c) {
    return validate_contour(c.points, c.landmarks, c.spacing_mm, c.view, c.frame);
}

// Pixel-center coordinates under the normalized convention (1-based grid
// formula): column j of W maps to (2j-(W+1))/W, row i of H to (2i-(H+1))/H.
inline double pixel_center_x(int j, int w) { return (2.0 * (j + 1) - (w + 1)) / w; }
inline double pixel_center_y(int i, int h) { return (2.0 * (i + 1) - (h + 1)) / h; }

// Even-odd point-in-polygon; points on the boundary count as inside.
inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    const int n = static_cast<int>(poly.size());
    if (n < 3) return false;
    for (int i = 0; i < n; ++i) {
        if (detail::on_segment(p, poly[i], poly[(i + 1) % n])) return true;
    }
    bool inside = false;
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        const bool crosses = (a.y() > p.y()) != (b.y() > p.y());
        if (crosses) {
            const double x_at = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_at) inside = !inside;
        }
    }
    return inside;
}

struct RasterizeResult {
    SegmentationMask mask;
    bool degenerate = false;  // zero-area polygon; mask left empty
};

inline double shoelace_area_normalized(const std::vector<Vec2>& pts) {
    const int n = static_cast<int>(pts.size());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return std::abs(s) / 2.0;
}

inline RasterizeResult rasterize_contour(const Contour& contour, int h, int w) {
    if (h < 8 || w < 8) throw std::invalid_argument("rasterization grid must be at least 8x8");
    RasterizeResult out;
    out.mask = SegmentationMask(h, w);
    if (shoelace_area_normalized(contour.points) <= 0.0) {
        out.degenerate = true;
        return out;
    }
    double min_y = 1e30, max_y = -1e30, min_x = 1e30, max_x = -1e30;
    for (const auto& p : contour.points) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    for (int i = 0; i < h; ++i) {
        const double y = pixel_center_y(i, h);
        if (y < min_y || y > max_y) continue;
        for (int j = 0; j < w; ++j) {
            const double x = pixel_center_x(j, w);
            if (x < min_x || x > max_x) continue;
            if (point_in_polygon({x, y}, contour.points)) out.mask.set(i, j, 1);
        }
    }
    return out;
}

// 2|A.B| / (|A|+|B|); both empty counts as perfect agreement.
inline double dice(const SegmentationMask& a, const SegmentationMask& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("dice: mask shapes differ");
    std::size_t inter = 0, total = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        inter += static_cast<std::size_t>(a.data[i] & b.data[i]);
        total += static_cast<std::size_t>(a.data[i]) + b.data[i];
    }
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

}  // namespace casus
