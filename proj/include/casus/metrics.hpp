#pragma once

// Clinical metric functions mapping contours to scalars: LV area, fractional
// area change, Simpson biplane volume, and ejection fraction. Physical units
// enter here and nowhere else: a point (x, y) in normalized coordinates maps
// to (x * sx, y * sy) millimetres with spacing_mm = (sy, sx).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "casus/types.hpp"

namespace casus {

enum class MetricKind : std::uint8_t { Area, Fac, Volume, Ef };

inline std::string to_string(MetricKind m) {
    switch (m) {
        case MetricKind::Area: return "area";
        case MetricKind::Fac: return "fac";
        case MetricKind::Volume: return "volume";
        case MetricKind::Ef: return "ef";
    }
    return "unknown";
}
inline MetricKind metric_kind_from_string(const std::string& s) {
    if (s == "area") return MetricKind::Area;
    if (s == "fac") return MetricKind::Fac;
    if (s == "volume") return MetricKind::Volume;
    if (s == "ef") return MetricKind::Ef;
    throw std::invalid_argument("unknown metric: " + s);
}

// A metric value is clinically irrelevant (valid = false) when Area/Volume
// are non-positive or FAC/EF fall outside (0,1).
struct MetricValue {
    MetricKind kind = MetricKind::Area;
    double value = 0.0;
    bool valid = true;
};

inline bool metric_value_acceptable(MetricKind kind, double value) {
    switch (kind) {
        case MetricKind::Area:
        case MetricKind::Volume:
            return value > 0.0;
        case MetricKind::Fac:
        case MetricKind::Ef:
            return value > 0.0 && value < 1.0;
    }
    return false;
}

namespace detail {
inline Vec2 to_mm(const Vec2& p, const Eigen::Vector2d& spacing_mm) {
    return {p.x() * spacing_mm(1), p.y() * spacing_mm(0)};
}
}  // namespace detail

// |shoelace|/2 over the closed polygon, scaled by spacing_x * spacing_y.
inline double polygon_area(const Contour& contour) {
    const auto& pts = contour.points;
    const int n = static_cast<int>(pts.size());
    if (n < 3) return 0.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return std::abs(s) / 2.0 * contour.spacing_mm(0) * contour.spacing_mm(1);
}

inline double fac(double area_ed, double area_es) {
    if (!(area_ed > 0.0)) throw std::domain_error("fac: end-diastolic area must be positive");
    return (area_ed - area_es) / area_ed;
}

inline double ef(double vol_ed, double vol_es) {
    if (!(vol_ed > 0.0)) throw std::domain_error("ef: end-diastolic volume must be positive");
    return (vol_ed - vol_es) / vol_ed;
}

namespace detail {

struct ViewAxis {
    Vec2 basal_mid;  // mm
    Vec2 apex;       // mm
    std::vector<Vec2> pts_mm;
};

inline ViewAxis view_axis(const Contour& c) {
    ViewAxis v;
    v.pts_mm.reserve(c.points.size());
    for (const auto& p : c.points) v.pts_mm.push_back(to_mm(p, c.spacing_mm));
    const Vec2 b1 = v.pts_mm[c.landmarks.basal1];
    const Vec2 b2 = v.pts_mm[c.landmarks.basal2];
    v.basal_mid = 0.5 * (b1 + b2);
    v.apex = v.pts_mm[c.landmarks.apex];
    return v;
}

// Chord width of the closed contour perpendicular to the axis at fraction t
// of the way from the basal midpoint to the apex. Multiple crossings take
// the outermost pair.
inline double chord_width(const ViewAxis& v, const Vec2& axis_unit, double axis_len, double t) {
    const Vec2 center = v.basal_mid + t * axis_len * axis_unit;
    const Vec2 normal(-axis_unit.y(), axis_unit.x());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(v.pts_mm.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& a = v.pts_mm[i];
        const Vec2& b = v.pts_mm[(i + 1) % n];
        // signed distance along the axis relative to the chord line
        const double da = (a - center).dot(axis_unit);
        const double db = (b - center).dot(axis_unit);
        if ((da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0)) continue;
        if (da == db) continue;
        const double w = da / (da - db);
        const Vec2 x = a + w * (b - a);
        const double off = (x - center).dot(normal);
        lo = std::min(lo, off);
        hi = std::max(hi, off);
    }
    if (!(hi > lo)) return 0.0;
    return hi - lo;
}

}  // namespace detail

// Method of disks: V = (pi/4) (L/n) sum a_i b_i with L the longer of the two
// apex-to-basal-midpoint axes and chord widths measured at the midpoints of
// n equally spaced levels along each view's own axis. Result in mL.
inline double simpson_biplane_volume(const Contour& a4c, const Contour& a2c, int n_disks = 20) {
    if (n_disks < 1) throw std::invalid_argument("simpson_biplane_volume: n_disks must be >= 1");
    const detail::ViewAxis v4 = detail::view_axis(a4c);
    const detail::ViewAxis v2 = detail::view_axis(a2c);
    const double len4 = (v4.apex - v4.basal_mid).norm();
    const double len2 = (v2.apex - v2.basal_mid).norm();
    if (len4 <= 0.0 || len2 <= 0.0) throw std::domain_error("simpson_biplane_volume: degenerate long axis");
    const Vec2 u4 = (v4.apex - v4.basal_mid) / len4;
    const Vec2 u2 = (v2.apex - v2.basal_mid) / len2;
    const double long_axis = std::max(len4, len2);
    double sum = 0.0;
    for (int i = 0; i < n_disks; ++i) {
        const double t = (i + 0.5) / n_disks;
        sum += detail::chord_width(v4, u4, len4, t) * detail::chord_width(v2, u2, len2, t);
    }
    const double volume_mm3 = std::numbers::pi / 4.0 * (long_axis / n_disks) * sum;
    return volume_mm3 / 1000.0;  // mm^3 -> mL
}

}  // namespace casus
