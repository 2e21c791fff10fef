#pragma once

// Domain value types shared across the library.
//
// Coordinate convention: x is the column axis, y the row axis, both
// normalized to [-1,1] over the image extent. Physical units enter only in
// the clinical-metrics layer through spacing_mm (mm per unit normalized
// coordinate, per axis).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "casus/linalg.hpp"

namespace casus {

enum class View : std::uint8_t { A2C, A4C };
enum class Frame : std::uint8_t { ED, ES };

inline std::string to_string(View v) { return v == View::A2C ? "A2C" : "A4C"; }
inline std::string to_string(Frame f) { return f == Frame::ED ? "ED" : "ES"; }

inline View view_from_string(const std::string& s) {
    if (s == "A2C") return View::A2C;
    if (s == "A4C") return View::A4C;
    throw std::invalid_argument("unknown view: " + s);
}
inline Frame frame_from_string(const std::string& s) {
    if (s == "ED") return Frame::ED;
    if (s == "ES") return Frame::ES;
    throw std::invalid_argument("unknown frame: " + s);
}

struct Landmarks {
    int basal1 = 0;
    int apex = 0;
    int basal2 = 0;
};

struct Contour {
    std::vector<Vec2> points;       // ordered basal1 -> apex -> basal2
    Landmarks landmarks;
    Eigen::Vector2d spacing_mm{1.0, 1.0};  // (sy, sx)
    View view = View::A4C;
    Frame frame = Frame::ED;

    [[nodiscard]] int k() const { return static_cast<int>(points.size()); }

    // 2K vector, interleaved (x0, y0, x1, y1, ...)
    [[nodiscard]] Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(2 * points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            v(2 * i) = points[i].x();
            v(2 * i + 1) = points[i].y();
        }
        return v;
    }

    static Contour from_flat(const Eigen::VectorXd& v, Landmarks lm,
                             Eigen::Vector2d spacing = {1.0, 1.0},
                             View view = View::A4C, Frame frame = Frame::ED) {
        if (v.size() % 2 != 0) throw std::invalid_argument("flat contour vector must have even size");
        Contour c;
        c.points.resize(v.size() / 2);
        for (Eigen::Index i = 0; i < v.size() / 2; ++i) c.points[i] = {v(2 * i), v(2 * i + 1)};
        c.landmarks = lm;
        c.spacing_mm = spacing;
        c.view = view;
        c.frame = frame;
        return c;
    }
};

struct SegmentationMask {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> data;  // row-major, values in {0,1}

    SegmentationMask() = default;
    SegmentationMask(int height, int width) : h(height), w(width), data(static_cast<std::size_t>(height) * width, 0) {
        if (height <= 0 || width <= 0) throw std::invalid_argument("mask dimensions must be positive");
    }

    [[nodiscard]] std::uint8_t at(int i, int j) const { return data[static_cast<std::size_t>(i) * w + j]; }
    void set(int i, int j, std::uint8_t v) { data[static_cast<std::size_t>(i) * w + j] = v; }

    [[nodiscard]] std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : data) n += v;
        return n;
    }
};

struct PointGaussian {
    Vec2 mu = Vec2::Zero();
    Mat2 sigma = Mat2::Identity();
};

// Per-point 2D Gaussians for one image/frame; the network-output surrogate.
struct ContourDistribution {
    std::vector<PointGaussian> points;
    Landmarks landmarks;
    Eigen::Vector2d spacing_mm{1.0, 1.0};
    View view = View::A4C;
    Frame frame = Frame::ED;

    [[nodiscard]] int k() const { return static_cast<int>(points.size()); }

    [[nodiscard]] Eigen::VectorXd mean_flat() const {
        Eigen::VectorXd v(2 * points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            v(2 * i) = points[i].mu.x();
            v(2 * i + 1) = points[i].mu.y();
        }
        return v;
    }

    [[nodiscard]] Contour mean_contour() const {
        Contour c;
        c.points.reserve(points.size());
        for (const auto& p : points) c.points.push_back(p.mu);
        c.landmarks = landmarks;
        c.spacing_mm = spacing_mm;
        c.view = view;
        c.frame = frame;
        return c;
    }
};

}  // namespace casus
