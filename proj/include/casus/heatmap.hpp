#pragma once

// DSNT-style extraction of per-point Gaussian parameters from probability
// heatmaps, the Gaussian NLL objective, and the inverse renderer used for
// round-trip verification.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "casus/linalg.hpp"
#include "casus/types.hpp"

namespace casus {

// Grids are row-major float64 regardless of file precision.
using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct HeatmapStack {
    std::vector<Grid> grids;  // one H x W grid per contour point
    bool normalized = false;

    [[nodiscard]] int k() const { return static_cast<int>(grids.size()); }
    [[nodiscard]] int h() const { return grids.empty() ? 0 : static_cast<int>(grids[0].rows()); }
    [[nodiscard]] int w() const { return grids.empty() ? 0 : static_cast<int>(grids[0].cols()); }
};

// Coordinate maps I (x, column axis) and J (y, row axis) on [-1,1]:
// I_{i,j} = (2j-(W+1))/W and J_{i,j} = (2i-(H+1))/H with 1-based i,j.
inline std::pair<Grid, Grid> coordinate_maps(int h, int w) {
    if (h < 1 || w < 1) throw std::invalid_argument("coordinate_maps: H,W must be >= 1");
    Grid imap(h, w), jmap(h, w);
    for (int i = 0; i < h; ++i) {
        const double y = (2.0 * (i + 1) - (h + 1)) / h;
        for (int j = 0; j < w; ++j) {
            imap(i, j) = (2.0 * (j + 1) - (w + 1)) / w;
            jmap(i, j) = y;
        }
    }
    return {std::move(imap), std::move(jmap)};
}

// Clamp negatives to zero, then divide each grid by its sum.
inline Grid normalize_grid(const Grid& raw) {
    if (!raw.allFinite()) throw std::domain_error("normalize: non-finite heatmap entries");
    Grid z = raw.cwiseMax(0.0);
    const double total = z.sum();
    if (total <= 0.0) throw std::domain_error("normalize: heatmap has zero total mass");
    return z / total;
}

inline HeatmapStack normalize_heatmap(const HeatmapStack& raw) {
    HeatmapStack out;
    out.grids.reserve(raw.grids.size());
    for (const auto& g : raw.grids) out.grids.push_back(normalize_grid(g));
    out.normalized = true;
    return out;
}

namespace detail {
inline void require_normalized(const Grid& z) {
    if (std::abs(z.sum() - 1.0) > 1e-9 || z.minCoeff() < 0.0)
        throw std::invalid_argument("heatmap grid is not normalized");
}
}  // namespace detail

// Expectation of the (x, y) coordinates under the heatmap density:
// Frobenius inner products <Z,I>, <Z,J>.
inline Vec2 heatmap_mean(const Grid& z) {
    detail::require_normalized(z);
    auto [imap, jmap] = coordinate_maps(static_cast<int>(z.rows()), static_cast<int>(z.cols()));
    return {z.cwiseProduct(imap).sum(), z.cwiseProduct(jmap).sum()};
}

// Second central moments assembled into the 2x2 covariance
// [[V[x], C], [C, V[y]]]; PSD is enforced by eigenvalue clamping at zero.
inline Mat2 heatmap_covariance(const Grid& z, const Vec2& mu) {
    detail::require_normalized(z);
    auto [imap, jmap] = coordinate_maps(static_cast<int>(z.rows()), static_cast<int>(z.cols()));
    const Grid dx = imap.array() - mu.x();
    const Grid dy = jmap.array() - mu.y();
    const double var_x = z.cwiseProduct(dx.cwiseProduct(dx)).sum();
    const double var_y = z.cwiseProduct(dy.cwiseProduct(dy)).sum();
    const double cov = z.cwiseProduct(dx.cwiseProduct(dy)).sum();
    Mat2 sigma;
    sigma << var_x, cov, cov, var_y;
    return clamp_psd2(sigma);
}

inline PointGaussian extract_point_gaussian(const Grid& normalized) {
    PointGaussian g;
    g.mu = heatmap_mean(normalized);
    g.sigma = heatmap_covariance(normalized, g.mu);
    return g;
}

inline ContourDistribution extract_distribution(const HeatmapStack& stack, Landmarks landmarks,
                                                View view = View::A4C, Frame frame = Frame::ED) {
    const HeatmapStack norm = stack.normalized ? stack : normalize_heatmap(stack);
    ContourDistribution d;
    d.points.reserve(norm.grids.size());
    for (const auto& g : norm.grids) d.points.push_back(extract_point_gaussian(g));
    d.landmarks = landmarks;
    d.view = view;
    d.frame = frame;
    return d;
}

// Mean over points of 1/2 log|Sigma| + 1/2 r^T Sigma^-1 r.
inline double gaussian_nll(const ContourDistribution& dist, const Contour& target) {
    if (dist.k() != target.k()) throw std::invalid_argument("gaussian_nll: point counts differ");
    if (dist.k() == 0) throw std::invalid_argument("gaussian_nll: empty distribution");
    double total = 0.0;
    for (int k = 0; k < dist.k(); ++k) {
        Mat2 s = symmetrized(dist.points[k].sigma);
        double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
        if (!(det > 1e-30 * scale * scale)) {
            const double lam = jitter_scale(s);
            s(0, 0) += lam;
            s(1, 1) += lam;
            det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
            if (!(det > 0.0)) throw std::domain_error("gaussian_nll: singular covariance after jitter");
        }
        Mat2 inv;
        inv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
        inv /= det;
        const Vec2 r = dist.points[k].mu - target.points[k];
        total += 0.5 * std::log(det) + 0.5 * r.dot(inv * r);
    }
    return total / dist.k();
}

// Gaussian density at pixel centers, normalized to unit mass.
inline Grid render_gaussian_heatmap(const PointGaussian& g, int h, int w) {
    if (h < 1 || w < 1) throw std::invalid_argument("render: H,W must be >= 1");
    const Mat2 sigma = symmetrized(g.sigma);
    const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
    if (!(det > 0.0) || sigma(0, 0) <= 0.0) throw std::domain_error("render: covariance must be positive definite");
    Mat2 inv;
    inv << sigma(1, 1), -sigma(0, 1), -sigma(1, 0), sigma(0, 0);
    inv /= det;
    Grid z(h, w);
    for (int i = 0; i < h; ++i) {
        const double dy = (2.0 * (i + 1) - (h + 1)) / h - g.mu.y();
        for (int j = 0; j < w; ++j) {
            const double dx = (2.0 * (j + 1) - (w + 1)) / w - g.mu.x();
            const double q = inv(0, 0) * dx * dx + 2.0 * inv(0, 1) * dx * dy + inv(1, 1) * dy * dy;
            z(i, j) = std::exp(-0.5 * q);
        }
    }
    return normalize_grid(z);
}

}  // namespace casus
