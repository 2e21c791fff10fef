#pragma once

// Small shared linear-algebra helpers for 2x2 covariance handling.

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace casus {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Diagonal jitter used when a covariance turns out numerically singular.
inline double jitter_scale(const Mat2& sigma) {
    return 1e-9 * sigma.trace() / 2.0 + 1e-12;
}

inline Mat2 symmetrized(const Mat2& m) { return 0.5 * (m + m.transpose()); }

// Inverse of a 2x2 covariance. Solved exactly; jitter is added only when the
// determinant is numerically zero, so well-posed inputs invert bit-exactly.
inline Mat2 inverse_spd2(const Mat2& sigma) {
    Mat2 s = symmetrized(sigma);
    double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double scale = s.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-30 * std::max(scale * scale, 1e-30))) {
        const double lam = jitter_scale(s);
        s(0, 0) += lam;
        s(1, 1) += lam;
        det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        if (det == 0.0) throw std::domain_error("singular 2x2 covariance after jitter");
    }
    Mat2 inv;
    inv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
    return inv / det;
}

// Clamp eigenvalues at zero; rejects matrices that are indefinite beyond
// numerical noise (eigenvalues below -1e-12 relative to scale).
inline Mat2 clamp_psd2(const Mat2& sigma, bool* was_clamped = nullptr) {
    const Mat2 s = symmetrized(sigma);
    Eigen::SelfAdjointEigenSolver<Mat2> es(s);
    Eigen::Vector2d ev = es.eigenvalues();
    bool clamped = false;
    for (int i = 0; i < 2; ++i) {
        if (ev(i) < 0.0) {
            ev(i) = 0.0;
            clamped = true;
        }
    }
    if (was_clamped) *was_clamped = clamped;
    if (!clamped) return s;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Lower Cholesky factor of a 2x2 PSD matrix, tolerating zero eigenvalues.
inline Mat2 cholesky_psd2(const Mat2& sigma) {
    const Mat2 s = clamp_psd2(sigma);
    Mat2 l = Mat2::Zero();
    const double a = std::max(s(0, 0), 0.0);
    l(0, 0) = std::sqrt(a);
    if (l(0, 0) > 0.0) {
        l(1, 0) = s(1, 0) / l(0, 0);
        l(1, 1) = std::sqrt(std::max(s(1, 1) - l(1, 0) * l(1, 0), 0.0));
    } else {
        l(1, 1) = std::sqrt(std::max(s(1, 1), 0.0));
    }
    return l;
}

}  // namespace casus
