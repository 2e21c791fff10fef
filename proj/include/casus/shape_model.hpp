#pragma once

// PCA point-distribution model and the posterior shape model: the
// conditional Gaussian over a full shape given a subset of observed points,
// with slack eps2 allowing deviation from the training-shape span.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "casus/linalg.hpp"
#include "casus/types.hpp"

namespace casus {

enum class ModelKind : std::uint8_t { Single, Joint };

inline std::string to_string(ModelKind k) { return k == ModelKind::Single ? "single" : "joint"; }
inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "single") return ModelKind::Single;
    if (s == "joint") return ModelKind::Joint;
    throw std::invalid_argument("unknown model kind: " + s);
}

struct ShapeModel {
    Eigen::VectorXd mean;         // D (2K single-frame, 4K joint)
    Eigen::MatrixXd factors;      // D x r, Q = U * sqrt(eigenvalues)
    Eigen::VectorXd eigenvalues;  // r, descending
    ModelKind kind = ModelKind::Single;
    int k = 0;  // points per frame

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
    [[nodiscard]] Eigen::Index rank() const { return eigenvalues.size(); }
    [[nodiscard]] Eigen::MatrixXd covariance() const { return factors * factors.transpose(); }
};

struct ConditionalShapeDistribution {
    Eigen::VectorXd mu_c;    // D
    Eigen::MatrixXd sigma_c; // D x D
    std::vector<int> observed_indices;  // point indices
    double epsilon2 = 0.0;
};

namespace detail {

inline Eigen::MatrixXd symmetrized_nxn(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Eigendecompose a covariance into a ShapeModel: eigenvalues clamped at
// zero, sorted descending, truncated below 1e-10 * lambda_max, eigenvector
// sign fixed by making the largest-magnitude entry positive.
inline void decompose_covariance(const Eigen::MatrixXd& cov, ShapeModel& model) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized_nxn(cov));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::Index d = cov.rows();
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double lambda_max = ev.maxCoeff();
    const double tau = 1e-10 * lambda_max;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = d - 1; i >= 0; --i) {
        if (ev(i) > tau) keep.push_back(i);
    }
    // Eigen returns eigenvalues ascending; reverse iteration above already
    // produced `keep` in descending order.
    const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
    model.eigenvalues.resize(r);
    model.factors.resize(d, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const Eigen::Index src = keep[c];
        Eigen::VectorXd u = es.eigenvectors().col(src);
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        if (u(imax) < 0.0) u = -u;
        model.eigenvalues(c) = ev(src);
        model.factors.col(c) = u * std::sqrt(ev(src));
    }
}

inline Eigen::MatrixXd population_covariance(const std::vector<Eigen::VectorXd>& shapes,
                                             const Eigen::VectorXd& center) {
    const Eigen::Index d = center.size();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : shapes) {
        const Eigen::VectorXd c = s - center;
        cov.noalias() += c * c.transpose();
    }
    return cov / static_cast<double>(shapes.size());
}

}  // namespace detail

inline ShapeModel fit_pca(const std::vector<Eigen::VectorXd>& shapes,
                          ModelKind kind = ModelKind::Single) {
    if (shapes.size() < 2) throw std::invalid_argument("fit_pca: need at least 2 shapes");
    const Eigen::Index d = shapes[0].size();
    for (const auto& s : shapes) {
        if (s.size() != d) throw std::invalid_argument("fit_pca: inconsistent shape dimensions");
    }
    ShapeModel model;
    model.kind = kind;
    const int coords_per_point = kind == ModelKind::Single ? 2 : 4;
    if (d % coords_per_point != 0) throw std::invalid_argument("fit_pca: dimension incompatible with kind");
    model.k = static_cast<int>(d) / coords_per_point;
    model.mean = Eigen::VectorXd::Zero(d);
    for (const auto& s : shapes) model.mean += s;
    model.mean /= static_cast<double>(shapes.size());
    detail::decompose_covariance(detail::population_covariance(shapes, model.mean), model);
    return model;
}

// Recompute the factor matrix with deviations measured from mu_hat instead
// of the training mean; the model's mean field becomes mu_hat.
inline ShapeModel recenter(const ShapeModel& model, const std::vector<Eigen::VectorXd>& shapes,
                           const Eigen::VectorXd& mu_hat) {
    if (mu_hat.size() != model.dim()) throw std::invalid_argument("recenter: dimension mismatch");
    for (const auto& s : shapes) {
        if (s.size() != model.dim()) throw std::invalid_argument("recenter: shape dimension mismatch");
    }
    if (shapes.empty()) throw std::invalid_argument("recenter: empty shape set");
    ShapeModel out;
    out.kind = model.kind;
    out.k = model.k;
    out.mean = mu_hat;
    detail::decompose_covariance(detail::population_covariance(shapes, mu_hat), out);
    return out;
}

// Shapes-free variant: the recentered covariance equals Q Q^T + d d^T with
// d = training mean - mu_hat, exact up to the rank truncation of Q.
inline ShapeModel recenter(const ShapeModel& model, const Eigen::VectorXd& mu_hat) {
    if (mu_hat.size() != model.dim()) throw std::invalid_argument("recenter: dimension mismatch");
    ShapeModel out;
    out.kind = model.kind;
    out.k = model.k;
    out.mean = mu_hat;
    const Eigen::VectorXd delta = model.mean - mu_hat;
    Eigen::MatrixXd cov = model.covariance();
    cov.noalias() += delta * delta.transpose();
    detail::decompose_covariance(cov, out);
    return out;
}

// Factored form of the posterior shape model: everything downstream needs
// only the Gram solve alpha-space representation, so marginals and the full
// conditional can be read off without forming D x D products eagerly.
class PsmFactor {
public:
    PsmFactor(const ShapeModel& model, const Eigen::VectorXd& partial,
              const std::vector<int>& observed_points, double epsilon2)
        : model_(&model), observed_(observed_points), epsilon2_(epsilon2) {
        if (epsilon2 <= 0.0) throw std::invalid_argument("posterior: epsilon2 must be > 0");
        if (observed_points.empty()) throw std::invalid_argument("posterior: need at least one observed point");
        const Eigen::Index q = static_cast<Eigen::Index>(observed_points.size());
        if (partial.size() != 2 * q) throw std::invalid_argument("posterior: partial size must be 2q");
        std::vector<int> sorted = observed_points;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("posterior: observed indices must be distinct");
        const int total_points = static_cast<int>(model.dim()) / 2;
        if (sorted.front() < 0 || sorted.back() >= total_points)
            throw std::invalid_argument("posterior: observed index out of range");

        const Eigen::Index r = model.rank();
        Eigen::MatrixXd q_g(2 * q, r);
        Eigen::VectorXd resid(2 * q);
        for (Eigen::Index i = 0; i < q; ++i) {
            const int p = observed_points[i];
            q_g.row(2 * i) = model.factors.row(2 * p);
            q_g.row(2 * i + 1) = model.factors.row(2 * p + 1);
            resid(2 * i) = partial(2 * i) - model.mean(2 * p);
            resid(2 * i + 1) = partial(2 * i + 1) - model.mean(2 * p + 1);
        }
        Eigen::MatrixXd gram = q_g.transpose() * q_g;
        gram.diagonal().array() += epsilon2;
        gram_ldlt_.compute(gram);
        if (gram_ldlt_.info() != Eigen::Success) throw std::runtime_error("posterior: Gram factorization failed");
        alpha_mean_ = gram_ldlt_.solve(q_g.transpose() * resid);
    }

    [[nodiscard]] Vec2 mean_at(int point) const {
        const auto& q = model_->factors;
        Vec2 m(model_->mean(2 * point), model_->mean(2 * point + 1));
        m.x() += q.row(2 * point).dot(alpha_mean_);
        m.y() += q.row(2 * point + 1).dot(alpha_mean_);
        return m;
    }

    [[nodiscard]] Mat2 cov_at(int point) const {
        const Eigen::Index r = model_->rank();
        Eigen::MatrixXd qk(r, 2);
        qk.col(0) = model_->factors.row(2 * point).transpose();
        qk.col(1) = model_->factors.row(2 * point + 1).transpose();
        const Eigen::MatrixXd solved = gram_ldlt_.solve(qk);
        Mat2 cov = epsilon2_ * (qk.transpose() * solved);
        return symmetrized(cov);
    }

    [[nodiscard]] PointGaussian marginal_at(int point) const {
        return PointGaussian{mean_at(point), cov_at(point)};
    }

    [[nodiscard]] ConditionalShapeDistribution full() const {
        ConditionalShapeDistribution out;
        out.mu_c = model_->mean + model_->factors * alpha_mean_;
        const Eigen::MatrixXd solved = gram_ldlt_.solve(model_->factors.transpose());
        out.sigma_c = epsilon2_ * (model_->factors * solved);
        out.sigma_c = 0.5 * (out.sigma_c + out.sigma_c.transpose());
        out.observed_indices = observed_;
        out.epsilon2 = epsilon2_;
        return out;
    }

private:
    const ShapeModel* model_;
    std::vector<int> observed_;
    double epsilon2_;
    Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;
    Eigen::VectorXd alpha_mean_;
};

// mu_c = mu + Q (Q_g^T Q_g + eps2 I_r)^-1 Q_g^T (s_g - mu_g)
// Sigma_c = eps2 Q (Q_g^T Q_g + eps2 I_r)^-1 Q^T
inline ConditionalShapeDistribution posterior(const ShapeModel& model, const Eigen::VectorXd& partial,
                                              const std::vector<int>& observed_points, double epsilon2) {
    return PsmFactor(model, partial, observed_points, epsilon2).full();
}

inline PointGaussian marginal_2x2(const ConditionalShapeDistribution& dist, int point) {
    const int total = static_cast<int>(dist.mu_c.size()) / 2;
    if (point < 0 || point >= total) throw std::out_of_range("marginal_2x2: point index out of range");
    PointGaussian g;
    g.mu = {dist.mu_c(2 * point), dist.mu_c(2 * point + 1)};
    g.sigma = dist.sigma_c.block<2, 2>(2 * point, 2 * point);
    return g;
}

}  // namespace casus
