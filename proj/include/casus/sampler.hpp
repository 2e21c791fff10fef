#pragma once

// Gaussian fusion and the landmark-first hierarchical contour sampler,
// plus temporally consistent ED/ES joint sampling.
//
// Sampling order: the apex and both basal points are drawn directly from
// their predicted marginals; each later level conditions the shape model on
// every previously sampled point, fuses the conditional marginal with the
// prediction per point, and draws the level's points independently.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "casus/linalg.hpp"
#include "casus/rng.hpp"
#include "casus/shape_model.hpp"
#include "casus/types.hpp"

namespace casus {

// Product of two 2D Gaussians renormalized to a Gaussian:
// mu_m = S_hat (S_hat + S_c)^-1 mu_c + S_c (S_hat + S_c)^-1 mu_hat
// S_m  = S_hat (S_hat + S_c)^-1 S_c
inline PointGaussian fuse_gaussians(const PointGaussian& pred, const PointGaussian& prior) {
    if (!pred.mu.allFinite() || !prior.mu.allFinite() || !pred.sigma.allFinite() || !prior.sigma.allFinite())
        throw std::invalid_argument("fuse_gaussians: non-finite inputs");
    const Mat2 inv_sum = inverse_spd2(pred.sigma + prior.sigma);
    PointGaussian out;
    out.mu = pred.sigma * (inv_sum * prior.mu) + prior.sigma * (inv_sum * pred.mu);
    out.sigma = symmetrized(pred.sigma * inv_sum * prior.sigma);
    return out;
}

struct SamplingSchedule {
    std::vector<std::vector<int>> levels;  // level 0 = landmarks
};

// Landmark-first midpoint subdivision. Requires the canonical layout
// (basal1=0, apex=(K-1)/2, basal2=K-1); floor midpoint for even gaps.
inline SamplingSchedule build_schedule(int k, Landmarks landmarks) {
    if (k < 5 || k % 2 == 0) throw std::invalid_argument("build_schedule: K must be odd and >= 5");
    if (landmarks.basal1 != 0 || landmarks.apex != (k - 1) / 2 || landmarks.basal2 != k - 1)
        throw std::invalid_argument("build_schedule: unsupported landmark layout");
    SamplingSchedule s;
    s.levels.push_back({0, (k - 1) / 2, k - 1});
    std::vector<int> sampled = s.levels[0];
    while (static_cast<int>(sampled.size()) < k) {
        std::vector<int> level;
        std::vector<int> next = sampled;
        for (std::size_t i = 0; i + 1 < sampled.size(); ++i) {
            if (sampled[i + 1] - sampled[i] >= 2) {
                const int mid = (sampled[i] + sampled[i + 1]) / 2;
                level.push_back(mid);
                next.push_back(mid);
            }
        }
        if (level.empty()) throw std::logic_error("build_schedule: no progress");
        std::sort(next.begin(), next.end());
        sampled = std::move(next);
        s.levels.push_back(std::move(level));
    }
    return s;
}

namespace detail {

inline Vec2 draw_gaussian2(const PointGaussian& g, RandomStream& rng) {
    return g.mu + cholesky_psd2(g.sigma) * rng.normal2();
}

}  // namespace detail

// One image's sampling state: schedule and the recentered model are built
// once, then arbitrarily many contours can be drawn from it.
class HierarchicalSampler {
public:
    HierarchicalSampler(ContourDistribution dist, ShapeModel recentered_model, double epsilon2)
        : dist_(std::move(dist)), model_(std::move(recentered_model)), epsilon2_(epsilon2) {
        if (model_.kind != ModelKind::Single) throw std::invalid_argument("hierarchical sampler needs a single-frame model");
        if (2 * dist_.k() != model_.dim()) throw std::invalid_argument("hierarchical sampler: model/distribution dimension mismatch");
        schedule_ = build_schedule(dist_.k(), dist_.landmarks);
    }

    // Construct from an unrecentered model; recenters on the predicted mean.
    static HierarchicalSampler recentering(const ContourDistribution& dist, const ShapeModel& base_model,
                                           double epsilon2) {
        return HierarchicalSampler(dist, recenter(base_model, dist.mean_flat()), epsilon2);
    }

    [[nodiscard]] Contour sample(RandomStream rng) const {
        const int k = dist_.k();
        std::vector<Vec2> points(k);
        std::vector<int> sampled;
        sampled.reserve(k);
        for (int p : schedule_.levels[0]) {
            RandomStream point_rng = rng.child(static_cast<std::uint64_t>(p));
            points[p] = detail::draw_gaussian2(dist_.points[p], point_rng);
            sampled.push_back(p);
        }
        for (std::size_t level = 1; level < schedule_.levels.size(); ++level) {
            Eigen::VectorXd partial(2 * sampled.size());
            for (std::size_t i = 0; i < sampled.size(); ++i) {
                partial(2 * i) = points[sampled[i]].x();
                partial(2 * i + 1) = points[sampled[i]].y();
            }
            const PsmFactor psm(model_, partial, sampled, epsilon2_);
            for (int p : schedule_.levels[level]) {
                const PointGaussian fused = fuse_gaussians(dist_.points[p], psm.marginal_at(p));
                RandomStream point_rng = rng.child(static_cast<std::uint64_t>(p));
                points[p] = detail::draw_gaussian2(fused, point_rng);
            }
            for (int p : schedule_.levels[level]) sampled.push_back(p);
        }
        Contour c;
        c.points = std::move(points);
        c.landmarks = dist_.landmarks;
        c.spacing_mm = dist_.spacing_mm;
        c.view = dist_.view;
        c.frame = dist_.frame;
        return c;
    }

    [[nodiscard]] const SamplingSchedule& schedule() const { return schedule_; }
    [[nodiscard]] const ContourDistribution& distribution() const { return dist_; }
    [[nodiscard]] const ShapeModel& model() const { return model_; }

private:
    ContourDistribution dist_;
    ShapeModel model_;
    double epsilon2_;
    SamplingSchedule schedule_;
};

inline Contour hierarchical_sample(const ContourDistribution& dist, const ShapeModel& recentered_model,
                                   double epsilon2, RandomStream rng) {
    return HierarchicalSampler(dist, recentered_model, epsilon2).sample(std::move(rng));
}

// RNG path tags inside one (case, sample) stream.
namespace rng_path {
inline constexpr std::uint64_t kFrameOrder = 0x4f524445;  // temporal first-frame coin flip
inline constexpr std::uint64_t kFrameBase = 0x46524d00;   // + frame index
}  // namespace rng_path

// Temporally consistent ED/ES sampling. The joint model is recentered on
// the concatenated predicted means once; per-frame marginal sub-models are
// extracted from it for the within-frame hierarchical passes.
class TemporalSampler {
public:
    TemporalSampler(ContourDistribution ed, ContourDistribution es, const ShapeModel& joint_model,
                    double epsilon2)
        : ed_(std::move(ed)), es_(std::move(es)), epsilon2_(epsilon2) {
        if (joint_model.kind != ModelKind::Joint) throw std::invalid_argument("temporal sampler needs a joint model");
        const int k = ed_.k();
        if (es_.k() != k) throw std::invalid_argument("temporal sampler: ED/ES point counts differ");
        if (joint_model.dim() != 4 * k) throw std::invalid_argument("temporal sampler: joint model dimension mismatch");
        Eigen::VectorXd mu_hat(4 * k);
        mu_hat << ed_.mean_flat(), es_.mean_flat();
        joint_ = recenter(joint_model, mu_hat);
        frame_model_[0] = extract_frame_model(joint_, 0, k);
        frame_model_[1] = extract_frame_model(joint_, 1, k);
    }

    [[nodiscard]] std::pair<Contour, Contour> sample(RandomStream rng) const {
        const bool ed_first = rng.child(rng_path::kFrameOrder).uniform() < 0.5;
        const int first = ed_first ? 0 : 1;
        const int second = 1 - first;
        const ContourDistribution& dist1 = first == 0 ? ed_ : es_;
        const ContourDistribution& dist2 = second == 0 ? ed_ : es_;
        const int k = dist1.k();

        const HierarchicalSampler s1(dist1, frame_model_[first], epsilon2_);
        const Contour c1 = s1.sample(rng.child(rng_path::kFrameBase + static_cast<std::uint64_t>(first)));

        // Condition the joint model on all 2K coordinates of the first
        // contour, then fuse the second frame's conditional marginals with
        // its predicted marginals.
        std::vector<int> observed(k);
        for (int i = 0; i < k; ++i) observed[i] = first * k + i;
        const PsmFactor psm(joint_, c1.flatten(), observed, epsilon2_);
        ContourDistribution fused = dist2;
        for (int i = 0; i < k; ++i) {
            const PointGaussian cond = psm.marginal_at(second * k + i);
            fused.points[i] = fuse_gaussians(dist2.points[i], cond);
        }
        const HierarchicalSampler s2(fused, frame_model_[second], epsilon2_);
        const Contour c2 = s2.sample(rng.child(rng_path::kFrameBase + static_cast<std::uint64_t>(second)));

        return first == 0 ? std::make_pair(c1, c2) : std::make_pair(c2, c1);
    }

private:
    // Marginal 2K sub-model of one frame block of the recentered joint
    // model: eigendecomposition of that block of Q Q^T.
    static ShapeModel extract_frame_model(const ShapeModel& joint, int frame_index, int k) {
        const Eigen::MatrixXd q_block = joint.factors.middleRows(2 * k * frame_index, 2 * k);
        ShapeModel sub;
        sub.kind = ModelKind::Single;
        sub.k = k;
        sub.mean = joint.mean.segment(2 * k * frame_index, 2 * k);
        detail::decompose_covariance(q_block * q_block.transpose(), sub);
        return sub;
    }

    ContourDistribution ed_;
    ContourDistribution es_;
    double epsilon2_;
    ShapeModel joint_;
    ShapeModel frame_model_[2];
};

inline std::pair<Contour, Contour> temporal_sample(const ContourDistribution& ed,
                                                   const ContourDistribution& es,
                                                   const ShapeModel& joint_model, double epsilon2,
                                                   RandomStream rng) {
    return TemporalSampler(ed, es, joint_model, epsilon2).sample(std::move(rng));
}

}  // namespace casus
