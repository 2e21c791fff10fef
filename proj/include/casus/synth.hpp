#pragma once

// Synthetic left-ventricle population generator with known ground-truth
// noise covariances. Base shape is a half-ellipse with a flat basal chord;
// per-case shapes add smooth (squared-exponential over arc length) Gaussian
// perturbations, ES frames are a coupled contraction of ED, and predictions
// carry the exact per-point covariance of their own bias draw.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "casus/geometry.hpp"
#include "casus/rng.hpp"
#include "casus/types.hpp"

namespace casus {

struct SynthConfig {
    int n_cases = 100;
    int k = 21;
    // base shape
    double basal_half_width = 0.35;
    double long_axis = 1.0;
    double base_y = 0.55;
    // population variability
    double shape_scale = 0.05;       // sd of smooth shape perturbations
    double shape_corr_length = 0.2;  // fraction of contour arc length
    // prediction noise (bias field); per-point covariance is emitted exactly
    double noise_scale = 0.02;
    double noise_corr_length = 0.2;
    double apex_noise_boost = 1.0;        // extra variance factor toward the apex
    double case_difficulty_spread = 0.5;  // per-case log-range of the noise multiplier
    // temporal structure
    double ed_es_coupling = 0.9;  // in [0,1]; 1 = ES fully determined by ED
    double es_contraction = 0.8;  // linear scale of ES about the basal midpoint
    double es_noise = 0.01;       // extra independent ES perturbation
    std::uint64_t seed = 0;

    void validate() const {
        if (n_cases < 1) throw std::invalid_argument("synth: n_cases must be >= 1");
        if (k < 5 || k % 2 == 0) throw std::invalid_argument("synth: K must be odd and >= 5");
        if (basal_half_width <= 0.0 || long_axis <= 0.0) throw std::invalid_argument("synth: axis lengths must be > 0");
        if (shape_scale < 0.0 || noise_scale < 0.0 || es_noise < 0.0)
            throw std::invalid_argument("synth: scales must be >= 0");
        if (shape_corr_length <= 0.0 || noise_corr_length <= 0.0)
            throw std::invalid_argument("synth: correlation lengths must be > 0");
        if (ed_es_coupling < 0.0 || ed_es_coupling > 1.0)
            throw std::invalid_argument("synth: ed_es_coupling must be in [0,1]");
        if (es_contraction <= 0.0) throw std::invalid_argument("synth: es_contraction must be > 0");
    }
};

struct ContourRecord {
    std::string id;
    Contour contour;
};

struct PredictionRecord {
    std::string id;
    ContourDistribution dist;
};

namespace synth_detail {

// K points arc-length-uniform on a half-ellipse from the left basal corner
// over the apex to the right basal corner; apex lands at index (K-1)/2 by
// symmetry.
inline std::vector<Vec2> half_ellipse(int k, double a, double b, double base_y) {
    const int fine = 4096;
    std::vector<Vec2> pts(fine + 1);
    for (int i = 0; i <= fine; ++i) {
        const double theta = std::numbers::pi * (1.0 - static_cast<double>(i) / fine);
        pts[i] = {a * std::cos(theta), base_y - b * std::sin(theta)};
    }
    std::vector<double> arc(fine + 1, 0.0);
    for (int i = 1; i <= fine; ++i) arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
    const double total = arc[fine];
    std::vector<Vec2> out(k);
    int seg = 0;
    for (int i = 0; i < k; ++i) {
        const double target = total * i / (k - 1);
        while (seg < fine && arc[seg + 1] < target) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double w = span > 0.0 ? (target - arc[seg]) / span : 0.0;
        out[i] = pts[seg] + w * (pts[seg + 1] - pts[seg]);
    }
    return out;
}

inline std::vector<double> arc_positions(const std::vector<Vec2>& pts) {
    std::vector<double> arc(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
    return arc;
}

// Lower Cholesky factor of the squared-exponential correlation matrix over
// arc-length distances (unit diagonal up to the stabilizing jitter).
inline Eigen::MatrixXd se_correlation_chol(const std::vector<double>& arc, double length_scale) {
    const int k = static_cast<int>(arc.size());
    Eigen::MatrixXd c(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const double d = (arc[i] - arc[j]) / length_scale;
            c(i, j) = std::exp(-0.5 * d * d);
        }
    }
    c.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw std::runtime_error("synth: SE kernel factorization failed");
    return llt.matrixL();
}

// One smooth field draw per axis: delta_x = scale * L z, delta_y likewise.
inline void add_smooth_field(std::vector<Vec2>& pts, const Eigen::MatrixXd& chol, double scale,
                             const Eigen::VectorXd& point_weights, RandomStream& rng) {
    const int k = static_cast<int>(pts.size());
    const Eigen::VectorXd dx = chol * rng.normal_vector(k);
    const Eigen::VectorXd dy = chol * rng.normal_vector(k);
    for (int i = 0; i < k; ++i) {
        const double s = scale * point_weights(i);
        pts[i].x() += s * dx(i);
        pts[i].y() += s * dy(i);
    }
}

inline std::vector<Vec2> contract(const std::vector<Vec2>& pts, const Vec2& center, double factor) {
    std::vector<Vec2> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = center + factor * (pts[i] - center);
    return out;
}

}  // namespace synth_detail

class SynthGenerator {
public:
    explicit SynthGenerator(SynthConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        // A2C is rendered slightly narrower than A4C so the views differ.
        base_[v_idx(View::A4C)] = synth_detail::half_ellipse(cfg_.k, cfg_.basal_half_width, cfg_.long_axis, cfg_.base_y);
        base_[v_idx(View::A2C)] = synth_detail::half_ellipse(cfg_.k, 0.92 * cfg_.basal_half_width, cfg_.long_axis, cfg_.base_y);
        for (int v = 0; v < 2; ++v) {
            const auto arc = synth_detail::arc_positions(base_[v]);
            const double total = arc.back();
            shape_chol_[v] = synth_detail::se_correlation_chol(arc, cfg_.shape_corr_length * total);
            noise_chol_[v] = synth_detail::se_correlation_chol(arc, cfg_.noise_corr_length * total);
            // sqrt of the per-point variance weight, peaking at the apex
            noise_weight_[v].resize(cfg_.k);
            for (int i = 0; i < cfg_.k; ++i) {
                const double rel = std::abs(arc[i] / total - 0.5) * 2.0;  // 0 at apex, 1 at basal points
                noise_weight_[v](i) = std::sqrt(1.0 + cfg_.apex_noise_boost * (1.0 - rel));
            }
        }
    }

    [[nodiscard]] const SynthConfig& config() const { return cfg_; }

    [[nodiscard]] Landmarks landmarks() const { return {0, (cfg_.k - 1) / 2, cfg_.k - 1}; }

    // Ground-truth population: per case, ED/ES contours for both views,
    // emitted in a fixed (A4C/ED, A4C/ES, A2C/ED, A2C/ES) record order.
    [[nodiscard]] std::vector<ContourRecord> generate_population() const {
        std::vector<ContourRecord> out;
        out.reserve(static_cast<std::size_t>(cfg_.n_cases) * 4);
        const RandomStream root = RandomStream(cfg_.seed).child("population");
        for (int c = 0; c < cfg_.n_cases; ++c) {
            const std::string id = case_id(c);
            for (View view : {View::A4C, View::A2C}) {
                RandomStream vs = root.child(c).child(v_idx(view));
                const auto [ed, es] = make_pair_for_view(view, vs);
                out.push_back({id, make_contour(ed, view, Frame::ED)});
                out.push_back({id, make_contour(es, view, Frame::ES)});
            }
        }
        return out;
    }

    // Predictions around a population: mu-hat = truth + bias draw, sigma-hat
    // = the exact marginal covariance of the bias field. Distinct epistemic
    // indices redraw the bias under the same covariance.
    [[nodiscard]] std::vector<PredictionRecord> generate_predictions(
        const std::vector<ContourRecord>& population, int epistemic_index = 0) const {
        std::vector<PredictionRecord> out;
        out.reserve(population.size());
        const RandomStream root = RandomStream(cfg_.seed).child("bias").child(static_cast<std::uint64_t>(epistemic_index));
        const RandomStream difficulty_root = RandomStream(cfg_.seed).child("difficulty");
        for (const auto& rec : population) {
            const int v = v_idx(rec.contour.view);
            RandomStream rng = root.child(rec.id).child(v).child(rec.contour.frame == Frame::ED ? 0 : 1);
            const double difficulty = case_difficulty(difficulty_root, rec.id);
            const double scale = cfg_.noise_scale * std::sqrt(difficulty);

            std::vector<Vec2> mu = rec.contour.points;
            synth_detail::add_smooth_field(mu, noise_chol_[v], scale, noise_weight_[v], rng);

            PredictionRecord pred;
            pred.id = rec.id;
            pred.dist.landmarks = rec.contour.landmarks;
            pred.dist.spacing_mm = rec.contour.spacing_mm;
            pred.dist.view = rec.contour.view;
            pred.dist.frame = rec.contour.frame;
            pred.dist.points.resize(cfg_.k);
            for (int i = 0; i < cfg_.k; ++i) {
                const double var = scale * scale * noise_weight_[v](i) * noise_weight_[v](i);
                pred.dist.points[i].mu = mu[i];
                pred.dist.points[i].sigma = var * Mat2::Identity();
            }
            out.push_back(std::move(pred));
        }
        return out;
    }

    static std::string case_id(int index) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "case%04d", index);
        return buf;
    }

private:
    static int v_idx(View v) { return v == View::A4C ? 0 : 1; }

    [[nodiscard]] double case_difficulty(const RandomStream& difficulty_root, const std::string& id) const {
        RandomStream s = difficulty_root.child(id);
        const double u = 2.0 * s.uniform() - 1.0;
        return std::exp(u * cfg_.case_difficulty_spread);
    }

    // ED = base + smooth field; ES = contraction of (base + coupled mix of
    // the ED field and an independent field) + small independent noise.
    [[nodiscard]] std::pair<std::vector<Vec2>, std::vector<Vec2>> make_pair_for_view(View view,
                                                                                     RandomStream& vs) const {
        const int v = v_idx(view);
        const Eigen::VectorXd unit_w = Eigen::VectorXd::Ones(cfg_.k);

        std::vector<Vec2> ed = base_[v];
        RandomStream ed_rng = vs.child("shape_ed");
        synth_detail::add_smooth_field(ed, shape_chol_[v], cfg_.shape_scale, unit_w, ed_rng);

        std::vector<Vec2> mixed = base_[v];
        const double rho = cfg_.ed_es_coupling;
        for (int i = 0; i < cfg_.k; ++i) mixed[i] += rho * (ed[i] - base_[v][i]);
        RandomStream mix_rng = vs.child("shape_mix");
        synth_detail::add_smooth_field(mixed, shape_chol_[v], cfg_.shape_scale * std::sqrt(1.0 - rho * rho),
                                       unit_w, mix_rng);

        const Vec2 basal_mid = 0.5 * (mixed.front() + mixed.back());
        std::vector<Vec2> es = synth_detail::contract(mixed, basal_mid, cfg_.es_contraction);
        RandomStream es_rng = vs.child("es_noise");
        synth_detail::add_smooth_field(es, shape_chol_[v], cfg_.es_noise, unit_w, es_rng);
        return {std::move(ed), std::move(es)};
    }

    [[nodiscard]] Contour make_contour(std::vector<Vec2> pts, View view, Frame frame) const {
        Contour c;
        c.points = std::move(pts);
        c.landmarks = landmarks();
        c.spacing_mm = {1.0, 1.0};
        c.view = view;
        c.frame = frame;
        return c;
    }

    SynthConfig cfg_;
    std::vector<Vec2> base_[2];
    Eigen::MatrixXd shape_chol_[2];
    Eigen::MatrixXd noise_chol_[2];
    Eigen::VectorXd noise_weight_[2];
};

}  // namespace casus
