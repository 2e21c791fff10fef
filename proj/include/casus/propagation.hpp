#pragma once

// Monte-Carlo propagation of aleatoric and epistemic uncertainty through a
// metric function, the total-variance decomposition, the rejection rules,
// and pixel-wise entropy uncertainty maps.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "casus/metrics.hpp"
#include "casus/types.hpp"

namespace casus {

// T_e x T_a grid of metric values; row i holds the aleatoric draws under
// epistemic sample i. Cells where the metric could not be evaluated or that
// were discarded by the rejection rules carry valid = false.
struct MetricSampleGrid {
    MetricKind kind = MetricKind::Area;
    int t_epistemic = 0;
    int t_aleatoric = 0;
    std::vector<double> values;       // row-major
    std::vector<std::uint8_t> valid;  // row-major

    MetricSampleGrid() = default;
    MetricSampleGrid(MetricKind k, int te, int ta)
        : kind(k), t_epistemic(te), t_aleatoric(ta),
          values(static_cast<std::size_t>(te) * ta, 0.0),
          valid(static_cast<std::size_t>(te) * ta, 1) {
        if (te < 1 || ta < 1) throw std::invalid_argument("MetricSampleGrid: T_e and T_a must be >= 1");
    }

    [[nodiscard]] double at(int i, int j) const { return values[static_cast<std::size_t>(i) * t_aleatoric + j]; }
    [[nodiscard]] bool is_valid(int i, int j) const { return valid[static_cast<std::size_t>(i) * t_aleatoric + j] != 0; }
    void set(int i, int j, double v, bool ok = true) {
        values[static_cast<std::size_t>(i) * t_aleatoric + j] = v;
        valid[static_cast<std::size_t>(i) * t_aleatoric + j] = ok ? 1 : 0;
    }
    [[nodiscard]] int invalid_count() const {
        int n = 0;
        for (auto v : valid) n += v == 0 ? 1 : 0;
        return n;
    }
};

struct UncertaintyDecomposition {
    double mu_f = 0.0;
    double sigma2_aleatoric = 0.0;
    double sigma2_epistemic = 0.0;
    double sigma2_predictive = 0.0;
};

struct UncertaintyMap {
    int h = 0;
    int w = 0;
    std::vector<double> data;  // row-major, in [0,1]

    [[nodiscard]] double at(int i, int j) const { return data[static_cast<std::size_t>(i) * w + j]; }
    [[nodiscard]] double sum() const {
        double s = 0.0;
        for (double v : data) s += v;
        return s;
    }
};

// values[i][j] = F(y_hat^i_j); evaluation failures mark the cell invalid.
inline MetricSampleGrid propagate(MetricKind kind, int t_epistemic, int t_aleatoric,
                                  const std::function<std::optional<double>(int, int)>& evaluate) {
    MetricSampleGrid grid(kind, t_epistemic, t_aleatoric);
    for (int i = 0; i < t_epistemic; ++i) {
        for (int j = 0; j < t_aleatoric; ++j) {
            const std::optional<double> m = evaluate(i, j);
            if (m.has_value() && std::isfinite(*m)) {
                grid.set(i, j, *m);
            } else {
                grid.set(i, j, 0.0, false);
            }
        }
    }
    return grid;
}

// Law of total variance with population statistics: mu_F is the mean of row
// means, sigma2_a the mean of row variances, sigma2_e the variance of row
// means. Rows without any valid cell are skipped.
inline UncertaintyDecomposition decompose(const MetricSampleGrid& grid) {
    std::vector<double> row_means;
    std::vector<double> row_vars;
    row_means.reserve(grid.t_epistemic);
    for (int i = 0; i < grid.t_epistemic; ++i) {
        double sum = 0.0;
        int n = 0;
        for (int j = 0; j < grid.t_aleatoric; ++j) {
            if (!grid.is_valid(i, j)) continue;
            sum += grid.at(i, j);
            ++n;
        }
        if (n == 0) continue;
        const double mean = sum / n;
        double var = 0.0;
        for (int j = 0; j < grid.t_aleatoric; ++j) {
            if (!grid.is_valid(i, j)) continue;
            const double d = grid.at(i, j) - mean;
            var += d * d;
        }
        row_means.push_back(mean);
        row_vars.push_back(var / n);
    }
    if (row_means.empty()) throw std::invalid_argument("decompose: no valid cells");
    UncertaintyDecomposition out;
    for (double m : row_means) out.mu_f += m;
    out.mu_f /= static_cast<double>(row_means.size());
    for (double v : row_vars) out.sigma2_aleatoric += v;
    out.sigma2_aleatoric /= static_cast<double>(row_vars.size());
    for (double m : row_means) {
        const double d = m - out.mu_f;
        out.sigma2_epistemic += d * d;
    }
    out.sigma2_epistemic /= static_cast<double>(row_means.size());
    out.sigma2_predictive = out.sigma2_aleatoric + out.sigma2_epistemic;
    return out;
}

struct RejectionOutcome {
    bool rejected = false;
    int rule = 0;             // 1 or 3 when rejected, 0 otherwise
    int discarded_cells = 0;  // cells discarded by rule 2 (plus evaluation failures)
    MetricSampleGrid grid;    // with rule-2 discards marked invalid
};

// The three rejection rules, in order: (1) reject the case if the
// prediction's own metric value is clinically irrelevant; (2) discard
// Monte-Carlo cells with irrelevant values; (3) reject the case if more
// than 50% of its cells were discarded.
inline RejectionOutcome apply_rejection(const MetricSampleGrid& grid, double prediction_value) {
    RejectionOutcome out;
    out.grid = grid;
    if (!metric_value_acceptable(grid.kind, prediction_value)) {
        out.rejected = true;
        out.rule = 1;
        return out;
    }
    const int total = grid.t_epistemic * grid.t_aleatoric;
    for (int i = 0; i < grid.t_epistemic; ++i) {
        for (int j = 0; j < grid.t_aleatoric; ++j) {
            if (out.grid.is_valid(i, j) && !metric_value_acceptable(grid.kind, grid.at(i, j)))
                out.grid.set(i, j, grid.at(i, j), false);
        }
    }
    out.discarded_cells = out.grid.invalid_count();
    if (2 * out.discarded_cells > total) {
        out.rejected = true;
        out.rule = 3;
    }
    return out;
}

struct RejectionStats {
    int total_cases = 0;
    int rejected_cases = 0;
    [[nodiscard]] double rejected_percent() const {
        return total_cases == 0 ? 0.0 : 100.0 * rejected_cases / total_cases;
    }
};

// Per-pixel normalized entropy of the mean of all sample masks:
// u = -(1/log C) sum_c ybar_c log ybar_c with 0 log 0 := 0.
inline UncertaintyMap entropy_map(const std::vector<SegmentationMask>& samples, int class_count = 2) {
    if (samples.empty()) throw std::invalid_argument("entropy_map: need at least one mask");
    if (class_count < 2) throw std::invalid_argument("entropy_map: class count must be >= 2");
    const int h = samples[0].h;
    const int w = samples[0].w;
    for (const auto& m : samples) {
        if (m.h != h || m.w != w) throw std::invalid_argument("entropy_map: mask shapes differ");
    }
    UncertaintyMap out;
    out.h = h;
    out.w = w;
    out.data.assign(static_cast<std::size_t>(h) * w, 0.0);
    const double inv_t = 1.0 / static_cast<double>(samples.size());
    const double inv_log_c = 1.0 / std::log(static_cast<double>(class_count));
    for (std::size_t px = 0; px < out.data.size(); ++px) {
        double p = 0.0;
        for (const auto& m : samples) p += m.data[px];
        p *= inv_t;
        double entropy = 0.0;
        if (p > 0.0) entropy -= p * std::log(p);
        if (p < 1.0) entropy -= (1.0 - p) * std::log(1.0 - p);
        out.data[px] = entropy * inv_log_c;
    }
    return out;
}

// Mean-map mass weighted by the size of the prediction (foreground pixel
// count of the mean-contour rasterization, floored at 1).
inline double image_level_uncertainty(const UncertaintyMap& map, const SegmentationMask& mean_mask) {
    if (map.h != mean_mask.h || map.w != mean_mask.w)
        throw std::invalid_argument("image_level_uncertainty: shape mismatch");
    const std::size_t fg = mean_mask.foreground_count();
    return map.sum() / static_cast<double>(std::max<std::size_t>(1, fg));
}

}  // namespace casus
