#pragma once

// Uncertainty-quality metrics: ECE over equal-width confidence bins, UCE
// over equal-count uncertainty bins, uncertainty/error mutual information,
// Dice-uncertainty correlation, and reliability-diagram exports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "casus/propagation.hpp"
#include "casus/types.hpp"

namespace casus {

struct CalibrationBin {
    double lo = 0.0;       // bin range (confidence or uncertainty)
    double hi = 0.0;
    double mean_x = 0.0;   // mean confidence (ECE) or mean uncertainty (UCE)
    double mean_y = 0.0;   // accuracy (ECE) or mean error (UCE)
    std::size_t count = 0;
};

struct BinnedCalibration {
    double value = 0.0;  // ECE or UCE
    std::vector<CalibrationBin> bins;
};

// ECE = sum_m |B_m|/N |acc(B_m) - conf(B_m)| over M equal-width bins on [0,1].
inline BinnedCalibration ece(const std::vector<double>& confidences,
                             const std::vector<std::uint8_t>& correctness, int m_bins) {
    if (confidences.empty()) throw std::invalid_argument("ece: empty input");
    if (confidences.size() != correctness.size()) throw std::invalid_argument("ece: size mismatch");
    if (m_bins < 1) throw std::invalid_argument("ece: need at least one bin");
    std::vector<double> conf_sum(m_bins, 0.0), acc_sum(m_bins, 0.0);
    std::vector<std::size_t> count(m_bins, 0);
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const double c = confidences[i];
        if (c < 0.0 || c > 1.0) throw std::invalid_argument("ece: confidence outside [0,1]");
        const int b = std::min(static_cast<int>(c * m_bins), m_bins - 1);
        conf_sum[b] += c;
        acc_sum[b] += correctness[i];
        count[b] += 1;
    }
    BinnedCalibration out;
    const double n = static_cast<double>(confidences.size());
    for (int b = 0; b < m_bins; ++b) {
        if (count[b] == 0) continue;
        CalibrationBin bin;
        bin.lo = static_cast<double>(b) / m_bins;
        bin.hi = static_cast<double>(b + 1) / m_bins;
        bin.count = count[b];
        bin.mean_x = conf_sum[b] / count[b];
        bin.mean_y = acc_sum[b] / count[b];
        out.bins.push_back(bin);
        out.value += count[b] / n * std::abs(bin.mean_y - bin.mean_x);
    }
    return out;
}

// UCE = sum_m |B_m|/N |err(B_m) - uncert(B_m)| with equal-count bins:
// samples sorted by (uncertainty, index), split into m quantile groups, the
// remainder spread one-per-bin over the leading bins.
inline BinnedCalibration uce_equal_count(const std::vector<double>& errors,
                                         const std::vector<double>& uncertainties, int m_bins) {
    if (errors.size() != uncertainties.size()) throw std::invalid_argument("uce: size mismatch");
    const std::size_t n = errors.size();
    if (m_bins < 1) throw std::invalid_argument("uce: need at least one bin");
    if (n < static_cast<std::size_t>(m_bins)) throw std::invalid_argument("uce: fewer samples than bins");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return uncertainties[a] < uncertainties[b];
    });
    BinnedCalibration out;
    const std::size_t base = n / m_bins;
    const std::size_t extra = n % m_bins;
    std::size_t pos = 0;
    for (int b = 0; b < m_bins; ++b) {
        const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
        CalibrationBin bin;
        bin.count = size;
        bin.lo = uncertainties[order[pos]];
        bin.hi = uncertainties[order[pos + size - 1]];
        for (std::size_t i = pos; i < pos + size; ++i) {
            bin.mean_x += uncertainties[order[i]];
            bin.mean_y += errors[order[i]];
        }
        bin.mean_x /= size;
        bin.mean_y /= size;
        out.bins.push_back(bin);
        out.value += static_cast<double>(size) / n * std::abs(bin.mean_y - bin.mean_x);
        pos += size;
    }
    return out;
}

// MI in nats between the uncertainty map (quantized into 10 equal-width
// bins on [0,1]) and a binary error map, over the joint empirical
// distribution of pixels.
inline double mutual_information(const UncertaintyMap& unc, const SegmentationMask& err,
                                 int unc_bins = 10) {
    if (unc.h != err.h || unc.w != err.w) throw std::invalid_argument("mutual_information: shape mismatch");
    if (unc_bins < 1) throw std::invalid_argument("mutual_information: need at least one bin");
    std::vector<std::size_t> joint(static_cast<std::size_t>(unc_bins) * 2, 0);
    const std::size_t n = unc.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = unc.data[i];
        if (u < 0.0 || u > 1.0) throw std::invalid_argument("mutual_information: uncertainty outside [0,1]");
        const int b = std::min(static_cast<int>(u * unc_bins), unc_bins - 1);
        joint[static_cast<std::size_t>(b) * 2 + (err.data[i] != 0 ? 1 : 0)] += 1;
    }
    std::vector<double> pu(unc_bins, 0.0);
    double pe[2] = {0.0, 0.0};
    for (int b = 0; b < unc_bins; ++b) {
        for (int e = 0; e < 2; ++e) {
            const double p = static_cast<double>(joint[static_cast<std::size_t>(b) * 2 + e]) / n;
            pu[b] += p;
            pe[e] += p;
        }
    }
    double mi = 0.0;
    for (int b = 0; b < unc_bins; ++b) {
        for (int e = 0; e < 2; ++e) {
            const double p = static_cast<double>(joint[static_cast<std::size_t>(b) * 2 + e]) / n;
            if (p > 0.0) mi += p * std::log(p / (pu[b] * pe[e]));
        }
    }
    return std::max(mi, 0.0);
}

// Negated Pearson correlation, so that higher is better (good uncertainty
// anticorrelates with Dice).
inline double dice_uncertainty_correlation(const std::vector<double>& dices,
                                           const std::vector<double>& image_uncertainties) {
    const std::size_t n = dices.size();
    if (n != image_uncertainties.size()) throw std::invalid_argument("correlation: size mismatch");
    if (n < 2) throw std::invalid_argument("correlation: need at least two samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += dices[i];
        my += image_uncertainties[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = dices[i] - mx;
        const double dy = image_uncertainties[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::domain_error("correlation: zero variance input");
    return -sxy / std::sqrt(sxx * syy);
}

struct ReliabilityRow {
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    std::size_t count = 0;
};

// CSV-ready rows, one per non-empty bin; perfect calibration is y = x.
inline std::vector<ReliabilityRow> reliability_table(const std::vector<CalibrationBin>& bins) {
    std::vector<ReliabilityRow> rows;
    rows.reserve(bins.size());
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        rows.push_back({b.lo, b.hi, b.mean_x, b.mean_y, b.count});
    }
    return rows;
}

}  // namespace casus
