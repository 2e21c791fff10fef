#pragma once

// Experiment pipeline: wires synthesis, model fitting, sampling, Monte-Carlo
// propagation, and calibration evaluation into the reproducible flows the
// CLI exposes. All randomness descends from one seed through named stream
// paths, so results are independent of evaluation order and thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "casus/calibration.hpp"
#include "casus/geometry.hpp"
#include "casus/io.hpp"
#include "casus/metrics.hpp"
#include "casus/parallel.hpp"
#include "casus/propagation.hpp"
#include "casus/sampler.hpp"
#include "casus/shape_model.hpp"
#include "casus/synth.hpp"

namespace casus::pipeline {

// ----------------------------------------------------------- model fits --

inline ShapeModel fit_single_model(const std::vector<ContourRecord>& records) {
    std::vector<Eigen::VectorXd> shapes;
    shapes.reserve(records.size());
    for (const auto& r : records) shapes.push_back(r.contour.flatten());
    return fit_pca(shapes, ModelKind::Single);
}

// Joint ED/ES model: one 4K vector per (id, view) pair, ED block first.
inline ShapeModel fit_joint_model(const std::vector<ContourRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::array<const Contour*, 2>> pairs;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& r : records) {
        const auto key = std::make_pair(r.id, to_string(r.contour.view));
        auto it = pairs.find(key);
        if (it == pairs.end()) {
            pairs[key] = {nullptr, nullptr};
            order.push_back(key);
            it = pairs.find(key);
        }
        it->second[r.contour.frame == Frame::ED ? 0 : 1] = &r.contour;
    }
    std::vector<std::string> unpaired;
    std::vector<Eigen::VectorXd> shapes;
    for (const auto& key : order) {
        const auto& pair = pairs[key];
        if (pair[0] == nullptr || pair[1] == nullptr) {
            unpaired.push_back(key.first + "/" + key.second);
            continue;
        }
        Eigen::VectorXd v(pair[0]->points.size() * 2 + pair[1]->points.size() * 2);
        v << pair[0]->flatten(), pair[1]->flatten();
        shapes.push_back(std::move(v));
    }
    if (!unpaired.empty()) {
        std::ostringstream msg;
        msg << "joint model: missing ED/ES pair for:";
        for (const auto& s : unpaired) msg << ' ' << s;
        throw std::runtime_error(msg.str());
    }
    return fit_pca(shapes, ModelKind::Joint);
}

// ------------------------------------------------------------- grouping --

struct SlotKey {
    View view;
    Frame frame;
};

// Which (view, frame) images a metric consumes per case, and what a "case"
// is: Area per image, FAC per (id, view), Volume per (id, frame), EF per id.
inline std::vector<SlotKey> metric_slots(MetricKind kind, View view, Frame frame) {
    switch (kind) {
        case MetricKind::Area: return {{view, frame}};
        case MetricKind::Fac: return {{view, Frame::ED}, {view, Frame::ES}};
        case MetricKind::Volume: return {{View::A4C, frame}, {View::A2C, frame}};
        case MetricKind::Ef:
            return {{View::A4C, Frame::ED}, {View::A4C, Frame::ES}, {View::A2C, Frame::ED}, {View::A2C, Frame::ES}};
    }
    throw std::logic_error("metric_slots: unreachable");
}

struct MetricCase {
    std::string id;
    std::string key;  // id plus the view/frame qualifiers that identify the case
    std::optional<View> view;
    std::optional<Frame> frame;
    std::vector<SlotKey> slots;
};

namespace detail {

inline std::string slot_string(const SlotKey& s) { return to_string(s.view) + "/" + to_string(s.frame); }

template <typename Record>
std::map<std::string, int> index_by_image(const std::vector<Record>& records) {
    std::map<std::string, int> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::string key;
        if constexpr (requires { records[i].dist; }) {
            key = records[i].id + "|" + to_string(records[i].dist.view) + "|" + to_string(records[i].dist.frame);
        } else {
            key = records[i].id + "|" + to_string(records[i].contour.view) + "|" + to_string(records[i].contour.frame);
        }
        if (!idx.emplace(key, static_cast<int>(i)).second)
            throw std::runtime_error("duplicate record for " + key);
    }
    return idx;
}

inline std::string image_key(const std::string& id, const SlotKey& s) {
    return id + "|" + to_string(s.view) + "|" + to_string(s.frame);
}

}  // namespace detail

// Enumerate metric cases present in a prediction set, in first-appearance
// order; throws if a case is missing one of its required images.
inline std::vector<MetricCase> enumerate_cases(const std::vector<PredictionRecord>& records,
                                               MetricKind kind) {
    std::vector<MetricCase> cases;
    std::set<std::string> seen;
    const auto index = detail::index_by_image(records);
    for (const auto& r : records) {
        MetricCase c;
        c.id = r.id;
        switch (kind) {
            case MetricKind::Area:
                c.view = r.dist.view;
                c.frame = r.dist.frame;
                c.key = r.id + "|" + to_string(r.dist.view) + "|" + to_string(r.dist.frame);
                break;
            case MetricKind::Fac:
                c.view = r.dist.view;
                c.key = r.id + "|" + to_string(r.dist.view);
                break;
            case MetricKind::Volume:
                c.frame = r.dist.frame;
                c.key = r.id + "|" + to_string(r.dist.frame);
                break;
            case MetricKind::Ef:
                c.key = r.id;
                break;
        }
        if (!seen.insert(c.key).second) continue;
        c.slots = metric_slots(kind, r.dist.view, r.dist.frame);
        for (const auto& s : c.slots) {
            if (!index.count(detail::image_key(r.id, s)))
                throw std::runtime_error("metric " + to_string(kind) + ": case " + c.key +
                                         " is missing image " + detail::slot_string(s));
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

// ---------------------------------------------------------- propagation --

struct PropagationOptions {
    MetricKind metric = MetricKind::Area;
    int t_aleatoric = 25;
    int t_epistemic = 1;
    double epsilon2 = 0.1;
    bool temporal = false;
    int n_disks = 20;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct CaseReport {
    std::string id;
    std::string key;
    std::optional<View> view;
    std::optional<Frame> frame;
    MetricKind metric = MetricKind::Area;
    double prediction = 0.0;  // metric of the predicted mean contours (first epistemic set)
    double mu = 0.0;
    double sigma2_aleatoric = 0.0;
    double sigma2_epistemic = 0.0;
    double sigma2 = 0.0;
    int n_rejected_cells = 0;
    bool rejected = false;
    int rejection_rule = 0;
    int t_epistemic = 0;
    int t_aleatoric = 0;
};

namespace detail {

inline double metric_of_contours(MetricKind kind, const std::vector<Contour>& slots, int n_disks) {
    switch (kind) {
        case MetricKind::Area:
            return polygon_area(slots[0]);
        case MetricKind::Fac:
            return fac(polygon_area(slots[0]), polygon_area(slots[1]));
        case MetricKind::Volume:
            return simpson_biplane_volume(slots[0], slots[1], n_disks);
        case MetricKind::Ef:
            return ef(simpson_biplane_volume(slots[0], slots[2], n_disks),
                      simpson_biplane_volume(slots[1], slots[3], n_disks));
    }
    throw std::logic_error("metric_of_contours: unreachable");
}

}  // namespace detail

// Monte-Carlo propagation of one metric over all cases in a prediction set.
// Each element of prediction_sets is one epistemic draw (one file); samplers
// are recentered once per (image, epistemic set).
inline std::vector<CaseReport> propagate_metric(
    const std::vector<std::vector<PredictionRecord>>& prediction_sets, const ShapeModel& single_model,
    const ShapeModel* joint_model, const PropagationOptions& opt) {
    if (prediction_sets.empty()) throw std::invalid_argument("propagate: need at least one prediction set");
    const int t_e = opt.t_epistemic > 0 ? opt.t_epistemic : static_cast<int>(prediction_sets.size());
    if (t_e > static_cast<int>(prediction_sets.size()))
        throw std::invalid_argument("propagate: t_epistemic exceeds the number of prediction sets");
    const bool temporal = opt.temporal && (opt.metric == MetricKind::Fac || opt.metric == MetricKind::Ef);
    if (temporal && joint_model == nullptr)
        throw std::invalid_argument("propagate: temporal sampling requires a joint model");

    const auto cases = enumerate_cases(prediction_sets[0], opt.metric);
    std::vector<std::map<std::string, int>> index(t_e);
    for (int i = 0; i < t_e; ++i) index[i] = detail::index_by_image(prediction_sets[i]);

    std::vector<CaseReport> reports(cases.size());
    const RandomStream root = RandomStream(opt.seed).child("propagate").child(to_string(opt.metric));

    parallel_for(cases.size(), opt.threads, [&](std::size_t ci) {
        const MetricCase& mc = cases[ci];
        const int n_slots = static_cast<int>(mc.slots.size());

        // gather the per-slot distributions for every epistemic set
        std::vector<std::vector<const ContourDistribution*>> dists(t_e);
        for (int i = 0; i < t_e; ++i) {
            dists[i].resize(n_slots);
            for (int s = 0; s < n_slots; ++s) {
                const auto key = detail::image_key(mc.id, mc.slots[s]);
                const auto it = index[i].find(key);
                if (it == index[i].end())
                    throw std::runtime_error("prediction set " + std::to_string(i) + " is missing image " + key);
                dists[i][s] = &prediction_sets[i][it->second].dist;
            }
        }

        // prediction value from the first epistemic set's mean contours
        double prediction = 0.0;
        bool prediction_ok = true;
        {
            std::vector<Contour> mean_contours;
            mean_contours.reserve(n_slots);
            for (int s = 0; s < n_slots; ++s) mean_contours.push_back(dists[0][s]->mean_contour());
            try {
                prediction = detail::metric_of_contours(opt.metric, mean_contours, opt.n_disks);
            } catch (const std::exception&) {
                prediction_ok = false;
            }
        }

        // samplers, built once per (image, epistemic set)
        std::vector<std::vector<HierarchicalSampler>> hier(t_e);
        std::vector<std::vector<TemporalSampler>> temp(t_e);
        for (int i = 0; i < t_e; ++i) {
            if (temporal) {
                // slots come in (ED, ES) pairs per view
                for (int v = 0; v < n_slots / 2; ++v)
                    temp[i].emplace_back(*dists[i][2 * v], *dists[i][2 * v + 1], *joint_model, opt.epsilon2);
            } else {
                for (int s = 0; s < n_slots; ++s)
                    hier[i].push_back(HierarchicalSampler::recentering(*dists[i][s], single_model, opt.epsilon2));
            }
        }

        const RandomStream case_rng = root.child(mc.key);
        const auto evaluate = [&](int i, int j) -> std::optional<double> {
            RandomStream cell = case_rng.child(static_cast<std::uint64_t>(i)).child(static_cast<std::uint64_t>(j));
            std::vector<Contour> slots(n_slots);
            try {
                if (temporal) {
                    for (int v = 0; v < n_slots / 2; ++v) {
                        auto [ed, es] = temp[i][v].sample(cell.child(static_cast<std::uint64_t>(v)));
                        slots[2 * v] = std::move(ed);
                        slots[2 * v + 1] = std::move(es);
                    }
                } else {
                    for (int s = 0; s < n_slots; ++s)
                        slots[s] = hier[i][s].sample(cell.child(static_cast<std::uint64_t>(s)));
                }
                return detail::metric_of_contours(opt.metric, slots, opt.n_disks);
            } catch (const std::exception&) {
                return std::nullopt;
            }
        };

        const MetricSampleGrid grid = propagate(opt.metric, t_e, opt.t_aleatoric, evaluate);
        const RejectionOutcome rejection =
            prediction_ok ? apply_rejection(grid, prediction)
                          : RejectionOutcome{true, 1, grid.invalid_count(), grid};

        CaseReport rep;
        rep.id = mc.id;
        rep.key = mc.key;
        rep.view = mc.view;
        rep.frame = mc.frame;
        rep.metric = opt.metric;
        rep.prediction = prediction_ok ? prediction : 0.0;
        rep.n_rejected_cells = rejection.discarded_cells;
        rep.rejected = rejection.rejected;
        rep.rejection_rule = rejection.rule;
        rep.t_epistemic = t_e;
        rep.t_aleatoric = opt.t_aleatoric;
        if (!rejection.rejected) {
            const UncertaintyDecomposition d = decompose(rejection.grid);
            rep.mu = d.mu_f;
            rep.sigma2_aleatoric = d.sigma2_aleatoric;
            rep.sigma2_epistemic = d.sigma2_epistemic;
            rep.sigma2 = d.sigma2_predictive;
        }
        reports[ci] = std::move(rep);
    });
    return reports;
}

inline json case_report_to_json(const CaseReport& r) {
    json j;
    j["id"] = r.id;
    j["key"] = r.key;
    if (r.view) j["view"] = to_string(*r.view);
    if (r.frame) j["frame"] = to_string(*r.frame);
    j["metric"] = to_string(r.metric);
    j["prediction"] = r.prediction;
    j["mu"] = r.mu;
    j["sigma2_aleatoric"] = r.sigma2_aleatoric;
    j["sigma2_epistemic"] = r.sigma2_epistemic;
    j["sigma2"] = r.sigma2;
    j["n_rejected_cells"] = r.n_rejected_cells;
    j["rejected"] = r.rejected;
    j["t_epistemic"] = r.t_epistemic;
    j["t_aleatoric"] = r.t_aleatoric;
    return j;
}

inline CaseReport case_report_from_json(const json& j) {
    CaseReport r;
    r.id = j.at("id").get<std::string>();
    r.key = j.at("key").get<std::string>();
    if (j.contains("view")) r.view = view_from_string(j.at("view").get<std::string>());
    if (j.contains("frame")) r.frame = frame_from_string(j.at("frame").get<std::string>());
    r.metric = metric_kind_from_string(j.at("metric").get<std::string>());
    r.prediction = j.at("prediction").get<double>();
    r.mu = j.at("mu").get<double>();
    r.sigma2_aleatoric = j.at("sigma2_aleatoric").get<double>();
    r.sigma2_epistemic = j.at("sigma2_epistemic").get<double>();
    r.sigma2 = j.at("sigma2").get<double>();
    r.n_rejected_cells = j.at("n_rejected_cells").get<int>();
    r.rejected = j.at("rejected").get<bool>();
    r.t_epistemic = j.at("t_epistemic").get<int>();
    r.t_aleatoric = j.at("t_aleatoric").get<int>();
    return r;
}

inline void write_case_reports(const std::filesystem::path& path, const std::vector<CaseReport>& reports) {
    std::ostringstream out;
    for (const auto& r : reports) out << case_report_to_json(r).dump() << '\n';
    atomic_write_file(path, out.str());
}

inline std::vector<CaseReport> read_case_reports(const std::filesystem::path& path) {
    std::istringstream in(read_file_bytes(path));
    std::vector<CaseReport> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(case_report_from_json(json::parse(line)));
    }
    return out;
}

// ------------------------------------------------------ metric evaluation --

// Which statistic of the predictive distribution is compared against the
// absolute error in the UCE. HalfNormalSigma is sqrt(2/pi) * sigma, the
// expected absolute deviation of a calibrated Gaussian, so a perfectly
// calibrated pipeline scores near zero.
enum class UceStatistic : std::uint8_t { HalfNormalSigma, Sigma, Variance };

inline UceStatistic uce_statistic_from_string(const std::string& s) {
    if (s == "half-normal") return UceStatistic::HalfNormalSigma;
    if (s == "sigma") return UceStatistic::Sigma;
    if (s == "variance") return UceStatistic::Variance;
    throw std::invalid_argument("unknown UCE statistic: " + s);
}

inline double uce_uncertainty_value(UceStatistic stat, double sigma2) {
    switch (stat) {
        case UceStatistic::HalfNormalSigma: return std::sqrt(2.0 / std::numbers::pi) * std::sqrt(sigma2);
        case UceStatistic::Sigma: return std::sqrt(sigma2);
        case UceStatistic::Variance: return sigma2;
    }
    throw std::logic_error("uce_uncertainty_value: unreachable");
}

struct MetricEvaluation {
    MetricKind kind = MetricKind::Area;
    int n_total = 0;
    int n_kept = 0;
    double rejected_percent = 0.0;
    double uce = 0.0;
    double mean_abs_error = 0.0;
    double mean_uncertainty = 0.0;
    double coverage95 = 0.0;  // fraction of kept cases whose truth lies in mu +- 1.96 sigma
    std::vector<CalibrationBin> bins;
};

// Ground-truth metric values grouped exactly like the propagation cases.
inline std::map<std::string, double> truth_metric_values(const std::vector<ContourRecord>& truth,
                                                         MetricKind kind, int n_disks) {
    std::map<std::string, int> index = detail::index_by_image(truth);
    std::map<std::string, double> out;
    std::set<std::string> seen;
    for (const auto& r : truth) {
        std::string key;
        switch (kind) {
            case MetricKind::Area: key = r.id + "|" + to_string(r.contour.view) + "|" + to_string(r.contour.frame); break;
            case MetricKind::Fac: key = r.id + "|" + to_string(r.contour.view); break;
            case MetricKind::Volume: key = r.id + "|" + to_string(r.contour.frame); break;
            case MetricKind::Ef: key = r.id; break;
        }
        if (!seen.insert(key).second) continue;
        const auto slots = metric_slots(kind, r.contour.view, r.contour.frame);
        std::vector<Contour> contours;
        bool complete = true;
        for (const auto& s : slots) {
            const auto it = index.find(detail::image_key(r.id, s));
            if (it == index.end()) {
                complete = false;
                break;
            }
            contours.push_back(truth[it->second].contour);
        }
        if (!complete) continue;
        out[key] = detail::metric_of_contours(kind, contours, n_disks);
    }
    return out;
}

inline MetricEvaluation evaluate_metric(const std::vector<CaseReport>& reports,
                                        const std::vector<ContourRecord>& truth, int bins,
                                        UceStatistic stat = UceStatistic::HalfNormalSigma,
                                        int n_disks = 20) {
    if (reports.empty()) throw std::invalid_argument("evaluate: no case reports");
    MetricEvaluation out;
    out.kind = reports[0].metric;
    const auto truth_values = truth_metric_values(truth, out.kind, n_disks);
    std::vector<double> errors;
    std::vector<double> uncertainties;
    int covered = 0;
    for (const auto& r : reports) {
        ++out.n_total;
        if (r.rejected) continue;
        const auto it = truth_values.find(r.key);
        if (it == truth_values.end()) throw std::runtime_error("evaluate: no ground truth for case " + r.key);
        const double err = std::abs(r.mu - it->second);
        errors.push_back(err);
        uncertainties.push_back(uce_uncertainty_value(stat, r.sigma2));
        if (err <= 1.959963984540054 * std::sqrt(r.sigma2)) ++covered;
        ++out.n_kept;
    }
    out.rejected_percent = out.n_total == 0 ? 0.0 : 100.0 * (out.n_total - out.n_kept) / out.n_total;
    if (out.n_kept == 0) return out;
    const int usable_bins = std::min(bins, out.n_kept);
    const BinnedCalibration uce = uce_equal_count(errors, uncertainties, usable_bins);
    out.uce = uce.value;
    out.bins = uce.bins;
    for (double e : errors) out.mean_abs_error += e;
    out.mean_abs_error /= out.n_kept;
    for (double u : uncertainties) out.mean_uncertainty += u;
    out.mean_uncertainty /= out.n_kept;
    out.coverage95 = static_cast<double>(covered) / out.n_kept;
    return out;
}

// ------------------------------------------------- segmentation evaluation --

struct SegmentationOptions {
    int grid = 128;
    int t_samples = 25;
    int max_images = 64;
    double epsilon2 = 0.1;
    std::uint64_t seed = 0;
    int threads = 1;
    int ece_bins = 10;
};

struct SegmentationEvaluation {
    int n_images = 0;
    double dice_mean = 0.0;
    double ece = 0.0;
    double mi_mean = 0.0;
    double corr = 0.0;
    std::vector<CalibrationBin> ece_bins;
};

inline SegmentationEvaluation evaluate_segmentation(const std::vector<PredictionRecord>& predictions,
                                                    const std::vector<ContourRecord>& truth,
                                                    const ShapeModel& single_model,
                                                    const SegmentationOptions& opt) {
    const auto truth_index = detail::index_by_image(truth);
    const int n_images = std::min<int>(opt.max_images, static_cast<int>(predictions.size()));
    if (n_images == 0) throw std::invalid_argument("segmentation eval: no predictions");

    struct PerImage {
        double dice = 0.0;
        double uncertainty = 0.0;
        double mi = 0.0;
        std::vector<double> confidences;
        std::vector<std::uint8_t> correctness;
    };
    std::vector<PerImage> per_image(n_images);
    const RandomStream root = RandomStream(opt.seed).child("segmentation");

    parallel_for(static_cast<std::size_t>(n_images), opt.threads, [&](std::size_t i) {
        const auto& pred = predictions[i];
        const std::string key = pred.id + "|" + to_string(pred.dist.view) + "|" + to_string(pred.dist.frame);
        const auto it = truth_index.find(key);
        if (it == truth_index.end()) throw std::runtime_error("segmentation eval: no ground truth for " + key);
        const Contour& gt = truth[it->second].contour;

        const HierarchicalSampler sampler = HierarchicalSampler::recentering(pred.dist, single_model, opt.epsilon2);
        const RandomStream img_rng = root.child(key);
        std::vector<SegmentationMask> masks;
        masks.reserve(opt.t_samples);
        for (int t = 0; t < opt.t_samples; ++t) {
            const Contour sample = sampler.sample(img_rng.child(static_cast<std::uint64_t>(t)));
            masks.push_back(rasterize_contour(sample, opt.grid, opt.grid).mask);
        }
        const UncertaintyMap umap = entropy_map(masks, 2);
        const SegmentationMask mean_mask = rasterize_contour(pred.dist.mean_contour(), opt.grid, opt.grid).mask;
        const SegmentationMask gt_mask = rasterize_contour(gt, opt.grid, opt.grid).mask;

        SegmentationMask err_mask(opt.grid, opt.grid);
        for (std::size_t px = 0; px < err_mask.data.size(); ++px)
            err_mask.data[px] = mean_mask.data[px] != gt_mask.data[px] ? 1 : 0;

        PerImage out;
        out.dice = dice(mean_mask, gt_mask);
        out.uncertainty = image_level_uncertainty(umap, mean_mask);
        out.mi = mutual_information(umap, err_mask);
        out.confidences.resize(umap.data.size());
        out.correctness.resize(umap.data.size());
        for (std::size_t px = 0; px < umap.data.size(); ++px) {
            out.confidences[px] = 1.0 - umap.data[px];
            out.correctness[px] = err_mask.data[px] ? 0 : 1;
        }
        per_image[i] = std::move(out);
    });

    SegmentationEvaluation out;
    out.n_images = n_images;
    std::vector<double> dices, uncertainties;
    std::vector<double> pooled_conf;
    std::vector<std::uint8_t> pooled_correct;
    for (const auto& img : per_image) {
        out.dice_mean += img.dice;
        out.mi_mean += img.mi;
        dices.push_back(img.dice);
        uncertainties.push_back(img.uncertainty);
        pooled_conf.insert(pooled_conf.end(), img.confidences.begin(), img.confidences.end());
        pooled_correct.insert(pooled_correct.end(), img.correctness.begin(), img.correctness.end());
    }
    out.dice_mean /= n_images;
    out.mi_mean /= n_images;
    const BinnedCalibration e = ece(pooled_conf, pooled_correct, opt.ece_bins);
    out.ece = e.value;
    out.ece_bins = e.bins;
    out.corr = dice_uncertainty_correlation(dices, uncertainties);
    return out;
}

// -------------------------------------------------------------- reports --

inline void write_reliability_csv(const std::filesystem::path& path,
                                  const std::vector<CalibrationBin>& bins) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,mean_x,mean_y,count\n";
    char buf[128];
    for (const auto& row : reliability_table(bins)) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%zu\n", row.bin_lo, row.bin_hi,
                      row.mean_x, row.mean_y, row.count);
        out << buf;
    }
    atomic_write_file(path, out.str());
}

inline json metric_evaluation_to_json(const MetricEvaluation& e) {
    json j;
    j["metric"] = to_string(e.kind);
    j["n_total"] = e.n_total;
    j["n_kept"] = e.n_kept;
    j["rejected_percent"] = e.rejected_percent;
    j["uce"] = e.uce;
    j["mean_abs_error"] = e.mean_abs_error;
    j["mean_uncertainty"] = e.mean_uncertainty;
    j["coverage95"] = e.coverage95;
    return j;
}

inline json segmentation_evaluation_to_json(const SegmentationEvaluation& e) {
    json j;
    j["n_images"] = e.n_images;
    j["dice_mean"] = e.dice_mean;
    j["ece"] = e.ece;
    j["mi_mean"] = e.mi_mean;
    j["corr"] = e.corr;
    return j;
}

// ------------------------------------------------------------ end-to-end --

struct EndToEndOptions {
    SynthConfig synth;
    double epsilon2 = 0.1;
    int t_aleatoric = 25;
    int t_epistemic = 1;
    int bins = 10;
    int n_disks = 20;
    bool temporal = true;
    int threads = 1;
    UceStatistic uce_statistic = UceStatistic::HalfNormalSigma;
    SegmentationOptions segmentation;
    bool run_segmentation = true;
};

// synth -> fit -> propagate (all four metrics) -> evaluate; returns the
// aggregate report and writes every stage artifact under out_dir.
inline json end_to_end(const EndToEndOptions& opt, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "synth");
    fs::create_directories(out_dir / "models");
    fs::create_directories(out_dir / "reports");

    const SynthGenerator gen(opt.synth);
    const std::vector<ContourRecord> population = gen.generate_population();
    write_contours_jsonl(out_dir / "synth" / "contours.jsonl", population);
    write_contours_jsonl(out_dir / "synth" / "truth.jsonl", population);
    std::vector<std::vector<PredictionRecord>> prediction_sets;
    prediction_sets.reserve(opt.t_epistemic);
    for (int e = 0; e < opt.t_epistemic; ++e) {
        prediction_sets.push_back(gen.generate_predictions(population, e));
        char name[40];
        std::snprintf(name, sizeof(name), "predictions_e%02d.jsonl", e);
        write_predictions_jsonl(out_dir / "synth" / name, prediction_sets.back());
    }

    const ShapeModel single_model = fit_single_model(population);
    const ShapeModel joint_model = fit_joint_model(population);
    write_shape_model(out_dir / "models" / "single.json", single_model);
    write_shape_model(out_dir / "models" / "joint.json", joint_model);

    json report;
    report["seed"] = opt.synth.seed;
    report["n_cases"] = opt.synth.n_cases;
    report["epsilon2"] = opt.epsilon2;
    report["t_aleatoric"] = opt.t_aleatoric;
    report["t_epistemic"] = opt.t_epistemic;
    json metrics_json = json::object();
    for (MetricKind kind : {MetricKind::Area, MetricKind::Fac, MetricKind::Volume, MetricKind::Ef}) {
        PropagationOptions popt;
        popt.metric = kind;
        popt.t_aleatoric = opt.t_aleatoric;
        popt.t_epistemic = opt.t_epistemic;
        popt.epsilon2 = opt.epsilon2;
        popt.temporal = opt.temporal;
        popt.n_disks = opt.n_disks;
        popt.seed = opt.synth.seed;
        popt.threads = opt.threads;
        const std::vector<CaseReport> reports =
            propagate_metric(prediction_sets, single_model, &joint_model, popt);
        write_case_reports(out_dir / "reports" / (to_string(kind) + ".jsonl"), reports);
        const MetricEvaluation eval =
            evaluate_metric(reports, population, opt.bins, opt.uce_statistic, opt.n_disks);
        metrics_json[to_string(kind)] = metric_evaluation_to_json(eval);
        write_reliability_csv(out_dir / ("reliability_" + to_string(kind) + ".csv"), eval.bins);
    }
    report["metrics"] = std::move(metrics_json);

    if (opt.run_segmentation) {
        SegmentationOptions sopt = opt.segmentation;
        sopt.epsilon2 = opt.epsilon2;
        sopt.seed = opt.synth.seed;
        sopt.threads = opt.threads;
        const SegmentationEvaluation seg =
            evaluate_segmentation(prediction_sets[0], population, single_model, sopt);
        report["segmentation"] = segmentation_evaluation_to_json(seg);
        write_reliability_csv(out_dir / "reliability_pixel_ece.csv", seg.ece_bins);
    }

    atomic_write_file(out_dir / "report.json", report.dump(2) + "\n");
    return report;
}

}  // namespace casus::pipeline
