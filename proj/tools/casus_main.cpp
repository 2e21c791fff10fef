// casus: contour-based uncertainty sampling and propagation for
// echocardiographic clinical metrics.
//
// Subcommands: synth, fit-shape-model, moments, sample, propagate,
// evaluate, end-to-end. All randomness flows from --seed through named
// stream paths; every output directory receives a manifest.json recording
// the command, flags, seed, and input digests.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casus/casus.hpp"
#include "casus/pipeline.hpp"

namespace fs = std::filesystem;
using namespace casus;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int resolve_threads(int flag_value) {
    // CASUS_THREADS overrides --threads
    if (const char* env = std::getenv("CASUS_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return flag_value >= 1 ? flag_value : default_thread_count();
}

void add_digest(RunManifest& m, const fs::path& path) {
    m.input_digests.emplace_back(path.string(), file_digest(path));
}

void apply_spacing(std::vector<PredictionRecord>& records, const Eigen::Vector2d& spacing) {
    for (auto& r : records) r.dist.spacing_mm = spacing;
}

pipeline::UceStatistic resolve_uce_statistic(const std::string& name, bool use_variance) {
    if (use_variance) return pipeline::UceStatistic::Variance;
    return pipeline::uce_statistic_from_string(name);
}

// ----------------------------------------------------------------- synth --

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, int epistemic) {
    Stopwatch watch;
    SynthConfig cfg = read_synth_config(config_path);
    if (seed) cfg.seed = *seed;
    fs::create_directories(out_dir);
    const SynthGenerator gen(cfg);
    const auto population = gen.generate_population();
    write_contours_jsonl(fs::path(out_dir) / "contours.jsonl", population);
    write_contours_jsonl(fs::path(out_dir) / "truth.jsonl", population);
    for (int e = 0; e < epistemic; ++e) {
        char name[40];
        std::snprintf(name, sizeof(name), "predictions_e%02d.jsonl", e);
        write_predictions_jsonl(fs::path(out_dir) / name, gen.generate_predictions(population, e));
    }
    RunManifest m;
    m.command = "synth";
    m.flags = {{"--config", config_path},
               {"--out-dir", out_dir},
               {"--epistemic", std::to_string(epistemic)}};
    m.seed = cfg.seed;
    add_digest(m, config_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "synth: wrote " << population.size() << " contours for " << cfg.n_cases
              << " cases to " << out_dir << "\n";
    return 0;
}

// ------------------------------------------------------- fit-shape-model --

int cmd_fit_shape_model(const std::string& contours_path, const std::string& kind,
                        const std::string& out_dir) {
    Stopwatch watch;
    const auto records = read_contours_jsonl(contours_path);
    const ModelKind mk = model_kind_from_string(kind);
    const ShapeModel model = mk == ModelKind::Single ? pipeline::fit_single_model(records)
                                                     : pipeline::fit_joint_model(records);
    fs::create_directories(out_dir);
    write_shape_model(fs::path(out_dir) / "model.json", model);
    RunManifest m;
    m.command = "fit-shape-model";
    m.flags = {{"--contours", contours_path}, {"--kind", kind}, {"--out-dir", out_dir}};
    add_digest(m, contours_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "fit-shape-model: dim=" << model.dim() << " rank=" << model.rank() << "\n";
    return 0;
}

// --------------------------------------------------------------- moments --

int cmd_moments(const std::string& heatmaps_arg, const std::string& ids_arg,
                const std::string& view, const std::string& frame,
                const std::string& landmarks_arg, const std::string& out_dir) {
    Stopwatch watch;
    const auto files = split_list(heatmaps_arg);
    if (files.empty()) throw std::runtime_error("moments: no heatmap files given");
    auto ids = split_list(ids_arg);
    if (ids.empty()) {
        for (const auto& f : files) ids.push_back(fs::path(f).stem().string());
    }
    if (ids.size() != files.size()) throw std::runtime_error("moments: --ids count must match --heatmaps");

    std::vector<PredictionRecord> records;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const HeatmapStack stack = read_chm1(files[i]);
        Landmarks lm{0, (stack.k() - 1) / 2, stack.k() - 1};
        const auto lm_values = split_list(landmarks_arg);
        if (lm_values.size() == 3)
            lm = {std::stoi(lm_values[0]), std::stoi(lm_values[1]), std::stoi(lm_values[2])};
        PredictionRecord rec;
        rec.id = ids[i];
        rec.dist = extract_distribution(stack, lm, view_from_string(view), frame_from_string(frame));
        records.push_back(std::move(rec));
    }
    fs::create_directories(out_dir);
    write_predictions_jsonl(fs::path(out_dir) / "predictions.jsonl", records);
    RunManifest m;
    m.command = "moments";
    m.flags = {{"--heatmaps", heatmaps_arg}, {"--view", view}, {"--frame", frame}, {"--out-dir", out_dir}};
    for (const auto& f : files) add_digest(m, f);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "moments: extracted " << records.size() << " prediction records\n";
    return 0;
}

// ---------------------------------------------------------------- sample --

int cmd_sample(const std::string& predictions_path, const std::string& model_path, double epsilon2,
               int n, std::uint64_t seed, bool temporal, const std::string& joint_model_path,
               const std::string& spacing_arg, const std::string& out_dir) {
    Stopwatch watch;
    auto predictions = read_predictions_jsonl(predictions_path);
    const auto spacing_parts = split_list(spacing_arg);
    if (spacing_parts.size() != 2) throw std::runtime_error("--spacing expects sy,sx");
    apply_spacing(predictions, {std::stod(spacing_parts[0]), std::stod(spacing_parts[1])});
    const ShapeModel single_model = read_shape_model(model_path);
    std::optional<ShapeModel> joint_model;
    if (temporal) {
        if (joint_model_path.empty()) throw std::runtime_error("--temporal requires --joint-model");
        joint_model = read_shape_model(joint_model_path);
    }

    const RandomStream root = RandomStream(seed).child("sample");
    std::ostringstream lines;
    std::size_t total = 0, intersecting = 0;

    auto emit = [&](const std::string& id, int sample_index, const Contour& c) {
        json rec = contour_to_json(id, c);
        rec["sample_index"] = sample_index;
        const bool ok = validate_contour(c).ok();
        rec["valid"] = ok;
        if (!ok) ++intersecting;
        ++total;
        lines << rec.dump() << '\n';
    };

    if (!temporal) {
        for (const auto& pred : predictions) {
            const HierarchicalSampler sampler =
                HierarchicalSampler::recentering(pred.dist, single_model, epsilon2);
            const RandomStream case_rng = root.child(pred.id)
                                              .child(to_string(pred.dist.view))
                                              .child(to_string(pred.dist.frame));
            for (int t = 0; t < n; ++t) emit(pred.id, t, sampler.sample(case_rng.child(t)));
        }
    } else {
        // pair records per (id, view)
        const auto cases = pipeline::enumerate_cases(predictions, MetricKind::Fac);
        std::map<std::string, int> index;
        for (std::size_t i = 0; i < predictions.size(); ++i)
            index[predictions[i].id + "|" + to_string(predictions[i].dist.view) + "|" +
                  to_string(predictions[i].dist.frame)] = static_cast<int>(i);
        for (const auto& mc : cases) {
            const auto& ed = predictions[index.at(mc.id + "|" + to_string(*mc.view) + "|ED")].dist;
            const auto& es = predictions[index.at(mc.id + "|" + to_string(*mc.view) + "|ES")].dist;
            const TemporalSampler sampler(ed, es, *joint_model, epsilon2);
            const RandomStream case_rng = root.child(mc.id).child(to_string(*mc.view));
            for (int t = 0; t < n; ++t) {
                const auto [ed_c, es_c] = sampler.sample(case_rng.child(t));
                emit(mc.id, t, ed_c);
                emit(mc.id, t, es_c);
            }
        }
    }
    fs::create_directories(out_dir);
    atomic_write_file(fs::path(out_dir) / "samples.jsonl", lines.str());
    RunManifest m;
    m.command = "sample";
    m.flags = {{"--predictions", predictions_path}, {"--shape-model", model_path},
               {"--epsilon2", std::to_string(epsilon2)}, {"--n", std::to_string(n)},
               {"--temporal", temporal ? "true" : "false"}, {"--out-dir", out_dir}};
    m.seed = seed;
    add_digest(m, predictions_path);
    add_digest(m, model_path);
    if (temporal) add_digest(m, joint_model_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "sample: " << total << " contours, self-intersection rate "
              << (total ? 100.0 * intersecting / total : 0.0) << "%\n";
    return 0;
}

// ------------------------------------------------------------- propagate --

int cmd_propagate(const std::string& predictions_arg, const std::string& model_path,
                  const std::string& joint_model_path, bool temporal, const std::string& metric,
                  int t_aleatoric, int t_epistemic, std::uint64_t seed, double epsilon2, int n_disks,
                  const std::string& spacing_arg, const std::string& out_dir, int threads) {
    Stopwatch watch;
    const auto files = split_list(predictions_arg);
    if (files.empty()) throw std::runtime_error("propagate: no prediction files given");
    const auto spacing_parts = split_list(spacing_arg);
    if (spacing_parts.size() != 2) throw std::runtime_error("--spacing expects sy,sx");
    const Eigen::Vector2d spacing{std::stod(spacing_parts[0]), std::stod(spacing_parts[1])};

    std::vector<std::vector<PredictionRecord>> sets;
    for (const auto& f : files) {
        sets.push_back(read_predictions_jsonl(f));
        apply_spacing(sets.back(), spacing);
    }
    const ShapeModel single_model = read_shape_model(model_path);
    std::optional<ShapeModel> joint_model;
    if (!joint_model_path.empty()) joint_model = read_shape_model(joint_model_path);

    pipeline::PropagationOptions opt;
    opt.metric = metric_kind_from_string(metric);
    opt.t_aleatoric = t_aleatoric;
    opt.t_epistemic = t_epistemic > 0 ? t_epistemic : static_cast<int>(sets.size());
    opt.epsilon2 = epsilon2;
    opt.temporal = temporal;
    opt.n_disks = n_disks;
    opt.seed = seed;
    opt.threads = threads;
    const auto reports =
        pipeline::propagate_metric(sets, single_model, joint_model ? &*joint_model : nullptr, opt);

    fs::create_directories(out_dir);
    pipeline::write_case_reports(fs::path(out_dir) / "report.jsonl", reports);
    int rejected = 0;
    for (const auto& r : reports) rejected += r.rejected ? 1 : 0;
    RunManifest m;
    m.command = "propagate";
    m.flags = {{"--predictions", predictions_arg}, {"--shape-model", model_path},
               {"--metric", metric}, {"--t-aleatoric", std::to_string(t_aleatoric)},
               {"--t-epistemic", std::to_string(opt.t_epistemic)},
               {"--epsilon2", std::to_string(epsilon2)}, {"--temporal", temporal ? "true" : "false"},
               {"--n-disks", std::to_string(n_disks)}, {"--out-dir", out_dir},
               {"--threads", std::to_string(threads)}};
    m.seed = seed;
    for (const auto& f : files) add_digest(m, f);
    add_digest(m, model_path);
    if (!joint_model_path.empty()) add_digest(m, joint_model_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "propagate: " << reports.size() << " cases, " << rejected << " rejected ("
              << (reports.empty() ? 0.0 : 100.0 * rejected / reports.size()) << "%)\n";
    return 0;
}

// -------------------------------------------------------------- evaluate --

int cmd_evaluate(const std::string& report_path, const std::string& truth_path, int bins,
                 const std::string& uce_stat, bool uce_use_variance, int n_disks,
                 const std::string& out_dir) {
    Stopwatch watch;
    const auto reports = pipeline::read_case_reports(report_path);
    const auto truth = read_contours_jsonl(truth_path);
    const auto eval = pipeline::evaluate_metric(reports, truth, bins,
                                                resolve_uce_statistic(uce_stat, uce_use_variance), n_disks);
    fs::create_directories(out_dir);
    json report;
    report[to_string(eval.kind)] = pipeline::metric_evaluation_to_json(eval);
    atomic_write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
    pipeline::write_reliability_csv(fs::path(out_dir) / ("reliability_" + to_string(eval.kind) + ".csv"),
                                    eval.bins);
    RunManifest m;
    m.command = "evaluate";
    m.flags = {{"--report-in", report_path}, {"--ground-truth", truth_path},
               {"--bins", std::to_string(bins)}, {"--uce-statistic", uce_stat},
               {"--uce-use-variance", uce_use_variance ? "true" : "false"}, {"--out-dir", out_dir}};
    add_digest(m, report_path);
    add_digest(m, truth_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "evaluate: " << to_string(eval.kind) << " UCE=" << eval.uce
              << " mean|err|=" << eval.mean_abs_error << " coverage95=" << eval.coverage95 << "\n";
    return 0;
}

// ------------------------------------------------------------ end-to-end --

int cmd_end_to_end(const std::string& config_path, const std::string& out_dir,
                   std::optional<std::uint64_t> seed, int t_aleatoric, int t_epistemic,
                   double epsilon2, int bins, bool no_temporal, const std::string& uce_stat,
                   bool uce_use_variance, int n_disks, bool no_segmentation, int seg_grid,
                   int seg_samples, int seg_images, int threads) {
    Stopwatch watch;
    pipeline::EndToEndOptions opt;
    opt.synth = read_synth_config(config_path);
    if (seed) opt.synth.seed = *seed;
    opt.t_aleatoric = t_aleatoric;
    opt.t_epistemic = t_epistemic;
    opt.epsilon2 = epsilon2;
    opt.bins = bins;
    opt.temporal = !no_temporal;
    opt.n_disks = n_disks;
    opt.threads = threads;
    opt.uce_statistic = resolve_uce_statistic(uce_stat, uce_use_variance);
    opt.run_segmentation = !no_segmentation;
    opt.segmentation.grid = seg_grid;
    opt.segmentation.t_samples = seg_samples;
    opt.segmentation.max_images = seg_images;

    fs::create_directories(out_dir);
    pipeline::end_to_end(opt, out_dir);

    RunManifest m;
    m.command = "end-to-end";
    m.flags = {{"--config", config_path}, {"--out-dir", out_dir},
               {"--t-aleatoric", std::to_string(t_aleatoric)},
               {"--t-epistemic", std::to_string(t_epistemic)},
               {"--epsilon2", std::to_string(epsilon2)}, {"--bins", std::to_string(bins)},
               {"--temporal", no_temporal ? "false" : "true"}, {"--uce-statistic", uce_stat},
               {"--threads", std::to_string(threads)}};
    m.seed = opt.synth.seed;
    add_digest(m, config_path);
    m.wall_time_s = watch.seconds();
    write_manifest(out_dir, m);
    std::cerr << "end-to-end: report written to " << (fs::path(out_dir) / "report.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contour-based uncertainty sampling and clinical-metric propagation"};
    app.require_subcommand(1);

    int threads_flag = 0;
    app.add_option("--threads", threads_flag, "worker threads (default: all cores; CASUS_THREADS overrides)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic population with predictions");
    std::string synth_config, synth_out;
    std::optional<std::uint64_t> synth_seed;
    int synth_epistemic = 1;
    synth->add_option("--config", synth_config, "synthesis config JSON")->required();
    synth->add_option("--out-dir", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "override the config seed");
    synth->add_option("--epistemic", synth_epistemic, "number of prediction files to emit");

    // fit-shape-model
    auto* fit = app.add_subcommand("fit-shape-model", "fit a PCA shape model from contours");
    std::string fit_contours, fit_kind = "single", fit_out;
    fit->add_option("--contours", fit_contours, "contours JSONL")->required();
    fit->add_option("--kind", fit_kind, "single|joint")->check(CLI::IsMember({"single", "joint"}));
    fit->add_option("--out-dir", fit_out, "output directory")->required();

    // moments
    auto* moments = app.add_subcommand("moments", "extract per-point Gaussians from CHM1 heatmaps");
    std::string mom_heatmaps, mom_ids, mom_view = "A4C", mom_frame = "ED", mom_landmarks, mom_out;
    moments->add_option("--heatmaps", mom_heatmaps, "CHM1 file(s), comma separated")->required();
    moments->add_option("--ids", mom_ids, "record ids (default: file stems)");
    moments->add_option("--view", mom_view, "A2C|A4C")->check(CLI::IsMember({"A2C", "A4C"}));
    moments->add_option("--frame", mom_frame, "ED|ES")->check(CLI::IsMember({"ED", "ES"}));
    moments->add_option("--landmarks", mom_landmarks, "b1,apex,b2 (default canonical)");
    moments->add_option("--out-dir", mom_out, "output directory")->required();

    // sample
    auto* sample = app.add_subcommand("sample", "draw contour samples from predictions");
    std::string smp_pred, smp_model, smp_joint, smp_spacing = "1,1", smp_out;
    double smp_eps2 = 0.1;
    int smp_n = 25;
    std::uint64_t smp_seed = 0;
    bool smp_temporal = false;
    sample->add_option("--predictions", smp_pred, "predictions JSONL")->required();
    sample->add_option("--shape-model", smp_model, "single-frame shape model JSON")->required();
    sample->add_option("--epsilon2", smp_eps2, "posterior shape model slack");
    sample->add_option("--n", smp_n, "samples per image");
    sample->add_option("--seed", smp_seed, "random seed");
    sample->add_flag("--temporal", smp_temporal, "temporally consistent ED/ES sampling");
    sample->add_option("--joint-model", smp_joint, "joint ED/ES model JSON (for --temporal)");
    sample->add_option("--spacing", smp_spacing, "sy,sx physical scale");
    sample->add_option("--out-dir", smp_out, "output directory")->required();

    // propagate
    auto* prop = app.add_subcommand("propagate", "Monte-Carlo metric uncertainty propagation");
    std::string prp_pred, prp_model, prp_joint, prp_metric = "area", prp_spacing = "1,1", prp_out;
    int prp_ta = 25, prp_te = 0, prp_disks = 20;
    std::uint64_t prp_seed = 0;
    double prp_eps2 = 0.1;
    bool prp_temporal = false;
    prop->add_option("--predictions", prp_pred, "prediction JSONL file(s), one per epistemic draw")->required();
    prop->add_option("--shape-model", prp_model, "single-frame shape model JSON")->required();
    prop->add_option("--joint-model", prp_joint, "joint ED/ES model JSON");
    prop->add_flag("--temporal", prp_temporal, "temporally consistent FAC/EF sampling");
    prop->add_option("--metric", prp_metric, "area|fac|volume|ef")
        ->check(CLI::IsMember({"area", "fac", "volume", "ef"}));
    prop->add_option("--t-aleatoric", prp_ta, "aleatoric samples per epistemic draw");
    prop->add_option("--t-epistemic", prp_te, "epistemic draws (default: number of files)");
    prop->add_option("--seed", prp_seed, "random seed");
    prop->add_option("--epsilon2", prp_eps2, "posterior shape model slack");
    prop->add_option("--n-disks", prp_disks, "Simpson biplane disk count");
    prop->add_option("--spacing", prp_spacing, "sy,sx physical scale");
    prop->add_option("--out-dir", prp_out, "output directory")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "calibration evaluation of a propagation report");
    std::string ev_report, ev_truth, ev_stat = "half-normal", ev_out;
    int ev_bins = 10, ev_disks = 20;
    bool ev_variance = false;
    eval->add_option("--report-in", ev_report, "propagation report JSONL")->required();
    eval->add_option("--ground-truth", ev_truth, "truth contours JSONL")->required();
    eval->add_option("--bins", ev_bins, "equal-count bins");
    eval->add_option("--uce-statistic", ev_stat, "half-normal|sigma|variance")
        ->check(CLI::IsMember({"half-normal", "sigma", "variance"}));
    eval->add_flag("--uce-use-variance", ev_variance, "compare errors against sigma^2");
    eval->add_option("--n-disks", ev_disks, "Simpson biplane disk count for ground truth");
    eval->add_option("--out-dir", ev_out, "output directory")->required();

    // end-to-end
    auto* e2e = app.add_subcommand("end-to-end", "synth -> fit -> propagate -> evaluate");
    std::string e2e_config, e2e_stat = "half-normal", e2e_out;
    std::optional<std::uint64_t> e2e_seed;
    int e2e_ta = 25, e2e_te = 1, e2e_bins = 10, e2e_disks = 20;
    int e2e_seg_grid = 128, e2e_seg_samples = 25, e2e_seg_images = 64;
    double e2e_eps2 = 0.1;
    bool e2e_no_temporal = false, e2e_variance = false, e2e_no_seg = false;
    e2e->add_option("--config", e2e_config, "synthesis config JSON")->required();
    e2e->add_option("--out-dir", e2e_out, "output directory")->required();
    e2e->add_option("--seed", e2e_seed, "override the config seed");
    e2e->add_option("--t-aleatoric", e2e_ta, "aleatoric samples");
    e2e->add_option("--t-epistemic", e2e_te, "epistemic prediction sets");
    e2e->add_option("--epsilon2", e2e_eps2, "posterior shape model slack");
    e2e->add_option("--bins", e2e_bins, "equal-count bins");
    e2e->add_flag("--no-temporal", e2e_no_temporal, "independent ED/ES sampling for FAC/EF");
    e2e->add_option("--uce-statistic", e2e_stat, "half-normal|sigma|variance")
        ->check(CLI::IsMember({"half-normal", "sigma", "variance"}));
    e2e->add_flag("--uce-use-variance", e2e_variance, "compare errors against sigma^2");
    e2e->add_option("--n-disks", e2e_disks, "Simpson biplane disk count");
    e2e->add_flag("--no-segmentation", e2e_no_seg, "skip pixel-level evaluation");
    e2e->add_option("--seg-grid", e2e_seg_grid, "segmentation raster size");
    e2e->add_option("--seg-samples", e2e_seg_samples, "samples per image for uncertainty maps");
    e2e->add_option("--seg-images", e2e_seg_images, "images evaluated at pixel level");

    CLI11_PARSE(app, argc, argv);

    try {
        const int threads = resolve_threads(threads_flag);
        if (synth->parsed()) return cmd_synth(synth_config, synth_out, synth_seed, synth_epistemic);
        if (fit->parsed()) return cmd_fit_shape_model(fit_contours, fit_kind, fit_out);
        if (moments->parsed())
            return cmd_moments(mom_heatmaps, mom_ids, mom_view, mom_frame, mom_landmarks, mom_out);
        if (sample->parsed())
            return cmd_sample(smp_pred, smp_model, smp_eps2, smp_n, smp_seed, smp_temporal, smp_joint,
                              smp_spacing, smp_out);
        if (prop->parsed())
            return cmd_propagate(prp_pred, prp_model, prp_joint, prp_temporal, prp_metric, prp_ta,
                                 prp_te, prp_seed, prp_eps2, prp_disks, prp_spacing, prp_out, threads);
        if (eval->parsed())
            return cmd_evaluate(ev_report, ev_truth, ev_bins, ev_stat, ev_variance, ev_disks, ev_out);
        if (e2e->parsed())
            return cmd_end_to_end(e2e_config, e2e_out, e2e_seed, e2e_ta, e2e_te, e2e_eps2, e2e_bins,
                                  e2e_no_temporal, e2e_stat, e2e_variance, e2e_disks, e2e_no_seg,
                                  e2e_seg_grid, e2e_seg_samples, e2e_seg_images, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
