#pragma once

// File formats and persistence helpers.
//
//   contours / truth   JSON Lines, one record per (id, view, frame)
//   predictions        JSON Lines with per-point means and covariances
//   heatmaps           CHM1 binary: magic, u32 K/H/W, float32 grids
//   shape model        single JSON object
//   manifest.json      command provenance, one per output directory

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "casus/heatmap.hpp"
#include "casus/rng.hpp"
#include "casus/shape_model.hpp"
#include "casus/synth.hpp"
#include "casus/types.hpp"

namespace casus {

using nlohmann::json;

// ---------------------------------------------------------------- files --

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// temp-then-rename so partially written outputs never appear under the
// final name
inline void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string file_digest(const std::filesystem::path& path) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file_bytes(path))));
    return buf;
}

// ------------------------------------------------------------- contours --

inline json contour_to_json(const std::string& id, const Contour& c) {
    json rec;
    rec["id"] = id;
    rec["view"] = to_string(c.view);
    rec["frame"] = to_string(c.frame);
    rec["spacing_mm"] = {c.spacing_mm(0), c.spacing_mm(1)};
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({p.x(), p.y()});
    rec["points"] = std::move(pts);
    rec["landmarks"] = {c.landmarks.basal1, c.landmarks.apex, c.landmarks.basal2};
    return rec;
}

inline ContourRecord contour_from_json(const json& rec) {
    ContourRecord out;
    out.id = rec.at("id").get<std::string>();
    out.contour.view = view_from_string(rec.at("view").get<std::string>());
    out.contour.frame = frame_from_string(rec.at("frame").get<std::string>());
    const auto& sp = rec.at("spacing_mm");
    out.contour.spacing_mm = {sp.at(0).get<double>(), sp.at(1).get<double>()};
    for (const auto& p : rec.at("points")) out.contour.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    const auto& lm = rec.at("landmarks");
    out.contour.landmarks = {lm.at(0).get<int>(), lm.at(1).get<int>(), lm.at(2).get<int>()};
    return out;
}

inline void write_contours_jsonl(const std::filesystem::path& path, const std::vector<ContourRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) out << contour_to_json(r.id, r.contour).dump() << '\n';
    atomic_write_file(path, out.str());
}

inline std::vector<ContourRecord> read_contours_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file_bytes(path));
    std::vector<ContourRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(contour_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------- predictions --

inline json prediction_to_json(const std::string& id, const ContourDistribution& d) {
    json rec;
    rec["id"] = id;
    rec["view"] = to_string(d.view);
    rec["frame"] = to_string(d.frame);
    json pts = json::array();
    json covs = json::array();
    for (const auto& p : d.points) {
        pts.push_back({p.mu.x(), p.mu.y()});
        covs.push_back({{p.sigma(0, 0), p.sigma(0, 1)}, {p.sigma(1, 0), p.sigma(1, 1)}});
    }
    rec["points"] = std::move(pts);
    rec["covariances"] = std::move(covs);
    rec["landmarks"] = {d.landmarks.basal1, d.landmarks.apex, d.landmarks.basal2};
    return rec;
}

inline PredictionRecord prediction_from_json(const json& rec) {
    PredictionRecord out;
    out.id = rec.at("id").get<std::string>();
    out.dist.view = view_from_string(rec.at("view").get<std::string>());
    out.dist.frame = frame_from_string(rec.at("frame").get<std::string>());
    const auto& pts = rec.at("points");
    const auto& covs = rec.at("covariances");
    if (pts.size() != covs.size()) throw std::runtime_error("prediction record: points/covariances size mismatch");
    out.dist.points.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.dist.points[i].mu = {pts.at(i).at(0).get<double>(), pts.at(i).at(1).get<double>()};
        Mat2 s;
        s << covs.at(i).at(0).at(0).get<double>(), covs.at(i).at(0).at(1).get<double>(),
            covs.at(i).at(1).at(0).get<double>(), covs.at(i).at(1).at(1).get<double>();
        out.dist.points[i].sigma = s;
    }
    if (rec.contains("landmarks")) {
        const auto& lm = rec.at("landmarks");
        out.dist.landmarks = {lm.at(0).get<int>(), lm.at(1).get<int>(), lm.at(2).get<int>()};
    } else {
        const int k = static_cast<int>(out.dist.points.size());
        out.dist.landmarks = {0, (k - 1) / 2, k - 1};
    }
    return out;
}

inline void write_predictions_jsonl(const std::filesystem::path& path,
                                    const std::vector<PredictionRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) out << prediction_to_json(r.id, r.dist).dump() << '\n';
    atomic_write_file(path, out.str());
}

inline std::vector<PredictionRecord> read_predictions_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file_bytes(path));
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(prediction_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ------------------------------------------------------------ CHM1 file --
// magic "CHM1", u32 K, u32 H, u32 W, then K*H*W float32 values, row-major,
// point-major, little-endian.

inline void write_chm1(const std::filesystem::path& path, const HeatmapStack& stack) {
    std::string bytes;
    const std::uint32_t k = static_cast<std::uint32_t>(stack.k());
    const std::uint32_t h = static_cast<std::uint32_t>(stack.h());
    const std::uint32_t w = static_cast<std::uint32_t>(stack.w());
    bytes.append("CHM1", 4);
    auto put_u32 = [&bytes](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put_u32(k);
    put_u32(h);
    put_u32(w);
    for (const auto& g : stack.grids) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            for (Eigen::Index j = 0; j < g.cols(); ++j) {
                const float f = static_cast<float>(g(i, j));
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                put_u32(bits);
            }
        }
    }
    atomic_write_file(path, bytes);
}

inline HeatmapStack read_chm1(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    std::size_t off = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error(path.string() + ": " + what + " at byte offset " + std::to_string(off));
    };
    if (bytes.size() < 4 || bytes.compare(0, 4, "CHM1") != 0) fail("bad magic");
    off = 4;
    auto get_u32 = [&]() {
        if (off + 4 > bytes.size()) fail("truncated header");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
        off += 4;
        return v;
    };
    const std::uint32_t k = get_u32();
    const std::uint32_t h = get_u32();
    const std::uint32_t w = get_u32();
    if (k == 0) fail("empty stack");
    if (h == 0 || w == 0) fail("zero grid dimension");
    HeatmapStack stack;
    stack.grids.reserve(k);
    for (std::uint32_t p = 0; p < k; ++p) {
        Grid g(h, w);
        for (std::uint32_t i = 0; i < h; ++i) {
            for (std::uint32_t j = 0; j < w; ++j) {
                if (off + 4 > bytes.size()) fail("truncated data");
                std::uint32_t bits = 0;
                for (int b = 0; b < 4; ++b)
                    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
                off += 4;
                float f;
                std::memcpy(&f, &bits, 4);
                g(i, j) = static_cast<double>(f);
            }
        }
        stack.grids.push_back(std::move(g));
    }
    return stack;
}

// ----------------------------------------------------------- shape model --

inline json shape_model_to_json(const ShapeModel& m) {
    json out;
    out["dim"] = m.dim();
    out["rank"] = m.rank();
    out["kind"] = to_string(m.kind);
    out["k"] = m.k;
    out["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
    out["eigenvalues"] = std::vector<double>(m.eigenvalues.data(), m.eigenvalues.data() + m.eigenvalues.size());
    json factors = json::array();
    for (Eigen::Index i = 0; i < m.factors.rows(); ++i)
        for (Eigen::Index j = 0; j < m.factors.cols(); ++j) factors.push_back(m.factors(i, j));
    out["factors"] = std::move(factors);
    return out;
}

inline ShapeModel shape_model_from_json(const json& in) {
    ShapeModel m;
    const Eigen::Index d = in.at("dim").get<Eigen::Index>();
    const Eigen::Index r = in.at("rank").get<Eigen::Index>();
    m.kind = model_kind_from_string(in.at("kind").get<std::string>());
    m.k = in.at("k").get<int>();
    const auto mean = in.at("mean").get<std::vector<double>>();
    const auto ev = in.at("eigenvalues").get<std::vector<double>>();
    const auto fac = in.at("factors").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(ev.size()) != r ||
        static_cast<Eigen::Index>(fac.size()) != d * r)
        throw std::runtime_error("shape model file: inconsistent dimensions");
    m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
    m.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), r);
    m.factors.resize(d, r);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < r; ++j) m.factors(i, j) = fac[static_cast<std::size_t>(i) * r + j];
    return m;
}

inline void write_shape_model(const std::filesystem::path& path, const ShapeModel& m) {
    atomic_write_file(path, shape_model_to_json(m).dump(2) + "\n");
}

inline ShapeModel read_shape_model(const std::filesystem::path& path) {
    return shape_model_from_json(json::parse(read_file_bytes(path)));
}

// ---------------------------------------------------------- synth config --

inline json synth_config_to_json(const SynthConfig& c) {
    json j;
    j["n_cases"] = c.n_cases;
    j["k"] = c.k;
    j["basal_half_width"] = c.basal_half_width;
    j["long_axis"] = c.long_axis;
    j["base_y"] = c.base_y;
    j["shape_scale"] = c.shape_scale;
    j["shape_corr_length"] = c.shape_corr_length;
    j["noise_scale"] = c.noise_scale;
    j["noise_corr_length"] = c.noise_corr_length;
    j["apex_noise_boost"] = c.apex_noise_boost;
    j["case_difficulty_spread"] = c.case_difficulty_spread;
    j["ed_es_coupling"] = c.ed_es_coupling;
    j["es_contraction"] = c.es_contraction;
    j["es_noise"] = c.es_noise;
    j["seed"] = c.seed;
    return j;
}

inline SynthConfig synth_config_from_json(const json& j) {
    SynthConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("n_cases", c.n_cases);
    get("k", c.k);
    get("basal_half_width", c.basal_half_width);
    get("long_axis", c.long_axis);
    get("base_y", c.base_y);
    get("shape_scale", c.shape_scale);
    get("shape_corr_length", c.shape_corr_length);
    get("noise_scale", c.noise_scale);
    get("noise_corr_length", c.noise_corr_length);
    get("apex_noise_boost", c.apex_noise_boost);
    get("case_difficulty_spread", c.case_difficulty_spread);
    get("ed_es_coupling", c.ed_es_coupling);
    get("es_contraction", c.es_contraction);
    get("es_noise", c.es_noise);
    get("seed", c.seed);
    c.validate();
    return c;
}

inline SynthConfig read_synth_config(const std::filesystem::path& path) {
    return synth_config_from_json(json::parse(read_file_bytes(path)));
}

// -------------------------------------------------------------- manifest --

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> flags;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_digests;  // (path, digest)
    double wall_time_s = 0.0;
};

inline void write_manifest(const std::filesystem::path& out_dir, const RunManifest& m) {
    json j;
    j["command"] = m.command;
    json flags = json::object();
    for (const auto& [k, v] : m.flags) flags[k] = v;
    j["flags"] = std::move(flags);
    j["seed"] = m.seed;
    json digests = json::object();
    for (const auto& [k, v] : m.input_digests) digests[k] = v;
    j["input_digests"] = std::move(digests);
    j["tool_version"] = kToolVersion;
    j["wall_time_s"] = m.wall_time_s;
    atomic_write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace casus
