#include "maskprop/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "maskprop/png_io.hpp"
#include "maskprop/retrieval.hpp"
#include "maskprop/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace maskprop::pipeline {

namespace {

[[noreturn]] void fail(const std::string& stage, const std::string& what) {
    throw std::runtime_error("[" + stage + "] " + what);
}

bool is_frame_stem(const std::string& stem) {
    return stem.size() == 5 && std::all_of(stem.begin(), stem.end(),
                                           [](unsigned char c) { return std::isdigit(c); });
}

std::string frame_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", index);
    return buf;
}

}  // namespace

SequenceDataset load_sequence(const std::string& root, const std::string& sequence) {
    SequenceDataset ds;
    ds.root = root;
    ds.name = sequence;

    fs::path frames_dir = fs::path(root) / "JPEGImages" / sequence;
    fs::path ann_dir = fs::path(root) / "Annotations" / sequence;
    if (!fs::is_directory(frames_dir)) fail("dataset", "missing frame directory " + frames_dir.string());

    std::vector<std::pair<std::string, std::string>> found;  // stem, path
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") continue;
        std::string stem = entry.path().stem().string();
        if (!is_frame_stem(stem)) continue;
        found.emplace_back(stem, entry.path().string());
    }
    std::sort(found.begin(), found.end());
    if (found.size() < 2) fail("dataset", "sequence " + sequence + " needs at least 2 frames");

    for (auto& [stem, path] : found) {
        ds.frame_paths.push_back(path);
        fs::path ann = ann_dir / (stem + ".png");
        ds.annotation_paths.push_back(fs::is_regular_file(ann) ? ann.string() : std::string());
    }
    if (ds.annotation_paths[0].empty())
        fail("dataset", "missing frame-0 annotation for sequence " + sequence);

    LabelMap labels0 = io::read_indexed_png(ds.annotation_paths[0]);
    ds.width = labels0.width;
    ds.height = labels0.height;
    std::vector<int> ids(labels0.data.begin(), labels0.data.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids)
        if (id != 0) ds.instance_ids.push_back(id);
    if (ds.instance_ids.empty()) fail("dataset", "no instances in frame-0 annotation of " + sequence);

    for (const std::string& p : ds.frame_paths) {
        Image img = io::read_image(p);
        if (img.width != ds.width || img.height != ds.height)
            fail("dataset", "frame dimension mismatch at " + p);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok |= it.key() == k;
        if (!ok) fail("config", "unknown key \"" + it.key() + "\" in " + scope);
    }
}

PipelineConfig parse_config(const json& j) {
    PipelineConfig cfg;
    reject_unknown_keys(j, {"flow", "roi", "predictor", "checkpoint", "crf", "merge", "output_dir",
                            "flow_cache", "seed"},
                        "config");
    if (j.contains("flow")) {
        const json& f = j["flow"];
        reject_unknown_keys(f, {"pyramid_levels", "level_scale", "alpha", "iterations_per_level"},
                            "flow");
        cfg.flow.pyramid_levels = f.value("pyramid_levels", cfg.flow.pyramid_levels);
        cfg.flow.level_scale = f.value("level_scale", cfg.flow.level_scale);
        cfg.flow.alpha = f.value("alpha", cfg.flow.alpha);
        cfg.flow.iterations_per_level = f.value("iterations_per_level", cfg.flow.iterations_per_level);
    }
    if (j.contains("roi")) {
        const json& r = j["roi"];
        reject_unknown_keys(r, {"threshold", "margin", "min_pixels", "patch_size"}, "roi");
        cfg.roi.threshold = r.value("threshold", cfg.roi.threshold);
        cfg.roi.margin = r.value("margin", cfg.roi.margin);
        cfg.roi.min_pixels = r.value("min_pixels", cfg.roi.min_pixels);
        cfg.roi.patch_size = r.value("patch_size", cfg.roi.patch_size);
    }
    cfg.predictor = j.value("predictor", cfg.predictor);
    if (cfg.predictor != "baseline" && cfg.predictor != "tinynet")
        fail("config", "predictor must be baseline or tinynet");
    cfg.checkpoint = j.value("checkpoint", cfg.checkpoint);
    if (j.contains("crf")) {
        const json& c = j["crf"];
        reject_unknown_keys(c, {"enabled", "w_app", "theta_alpha", "theta_beta", "w_smooth",
                                "theta_gamma", "iterations"},
                            "crf");
        cfg.crf_enabled = c.value("enabled", cfg.crf_enabled);
        cfg.crf.w_app = c.value("w_app", cfg.crf.w_app);
        cfg.crf.theta_alpha = c.value("theta_alpha", cfg.crf.theta_alpha);
        cfg.crf.theta_beta = c.value("theta_beta", cfg.crf.theta_beta);
        cfg.crf.w_smooth = c.value("w_smooth", cfg.crf.w_smooth);
        cfg.crf.theta_gamma = c.value("theta_gamma", cfg.crf.theta_gamma);
        cfg.crf.iterations = c.value("iterations", cfg.crf.iterations);
    }
    if (j.contains("merge")) {
        const json& m = j["merge"];
        reject_unknown_keys(m, {"bg_threshold"}, "merge");
        cfg.merge.bg_threshold = m.value("bg_threshold", cfg.merge.bg_threshold);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.flow_cache = j.value("flow_cache", cfg.flow_cache);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

PipelineConfig config_from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("config", "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

namespace {

FlowField flow_between(const Image& prev, const Image& next, int pair_index,
                       const SequenceDataset& ds, const PipelineConfig& cfg) {
    if (cfg.flow_cache.empty()) return flow::estimate_flow(prev, next, cfg.flow);

    fs::path dir = fs::path(cfg.flow_cache) / ds.name;
    fs::create_directories(dir);
    fs::path file = dir / (frame_name(pair_index) + "_" + frame_name(pair_index + 1) + ".flo");
    if (fs::is_regular_file(file)) {
        try {
            FlowField f = flow::read_flo(file.string());
            if (f.width == next.width && f.height == next.height) return f;
        } catch (const std::exception&) {
            // fall through to recompute on an unreadable cache entry
        }
    }
    FlowField f = flow::estimate_flow(prev, next, cfg.flow);
    flow::write_flo(f, file.string());
    return f;
}

}  // namespace

PropagationResult propagate_sequence(const SequenceDataset& ds, const PipelineConfig& cfg) {
    const int n_frames = static_cast<int>(ds.frame_paths.size());
    const int w = ds.width, h = ds.height;

    LabelMap labels0 = io::read_indexed_png(ds.annotation_paths[0]);
    Image frame0 = io::read_image(ds.frame_paths[0]);

    // One-shot models per instance: the retrieval branch, and for the baseline
    // predictor also the propagation function N itself.
    std::optional<predictor::TinyNet> base_net;
    if (cfg.predictor == "tinynet") {
        if (cfg.checkpoint.empty()) fail("predictor", "tinynet predictor needs a checkpoint");
        base_net = predictor::load_checkpoint(cfg.checkpoint);
    }
    retrieval::OneShotConfig os_cfg;
    os_cfg.patch_size = cfg.roi.patch_size;
    std::vector<retrieval::OneShotModel> one_shot;
    for (int id : ds.instance_ids) {
        try {
            one_shot.push_back(retrieval::fit_one_shot(
                frame0, labels0, id, base_net ? &*base_net : nullptr, os_cfg));
        } catch (const std::exception& e) {
            fail("retrieval", "one-shot fit for instance " + std::to_string(id) + ": " + e.what());
        }
    }

    PropagationResult result;
    result.labels.push_back(labels0);
    FrameReport report0;
    for (int id : ds.instance_ids) report0.instances.emplace_back(id, InstanceStatus::kPropagated);
    result.reports.push_back(report0);

    std::vector<ProbMap> state;  // per-instance estimated maps of the previous frame
    for (int id : ds.instance_ids) {
        ProbMap m(w, h);
        for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = labels0.data[i] == id ? 1.f : 0.f;
        state.push_back(std::move(m));
    }

    Image prev_frame = frame0;
    for (int j = 1; j < n_frames; ++j) {
        Image cur_frame = io::read_image(ds.frame_paths[j]);
        FlowField f;
        try {
            f = flow_between(prev_frame, cur_frame, j - 1, ds, cfg);
        } catch (const std::exception& e) {
            fail("flow", "frame " + std::to_string(j) + ": " + e.what());
        }

        FrameReport report;
        std::vector<std::pair<int, ProbMap>> instance_maps;
        for (size_t k = 0; k < ds.instance_ids.size(); ++k) {
            int id = ds.instance_ids[k];
            try {
                ProbMap warped = warp_prob(state[k], f);
                std::optional<ProbMap> prop;
                std::optional<ProbMap> retr;
                InstanceStatus status;

                if (std::optional<BBox> box = roi::mask_bbox(warped, cfg.roi)) {
                    BBox ebox = roi::expand_bbox(*box, cfg.roi.margin, w, h);
                    auto [img_patch, prob_patch] =
                        roi::crop_instance(cur_frame, warped, ebox, cfg.roi.patch_size);
                    ProbMap pred = base_net ? base_net->forward(img_patch, prob_patch)
                                            : retrieval::apply_model(one_shot[k], img_patch,
                                                                     prob_patch);
                    prop = roi::paste_instance(ProbMap(w, h), pred, ebox);
                    status = InstanceStatus::kPropagated;
                } else {
                    auto [retr_prob, retr_box] = retrieval::redetect(one_shot[k], cur_frame, cfg.roi);
                    if (retr_box) {
                        retr = std::move(retr_prob);
                        status = InstanceStatus::kMissingRedetected;
                    } else {
                        status = InstanceStatus::kMissingNotFound;
                    }
                }

                ProbMap selected = merge::select_instance_map(prop, retr, w, h);
                if (cfg.crf_enabled && status != InstanceStatus::kMissingNotFound)
                    selected = crf::refine(selected, cur_frame, cfg.crf);

                state[k] = selected;
                instance_maps.emplace_back(id, std::move(selected));
                report.instances.emplace_back(id, status);
            } catch (const std::exception& e) {
                fail("propagate", "frame " + std::to_string(j) + ", instance " + std::to_string(id) +
                                      ": " + e.what());
            }
        }

        try {
            result.labels.push_back(merge::argmax_merge(instance_maps, cfg.merge));
        } catch (const std::exception& e) {
            fail("merge", "frame " + std::to_string(j) + ": " + e.what());
        }
        result.reports.push_back(std::move(report));
        prev_frame = std::move(cur_frame);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Evaluation and artifact emission
// ---------------------------------------------------------------------------

EvalResult evaluate(const std::vector<LabelMap>& predictions,
                    const std::vector<LabelMap>& ground_truth,
                    const std::vector<int>& instance_ids) {
    if (predictions.size() != ground_truth.size() || predictions.empty())
        fail("eval", "prediction and ground-truth frame counts differ");
    if (instance_ids.empty()) fail("eval", "no instance ids to evaluate");

    double tol = metrics::default_boundary_tolerance(predictions[0].width, predictions[0].height);

    EvalResult out;
    for (int id : instance_ids) {
        std::vector<double> j_scores, f_scores;
        for (size_t t = 0; t < predictions.size(); ++t) {
            metrics::BinaryMask pred = metrics::mask_from_labels(predictions[t], id);
            metrics::BinaryMask gt = metrics::mask_from_labels(ground_truth[t], id);
            j_scores.push_back(metrics::jaccard(pred, gt));
            f_scores.push_back(metrics::boundary_f(pred, gt, tol));
        }
        InstanceEval ie;
        ie.instance_id = id;
        ie.stats.j = metrics::sequence_stats(j_scores);
        ie.stats.f = metrics::sequence_stats(f_scores);
        out.per_instance.push_back(ie);
    }

    auto& avg = out.average;
    for (const InstanceEval& ie : out.per_instance) {
        avg.j.mean += ie.stats.j.mean;
        avg.j.recall += ie.stats.j.recall;
        avg.j.decay += ie.stats.j.decay;
        avg.f.mean += ie.stats.f.mean;
        avg.f.recall += ie.stats.f.recall;
        avg.f.decay += ie.stats.f.decay;
    }
    double inv = 1.0 / static_cast<double>(out.per_instance.size());
    avg.j.mean *= inv;
    avg.j.recall *= inv;
    avg.j.decay *= inv;
    avg.f.mean *= inv;
    avg.f.recall *= inv;
    avg.f.decay *= inv;
    out.overall_pct = metrics::overall(avg.j.mean * 100.0, avg.f.mean * 100.0);
    return out;
}

void write_predictions(const SequenceDataset& ds, const PropagationResult& result,
                       const std::string& out_dir, bool overlays) {
    fs::path seq_dir = fs::path(out_dir) / ds.name;
    fs::create_directories(seq_dir);
    fs::path overlay_dir = fs::path(out_dir) / (ds.name + "_overlay");
    if (overlays) fs::create_directories(overlay_dir);

    for (size_t t = 0; t < result.labels.size(); ++t) {
        std::string name = frame_name(static_cast<int>(t)) + ".png";
        io::write_indexed_png(result.labels[t], (seq_dir / name).string());
        if (overlays) {
            Image frame = io::read_image(ds.frame_paths[t]);
            io::write_image_png(io::overlay_labels(frame, result.labels[t]),
                                (overlay_dir / name).string());
        }
    }
}

void write_summary_json(const std::string& path, const std::string& sequence,
                        const EvalResult& eval) {
    json j;
    j["sequence"] = sequence;
    j["overall"] = metrics::overall_rounded(eval.average.j.mean * 100.0, eval.average.f.mean * 100.0);
    j["j"] = {{"mean", eval.average.j.mean},
              {"recall", eval.average.j.recall},
              {"decay", eval.average.j.decay}};
    j["f"] = {{"mean", eval.average.f.mean},
              {"recall", eval.average.f.recall},
              {"decay", eval.average.f.decay}};
    json per = json::array();
    for (const InstanceEval& ie : eval.per_instance) {
        per.push_back({{"instance", ie.instance_id},
                       {"j", {{"mean", ie.stats.j.mean},
                              {"recall", ie.stats.j.recall},
                              {"decay", ie.stats.j.decay}}},
                       {"f", {{"mean", ie.stats.f.mean},
                              {"recall", ie.stats.f.recall},
                              {"decay", ie.stats.f.decay}}}});
    }
    j["instances"] = per;

    std::ofstream os(path);
    if (!os) fail("eval", "cannot open " + path);
    os << j.dump(2) << '\n';
}

void write_synth_sequence(const synth::SynthSequence& seq, const std::string& root,
                          const std::string& name) {
    fs::path frames_dir = fs::path(root) / "JPEGImages" / name;
    fs::path ann_dir = fs::path(root) / "Annotations" / name;
    fs::create_directories(frames_dir);
    fs::create_directories(ann_dir);
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        std::string n = frame_name(static_cast<int>(t)) + ".png";
        io::write_image_png(seq.frames[t].image, (frames_dir / n).string());
        io::write_indexed_png(seq.frames[t].labels, (ann_dir / n).string());
    }
}

// ---------------------------------------------------------------------------
// Training-sample construction
// ---------------------------------------------------------------------------

namespace {

// Affine jitter of a mask: inverse-mapped bilinear resample around its center.
ProbMap jitter_mask(const ProbMap& mask, float shift_x, float shift_y, float scale) {
    ProbMap out(mask.width, mask.height);
    float cx = 0.5f * static_cast<float>(mask.width - 1);
    float cy = 0.5f * static_cast<float>(mask.height - 1);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            float sx = (static_cast<float>(x) - cx - shift_x) / scale + cx;
            float sy = (static_cast<float>(y) - cy - shift_y) / scale + cy;
            out.at(x, y) = bilinear_sample(mask, sx, sy);
        }
    }
    return out;
}

}  // namespace

std::vector<predictor::TrainSample> build_training_samples(const synth::SynthSequence& seq,
                                                           const roi::RoiParams& roi_params,
                                                           uint32_t seed) {
    std::mt19937 rng(seed);
    auto uniform = [&rng](float lo, float hi) {
        return lo + (hi - lo) * (static_cast<float>(rng()) * (1.f / 4294967296.f));
    };

    std::vector<int> ids;
    for (int v : seq.frames[0].labels.data)
        if (v != 0 && std::find(ids.begin(), ids.end(), v) == ids.end()) ids.push_back(v);
    std::sort(ids.begin(), ids.end());

    std::vector<predictor::TrainSample> samples;
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        const synth::SynthFrame& fr = seq.frames[t];
        for (int id : ids) {
            ProbMap gt(fr.labels.width, fr.labels.height);
            size_t support = 0;
            for (size_t i = 0; i < gt.data.size(); ++i) {
                gt.data[i] = fr.labels.data[i] == id ? 1.f : 0.f;
                support += fr.labels.data[i] == id;
            }
            if (support < static_cast<size_t>(roi_params.min_pixels)) continue;

            ProbMap prior = jitter_mask(gt, uniform(-8.f, 8.f), uniform(-8.f, 8.f),
                                        uniform(0.9f, 1.1f));
            std::optional<BBox> box = roi::mask_bbox(prior, roi_params);
            if (!box) continue;
            BBox ebox = roi::expand_bbox(*box, roi_params.margin, gt.width, gt.height);
            auto [img_patch, prior_patch] =
                roi::crop_instance(fr.image, prior, ebox, roi_params.patch_size);
            auto [unused, target_patch] =
                roi::crop_instance(fr.image, gt, ebox, roi_params.patch_size);
            (void)unused;

            predictor::TrainSample s;
            s.image = std::move(img_patch);
            s.prior = std::move(prior_patch);
            s.target = std::move(target_patch);
            samples.push_back(std::move(s));
        }
    }
    if (samples.empty()) fail("train", "no usable training samples from synthetic sequence");
    return samples;
}

}  // namespace maskprop::pipeline
