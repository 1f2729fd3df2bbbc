#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskprop/pipeline.hpp"
#include "maskprop/png_io.hpp"
#include "maskprop/predictor.hpp"
#include "maskprop/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace maskprop;

namespace {

synth::SynthSpec synth_spec_from_json(const json& j) {
    synth::SynthSpec spec;
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.frames = j.value("frames", spec.frames);
    spec.background_seed = j.value("background_seed", spec.background_seed);
    spec.noise_stddev = j.value("noise_stddev", spec.noise_stddev);
    spec.bg_amplitude = j.value("bg_amplitude", spec.bg_amplitude);
    if (j.contains("bg_color")) {
        spec.bg_r = j["bg_color"][0];
        spec.bg_g = j["bg_color"][1];
        spec.bg_b = j["bg_color"][2];
    }
    if (!j.contains("instances")) throw std::runtime_error("[synth] spec needs instances");
    for (const json& ij : j["instances"]) {
        synth::InstanceSpec inst;
        inst.id = ij.value("id", 1);
        std::string shape = ij.value("shape", "disk");
        if (shape == "disk")
            inst.shape = synth::ShapeKind::kDisk;
        else if (shape == "rectangle")
            inst.shape = synth::ShapeKind::kRectangle;
        else
            throw std::runtime_error("[synth] unknown shape " + shape);
        inst.texture_seed = ij.value("texture_seed", inst.texture_seed);
        if (ij.contains("center")) {
            inst.cx = ij["center"][0];
            inst.cy = ij["center"][1];
        }
        inst.radius = ij.value("radius", inst.radius);
        inst.half_w = ij.value("half_w", inst.half_w);
        inst.half_h = ij.value("half_h", inst.half_h);
        inst.angle = ij.value("angle", inst.angle);
        if (ij.contains("translation")) {
            inst.tx = ij["translation"][0];
            inst.ty = ij["translation"][1];
        }
        inst.rot_rate = ij.value("rotation_rate", inst.rot_rate);
        inst.scale_rate = ij.value("scale_rate", inst.scale_rate);
        if (ij.contains("base_color")) {
            inst.base_r = ij["base_color"][0];
            inst.base_g = ij["base_color"][1];
            inst.base_b = ij["base_color"][2];
        }
        inst.tex_amplitude = ij.value("tex_amplitude", inst.tex_amplitude);
        spec.instances.push_back(inst);
    }
    return spec;
}

synth::SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("[synth] cannot open spec " + path);
    json j;
    is >> j;
    return synth_spec_from_json(j);
}

std::vector<LabelMap> read_label_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("[eval] no PNG files in " + dir);
    std::vector<LabelMap> out;
    for (const std::string& f : files) out.push_back(io::read_indexed_png(f));
    return out;
}

int run_command(const std::string& root, const std::string& seq, const std::string& config_path,
                bool no_crf, const std::string& predictor_kind, bool overlays,
                const std::string& flow_cache, int seed, const std::string& out_dir,
                const std::string& checkpoint) {
    pipeline::PipelineConfig cfg;
    if (!config_path.empty()) cfg = pipeline::config_from_json_file(config_path);
    if (no_crf) cfg.crf_enabled = false;
    if (!predictor_kind.empty()) cfg.predictor = predictor_kind;
    if (!flow_cache.empty()) cfg.flow_cache = flow_cache;
    if (seed >= 0) cfg.seed = static_cast<uint32_t>(seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;

    pipeline::SequenceDataset ds = pipeline::load_sequence(root, seq);
    std::printf("sequence %s: %zu frames, %zu instances\n", ds.name.c_str(), ds.frame_paths.size(),
                ds.instance_ids.size());

    pipeline::PropagationResult result = pipeline::propagate_sequence(ds, cfg);
    pipeline::write_predictions(ds, result, cfg.output_dir, overlays);
    std::printf("wrote predictions to %s/%s\n", cfg.output_dir.c_str(), ds.name.c_str());

    // Score against ground truth when every frame is annotated.
    bool full_gt = std::all_of(ds.annotation_paths.begin(), ds.annotation_paths.end(),
                               [](const std::string& p) { return !p.empty(); });
    if (full_gt && ds.frame_paths.size() >= 4) {
        std::vector<LabelMap> gt;
        for (const std::string& p : ds.annotation_paths) gt.push_back(io::read_indexed_png(p));
        pipeline::EvalResult eval = pipeline::evaluate(result.labels, gt, ds.instance_ids);
        std::vector<metrics::SequenceRow> rows{{ds.name, eval.average}};
        metrics::write_metrics_csv((fs::path(cfg.output_dir) / "metrics.csv").string(), rows);
        pipeline::write_summary_json((fs::path(cfg.output_dir) / "summary.json").string(), ds.name,
                                     eval);
        std::printf("J mean %.4f  F mean %.4f  overall %.1f\n", eval.average.j.mean,
                    eval.average.f.mean, eval.overall_pct);
    }
    return 0;
}

int train_command(const std::string& spec_path, const std::string& out_path, int steps,
                  double learning_rate, int batch_size, int seed) {
    synth::SynthSpec spec = load_synth_spec(spec_path);
    synth::SynthSequence seq = synth::generate(spec);

    roi::RoiParams roi_params;
    std::vector<predictor::TrainSample> samples =
        pipeline::build_training_samples(seq, roi_params, static_cast<uint32_t>(seed) + 99u);
    std::printf("training on %zu samples\n", samples.size());

    predictor::TinyNet net(static_cast<uint32_t>(seed));
    predictor::TrainConfig cfg;
    cfg.steps = steps;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.seed = static_cast<uint32_t>(seed);
    predictor::TrainTrace trace = predictor::train(net, samples, cfg);
    std::printf("loss %.4f -> %.4f\n", trace.losses.front(), trace.losses.back());

    predictor::save_checkpoint(net, out_path);
    std::printf("saved checkpoint %s (%zu parameters)\n", out_path.c_str(), net.param_count());
    return 0;
}

int eval_command(const std::string& pred_dir, const std::string& gt_dir, const std::string& csv,
                 const std::string& json_path) {
    std::vector<LabelMap> preds = read_label_dir(pred_dir);
    std::vector<LabelMap> gts = read_label_dir(gt_dir);
    if (preds.size() != gts.size())
        throw std::runtime_error("[eval] prediction and ground-truth frame counts differ");

    std::vector<int> ids;
    for (int v : gts[0].data)
        if (v != 0 && std::find(ids.begin(), ids.end(), v) == ids.end()) ids.push_back(v);
    std::sort(ids.begin(), ids.end());

    pipeline::EvalResult eval = pipeline::evaluate(preds, gts, ids);
    std::printf("J mean %.4f recall %.4f decay %.4f\n", eval.average.j.mean, eval.average.j.recall,
                eval.average.j.decay);
    std::printf("F mean %.4f recall %.4f decay %.4f\n", eval.average.f.mean, eval.average.f.recall,
                eval.average.f.decay);
    std::printf("overall %.1f\n",
                metrics::overall_rounded(eval.average.j.mean * 100.0, eval.average.f.mean * 100.0));

    std::string seq_name = fs::path(pred_dir).filename().string();
    if (!csv.empty()) {
        std::vector<metrics::SequenceRow> rows{{seq_name, eval.average}};
        metrics::write_metrics_csv(csv, rows);
    }
    if (!json_path.empty()) pipeline::write_summary_json(json_path, seq_name, eval);
    return 0;
}

int synth_command(const std::string& spec_path, const std::string& out_dir,
                  const std::string& name) {
    synth::SynthSpec spec = load_synth_spec(spec_path);
    synth::SynthSequence seq = synth::generate(spec);
    pipeline::write_synth_sequence(seq, out_dir, name);
    std::printf("wrote %d frames to %s (sequence %s)\n", spec.frames, out_dir.c_str(), name.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flow-guided multi-instance mask propagation"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Propagate a sequence from its first-frame annotation");
    std::string root, seq, config_path, predictor_kind, flow_cache, out_dir, checkpoint;
    bool no_crf = false, overlays = false;
    int seed = -1;
    run->add_option("root", root, "Dataset root directory")->required();
    run->add_option("sequence", seq, "Sequence name")->required();
    run->add_option("--config", config_path, "JSON config file");
    run->add_flag("--no-crf", no_crf, "Disable CRF refinement");
    run->add_option("--predictor", predictor_kind, "baseline|tinynet");
    run->add_flag("--overlays", overlays, "Also write RGB overlay PNGs");
    run->add_option("--flow-cache", flow_cache, "Directory for .flo flow caching");
    run->add_option("--seed", seed, "Seed override");
    run->add_option("--out", out_dir, "Output directory override");
    run->add_option("--checkpoint", checkpoint, "TinyNet checkpoint override");

    // train-predictor
    auto* tp = app.add_subcommand("train-predictor", "Train the TinyNet predictor on synthetic data");
    std::string tp_spec, tp_out;
    int tp_steps = 400, tp_batch = 4, tp_seed = 1;
    double tp_lr = 0.05;
    tp->add_option("--synth-spec", tp_spec, "Synthetic sequence spec (JSON)")->required();
    tp->add_option("--out", tp_out, "Checkpoint output path")->required();
    tp->add_option("--steps", tp_steps, "Training steps");
    tp->add_option("--learning-rate", tp_lr, "Learning rate");
    tp->add_option("--batch-size", tp_batch, "Batch size");
    tp->add_option("--seed", tp_seed, "Seed");

    // eval
    auto* ev = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string ev_pred, ev_gt, ev_csv, ev_json;
    ev->add_option("pred-dir", ev_pred, "Predicted indexed PNGs")->required();
    ev->add_option("gt-dir", ev_gt, "Ground-truth indexed PNGs")->required();
    ev->add_option("--csv", ev_csv, "metrics.csv output path");
    ev->add_option("--json", ev_json, "summary.json output path");

    // synth
    auto* sy = app.add_subcommand("synth", "Generate a synthetic sequence in dataset layout");
    std::string sy_spec, sy_out, sy_name = "synth";
    sy->add_option("--spec", sy_spec, "Synthetic sequence spec (JSON)")->required();
    sy->add_option("--out", sy_out, "Dataset root to write")->required();
    sy->add_option("--name", sy_name, "Sequence name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_command(root, seq, config_path, no_crf, predictor_kind, overlays,
                                     flow_cache, seed, out_dir, checkpoint);
        if (*tp) return train_command(tp_spec, tp_out, tp_steps, tp_lr, tp_batch, tp_seed);
        if (*ev) return eval_command(ev_pred, ev_gt, ev_csv, ev_json);
        if (*sy) return synth_command(sy_spec, sy_out, sy_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
