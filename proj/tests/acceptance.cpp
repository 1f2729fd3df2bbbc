// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "maskprop/crf.hpp"
#include "maskprop/flow.hpp"
#include "maskprop/metrics.hpp"
#include "maskprop/permutohedral.hpp"
#include "maskprop/pipeline.hpp"
#include "maskprop/png_io.hpp"
#include "maskprop/predictor.hpp"
#include "maskprop/retrieval.hpp"
#include "maskprop/synth.hpp"
#include "maskprop/warp.hpp"
#include "oracles.hpp"

using namespace maskprop;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* title, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, title,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// --- criterion 1: Table aggregation --------------------------------------

void criterion_overall() {
    const double rows[][3] = {
        {74.7, 71.0, 78.4}, {73.8, 71.9, 75.8}, {69.7, 66.9, 72.5},
        {69.5, 67.5, 71.5}, {67.8, 65.1, 70.6}, {66.3, 64.1, 68.6},
        {60.6, 58.4, 62.9}, {60.1, 57.7, 62.4}, {58.9, 56.7, 61.1},
    };
    double worst = 0.0;
    for (const auto& r : rows)
        worst = std::max(worst, std::fabs(metrics::overall(r[1], r[2]) - r[0]));
    report(1, "leaderboard overall aggregation", worst <= 0.05 + 1e-9,
           fmt("max |overall - cell| = %.6f over 9 rows", worst));
}

// --- criterion 2: metric oracles ------------------------------------------

void criterion_metric_oracles() {
    std::mt19937 rng(2024);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        metrics::BinaryMask p = oracles::random_mask(rng, 16, 16);
        metrics::BinaryMask g = oracles::random_mask(rng, 16, 16);
        double tol = metrics::default_boundary_tolerance(16, 16);
        if (metrics::jaccard(p, g) != oracles::jaccard_oracle(p, g)) ++mismatches;
        if (metrics::boundary_f(p, g, tol) != oracles::boundary_f_oracle(p, g, tol)) ++mismatches;
    }
    report(2, "jaccard and boundary F against brute-force oracles", mismatches == 0,
           fmt("%d mismatches in 200 mask pairs", mismatches));
}

// --- criterion 3: warp oracle ----------------------------------------------

void criterion_warp() {
    std::mt19937 rng(99);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ProbMap m = oracles::random_prob_map(rng, 16, 16);
        int dx = static_cast<int>(rng() % 11) - 5;
        int dy = static_cast<int>(rng() % 11) - 5;
        ProbMap w = warp_prob(m, FlowField(16, 16, static_cast<float>(dx), static_cast<float>(dy)));
        if (w.data != oracles::shift_with_zero_fill(m, dx, dy).data) ++mismatches;

        ProbMap id = warp_prob(m, FlowField(16, 16));
        if (id.data != m.data) ++mismatches;
    }
    report(3, "warp equals shift-with-zero-fill, zero flow is identity", mismatches == 0,
           fmt("%d mismatches in 100 maps", mismatches));
}

// --- criterion 4: flow accuracy ---------------------------------------------

synth::SynthSpec translation_spec(float tx, float ty, uint32_t seed) {
    synth::SynthSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.frames = 2;
    spec.background_seed = seed;
    synth::InstanceSpec inst;
    inst.id = 1;
    inst.texture_seed = seed * 7u + 1u;
    inst.cx = 28.f;
    inst.cy = 30.f;
    inst.radius = 17.f;
    inst.tx = tx;
    inst.ty = ty;
    spec.instances.push_back(inst);
    return spec;
}

void criterion_flow() {
    flow::FlowParams params;
    double worst_epe = 0.0;
    const float translations[][2] = {{2.f, 0.f}, {0.f, 3.f}, {-2.f, -1.f}};
    uint32_t seed = 11;
    for (const auto& t : translations) {
        synth::SynthSequence seq = synth::generate(translation_spec(t[0], t[1], seed += 3));
        FlowField est = flow::estimate_flow(seq.frames[0].image, seq.frames[1].image, params);
        const FlowField& gt = seq.gt_backward_flow[0];
        double sum = 0.0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                double du = est.dx(x, y) - gt.dx(x, y);
                double dv = est.dy(x, y) - gt.dy(x, y);
                sum += std::sqrt(du * du + dv * dv);
            }
        worst_epe = std::max(worst_epe, sum / (64.0 * 64.0));
    }

    synth::SynthSequence still = synth::generate(translation_spec(0.f, 0.f, 51));
    FlowField zero = flow::estimate_flow(still.frames[0].image, still.frames[0].image, params);
    float sup = 0.f;
    for (float v : zero.data) sup = std::max(sup, std::fabs(v));

    report(4, "flow accuracy on synthetic translations", worst_epe <= 0.3 && sup <= 1e-3f,
           fmt("worst mean EPE %.4f px (<= 0.3), identical-frame sup %.2e (<= 1e-3)", worst_epe,
               sup));
}

// --- criterion 5: CRF correctness -------------------------------------------

void criterion_crf() {
    bool pass = true;
    std::string detail;

    // zero pairwise weights: exact clamped identity
    std::mt19937 rng(777);
    ProbMap p = oracles::random_prob_map(rng, 16, 16);
    Image gray(16, 16, 0.5f);
    crf::CrfParams zero_params;
    zero_params.w_app = 0.f;
    zero_params.w_smooth = 0.f;
    ProbMap ident = crf::mean_field_brute(crf::unary_from_prob(p), gray, zero_params);
    bool ident_ok = ident.data == p.data;
    pass &= ident_ok;

    // uniform 0.5 fixed point
    ProbMap half(16, 16, 0.5f);
    ProbMap fixed = crf::mean_field_brute(crf::unary_from_prob(half), gray, crf::CrfParams{});
    bool fixed_ok = fixed.data == half.data;
    pass &= fixed_ok;

    // lattice vs brute on a noisy disk
    Image img(32, 32);
    ProbMap noisy(32, 32);
    metrics::BinaryMask clean(32, 32);
    std::uniform_real_distribution<float> u(-0.45f, 0.45f);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            float dx = static_cast<float>(x) - 16.f, dy = static_cast<float>(y) - 16.f;
            bool inside = dx * dx + dy * dy <= 64.f;
            clean.at(x, y) = inside;
            img.at(x, y, 0) = inside ? 0.8f : 0.2f;
            img.at(x, y, 1) = 0.5f;
            img.at(x, y, 2) = inside ? 0.2f : 0.75f;
            noisy.at(x, y) = std::min(std::max((inside ? 0.75f : 0.25f) + u(rng), 0.f), 1.f);
        }
    crf::UnaryField un = crf::unary_from_prob(noisy);
    ProbMap brute = crf::mean_field_brute(un, img, crf::CrfParams{});
    ProbMap lattice = crf::mean_field_lattice(un, img, crf::CrfParams{});
    double worst = 0.0;
    for (size_t i = 0; i < brute.data.size(); ++i)
        worst = std::max(worst, std::fabs(static_cast<double>(brute.data[i]) - lattice.data[i]));
    pass &= worst <= 0.05;

    // refinement strictly improves the noisy disk
    double before = metrics::jaccard(metrics::mask_from_prob(noisy, 0.5f), clean);
    double after =
        metrics::jaccard(metrics::mask_from_prob(crf::refine(noisy, img, crf::CrfParams{}), 0.5f),
                         clean);
    pass &= after > before;

    report(5, "CRF identity, fixed point, lattice agreement, denoising", pass,
           fmt("identity %s, fixed point %s, |lattice-brute| %.4f (<= 0.05), IoU %.3f -> %.3f",
               ident_ok ? "exact" : "BROKEN", fixed_ok ? "exact" : "BROKEN", worst, before, after));
}

// --- criterion 6: gradient check ---------------------------------------------

void criterion_grad_check() {
    predictor::TinyNet net(11);
    predictor::TrainSample s;
    s.image = Image(8, 8);
    s.prior = ProbMap(8, 8);
    s.target = ProbMap(8, 8);
    std::mt19937 rng(66);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (float& v : s.image.data) v = u(rng);
    for (float& v : s.prior.data) v = u(rng);
    for (float& v : s.target.data) v = u(rng) > 0.5f ? 1.f : 0.f;

    double err = predictor::grad_check(net, s, 200, 7);
    report(6, "analytic vs finite-difference gradients", err <= 1e-4,
           fmt("max relative error %.3e over 200 parameters (<= 1e-4, %zu params total)", err,
               net.param_count()));
}

// --- criteria 7-9: end-to-end pipeline ----------------------------------------

synth::SynthSpec e2e_spec() {
    synth::SynthSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.frames = 10;
    spec.background_seed = 12;
    spec.bg_r = 0.4f;
    spec.bg_g = 0.55f;
    spec.bg_b = 0.6f;
    spec.noise_stddev = 0.01f;
    synth::InstanceSpec disk;
    disk.id = 1;
    disk.texture_seed = 31;
    disk.cx = 38.f;
    disk.cy = 56.f;
    disk.radius = 20.f;
    disk.tx = 5.f;
    disk.ty = 1.5f;
    disk.rot_rate = 0.08f;
    disk.base_r = 0.85f;
    disk.base_g = 0.3f;
    disk.base_b = 0.15f;
    spec.instances.push_back(disk);
    return spec;
}

struct E2EOutcome {
    pipeline::EvalResult eval;
    std::vector<std::string> png_paths;
};

E2EOutcome run_e2e(const fs::path& root, const fs::path& out_dir) {
    synth::SynthSequence seq = synth::generate(e2e_spec());
    pipeline::write_synth_sequence(seq, root.string(), "e2e");
    pipeline::SequenceDataset ds = pipeline::load_sequence(root.string(), "e2e");

    pipeline::PipelineConfig cfg;
    cfg.predictor = "baseline";
    cfg.crf_enabled = true;
    cfg.output_dir = out_dir.string();

    pipeline::PropagationResult res = pipeline::propagate_sequence(ds, cfg);
    pipeline::write_predictions(ds, res, cfg.output_dir, false);

    std::vector<LabelMap> gt;
    for (const auto& f : seq.frames) gt.push_back(f.labels);

    E2EOutcome outcome;
    outcome.eval = pipeline::evaluate(res.labels, gt, ds.instance_ids);
    for (size_t t = 0; t < res.labels.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "%05zu.png", t);
        outcome.png_paths.push_back((out_dir / "e2e" / name).string());
    }
    return outcome;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(is)),
                             std::istreambuf_iterator<char>());
}

void criteria_end_to_end() {
    fs::path base = fs::temp_directory_path() / "maskprop_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    E2EOutcome first = run_e2e(base / "data1", base / "out1");
    double j = first.eval.average.j.mean;
    double f = first.eval.average.f.mean;
    report(7, "end-to-end propagation quality", j >= 0.85 && f >= 0.75,
           fmt("sequence J-mean %.4f (>= 0.85), F-mean %.4f (>= 0.75)", j, f));

    // criterion 9: bitwise-identical PNGs on a re-run
    E2EOutcome second = run_e2e(base / "data2", base / "out2");
    bool identical = first.png_paths.size() == second.png_paths.size();
    for (size_t i = 0; identical && i < first.png_paths.size(); ++i)
        identical = slurp(first.png_paths[i]) == slurp(second.png_paths[i]);
    report(9, "bitwise-deterministic outputs", identical,
           fmt("%zu output PNGs compared byte-for-byte", first.png_paths.size()));

    fs::remove_all(base);
}

void criterion_occlusion() {
    synth::SynthSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.frames = 12;
    spec.background_seed = 21;
    spec.bg_r = 0.45f;
    spec.bg_g = 0.5f;
    spec.bg_b = 0.45f;

    synth::InstanceSpec target;
    target.id = 1;
    target.texture_seed = 41;
    target.cx = 44.f;
    target.cy = 64.f;
    target.radius = 14.f;
    target.base_r = 0.85f;
    target.base_g = 0.25f;
    target.base_b = 0.2f;
    spec.instances.push_back(target);

    // occluder sweeping right-to-left across the static target
    synth::InstanceSpec occ;
    occ.id = 2;
    occ.shape = synth::ShapeKind::kRectangle;
    occ.texture_seed = 42;
    occ.cx = 104.f;
    occ.cy = 64.f;
    occ.half_w = 22.f;
    occ.half_h = 40.f;
    occ.tx = -7.5f;
    occ.base_r = 0.2f;
    occ.base_g = 0.3f;
    occ.base_b = 0.85f;
    spec.instances.push_back(occ);

    synth::SynthSequence seq = synth::generate(spec);

    // frames where the target is fully hidden in the ground truth
    std::vector<int> occluded;
    for (int t = 0; t < spec.frames; ++t) {
        long visible = 0;
        for (int v : seq.frames[t].labels.data) visible += v == 1;
        if (visible == 0) occluded.push_back(t);
    }

    fs::path base = fs::temp_directory_path() / "maskprop_occlusion";
    fs::remove_all(base);
    fs::create_directories(base);
    pipeline::write_synth_sequence(seq, base.string(), "occ");
    pipeline::SequenceDataset ds = pipeline::load_sequence(base.string(), "occ");

    pipeline::PipelineConfig cfg;
    cfg.predictor = "baseline";
    cfg.crf_enabled = true;

    pipeline::PropagationResult res = pipeline::propagate_sequence(ds, cfg);

    bool reported_missing = false;
    for (int t : occluded)
        for (const auto& [id, status] : res.reports[t].instances)
            if (id == 1 && status != pipeline::InstanceStatus::kPropagated) reported_missing = true;

    int last = spec.frames - 1;
    metrics::BinaryMask pred = metrics::mask_from_labels(res.labels[last], 1);
    metrics::BinaryMask gt = metrics::mask_from_labels(seq.frames[last].labels, 1);
    double j_final = metrics::jaccard(pred, gt);

    report(8, "retrieval after a full occlusion", reported_missing && j_final >= 0.5,
           fmt("%zu fully-occluded frames, missing reported: %s, final-frame J %.3f (>= 0.5)",
               occluded.size(), reported_missing ? "yes" : "NO", j_final));
    fs::remove_all(base);
}

// --- criterion 10: format fidelity ---------------------------------------------

void criterion_formats() {
    fs::path base = fs::temp_directory_path() / "maskprop_formats";
    fs::remove_all(base);
    fs::create_directories(base);
    bool pass = true;

    // .flo round trip
    std::mt19937 rng(3000);
    std::uniform_real_distribution<float> u(-30.f, 30.f);
    FlowField flow_field(21, 17);
    for (float& v : flow_field.data) v = u(rng);
    flow::write_flo(flow_field, (base / "t.flo").string());
    FlowField flow_back = flow::read_flo((base / "t.flo").string());
    pass &= flow_back.data == flow_field.data && flow_back.width == 21 && flow_back.height == 17;

    // checkpoint round trip
    predictor::TinyNet net(15);
    predictor::save_checkpoint(net, (base / "net.ckpt").string());
    predictor::TinyNet loaded = predictor::load_checkpoint((base / "net.ckpt").string());
    pass &= loaded.flat_params() == net.flat_params();

    // indexed PNG id round trip
    LabelMap labels(33, 9, 0);
    for (size_t i = 0; i < labels.data.size(); ++i) labels.data[i] = static_cast<int>(i % 7);
    io::write_indexed_png(labels, (base / "ann.png").string());
    LabelMap labels_back = io::read_indexed_png((base / "ann.png").string());
    pass &= labels_back.data == labels.data;

    report(10, "flo / checkpoint / indexed PNG round trips", pass,
           pass ? "all three formats round-trip exactly" : "round-trip mismatch");
    fs::remove_all(base);
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion_overall();
    criterion_metric_oracles();
    criterion_warp();
    criterion_flow();
    criterion_crf();
    criterion_grad_check();
    criteria_end_to_end();
    criterion_occlusion();
    criterion_formats();
    auto dt = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - t0);
    std::printf("%s: %d criteria failed (%llds total)\n", g_failures == 0 ? "OK" : "FAILED",
                g_failures, static_cast<long long>(dt.count()));
    return g_failures;
}
