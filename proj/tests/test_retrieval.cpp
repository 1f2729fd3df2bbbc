#include <doctest.h>

#include "maskprop/metrics.hpp"
#include "maskprop/retrieval.hpp"
#include "maskprop/synth.hpp"

using namespace maskprop;
using retrieval::OneShotConfig;

namespace {

synth::SynthSpec two_instance_spec() {
    synth::SynthSpec spec;
    spec.width = 96;
    spec.height = 96;
    spec.frames = 2;
    spec.background_seed = 100;
    spec.bg_r = 0.45f;
    spec.bg_g = 0.45f;
    spec.bg_b = 0.45f;

    synth::InstanceSpec a;
    a.id = 1;
    a.texture_seed = 3;
    a.cx = 28.f;
    a.cy = 30.f;
    a.radius = 12.f;
    a.base_r = 0.85f;
    a.base_g = 0.25f;
    a.base_b = 0.2f;
    spec.instances.push_back(a);

    synth::InstanceSpec b;
    b.id = 2;
    b.shape = synth::ShapeKind::kRectangle;
    b.texture_seed = 9;
    b.cx = 66.f;
    b.cy = 62.f;
    b.half_w = 13.f;
    b.half_h = 10.f;
    b.base_r = 0.2f;
    b.base_g = 0.35f;
    b.base_b = 0.85f;
    spec.instances.push_back(b);
    return spec;
}

double bbox_iou(const BBox& a, const BBox& b) {
    int x0 = std::max(a.x0, b.x0), y0 = std::max(a.y0, b.y0);
    int x1 = std::min(a.x1, b.x1), y1 = std::min(a.y1, b.y1);
    int inter = std::max(0, x1 - x0) * std::max(0, y1 - y0);
    int uni = a.width() * a.height() + b.width() * b.height() - inter;
    return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace

TEST_CASE("merge_to_foreground") {
    LabelMap empty(6, 6, 0);
    ProbMap fg = retrieval::merge_to_foreground(empty);
    double sum = 0.0;
    for (float v : fg.data) sum += v;
    CHECK(sum == 0.0);

    LabelMap labels(6, 6, 0);
    labels.at(1, 1) = 1;
    labels.at(2, 1) = 2;
    labels.at(3, 4) = 2;
    fg = retrieval::merge_to_foreground(labels);
    sum = 0.0;
    for (size_t i = 0; i < fg.data.size(); ++i) {
        sum += fg.data[i];
        CHECK(fg.data[i] == (labels.data[i] != 0 ? 1.f : 0.f));
    }
    CHECK(sum == 3.0);  // one pixel per nonzero label

    // idempotent under threshold + re-merge
    LabelMap rethresh(6, 6, 0);
    for (size_t i = 0; i < fg.data.size(); ++i) rethresh.data[i] = fg.data[i] >= 0.5f ? 1 : 0;
    ProbMap again = retrieval::merge_to_foreground(rethresh);
    CHECK(again.data == fg.data);
}

TEST_CASE("fit_one_shot separates instances by appearance") {
    synth::SynthSequence seq = synth::generate(two_instance_spec());
    const Image& frame0 = seq.frames[0].image;
    const LabelMap& labels0 = seq.frames[0].labels;
    OneShotConfig cfg;

    auto m1 = retrieval::fit_one_shot(frame0, labels0, 1, nullptr, cfg);
    auto m2 = retrieval::fit_one_shot(frame0, labels0, 2, nullptr, cfg);

    ProbMap half(frame0.width, frame0.height, 0.5f);
    ProbMap p1 = retrieval::apply_model(m1, frame0, half);
    ProbMap p2 = retrieval::apply_model(m2, frame0, half);

    // each model prefers its own pixels (posterior > 0.5 means L_fg > L_bg)
    long own1 = 0, n1 = 0, own2 = 0, n2 = 0;
    double mean1_own = 0, mean1_bg = 0;
    long bg_count = 0;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            if (labels0.at(x, y) == 1) {
                ++n1;
                own1 += p1.at(x, y) > 0.5f;
                mean1_own += p1.at(x, y);
            } else if (labels0.at(x, y) == 2) {
                ++n2;
                own2 += p2.at(x, y) > 0.5f;
            } else {
                ++bg_count;
                mean1_bg += p1.at(x, y);
            }
        }
    CHECK(static_cast<double>(own1) / n1 >= 0.95);
    CHECK(static_cast<double>(own2) / n2 >= 0.95);
    CHECK(mean1_own / n1 > mean1_bg / bg_count);
}

TEST_CASE("fit_one_shot rejects an absent instance") {
    synth::SynthSequence seq = synth::generate(two_instance_spec());
    OneShotConfig cfg;
    CHECK_THROWS_AS(
        retrieval::fit_one_shot(seq.frames[0].image, seq.frames[0].labels, 7, nullptr, cfg),
        std::invalid_argument);
}

TEST_CASE("redetect") {
    synth::SynthSpec spec = two_instance_spec();
    synth::SynthSequence seq = synth::generate(spec);
    OneShotConfig cfg;
    roi::RoiParams rp;
    auto m1 = retrieval::fit_one_shot(seq.frames[0].image, seq.frames[0].labels, 1, nullptr, cfg);

    SUBCASE("finds the instance on frame 0") {
        auto [prob, box] = retrieval::redetect(m1, seq.frames[0].image, rp);
        REQUIRE(box.has_value());
        roi::RoiParams tight;
        tight.min_pixels = 1;
        ProbMap gt_mask(96, 96);
        for (size_t i = 0; i < gt_mask.data.size(); ++i)
            gt_mask.data[i] = seq.frames[0].labels.data[i] == 1 ? 1.f : 0.f;
        BBox gt_box = *roi::mask_bbox(gt_mask, tight);
        CHECK(bbox_iou(*box, gt_box) >= 0.5);
    }

    SUBCASE("reports missing when the instance colors are absent") {
        synth::SynthSpec no_target = spec;
        no_target.instances.erase(no_target.instances.begin());  // drop instance 1
        synth::SynthSequence other = synth::generate(no_target);
        auto [prob, box] = retrieval::redetect(m1, other.frames[0].image, rp);
        CHECK(!box.has_value());
    }

    SUBCASE("deterministic") {
        auto [pa, ba] = retrieval::redetect(m1, seq.frames[1].image, rp);
        auto [pb, bb] = retrieval::redetect(m1, seq.frames[1].image, rp);
        CHECK(pa.data == pb.data);
        CHECK(ba == bb);
    }
}
