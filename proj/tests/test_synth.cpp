#include <doctest.h>

#include <cmath>

#include "maskprop/metrics.hpp"
#include "maskprop/synth.hpp"
#include "maskprop/warp.hpp"

using namespace maskprop;

namespace {

synth::SynthSpec disk_spec(float tx, float ty, float rot = 0.f) {
    synth::SynthSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.frames = 3;
    spec.background_seed = 5;
    synth::InstanceSpec inst;
    inst.id = 1;
    inst.texture_seed = 12;
    inst.cx = 24.f;
    inst.cy = 32.f;
    inst.radius = 14.f;
    inst.tx = tx;
    inst.ty = ty;
    inst.rot_rate = rot;
    spec.instances.push_back(inst);
    return spec;
}

}  // namespace

TEST_CASE("static scene produces identical frames and zero flow") {
    synth::SynthSpec spec = disk_spec(0.f, 0.f);
    synth::SynthSequence seq = synth::generate(spec);
    REQUIRE(seq.frames.size() == 3);
    CHECK(seq.frames[1].image.data == seq.frames[0].image.data);
    CHECK(seq.frames[2].image.data == seq.frames[0].image.data);
    CHECK(seq.frames[1].labels.data == seq.frames[0].labels.data);
    for (const FlowField& f : seq.gt_backward_flow)
        for (float v : f.data) CHECK(v == 0.f);
}

TEST_CASE("pure translation gives backward flow (-tx,-ty) on the shape") {
    synth::SynthSequence seq = synth::generate(disk_spec(2.f, 0.f));
    const FlowField& f = seq.gt_backward_flow[0];
    const LabelMap& labels = seq.frames[1].labels;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            if (labels.at(x, y) != 1) continue;
            CHECK(f.dx(x, y) == doctest::Approx(-2.f));
            CHECK(f.dy(x, y) == doctest::Approx(0.f));
        }
}

TEST_CASE("generation is deterministic for a fixed seed") {
    synth::SynthSpec spec = disk_spec(1.f, 1.f, 0.05f);
    spec.noise_stddev = 0.02f;
    synth::SynthSequence a = synth::generate(spec);
    synth::SynthSequence b = synth::generate(spec);
    for (size_t t = 0; t < a.frames.size(); ++t) {
        CHECK(a.frames[t].image.data == b.frames[t].image.data);
        CHECK(a.frames[t].labels.data == b.frames[t].labels.data);
    }
}

TEST_CASE("warping a GT mask by GT flow reproduces the next mask") {
    synth::SynthSpec spec = disk_spec(2.f, 1.f, 0.04f);
    spec.instances[0].radius = 18.f;
    synth::SynthSequence seq = synth::generate(spec);

    for (size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        ProbMap mask_t(64, 64);
        for (size_t i = 0; i < mask_t.data.size(); ++i)
            mask_t.data[i] = seq.frames[t].labels.data[i] == 1 ? 1.f : 0.f;
        ProbMap warped = warp_prob(mask_t, seq.gt_backward_flow[t]);

        metrics::BinaryMask pred = metrics::mask_from_prob(warped, 0.5f);
        metrics::BinaryMask gt = metrics::mask_from_labels(seq.frames[t + 1].labels, 1);
        CHECK(metrics::jaccard(pred, gt) >= 0.98);
    }
}

TEST_CASE("shapes leaving the frame are rejected") {
    synth::SynthSpec spec = disk_spec(12.f, 0.f);
    spec.frames = 6;  // 24 + 5*12 + 14 > 64
    CHECK_THROWS_AS(synth::generate(spec), std::invalid_argument);
}

TEST_CASE("higher ids layer on top") {
    synth::SynthSpec spec = disk_spec(0.f, 0.f);
    synth::InstanceSpec occ;
    occ.id = 2;
    occ.shape = synth::ShapeKind::kRectangle;
    occ.texture_seed = 77;
    occ.cx = 24.f;
    occ.cy = 32.f;
    occ.half_w = 20.f;
    occ.half_h = 20.f;
    spec.instances.push_back(occ);

    synth::SynthSequence seq = synth::generate(spec);
    int count1 = 0, count2 = 0;
    for (int v : seq.frames[0].labels.data) {
        count1 += v == 1;
        count2 += v == 2;
    }
    CHECK(count1 == 0);  // fully covered by the higher id
    CHECK(count2 > 0);
}
