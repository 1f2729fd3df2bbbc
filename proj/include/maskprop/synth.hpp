#pragma once

#include <cstdint>
#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::synth {

enum class ShapeKind { kDisk, kRectangle };

struct InstanceSpec {
    int id = 1;
    ShapeKind shape = ShapeKind::kDisk;
    uint32_t texture_seed = 1;
    float cx = 0.f, cy = 0.f;        // initial center, pixels
    float radius = 10.f;             // disk radius
    float half_w = 10.f, half_h = 10.f;  // rectangle half extents
    float angle = 0.f;               // initial rotation, radians
    float tx = 0.f, ty = 0.f;        // translation per frame
    float rot_rate = 0.f;            // radians per frame
    float scale_rate = 1.f;          // multiplicative size change per frame
    float base_r = -1.f, base_g = -1.f, base_b = -1.f;  // <0: derive from seed
    float tex_amplitude = 0.25f;
};

struct SynthSpec {
    int width = 64;
    int height = 64;
    int frames = 2;
    uint32_t background_seed = 0;
    float bg_r = 0.45f, bg_g = 0.5f, bg_b = 0.55f;
    float bg_amplitude = 0.25f;
    float noise_stddev = 0.f;        // additive Gaussian noise
    std::vector<InstanceSpec> instances;
};

struct SynthFrame {
    Image image;
    LabelMap labels;
};

struct SynthSequence {
    std::vector<SynthFrame> frames;
    // gt_backward_flow[t] lives on frame t+1's grid and points into frame t,
    // matching flow::estimate_flow(frames[t], frames[t+1]).
    std::vector<FlowField> gt_backward_flow;
};

// Deterministic multi-octave value noise in [0,1]; pure function of its inputs.
float value_noise(uint32_t seed, float x, float y);

// Textured rigid shapes over a textured static background, layered by instance
// id (higher id on top), plus additive Gaussian noise. Instance texture is
// anchored in object coordinates so it moves with the shape. Throws if a shape
// leaves the frame at any time step.
SynthSequence generate(const SynthSpec& spec);

}  // namespace maskprop::synth
