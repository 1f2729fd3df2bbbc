#include "maskprop/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace maskprop::synth {

namespace {

inline uint32_t hash_u32(uint32_t x) {
    x ^= x >> 16;
    x *= 0x7feb352du;
    x ^= x >> 15;
    x *= 0x846ca68bu;
    x ^= x >> 16;
    return x;
}

float lattice_value(uint32_t seed, int xi, int yi) {
    uint32_t h = hash_u32(seed ^ hash_u32(static_cast<uint32_t>(xi) * 0x9e3779b9u) ^
                          hash_u32(static_cast<uint32_t>(yi) * 0x85ebca6bu + 0x165667b1u));
    return static_cast<float>(h) * (1.f / 4294967296.f);
}

inline float smoothstep(float t) { return t * t * (3.f - 2.f * t); }

float noise_octave(uint32_t seed, float x, float y, float cell) {
    float fx = x / cell, fy = y / cell;
    int x0 = static_cast<int>(std::floor(fx));
    int y0 = static_cast<int>(std::floor(fy));
    float tx = smoothstep(fx - static_cast<float>(x0));
    float ty = smoothstep(fy - static_cast<float>(y0));
    float v00 = lattice_value(seed, x0, y0);
    float v10 = lattice_value(seed, x0 + 1, y0);
    float v01 = lattice_value(seed, x0, y0 + 1);
    float v11 = lattice_value(seed, x0 + 1, y0 + 1);
    return (v00 * (1.f - tx) + v10 * tx) * (1.f - ty) + (v01 * (1.f - tx) + v11 * tx) * ty;
}

struct Pose {
    float cx, cy, angle, scale;
};

Pose pose_at(const InstanceSpec& inst, int t) {
    return {inst.cx + inst.tx * static_cast<float>(t), inst.cy + inst.ty * static_cast<float>(t),
            inst.angle + inst.rot_rate * static_cast<float>(t),
            std::pow(inst.scale_rate, static_cast<float>(t))};
}

// World point -> object coordinates under the given pose.
inline void to_object(const Pose& p, float x, float y, float& ox, float& oy) {
    float dx = x - p.cx, dy = y - p.cy;
    float c = std::cos(-p.angle), s = std::sin(-p.angle);
    ox = (c * dx - s * dy) / p.scale;
    oy = (s * dx + c * dy) / p.scale;
}

// Object point -> world coordinates under the given pose.
inline void to_world(const Pose& p, float ox, float oy, float& x, float& y) {
    float c = std::cos(p.angle), s = std::sin(p.angle);
    x = (c * ox - s * oy) * p.scale + p.cx;
    y = (s * ox + c * oy) * p.scale + p.cy;
}

bool inside_shape(const InstanceSpec& inst, float ox, float oy) {
    if (inst.shape == ShapeKind::kDisk) return ox * ox + oy * oy <= inst.radius * inst.radius;
    return std::fabs(ox) <= inst.half_w && std::fabs(oy) <= inst.half_h;
}

// Tight axis-aligned half extents of the shape under the given pose.
void bound_half_extents(const InstanceSpec& inst, const Pose& p, float& ax, float& ay) {
    if (inst.shape == ShapeKind::kDisk) {
        ax = ay = inst.radius * p.scale;
        return;
    }
    float c = std::fabs(std::cos(p.angle)), s = std::fabs(std::sin(p.angle));
    ax = (c * inst.half_w + s * inst.half_h) * p.scale;
    ay = (s * inst.half_w + c * inst.half_h) * p.scale;
}

void derive_base_color(const InstanceSpec& inst, float base[3]) {
    for (int c = 0; c < 3; ++c) {
        float given = c == 0 ? inst.base_r : (c == 1 ? inst.base_g : inst.base_b);
        base[c] = given >= 0.f
                      ? given
                      : 0.2f + 0.6f * lattice_value(inst.texture_seed * 3u + 17u, c, 911);
    }
}

inline float clamp01(float v) { return v < 0.f ? 0.f : (v > 1.f ? 1.f : v); }

float textured(uint32_t seed, float x, float y, float base, float amp) {
    float n = 0.5f * noise_octave(seed, x, y, 16.f) + 0.3f * noise_octave(seed + 101u, x, y, 8.f) +
              0.2f * noise_octave(seed + 202u, x, y, 4.f);
    return clamp01(base + amp * (n - 0.5f) * 2.f);
}

}  // namespace

float value_noise(uint32_t seed, float x, float y) {
    return 0.5f * noise_octave(seed, x, y, 16.f) + 0.3f * noise_octave(seed + 101u, x, y, 8.f) +
           0.2f * noise_octave(seed + 202u, x, y, 4.f);
}

SynthSequence generate(const SynthSpec& spec) {
    if (spec.width < 4 || spec.height < 4) throw std::invalid_argument("synth: frame too small");
    if (spec.frames < 1) throw std::invalid_argument("synth: need at least one frame");
    if (spec.instances.empty()) throw std::invalid_argument("synth: need at least one instance");

    // Shapes must stay inside the frame for every time step.
    for (const auto& inst : spec.instances) {
        for (int t = 0; t < spec.frames; ++t) {
            Pose p = pose_at(inst, t);
            float ax, ay;
            bound_half_extents(inst, p, ax, ay);
            if (p.cx - ax < 0.f || p.cy - ay < 0.f || p.cx + ax > static_cast<float>(spec.width) ||
                p.cy + ay > static_cast<float>(spec.height))
                throw std::invalid_argument("synth: instance " + std::to_string(inst.id) +
                                            " exits frame at t=" + std::to_string(t));
        }
    }

    SynthSequence seq;
    seq.frames.reserve(spec.frames);

    for (int t = 0; t < spec.frames; ++t) {
        SynthFrame frame;
        frame.image = Image(spec.width, spec.height);
        frame.labels = LabelMap(spec.width, spec.height, 0);

        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                float fx = static_cast<float>(x), fy = static_cast<float>(y);
                float rgb[3] = {
                    textured(spec.background_seed, fx, fy, spec.bg_r, spec.bg_amplitude),
                    textured(spec.background_seed + 7001u, fx, fy, spec.bg_g, spec.bg_amplitude),
                    textured(spec.background_seed + 9002u, fx, fy, spec.bg_b, spec.bg_amplitude)};
                int label = 0;
                for (const auto& inst : spec.instances) {  // higher id drawn later = on top
                    Pose p = pose_at(inst, t);
                    float ox, oy;
                    to_object(p, fx, fy, ox, oy);
                    if (!inside_shape(inst, ox, oy)) continue;
                    float base[3];
                    derive_base_color(inst, base);
                    for (int c = 0; c < 3; ++c)
                        rgb[c] = textured(inst.texture_seed + static_cast<uint32_t>(c) * 5000u, ox,
                                          oy, base[c], inst.tex_amplitude);
                    label = inst.id;
                }
                frame.labels.at(x, y) = label;
                for (int c = 0; c < 3; ++c) frame.image.at(x, y, c) = rgb[c];
            }
        }

        if (spec.noise_stddev > 0.f) {
            std::mt19937 rng(hash_u32(spec.background_seed * 131u + static_cast<uint32_t>(t) + 1u));
            auto next_normal = [&rng]() {
                // Box-Muller on explicit uniforms keeps the stream portable.
                float u1 = (static_cast<float>(rng()) + 1.f) * (1.f / 4294967296.f);
                float u2 = static_cast<float>(rng()) * (1.f / 4294967296.f);
                return std::sqrt(-2.f * std::log(u1)) * std::cos(6.2831853f * u2);
            };
            for (float& v : frame.image.data) v = clamp01(v + spec.noise_stddev * next_normal());
        }

        seq.frames.push_back(std::move(frame));
    }

    // Analytic backward flow: pixel x of frame t+1 with top label k maps to the
    // same object point's position at time t; background is static.
    for (int t = 0; t + 1 < spec.frames; ++t) {
        FlowField gt(spec.width, spec.height);
        const LabelMap& labels_next = seq.frames[t + 1].labels;
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                int label = labels_next.at(x, y);
                if (label == 0) continue;
                for (const auto& inst : spec.instances) {
                    if (inst.id != label) continue;
                    Pose p_next = pose_at(inst, t + 1);
                    Pose p_prev = pose_at(inst, t);
                    float ox, oy, px, py;
                    to_object(p_next, static_cast<float>(x), static_cast<float>(y), ox, oy);
                    to_world(p_prev, ox, oy, px, py);
                    gt.dx(x, y) = px - static_cast<float>(x);
                    gt.dy(x, y) = py - static_cast<float>(y);
                    break;
                }
            }
        }
        seq.gt_backward_flow.push_back(std::move(gt));
    }

    return seq;
}

}  // namespace maskprop::synth
