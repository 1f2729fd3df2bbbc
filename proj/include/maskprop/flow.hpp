#pragma once

#include <string>
#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::flow {

struct FlowParams {
    int pyramid_levels = 4;
    float level_scale = 0.5f;
    float alpha = 0.08f;  // smoothness weight for [0,1] intensities
    int iterations_per_level = 100;
};

// Level 0 is the input; each further level is Gaussian-blurred then bilinearly
// downsampled by `scale`. Throws if any requested level would fall below 4x4.
std::vector<ProbMap> gaussian_pyramid(const ProbMap& field, int levels, float scale);

// One linearization of Horn-Schunck at a single scale: Jacobi sweeps on the
// total flow minimizing sum (Ix*u + Iy*v + It)^2 + alpha^2 (|grad u|^2 + |grad v|^2),
// warm-started from `init`. Spatial derivatives are central differences with
// replicate padding; the temporal term is the frame difference after warping
// g_prev by `init`. Returns the backward flow on g_next's grid.
FlowField horn_schunck_level(const ProbMap& g_prev, const ProbMap& g_next,
                             const FlowField& init, const FlowParams& params);

// Coarse-to-fine backward flow f_{j->i}: for each pixel x of `next`,
// next(x) ~= prev(x + f(x)). Pyramid levels are clamped to what the image size
// allows; flow values are scaled by 1/level_scale when moving to a finer level.
FlowField estimate_flow(const Image& prev, const Image& next, const FlowParams& params);

// Middlebury .flo: "PIEH", int32 LE width/height, then row-major interleaved
// (dx, dy) float32 LE. Round-trips bit-exactly.
void write_flo(const FlowField& flow, const std::string& path);
FlowField read_flo(const std::string& path);

}  // namespace maskprop::flow
