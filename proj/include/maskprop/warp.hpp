#pragma once

#include "maskprop/core.hpp"

namespace maskprop {

// Bilinear interpolation of the 4 surrounding pixel centers. Sample points
// outside [0, W-1] x [0, H-1] return 0: missing evidence reads as background.
float bilinear_sample(const ProbMap& map, float x, float y);

// Pull-based warp: output(x,y) = bilinear_sample(prev, x + dx(x,y), y + dy(x,y)).
// The flow argument is the backward flow produced by flow::estimate_flow.
ProbMap warp_prob(const ProbMap& prev, const FlowField& flow);

}  // namespace maskprop
