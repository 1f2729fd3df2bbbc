#pragma once

#include <optional>
#include <utility>

#include "maskprop/core.hpp"

namespace maskprop::roi {

struct RoiParams {
    float threshold = 0.5f;   // probability cut for support
    float margin = 0.4f;      // fractional expansion per side
    int min_pixels = 10;      // below this the instance is declared missing
    int patch_size = 64;      // square patch fed to the predictor
};

// Tight box over {P >= threshold}; nullopt when fewer than min_pixels qualify.
std::optional<BBox> mask_bbox(const ProbMap& prob, const RoiParams& params);

// Each side grown by margin * (side length), rounded outward, clamped to bounds.
BBox expand_bbox(const BBox& box, float margin, int bounds_w, int bounds_h);

// Crops image and probability by the box and resizes both to
// patch_size x patch_size. The box itself is the paste-back geometry.
std::pair<Image, ProbMap> crop_instance(const Image& img, const ProbMap& prob, const BBox& box,
                                        int patch_size);

// Resizes the patch to the box and writes it into an otherwise-zero map with
// full's dimensions: an instance map's support never leaks outside its ROI.
ProbMap paste_instance(const ProbMap& full, const ProbMap& patch, const BBox& box);

}  // namespace maskprop::roi
