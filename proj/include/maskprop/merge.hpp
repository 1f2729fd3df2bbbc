#pragma once

#include <optional>
#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::merge {

struct MergeParams {
    float bg_threshold = 0.5f;  // below this no instance claims the pixel
};

// Propagation output wins when present; the retrieval branch is consulted only
// for missing instances; an all-zero map stands in when both branches failed.
ProbMap select_instance_map(const std::optional<ProbMap>& prop, const std::optional<ProbMap>& retr,
                            int width, int height);

// Per pixel: the id of the highest probability if it clears bg_threshold, else
// background. Ties go to the smallest instance id.
LabelMap argmax_merge(const std::vector<std::pair<int, ProbMap>>& maps, const MergeParams& params);

}  // namespace maskprop::merge
