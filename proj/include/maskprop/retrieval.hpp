#pragma once

#include <optional>
#include <utility>
#include <variant>

#include "maskprop/core.hpp"
#include "maskprop/predictor.hpp"
#include "maskprop/roi.hpp"

namespace maskprop::retrieval {

struct OneShotConfig {
    int bins = 8;                        // color-model variant
    int patch_size = 64;                 // tinynet fine-tune patches
    predictor::TrainConfig finetune{0.05, 120, 2, 11};
};

// Per-instance model fit exclusively from frame 0; the interface only ever
// hands it the first frame.
struct OneShotModel {
    int instance_id = 0;
    std::variant<predictor::ColorModel, predictor::TinyNet> model;
};

// 1 where any instance label is set, 0 on background.
ProbMap merge_to_foreground(const LabelMap& labels);

// ColorModel variant (base == nullptr): instance-vs-rest color histograms.
// TinyNet variant: copy of `base` fine-tuned on frame-0 crops with a uniform
// 0.5 prior. Throws if the instance is absent from frame 0.
OneShotModel fit_one_shot(const Image& frame0, const LabelMap& labels0, int instance_id,
                          const predictor::TinyNet* base, const OneShotConfig& cfg);

// Applies the per-instance predictor to a patch (color posterior or net pass).
ProbMap apply_model(const OneShotModel& model, const Image& img, const ProbMap& prior);

// Full-frame probability under a uniform 0.5 prior plus its ROI box;
// nullopt box when support stays below roi_params.min_pixels.
std::pair<ProbMap, std::optional<BBox>> redetect(const OneShotModel& model, const Image& frame,
                                                 const roi::RoiParams& roi_params);

}  // namespace maskprop::retrieval
