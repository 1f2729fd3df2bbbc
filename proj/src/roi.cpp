#include "maskprop/roi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maskprop::roi {

std::optional<BBox> mask_bbox(const ProbMap& prob, const RoiParams& params) {
    int min_x = prob.width, min_y = prob.height, max_x = -1, max_y = -1;
    int count = 0;
    for (int y = 0; y < prob.height; ++y) {
        for (int x = 0; x < prob.width; ++x) {
            if (prob.at(x, y) >= params.threshold) {
                ++count;
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (count < params.min_pixels) return std::nullopt;
    return BBox{min_x, min_y, max_x + 1, max_y + 1};
}

BBox expand_bbox(const BBox& box, float margin, int bounds_w, int bounds_h) {
    float gx = margin * static_cast<float>(box.width());
    float gy = margin * static_cast<float>(box.height());
    BBox out;
    out.x0 = std::max(0, static_cast<int>(std::floor(box.x0 - gx)));
    out.y0 = std::max(0, static_cast<int>(std::floor(box.y0 - gy)));
    out.x1 = std::min(bounds_w, static_cast<int>(std::ceil(box.x1 + gx)));
    out.y1 = std::min(bounds_h, static_cast<int>(std::ceil(box.y1 + gy)));
    return out;
}

std::pair<Image, ProbMap> crop_instance(const Image& img, const ProbMap& prob, const BBox& box,
                                        int patch_size) {
    if (!box.valid_within(img.width, img.height))
        throw std::invalid_argument("crop_instance: invalid bbox");
    if (patch_size < 1) throw std::invalid_argument("crop_instance: patch_size must be >= 1");
    Image img_patch = resize_bilinear(crop(img, box), patch_size, patch_size);
    ProbMap prob_patch = resize_bilinear(crop(prob, box), patch_size, patch_size);
    return {std::move(img_patch), std::move(prob_patch)};
}

ProbMap paste_instance(const ProbMap& full, const ProbMap& patch, const BBox& box) {
    if (!box.valid_within(full.width, full.height))
        throw std::invalid_argument("paste_instance: invalid bbox");
    ProbMap out(full.width, full.height, 0.f);
    ProbMap fitted = resize_bilinear(patch, box.width(), box.height());
    for (int y = 0; y < fitted.height; ++y)
        for (int x = 0; x < fitted.width; ++x) out.at(box.x0 + x, box.y0 + y) = fitted.at(x, y);
    return out;
}

}  // namespace maskprop::roi
