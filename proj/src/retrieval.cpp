#include "maskprop/retrieval.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace maskprop::retrieval {

ProbMap merge_to_foreground(const LabelMap& labels) {
    ProbMap out(labels.width, labels.height);
    for (size_t i = 0; i < labels.data.size(); ++i) out.data[i] = labels.data[i] != 0 ? 1.f : 0.f;
    return out;
}

namespace {

ProbMap instance_mask(const LabelMap& labels, int id) {
    ProbMap out(labels.width, labels.height);
    for (size_t i = 0; i < labels.data.size(); ++i) out.data[i] = labels.data[i] == id ? 1.f : 0.f;
    return out;
}

}  // namespace

OneShotModel fit_one_shot(const Image& frame0, const LabelMap& labels0, int instance_id,
                          const predictor::TinyNet* base, const OneShotConfig& cfg) {
    if (frame0.width != labels0.width || frame0.height != labels0.height)
        throw std::invalid_argument("fit_one_shot: frame and annotation dimensions differ");
    size_t support = 0;
    for (int v : labels0.data) support += v == instance_id;
    if (instance_id <= 0 || support == 0)
        throw std::invalid_argument("fit_one_shot: instance " + std::to_string(instance_id) +
                                    " absent from frame 0");

    OneShotModel out;
    out.instance_id = instance_id;
    ProbMap mask = instance_mask(labels0, instance_id);

    if (base == nullptr) {
        out.model = predictor::fit_color_model(frame0, mask, cfg.bins);
        return out;
    }

    // Fine-tune a copy of the offline base on first-frame crops. The prior is
    // uninformative so the net learns the instance appearance itself.
    roi::RoiParams rp;
    rp.min_pixels = 1;
    BBox tight = *roi::mask_bbox(mask, rp);
    std::vector<predictor::TrainSample> samples;
    auto add_sample = [&](const BBox& box) {
        auto [img_patch, target_patch] = roi::crop_instance(frame0, mask, box, cfg.patch_size);
        predictor::TrainSample s;
        s.image = std::move(img_patch);
        s.prior = ProbMap(cfg.patch_size, cfg.patch_size, 0.5f);
        s.target = std::move(target_patch);
        samples.push_back(std::move(s));
    };
    add_sample(roi::expand_bbox(tight, 0.4f, frame0.width, frame0.height));
    add_sample(roi::expand_bbox(tight, 0.8f, frame0.width, frame0.height));
    add_sample(roi::expand_bbox(tight, 1.5f, frame0.width, frame0.height));
    add_sample(BBox{0, 0, frame0.width, frame0.height});

    predictor::TinyNet tuned = *base;
    predictor::train(tuned, samples, cfg.finetune);
    out.model = std::move(tuned);
    return out;
}

ProbMap apply_model(const OneShotModel& model, const Image& img, const ProbMap& prior) {
    if (const auto* cm = std::get_if<predictor::ColorModel>(&model.model))
        return predictor::predict_baseline(*cm, img, prior);
    return std::get<predictor::TinyNet>(model.model).forward(img, prior);
}

std::pair<ProbMap, std::optional<BBox>> redetect(const OneShotModel& model, const Image& frame,
                                                 const roi::RoiParams& roi_params) {
    ProbMap prob;
    if (const auto* cm = std::get_if<predictor::ColorModel>(&model.model)) {
        prob = predictor::predict_baseline(*cm, frame,
                                           ProbMap(frame.width, frame.height, 0.5f));
    } else {
        // The net runs at its patch resolution; rescale around the pass.
        const auto& net = std::get<predictor::TinyNet>(model.model);
        int side = roi_params.patch_size;
        Image small = resize_bilinear(frame, side, side);
        ProbMap small_prob = net.forward(small, ProbMap(side, side, 0.5f));
        prob = resize_bilinear(small_prob, frame.width, frame.height);
    }
    std::optional<BBox> box = roi::mask_bbox(prob, roi_params);
    return {std::move(prob), box};
}

}  // namespace maskprop::retrieval
