#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::predictor {

// Laplace-smoothed 3-D color histograms over foreground / background, each
// normalized to a probability distribution.
struct ColorModel {
    int bins = 8;
    std::vector<double> fg_hist;  // bins^3
    std::vector<double> bg_hist;
};

// fg weighted by P, bg by (1-P), one Laplace count per bin before
// normalization. The mask must contain evidence for both classes.
ColorModel fit_color_model(const Image& img, const ProbMap& mask, int bins = 8);

// Per-pixel Bayes posterior: prior * L_fg / (prior * L_fg + (1-prior) * L_bg).
ProbMap predict_baseline(const ColorModel& model, const Image& img, const ProbMap& prior);

struct TrainConfig {
    double learning_rate = 0.05;
    int steps = 300;
    int batch_size = 4;
    uint32_t seed = 1;
};

struct TrainSample {
    Image image;
    ProbMap prior;
    ProbMap target;
};

struct ParamBlock {
    std::string name;
    std::vector<int> shape;
    std::vector<double> v;
};

// Small encoder-decoder: 4 input channels (RGB + prior), two conv+avgpool
// stages, a bottleneck conv, then a decoder that upsamples and concatenates
// each pre-pooling feature map at the matching scale, a 1x1 affine head and a
// sigmoid. Input patches must be square with side divisible by 4.
class TinyNet {
public:
    struct Channels {
        int c1 = 6, c2 = 8, c3 = 12, c4 = 8, c5 = 6;
    };

    TinyNet(uint32_t seed, Channels ch = {});

    ProbMap forward(const Image& img, const ProbMap& prior) const;

    // Mean BCE over the batch plus parameter gradients (flat, matching
    // flat_params order).
    double loss_and_grad(const std::vector<TrainSample>& batch, std::vector<double>& grad) const;

    size_t param_count() const;
    std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& p);

    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    Channels channels() const { return ch_; }

private:
    Channels ch_;
    std::vector<ParamBlock> blocks_;
};

// Mean over pixels of -[t log p + (1-t) log(1-p)].
double bce_loss(const ProbMap& pred, const ProbMap& target);

struct TrainTrace {
    std::vector<double> losses;  // one per step
};

// Plain mini-batch gradient descent on bce_loss; throws on non-finite loss.
TrainTrace train(TinyNet& net, const std::vector<TrainSample>& dataset, const TrainConfig& cfg);

// Max relative error |a-n| / max(|a|,|n|,1e-8) between analytic and central
// finite-difference gradients over >= num_params randomly sampled parameters.
double grad_check(const TinyNet& net, const TrainSample& sample, int num_params = 200,
                  uint32_t seed = 7);

// Versioned binary checkpoint: header, tensor shapes, then row-major 64-bit
// little-endian IEEE-754 parameter values. Round-trips bitwise.
void save_checkpoint(const TinyNet& net, const std::string& path);
TinyNet load_checkpoint(const std::string& path);

}  // namespace maskprop::predictor
