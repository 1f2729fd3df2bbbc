#pragma once

#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::crf {

struct CrfParams {
    float w_app = 4.f;         // appearance kernel weight
    float theta_alpha = 30.f;  // spatial stddev of the appearance kernel, px
    float theta_beta = 0.1f;   // color stddev of the appearance kernel, [0,1] units
    float w_smooth = 3.f;      // smoothness kernel weight
    float theta_gamma = 3.f;   // spatial stddev of the smoothness kernel, px
    int iterations = 5;
};

// Two-label negative log-probabilities derived from a probability map clamped
// to [1e-6, 1-1e-6].
struct UnaryField {
    int width = 0;
    int height = 0;
    std::vector<double> bg;  // -log(1-P)
    std::vector<double> fg;  // -log(P)
};

UnaryField unary_from_prob(const ProbMap& prob);

// Exact O(N^2) mean field with Potts compatibility and the two Gaussian
// pairwise kernels; messages exclude the self term. Limited to 4096 pixels.
// All loops are sequential with a fixed accumulation order.
ProbMap mean_field_brute(const UnaryField& unary, const Image& img, const CrfParams& params);

// Same update structure with messages computed by permutohedral filtering;
// the lattice's self-coefficient estimate is subtracted from each message.
ProbMap mean_field_lattice(const UnaryField& unary, const Image& img, const CrfParams& params);

// unary_from_prob -> mean field (brute when N <= 4096, else lattice) ->
// foreground marginal.
ProbMap refine(const ProbMap& prob, const Image& img, const CrfParams& params);

}  // namespace maskprop::crf
