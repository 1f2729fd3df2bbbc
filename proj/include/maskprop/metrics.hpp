#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskprop/core.hpp"

namespace maskprop::metrics {

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

BinaryMask mask_from_labels(const LabelMap& labels, int instance_id);
BinaryMask mask_from_prob(const ProbMap& prob, float threshold);

struct FrameScore {
    double j = 0.0;
    double f = 0.0;
};

struct MeasureStats {
    double mean = 0.0;
    double recall = 0.0;  // fraction of frames scoring > 0.5
    double decay = 0.0;   // first-quartile mean minus last-quartile mean
};

struct SequenceStats {
    MeasureStats j;
    MeasureStats f;
};

// |pred & gt| / |pred | gt|; 1 when both masks are empty.
double jaccard(const BinaryMask& pred, const BinaryMask& gt);

// Boundary = foreground pixels 4-adjacent to background or to the image border.
// Precision/recall match boundary pixels within Euclidean distance tol_px;
// F = 2PR/(P+R), 0 when P+R = 0, 1 when both boundaries are empty.
double boundary_f(const BinaryMask& pred, const BinaryMask& gt, double tol_px);

// 0.8% of the mask diagonal, at least 1 px.
double default_boundary_tolerance(int width, int height);

// Mean / recall / decay over an ordered per-frame score series (>= 4 frames).
// Quartiles are ceil(n/4) frames at each end, by frame index.
MeasureStats sequence_stats(const std::vector<double>& scores);

// Arithmetic mean of the two percentage means.
double overall(double j_mean_pct, double f_mean_pct);

// Same, reported at one decimal with half-up rounding done in tenths so that
// decimal inputs round the way they read (57.7 and 62.4 give 60.1).
double overall_rounded(double j_mean_pct, double f_mean_pct);

struct SequenceRow {
    std::string name;
    SequenceStats stats;  // values in [0,1]
};

// Per-sequence rows: name, J mean/recall/decay, F mean/recall/decay, overall
// (percent, one decimal).
void write_metrics_csv(const std::string& path, const std::vector<SequenceRow>& rows);

}  // namespace maskprop::metrics
