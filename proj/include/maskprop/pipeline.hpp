#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maskprop/core.hpp"
#include "maskprop/crf.hpp"
#include "maskprop/flow.hpp"
#include "maskprop/merge.hpp"
#include "maskprop/metrics.hpp"
#include "maskprop/predictor.hpp"
#include "maskprop/roi.hpp"
#include "maskprop/synth.hpp"

namespace maskprop::pipeline {

struct SequenceDataset {
    std::string root;
    std::string name;
    std::vector<std::string> frame_paths;       // sorted by zero-padded index
    std::vector<std::string> annotation_paths;  // "" where absent; [0] always set
    std::vector<int> instance_ids;              // distinct nonzero ids of frame 0
    int width = 0;
    int height = 0;
};

// Layout: <root>/JPEGImages/<seq>/NNNNN.png|jpg, <root>/Annotations/<seq>/NNNNN.png.
SequenceDataset load_sequence(const std::string& root, const std::string& sequence);

struct PipelineConfig {
    flow::FlowParams flow;
    roi::RoiParams roi;
    std::string predictor = "baseline";  // baseline | tinynet
    std::string checkpoint;              // tinynet weights
    bool crf_enabled = true;
    crf::CrfParams crf;
    merge::MergeParams merge;
    std::string output_dir = "out";
    std::string flow_cache;  // optional .flo cache directory
    uint32_t seed = 1;
};

// JSON document mirroring PipelineConfig; unknown keys are rejected.
PipelineConfig config_from_json_file(const std::string& path);
PipelineConfig config_from_json_text(const std::string& text);

enum class InstanceStatus { kPropagated, kMissingRedetected, kMissingNotFound };

struct FrameReport {
    std::vector<std::pair<int, InstanceStatus>> instances;
};

struct PropagationResult {
    std::vector<LabelMap> labels;      // one per frame; frame 0 = annotation
    std::vector<FrameReport> reports;  // one per frame
};

PropagationResult propagate_sequence(const SequenceDataset& ds, const PipelineConfig& cfg);

struct InstanceEval {
    int instance_id = 0;
    metrics::SequenceStats stats;
};

struct EvalResult {
    std::vector<InstanceEval> per_instance;
    metrics::SequenceStats average;  // mean over instances
    double overall_pct = 0.0;        // mean of J/F means, percent
};

// Per-instance J/F scored frame-by-frame against ground truth labels.
EvalResult evaluate(const std::vector<LabelMap>& predictions,
                    const std::vector<LabelMap>& ground_truth,
                    const std::vector<int>& instance_ids);

// Predicted indexed PNGs (and optional overlays) mirroring the dataset layout.
void write_predictions(const SequenceDataset& ds, const PropagationResult& result,
                       const std::string& out_dir, bool overlays);

// Table-style JSON summary: overall plus mean/recall/decay per measure.
void write_summary_json(const std::string& path, const std::string& sequence,
                        const EvalResult& eval);

// Emits a synthetic sequence in the standard dataset layout (frames plus
// all-frame annotations) so synthetic data exercises the real ingestion path.
void write_synth_sequence(const synth::SynthSequence& seq, const std::string& root,
                          const std::string& name);

// Training samples for the propagation predictor: cropped frame, affine-
// jittered ground-truth prior (translation up to +/-8 px, scale +/-10%) and the
// clean ground-truth target.
std::vector<predictor::TrainSample> build_training_samples(const synth::SynthSequence& seq,
                                                           const roi::RoiParams& roi_params,
                                                           uint32_t seed);

}  // namespace maskprop::pipeline
