#pragma once

#include <string>
#include <vector>

#include "uavdet/dataset.hpp"
#include "uavdet/detector.hpp"
#include "uavdet/feature_net.hpp"
#include "uavdet/metrics.hpp"
#include "uavdet/tf_image.hpp"
#include "uavdet/tfd.hpp"

namespace uavdet::pipeline {

/// Raw echoes to per-segment TF images: pulse compress, pick the argmax-energy
/// gate, ZAM (or STFT) over slow time, median filter, then per time segment a
/// 128x128 magnitude image and a binarized/opened 28x28 image.
struct TransformConfig {
    tf::ZamParams zam{128, 0.5, 128};
    bool use_stft = false;
    int stft_window = 64;
    int stft_hop = 4;
    int median_k = 3;
    int segments = 4;
    std::string out_dir;
    int threads = 0;
};

struct TransformedSegment {
    std::string tf_file;  // 128x128 magnitude image
    std::string bin_file; // 28x28 opened binary image
};

struct TransformedEntry {
    std::string id;
    int label = 0;
    double snr_db = 0.0;
    int gate = 0;
    std::vector<TransformedSegment> segments;
};

struct TransformedSet {
    int version = 1;
    std::vector<TransformedEntry> entries;
};

/// Segment images for one pulse train (already loaded); the returned entry's
/// file names are filled by the caller-facing wrappers.
struct SampleImages {
    int gate = 0;
    std::vector<tf::TFImage> large;     // segments x 128x128
    std::vector<tf::BinaryImage> small; // segments x 28x28
};
SampleImages transform_pulse_train(const sim::PulseTrain& train,
                                   const sim::RadarParams& radar,
                                   const TransformConfig& cfg);

TransformedSet transform_dataset(const std::string& dataset_dir, const TransformConfig& cfg);
void save_transformed(const TransformedSet& set, const std::string& dir);
TransformedSet load_transformed(const std::string& dir);

/// Per-range-gate Doppler map of one sample (pulse-compressed first).
tf::TFImage sample_rd_map(const sim::PulseTrain& train, const sim::RadarParams& radar,
                          int window);

struct TrainConfig {
    featnet::FeatureNetConfig featnet;
    det::DetectorConfig detector;
    double train_frac = 0.64;
    double val_frac = 0.16; // remainder is the comparison holdout
    uint64_t seed = 0;
    std::string out_dir;
};

struct SplitIndices {
    std::vector<size_t> train, val, holdout;
};

/// Stratified split, per-label proportions preserved, seeded shuffle.
SplitIndices stratified_split(const std::vector<int>& labels, double train_frac,
                              double val_frac, uint64_t seed);

struct TrainOutputs {
    std::string featnet_ckpt;
    std::string detector_ckpt;
    std::string featnet_log_csv;
    std::string detector_log_csv;
};

TrainOutputs train_pipeline(const TransformedSet& set, const std::string& transformed_dir,
                            const TrainConfig& cfg);

struct EvalConfig {
    double threshold = 0.5;
    std::vector<double> sweep_thresholds; // defaults to 0.02..0.98 step 0.02
    int heatmap_per_label = 15;
    uint64_t seed = 0;
    std::string out_dir;
};

struct EvalOutputs {
    eval::MetricReport report;
    std::string metrics_csv, sweep_csv, operating_csv, confusion_csv, predictions_csv,
        heatmap_csv, heatmap_pgm;
};

/// Scores the holdout split with the trained nets and writes every artifact.
EvalOutputs eval_pipeline(const TransformedSet& set, const std::string& transformed_dir,
                          const std::string& featnet_ckpt, const std::string& detector_ckpt,
                          const TrainConfig& train_cfg, const EvalConfig& cfg);

/// Min-max normalized [1,128,128] tensor from a stored magnitude image.
featnet::Tensor to_encoder_input(const tf::TFImage& img);

} // namespace uavdet::pipeline
