#pragma once

#include <array>
#include <string>
#include <vector>

#include "uavdet/feature_net.hpp"
#include "uavdet/nn_ops.hpp"
#include "uavdet/param_store.hpp"

namespace uavdet::det {

using nn::Param;
using nn::ParamStore;
using nn::Tensor;

struct DetectorConfig {
    double lr = 4e-4;
    int epochs = 200;
    int batch = 16;
    uint64_t seed = 0;
};

/// Ordered fused feature vectors over the observation, one per TF window.
struct FeatureSequence {
    std::vector<std::vector<double>> steps;
    std::string sample_id;
    int true_label = 0; // 0, 1 or 2 targets
};

struct DetectionResult {
    std::array<double, 3> probs{};
    int label = 0;
    double threshold_used = 0.0;
};

/// Presence threshold then count argmax: P(target) = p1 + p2 < theta -> 0,
/// otherwise the larger of classes 1 and 2.
int decide(const std::array<double, 3>& probs, double threshold);

/// Bidirectional GRU (shared weights across time, so any sequence length) with
/// a 3-way softmax head over the concatenated final states.
class GruClassifier {
public:
    explicit GruClassifier(size_t input_dim, size_t hidden = 100, uint64_t seed = 0);

    std::array<double, 3> classify(const std::vector<std::vector<double>>& steps) const;
    DetectionResult detect(const FeatureSequence& seq, double threshold) const;

    void save(const std::string& path) const;
    void load(const std::string& path);

    size_t input_dim() const { return input_dim_; }
    size_t hidden() const { return hidden_; }

    ParamStore params;

    // Training internals shared with the joint trainer.
    struct ForwardCache {
        nn::GruCache fwd, bwd;
        std::vector<double> h_cat;
        std::array<double, 3> probs;
    };
    std::array<double, 3> forward(const std::vector<std::vector<double>>& steps,
                                  ForwardCache* cache) const;
    /// Backward from d(probs); returns d(steps). Accumulates into params.
    std::vector<std::vector<double>> backward(const std::vector<std::vector<double>>& steps,
                                              const ForwardCache& cache,
                                              const std::vector<double>& d_probs) const;

private:
    size_t input_dim_, hidden_;
    nn::GruWeights fwd_, bwd_;
    Param *fc_w_, *fc_b_;
};

struct TrainLogEntry {
    int epoch;
    double loss;
};

/// Cross-entropy training over fused-feature sequences. Deterministic given
/// cfg.seed; throws NumericError on a non-finite loss.
std::vector<TrainLogEntry> train_detector(GruClassifier& gru,
                                          const std::vector<FeatureSequence>& data,
                                          const DetectorConfig& cfg);

/// Per-step (r20, r30) pairs for the joint stage, where the fusion layer is
/// still trainable.
struct EncodedSequence {
    std::vector<std::pair<Tensor, Tensor>> steps;
    std::string sample_id;
    int true_label = 0;
};

/// Trains the GRU head and the feature net's fusion layer together; the
/// encoders stay frozen.
std::vector<TrainLogEntry> train_detector_joint(GruClassifier& gru, featnet::FeatureNet& net,
                                                const std::vector<EncodedSequence>& data,
                                                const DetectorConfig& cfg);

} // namespace uavdet::det
