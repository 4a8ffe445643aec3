#pragma once

#include <string>
#include <vector>

#include "uavdet/nn_ops.hpp"
#include "uavdet/param_store.hpp"

namespace uavdet::featnet {

using nn::Param;
using nn::ParamStore;
using nn::Tensor;

struct FeatureNetConfig {
    double tau = 0.1;
    double lr = 4e-4;
    int epochs = 8192;     // headline schedule; desk-scale runs override this
    int batch_pairs = 16;  // N image pairs -> 2N contrastive rows
    int alternation_k = 1; // branch swap cadence
    size_t fusion_dim = 32;
    uint64_t seed = 0;
};

/// Convolutional encoder, 128x128 -> 20:
/// conv 3x3x8 s2 -> relu -> pool 21 -> conv 3x3x16 s2 -> relu -> pool 3
/// -> flatten 144 -> fc 50 -> relu -> fc 20.
class Encoder1 {
public:
    void register_params(ParamStore& store);
    void bind(ParamStore& store);

    struct Cache {
        Tensor x, c1, r1, p1, c2, r2, p2, f1, a1;
    };
    Tensor forward(const Tensor& img, Cache* cache = nullptr) const;
    void backward(const Cache& cache, const Tensor& d_out) const;

    /// Layer-by-layer output shapes for conformance checks.
    static std::vector<std::vector<size_t>> shape_trace();

private:
    Param *conv1_w_, *conv1_b_, *conv2_w_, *conv2_b_, *fc1_w_, *fc1_b_, *fc2_w_, *fc2_b_;
};

/// MLP head, 20 -> 2048 (relu) -> 128, output L2-normalized onto the unit
/// hypersphere. A zero pre-normalization vector is floored at 1e-12 and
/// counted in epsilon_events.
class ProjectionHead {
public:
    void register_params(ParamStore& store);
    void bind(ParamStore& store);

    struct Cache {
        Tensor x, h, a, raw;
        double norm = 0.0;
        bool floored = false;
    };
    Tensor forward(const Tensor& r20, Cache* cache = nullptr) const;
    /// Returns the gradient w.r.t. the 20-dim input.
    Tensor backward(const Cache& cache, const Tensor& d_out) const;

    mutable long epsilon_events = 0;

private:
    Param *fc1_w_, *fc1_b_, *fc2_w_, *fc2_b_;
};

/// Dense autoencoder halves: 784 -> 512 -> 128 -> 30 (relu) and its mirror
/// 30 -> 128 -> 512 -> 784 (relu). The single activations follow the layer
/// table; the final relu keeps reconstructions non-negative like the binary
/// inputs.
class Encoder2 {
public:
    void register_params(ParamStore& store);
    void bind(ParamStore& store);

    struct Cache {
        Tensor x, h1, h2, h3;
    };
    Tensor forward(const Tensor& img784, Cache* cache = nullptr) const;
    void backward(const Cache& cache, const Tensor& d_out) const;

private:
    Param *fc3_w_, *fc3_b_, *fc4_w_, *fc4_b_, *fc5_w_, *fc5_b_;
};

class Decoder {
public:
    void register_params(ParamStore& store);
    void bind(ParamStore& store);

    struct Cache {
        Tensor x, h1, h2, h3;
    };
    Tensor forward(const Tensor& r30, Cache* cache = nullptr) const;
    /// Returns the gradient w.r.t. the 30-dim code.
    Tensor backward(const Cache& cache, const Tensor& d_out) const;

private:
    Param *fc6_w_, *fc6_b_, *fc7_w_, *fc7_b_, *fc8_w_, *fc8_b_;
};

/// Dense fusion: concat(20, 30) -> fusion_dim, relu.
class FusionLayer {
public:
    void register_params(ParamStore& store, size_t fusion_dim);
    void bind(ParamStore& store, size_t fusion_dim);

    struct Cache {
        Tensor cat, pre;
    };
    Tensor forward(const Tensor& r20, const Tensor& r30, Cache* cache = nullptr) const;
    /// Returns gradients for (r20, r30).
    std::pair<Tensor, Tensor> backward(const Cache& cache, const Tensor& d_out) const;

    size_t fusion_dim() const { return fusion_dim_; }

private:
    Param *w_, *b_;
    size_t fusion_dim_ = 0;
};

/// One training sample for the feature extractor: the magnitude image feeds
/// the contrastive branch, the opened binary image feeds the autoencoder.
struct FeatureSample {
    Tensor img128;              // [1,128,128]
    std::vector<double> img28;  // 784 flattened 0/1 values
    int count_label = 0;        // 0, 1 or 2 targets
    int binary_label = 0;       // target present?
};

struct TrainLogEntry {
    int epoch;
    std::string branch; // "contrastive" or "autoencoder"
    double loss;
};

class FeatureNet {
public:
    explicit FeatureNet(const FeatureNetConfig& cfg);

    /// Sphere embedding for the contrastive loss.
    std::vector<double> contrastive_embedding(const Tensor& img128) const;
    /// 20-dim contrastive representation (pre-head).
    Tensor encode1(const Tensor& img128) const { return enc1_.forward(img128); }
    /// 30-dim autoencoder representation.
    Tensor encode2(const std::vector<double>& img784) const;
    Tensor reconstruct(const Tensor& r30) const { return dec_.forward(r30); }
    Tensor fuse(const Tensor& r20, const Tensor& r30) const { return fusion_.forward(r20, r30); }

    void init(uint64_t seed);
    void save(const std::string& path) const;
    void load(const std::string& path);

    const FeatureNetConfig& config() const { return cfg_; }

    FeatureNetConfig cfg_;
    ParamStore contrastive_params; // encoder1 + projection head
    ParamStore autoenc_params;     // encoder2 + decoder
    ParamStore fusion_params;      // fusion layer (trained with the detector)
    Encoder1 enc1_;
    ProjectionHead head_;
    Encoder2 enc2_;
    Decoder dec_;
    FusionLayer fusion_;
};

/// Alternates k epochs of contrastive updates with k epochs of autoencoder
/// updates for cfg.epochs total; deterministic given cfg.seed. The fusion
/// layer is left for the detector stage. Requires at least 2 samples of each
/// binary class and batch_pairs >= 2.
std::vector<TrainLogEntry> train_feature_net(FeatureNet& net,
                                             const std::vector<FeatureSample>& data,
                                             const FeatureNetConfig& cfg);

} // namespace uavdet::featnet
