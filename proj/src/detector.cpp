#include "uavdet/detector.hpp"

#include <algorithm>
#include <cmath>

#include "uavdet/losses.hpp"
#include "uavdet/rng.hpp"

namespace uavdet::det {

using nn::GruWeights;
using nn::Tensor;

int decide(const std::array<double, 3>& probs, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ParamError("decide: theta must be in (0,1)");
    const double presence = probs[1] + probs[2];
    if (presence < threshold) return 0;
    return probs[1] >= probs[2] ? 1 : 2;
}

GruClassifier::GruClassifier(size_t input_dim, size_t hidden, uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden) {
    fwd_ = GruWeights::create(params, "gru_fwd", input_dim, hidden);
    bwd_ = GruWeights::create(params, "gru_bwd", input_dim, hidden);
    fc_w_ = &params.add("fc/w", {3, 2 * hidden});
    fc_b_ = &params.add("fc/b", {3});
    nn::kaiming_uniform_init(params, seed);
}

std::array<double, 3> GruClassifier::forward(const std::vector<std::vector<double>>& steps,
                                             ForwardCache* cache) const {
    if (steps.empty()) throw ParamError("classify: empty sequence");
    std::vector<std::vector<double>> reversed(steps.rbegin(), steps.rend());

    const auto hf = nn::gru_forward(fwd_, steps, cache ? &cache->fwd : nullptr);
    const auto hb = nn::gru_forward(bwd_, reversed, cache ? &cache->bwd : nullptr);

    std::vector<double> h_cat(2 * hidden_);
    std::copy(hf.begin(), hf.end(), h_cat.begin());
    std::copy(hb.begin(), hb.end(), h_cat.begin() + static_cast<long>(hidden_));

    const Tensor logits = nn::fc_forward(Tensor({2 * hidden_}, h_cat), fc_w_->value, fc_b_->value);
    const auto probs_v = nn::softmax(logits.data);
    std::array<double, 3> probs = {probs_v[0], probs_v[1], probs_v[2]};
    if (cache) {
        cache->h_cat = std::move(h_cat);
        cache->probs = probs;
    }
    return probs;
}

std::array<double, 3> GruClassifier::classify(
    const std::vector<std::vector<double>>& steps) const {
    return forward(steps, nullptr);
}

DetectionResult GruClassifier::detect(const FeatureSequence& seq, double threshold) const {
    DetectionResult res;
    res.probs = classify(seq.steps);
    res.label = decide(res.probs, threshold);
    res.threshold_used = threshold;
    return res;
}

std::vector<std::vector<double>> GruClassifier::backward(
    const std::vector<std::vector<double>>& steps, const ForwardCache& cache,
    const std::vector<double>& d_probs) const {
    std::vector<double> dlogits(3, 0.0);
    nn::softmax_backward({cache.probs[0], cache.probs[1], cache.probs[2]}, d_probs, &dlogits);

    Tensor dh_cat({2 * hidden_});
    nn::fc_backward(Tensor({2 * hidden_}, cache.h_cat), fc_w_->value, Tensor({3}, dlogits),
                    &dh_cat, &fc_w_->grad, &fc_b_->grad);

    std::vector<double> dhf(dh_cat.data.begin(), dh_cat.data.begin() + static_cast<long>(hidden_));
    std::vector<double> dhb(dh_cat.data.begin() + static_cast<long>(hidden_), dh_cat.data.end());

    const auto dseq_f = nn::gru_backward(fwd_, cache.fwd, dhf);
    const auto dseq_b = nn::gru_backward(bwd_, cache.bwd, dhb);

    std::vector<std::vector<double>> dsteps(steps.size(), std::vector<double>(input_dim_, 0.0));
    for (size_t t = 0; t < steps.size(); ++t) {
        for (size_t d = 0; d < input_dim_; ++d) {
            dsteps[t][d] = dseq_f[t][d] + dseq_b[steps.size() - 1 - t][d];
        }
    }
    return dsteps;
}

void GruClassifier::save(const std::string& path) const {
    nn::save_checkpoint({{"detector/", &params}}, path);
}

void GruClassifier::load(const std::string& path) {
    nn::load_checkpoint({{"detector/", &params}}, path);
}

namespace {

std::vector<double> one_hot(int label) {
    std::vector<double> q(3, 0.0);
    q[label] = 1.0;
    return q;
}

std::vector<size_t> shuffled_indices(size_t n, CounterRng& rng) {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
    return order;
}

} // namespace

std::vector<TrainLogEntry> train_detector(GruClassifier& gru,
                                          const std::vector<FeatureSequence>& data,
                                          const DetectorConfig& cfg) {
    if (data.empty()) throw ParamError("train_detector: empty dataset");
    bool seen[3] = {false, false, false};
    for (const auto& s : data) {
        if (s.true_label < 0 || s.true_label > 2) throw ParamError("train_detector: bad label");
        seen[s.true_label] = true;
    }
    int classes = 0;
    for (bool b : seen) classes += b;
    if (classes < 2) throw ParamError("train_detector: need samples from >= 2 classes");

    std::vector<TrainLogEntry> log;
    const size_t batch = std::max(1, cfg.batch);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        CounterRng rng(cfg.seed, (0xDE7ULL << 32) + static_cast<uint64_t>(epoch));
        const auto order = shuffled_indices(data.size(), rng);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += batch, ++batches) {
            const size_t end = std::min(order.size(), start + batch);
            const double inv = 1.0 / static_cast<double>(end - start);
            gru.params.zero_grads();
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                const auto& sample = data[order[i]];
                GruClassifier::ForwardCache cache;
                const auto probs = gru.forward(sample.steps, &cache);
                std::vector<double> dp;
                batch_loss += nn::cross_entropy({probs[0], probs[1], probs[2]},
                                                one_hot(sample.true_label), &dp) * inv;
                for (double& v : dp) v *= inv;
                gru.backward(sample.steps, cache, dp);
            }
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train_detector: loss diverged at epoch " +
                                   std::to_string(epoch));
            }
            nn::adam_step(gru.params, cfg.lr);
            epoch_loss += batch_loss;
        }
        log.push_back({epoch, epoch_loss / static_cast<double>(batches)});
    }
    return log;
}

std::vector<TrainLogEntry> train_detector_joint(GruClassifier& gru, featnet::FeatureNet& net,
                                                const std::vector<EncodedSequence>& data,
                                                const DetectorConfig& cfg) {
    if (data.empty()) throw ParamError("train_detector_joint: empty dataset");

    std::vector<TrainLogEntry> log;
    const size_t batch = std::max(1, cfg.batch);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        CounterRng rng(cfg.seed, (0xDE8ULL << 32) + static_cast<uint64_t>(epoch));
        const auto order = shuffled_indices(data.size(), rng);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += batch, ++batches) {
            const size_t end = std::min(order.size(), start + batch);
            const double inv = 1.0 / static_cast<double>(end - start);
            gru.params.zero_grads();
            net.fusion_params.zero_grads();
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                const auto& sample = data[order[i]];
                std::vector<featnet::FusionLayer::Cache> fuse_caches(sample.steps.size());
                std::vector<std::vector<double>> fused(sample.steps.size());
                for (size_t t = 0; t < sample.steps.size(); ++t) {
                    fused[t] = net.fusion_
                                   .forward(sample.steps[t].first, sample.steps[t].second,
                                            &fuse_caches[t])
                                   .data;
                }
                GruClassifier::ForwardCache cache;
                const auto probs = gru.forward(fused, &cache);
                std::vector<double> dp;
                batch_loss += nn::cross_entropy({probs[0], probs[1], probs[2]},
                                                one_hot(sample.true_label), &dp) * inv;
                for (double& v : dp) v *= inv;
                const auto dsteps = gru.backward(fused, cache, dp);
                for (size_t t = 0; t < sample.steps.size(); ++t) {
                    net.fusion_.backward(fuse_caches[t],
                                         Tensor({net.fusion_.fusion_dim()}, dsteps[t]));
                }
            }
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train_detector_joint: loss diverged at epoch " +
                                   std::to_string(epoch));
            }
            nn::adam_step(gru.params, cfg.lr);
            nn::adam_step(net.fusion_params, cfg.lr);
            epoch_loss += batch_loss;
        }
        log.push_back({epoch, epoch_loss / static_cast<double>(batches)});
    }
    return log;
}

} // namespace uavdet::det
