#include "uavdet/feature_net.hpp"

#include <algorithm>
#include <cmath>

#include "uavdet/losses.hpp"
#include "uavdet/rng.hpp"

namespace uavdet::featnet {

using nn::adaptive_avg_pool_backward;
using nn::adaptive_avg_pool_forward;
using nn::conv2d_backward;
using nn::conv2d_forward;
using nn::fc_backward;
using nn::fc_forward;
using nn::relu_backward;
using nn::relu_forward;

// ---------------------------------------------------------------- Encoder1

void Encoder1::register_params(ParamStore& store) {
    store.add("enc1/conv1/w", {8, 1, 3, 3});
    store.add("enc1/conv1/b", {8});
    store.add("enc1/conv2/w", {16, 8, 3, 3});
    store.add("enc1/conv2/b", {16});
    store.add("enc1/fc1/w", {50, 144});
    store.add("enc1/fc1/b", {50});
    store.add("enc1/fc2/w", {20, 50});
    store.add("enc1/fc2/b", {20});
    bind(store);
}

void Encoder1::bind(ParamStore& store) {
    conv1_w_ = &store.get("enc1/conv1/w");
    conv1_b_ = &store.get("enc1/conv1/b");
    conv2_w_ = &store.get("enc1/conv2/w");
    conv2_b_ = &store.get("enc1/conv2/b");
    fc1_w_ = &store.get("enc1/fc1/w");
    fc1_b_ = &store.get("enc1/fc1/b");
    fc2_w_ = &store.get("enc1/fc2/w");
    fc2_b_ = &store.get("enc1/fc2/b");
}

std::vector<std::vector<size_t>> Encoder1::shape_trace() {
    return {{1, 128, 128}, {8, 63, 63}, {8, 21, 21}, {16, 10, 10}, {16, 3, 3},
            {144},         {50},        {20}};
}

Tensor Encoder1::forward(const Tensor& img, Cache* cache) const {
    if (img.shape != std::vector<size_t>{1, 128, 128}) {
        throw ParamError("encoder1: input must be 1x128x128");
    }
    Tensor c1 = conv2d_forward(img, conv1_w_->value, conv1_b_->value, 2);
    Tensor r1 = relu_forward(c1);
    Tensor p1 = adaptive_avg_pool_forward(r1, 21, 21);
    Tensor c2 = conv2d_forward(p1, conv2_w_->value, conv2_b_->value, 2);
    Tensor r2 = relu_forward(c2);
    Tensor p2 = adaptive_avg_pool_forward(r2, 3, 3);
    Tensor flat({144}, p2.data);
    Tensor f1 = fc_forward(flat, fc1_w_->value, fc1_b_->value);
    Tensor a1 = relu_forward(f1);
    Tensor out = fc_forward(a1, fc2_w_->value, fc2_b_->value);
    if (cache) *cache = {img, std::move(c1), std::move(r1), std::move(p1),
                         std::move(c2), std::move(r2), std::move(p2),
                         std::move(f1), std::move(a1)};
    return out;
}

void Encoder1::backward(const Cache& cache, const Tensor& d_out) const {
    Tensor da1({50});
    fc_backward(cache.a1, fc2_w_->value, d_out, &da1, &fc2_w_->grad, &fc2_b_->grad);
    Tensor df1({50});
    relu_backward(cache.f1, da1, &df1);
    Tensor flat({144}, cache.p2.data);
    Tensor dflat({144});
    fc_backward(flat, fc1_w_->value, df1, &dflat, &fc1_w_->grad, &fc1_b_->grad);
    Tensor dp2({16, 3, 3}, dflat.data);
    Tensor dr2({16, 10, 10});
    adaptive_avg_pool_backward(cache.r2.shape, dp2, &dr2);
    Tensor dc2({16, 10, 10});
    relu_backward(cache.c2, dr2, &dc2);
    Tensor dp1({8, 21, 21});
    conv2d_backward(cache.p1, conv2_w_->value, 2, dc2, &dp1, &conv2_w_->grad, &conv2_b_->grad);
    Tensor dr1({8, 63, 63});
    adaptive_avg_pool_backward(cache.r1.shape, dp1, &dr1);
    Tensor dc1({8, 63, 63});
    relu_backward(cache.c1, dr1, &dc1);
    conv2d_backward(cache.x, conv1_w_->value, 2, dc1, nullptr, &conv1_w_->grad, &conv1_b_->grad);
}

// ---------------------------------------------------------- ProjectionHead

void ProjectionHead::register_params(ParamStore& store) {
    store.add("head/fc1/w", {2048, 20});
    store.add("head/fc1/b", {2048});
    store.add("head/fc2/w", {128, 2048});
    store.add("head/fc2/b", {128});
    bind(store);
}

void ProjectionHead::bind(ParamStore& store) {
    fc1_w_ = &store.get("head/fc1/w");
    fc1_b_ = &store.get("head/fc1/b");
    fc2_w_ = &store.get("head/fc2/w");
    fc2_b_ = &store.get("head/fc2/b");
}

Tensor ProjectionHead::forward(const Tensor& r20, Cache* cache) const {
    if (r20.numel() != 20) throw ParamError("projection_head: input must be 20-dim");
    Tensor h = fc_forward(r20, fc1_w_->value, fc1_b_->value);
    Tensor a = relu_forward(h);
    Tensor raw = fc_forward(a, fc2_w_->value, fc2_b_->value);

    double norm = 0.0;
    for (double v : raw.data) norm += v * v;
    norm = std::sqrt(norm);
    const bool floored = norm < 1e-12;
    if (floored) ++epsilon_events;
    const double norm_eff = floored ? 1e-12 : norm;

    Tensor out({128});
    for (size_t i = 0; i < 128; ++i) out[i] = raw[i] / norm_eff;
    if (cache) *cache = {r20, std::move(h), std::move(a), std::move(raw), norm_eff, floored};
    return out;
}

Tensor ProjectionHead::backward(const Cache& cache, const Tensor& d_out) const {
    // Through y = v / ||v||: dv = (dy - (dy . y) y) / ||v||; when floored the
    // projection term vanishes with v ~ 0.
    Tensor draw({128});
    if (cache.floored) {
        for (size_t i = 0; i < 128; ++i) draw[i] = d_out[i] / cache.norm;
    } else {
        double dot = 0.0;
        for (size_t i = 0; i < 128; ++i) dot += d_out[i] * cache.raw[i] / cache.norm;
        for (size_t i = 0; i < 128; ++i) {
            draw[i] = (d_out[i] - dot * cache.raw[i] / cache.norm) / cache.norm;
        }
    }
    Tensor da({2048});
    fc_backward(cache.a, fc2_w_->value, draw, &da, &fc2_w_->grad, &fc2_b_->grad);
    Tensor dh({2048});
    relu_backward(cache.h, da, &dh);
    Tensor dx({20});
    fc_backward(cache.x, fc1_w_->value, dh, &dx, &fc1_w_->grad, &fc1_b_->grad);
    return dx;
}

// ----------------------------------------------------- Encoder2 / Decoder

void Encoder2::register_params(ParamStore& store) {
    store.add("enc2/fc3/w", {512, 784});
    store.add("enc2/fc3/b", {512});
    store.add("enc2/fc4/w", {128, 512});
    store.add("enc2/fc4/b", {128});
    store.add("enc2/fc5/w", {30, 128});
    store.add("enc2/fc5/b", {30});
    bind(store);
}

void Encoder2::bind(ParamStore& store) {
    fc3_w_ = &store.get("enc2/fc3/w");
    fc3_b_ = &store.get("enc2/fc3/b");
    fc4_w_ = &store.get("enc2/fc4/w");
    fc4_b_ = &store.get("enc2/fc4/b");
    fc5_w_ = &store.get("enc2/fc5/w");
    fc5_b_ = &store.get("enc2/fc5/b");
}

Tensor Encoder2::forward(const Tensor& img784, Cache* cache) const {
    if (img784.numel() != 784) throw ParamError("encoder2: input must be 784-dim");
    Tensor h1 = fc_forward(img784, fc3_w_->value, fc3_b_->value);
    Tensor h2 = fc_forward(h1, fc4_w_->value, fc4_b_->value);
    Tensor h3 = fc_forward(h2, fc5_w_->value, fc5_b_->value);
    Tensor out = relu_forward(h3);
    if (cache) *cache = {img784, std::move(h1), std::move(h2), std::move(h3)};
    return out;
}

void Encoder2::backward(const Cache& cache, const Tensor& d_out) const {
    Tensor dh3({30});
    relu_backward(cache.h3, d_out, &dh3);
    Tensor dh2({128});
    fc_backward(cache.h2, fc5_w_->value, dh3, &dh2, &fc5_w_->grad, &fc5_b_->grad);
    Tensor dh1({512});
    fc_backward(cache.h1, fc4_w_->value, dh2, &dh1, &fc4_w_->grad, &fc4_b_->grad);
    fc_backward(cache.x, fc3_w_->value, dh1, nullptr, &fc3_w_->grad, &fc3_b_->grad);
}

void Decoder::register_params(ParamStore& store) {
    store.add("dec/fc6/w", {128, 30});
    store.add("dec/fc6/b", {128});
    store.add("dec/fc7/w", {512, 128});
    store.add("dec/fc7/b", {512});
    store.add("dec/fc8/w", {784, 512});
    store.add("dec/fc8/b", {784});
    bind(store);
}

void Decoder::bind(ParamStore& store) {
    fc6_w_ = &store.get("dec/fc6/w");
    fc6_b_ = &store.get("dec/fc6/b");
    fc7_w_ = &store.get("dec/fc7/w");
    fc7_b_ = &store.get("dec/fc7/b");
    fc8_w_ = &store.get("dec/fc8/w");
    fc8_b_ = &store.get("dec/fc8/b");
}

Tensor Decoder::forward(const Tensor& r30, Cache* cache) const {
    if (r30.numel() != 30) throw ParamError("decoder: input must be 30-dim");
    Tensor h1 = fc_forward(r30, fc6_w_->value, fc6_b_->value);
    Tensor h2 = fc_forward(h1, fc7_w_->value, fc7_b_->value);
    Tensor h3 = fc_forward(h2, fc8_w_->value, fc8_b_->value);
    Tensor out = relu_forward(h3);
    if (cache) *cache = {r30, std::move(h1), std::move(h2), std::move(h3)};
    return out;
}

Tensor Decoder::backward(const Cache& cache, const Tensor& d_out) const {
    Tensor dh3({784});
    relu_backward(cache.h3, d_out, &dh3);
    Tensor dh2({512});
    fc_backward(cache.h2, fc8_w_->value, dh3, &dh2, &fc8_w_->grad, &fc8_b_->grad);
    Tensor dh1({128});
    fc_backward(cache.h1, fc7_w_->value, dh2, &dh1, &fc7_w_->grad, &fc7_b_->grad);
    Tensor dx({30});
    fc_backward(cache.x, fc6_w_->value, dh1, &dx, &fc6_w_->grad, &fc6_b_->grad);
    return dx;
}

// ------------------------------------------------------------ FusionLayer

void FusionLayer::register_params(ParamStore& store, size_t fusion_dim) {
    store.add("fuse/w", {fusion_dim, 50});
    store.add("fuse/b", {fusion_dim});
    bind(store, fusion_dim);
}

void FusionLayer::bind(ParamStore& store, size_t fusion_dim) {
    w_ = &store.get("fuse/w");
    b_ = &store.get("fuse/b");
    fusion_dim_ = fusion_dim;
}

Tensor FusionLayer::forward(const Tensor& r20, const Tensor& r30, Cache* cache) const {
    if (r20.numel() != 20 || r30.numel() != 30) throw ParamError("fuse: dims must be 20 and 30");
    Tensor cat({50});
    std::copy(r20.data.begin(), r20.data.end(), cat.data.begin());
    std::copy(r30.data.begin(), r30.data.end(), cat.data.begin() + 20);
    Tensor pre = fc_forward(cat, w_->value, b_->value);
    Tensor out = relu_forward(pre);
    if (cache) *cache = {std::move(cat), std::move(pre)};
    return out;
}

std::pair<Tensor, Tensor> FusionLayer::backward(const Cache& cache, const Tensor& d_out) const {
    Tensor dpre({fusion_dim_});
    relu_backward(cache.pre, d_out, &dpre);
    Tensor dcat({50});
    fc_backward(cache.cat, w_->value, dpre, &dcat, &w_->grad, &b_->grad);
    Tensor d20({20}), d30({30});
    std::copy(dcat.data.begin(), dcat.data.begin() + 20, d20.data.begin());
    std::copy(dcat.data.begin() + 20, dcat.data.end(), d30.data.begin());
    return {std::move(d20), std::move(d30)};
}

// -------------------------------------------------------------- FeatureNet

FeatureNet::FeatureNet(const FeatureNetConfig& cfg) : cfg_(cfg) {
    enc1_.register_params(contrastive_params);
    head_.register_params(contrastive_params);
    enc2_.register_params(autoenc_params);
    dec_.register_params(autoenc_params);
    fusion_.register_params(fusion_params, cfg.fusion_dim);
    init(cfg.seed);
}

void FeatureNet::init(uint64_t seed) {
    nn::kaiming_uniform_init(contrastive_params, seed);
    nn::kaiming_uniform_init(autoenc_params, mix64(seed ^ 0x1111));
    nn::kaiming_uniform_init(fusion_params, mix64(seed ^ 0x2222));
}

std::vector<double> FeatureNet::contrastive_embedding(const Tensor& img128) const {
    const Tensor r20 = enc1_.forward(img128);
    const Tensor z = head_.forward(r20);
    return z.data;
}

Tensor FeatureNet::encode2(const std::vector<double>& img784) const {
    return enc2_.forward(Tensor({784}, img784));
}

void FeatureNet::save(const std::string& path) const {
    nn::save_checkpoint({{"featnet/", &contrastive_params},
                         {"featnet/", &autoenc_params},
                         {"featnet/", &fusion_params}},
                        path);
}

void FeatureNet::load(const std::string& path) {
    nn::load_checkpoint({{"featnet/", &contrastive_params},
                         {"featnet/", &autoenc_params},
                         {"featnet/", &fusion_params}},
                        path);
}

// ---------------------------------------------------------------- training

std::vector<TrainLogEntry> train_feature_net(FeatureNet& net,
                                             const std::vector<FeatureSample>& data,
                                             const FeatureNetConfig& cfg) {
    std::vector<size_t> with_target, without_target;
    for (size_t i = 0; i < data.size(); ++i) {
        (data[i].binary_label ? with_target : without_target).push_back(i);
    }
    if (cfg.batch_pairs < 2) throw ParamError("train_feature_net: batch_pairs must be >= 2");
    if (with_target.size() < 2 || without_target.size() < 2) {
        throw ParamError("train_feature_net: need >= 2 samples of each binary class");
    }
    if (cfg.alternation_k < 1) throw ParamError("train_feature_net: alternation_k must be >= 1");

    std::vector<TrainLogEntry> log;
    const size_t n_pairs = std::min({static_cast<size_t>(cfg.batch_pairs), with_target.size(),
                                     without_target.size()});
    const size_t batches_per_epoch =
        std::max<size_t>(1, std::min(with_target.size(), without_target.size()) / n_pairs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const bool contrastive = (epoch / cfg.alternation_k) % 2 == 0;
        CounterRng rng(cfg.seed, (0x0FEA7ULL << 20) + static_cast<uint64_t>(epoch));
        double epoch_loss = 0.0;

        if (contrastive) {
            for (size_t b = 0; b < batches_per_epoch; ++b) {
                std::vector<size_t> batch_idx;
                for (size_t p = 0; p < n_pairs; ++p) {
                    batch_idx.push_back(with_target[rng.next_below(with_target.size())]);
                    batch_idx.push_back(without_target[rng.next_below(without_target.size())]);
                }

                std::vector<Encoder1::Cache> enc_caches(batch_idx.size());
                std::vector<ProjectionHead::Cache> head_caches(batch_idx.size());
                std::vector<std::vector<double>> z(batch_idx.size());
                std::vector<int> labels(batch_idx.size());
                for (size_t i = 0; i < batch_idx.size(); ++i) {
                    const auto& s = data[batch_idx[i]];
                    const Tensor r20 = net.enc1_.forward(s.img128, &enc_caches[i]);
                    z[i] = net.head_.forward(r20, &head_caches[i]).data;
                    labels[i] = s.binary_label;
                }

                std::vector<std::vector<double>> dz;
                const double loss = nn::supcon_loss(z, labels, cfg.tau, &dz);
                if (!std::isfinite(loss)) throw NumericError("contrastive loss is not finite");
                epoch_loss += loss;

                net.contrastive_params.zero_grads();
                for (size_t i = 0; i < batch_idx.size(); ++i) {
                    const Tensor d_r20 = net.head_.backward(head_caches[i], Tensor({128}, dz[i]));
                    net.enc1_.backward(enc_caches[i], d_r20);
                }
                nn::adam_step(net.contrastive_params, cfg.lr);
            }
            epoch_loss /= static_cast<double>(batches_per_epoch);
            log.push_back({epoch, "contrastive", epoch_loss});
        } else {
            std::vector<size_t> order(data.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            for (size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.next_below(i)]);
            }
            const size_t batch_size = 2 * n_pairs;
            size_t batches = 0;
            for (size_t start = 0; start < order.size(); start += batch_size, ++batches) {
                const size_t end = std::min(order.size(), start + batch_size);
                std::vector<Encoder2::Cache> e_caches(end - start);
                std::vector<Decoder::Cache> d_caches(end - start);
                std::vector<std::vector<double>> target(end - start), recon(end - start);
                for (size_t i = start; i < end; ++i) {
                    const auto& s = data[order[i]];
                    Tensor in({784}, s.img28);
                    const Tensor r30 = net.enc2_.forward(in, &e_caches[i - start]);
                    const Tensor out = net.dec_.forward(r30, &d_caches[i - start]);
                    target[i - start] = s.img28;
                    recon[i - start] = out.data;
                }
                std::vector<std::vector<double>> dr;
                const double loss = nn::recon_loss(target, recon, &dr);
                if (!std::isfinite(loss)) throw NumericError("reconstruction loss is not finite");
                epoch_loss += loss;

                net.autoenc_params.zero_grads();
                for (size_t i = 0; i < end - start; ++i) {
                    const Tensor d_r30 = net.dec_.backward(d_caches[i], Tensor({784}, dr[i]));
                    net.enc2_.backward(e_caches[i], d_r30);
                }
                nn::adam_step(net.autoenc_params, cfg.lr);
            }
            epoch_loss /= static_cast<double>(std::max<size_t>(1, batches));
            log.push_back({epoch, "autoencoder", epoch_loss});
        }
    }
    return log;
}

} // namespace uavdet::featnet
