#include <cmath>
#include <vector>

#include "doctest.h"
#include "uavdet/feature_net.hpp"
#include "uavdet/grad_check.hpp"
#include "uavdet/losses.hpp"
#include "uavdet/rng.hpp"

using namespace uavdet;
using namespace uavdet::featnet;

namespace {

FeatureNetConfig desk_cfg() {
    FeatureNetConfig cfg;
    cfg.epochs = 24;
    cfg.batch_pairs = 4;
    cfg.seed = 3;
    return cfg;
}

// A toy separable corpus: targets carry a bright horizontal band whose row
// encodes the class; clutter has only the low-frequency band at the edge.
std::vector<FeatureSample> synthetic_corpus(size_t n, uint64_t seed) {
    CounterRng rng(seed, 99);
    std::vector<FeatureSample> data;
    for (size_t i = 0; i < n; ++i) {
        FeatureSample s;
        s.count_label = static_cast<int>(i % 3);
        s.binary_label = s.count_label > 0 ? 1 : 0;
        s.img128 = Tensor({1, 128, 128});
        s.img28.assign(784, 0.0);
        // Clutter band near column 0 for everyone.
        for (int r = 0; r < 128; ++r) {
            for (int c = 0; c < 4; ++c) s.img128.at(0, r, c) = 0.8 + 0.2 * rng.uniform();
        }
        for (int line = 0; line < s.count_label; ++line) {
            const int col = 30 + 50 * line + static_cast<int>(rng.next_below(8));
            for (int r = 0; r < 128; ++r) s.img128.at(0, r, col) = 0.7 + 0.3 * rng.uniform();
            const int col28 = 7 + 10 * line;
            for (int r = 0; r < 28; ++r) s.img28[r * 28 + col28] = 1.0;
        }
        for (auto& v : s.img128.data) v += 0.05 * rng.uniform();
        data.push_back(std::move(s));
    }
    return data;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

} // namespace

TEST_CASE("encoder1 layer shapes follow the architecture table") {
    const auto want = Encoder1::shape_trace();
    CHECK(want[0] == std::vector<size_t>{1, 128, 128});

    FeatureNet net(desk_cfg());
    Encoder1::Cache cache;
    CounterRng rng(4, 0);
    Tensor img({1, 128, 128});
    for (auto& v : img.data) v = rng.uniform();
    const Tensor out = net.enc1_.forward(img, &cache);

    CHECK(cache.c1.shape == std::vector<size_t>{8, 63, 63});
    CHECK(cache.p1.shape == std::vector<size_t>{8, 21, 21});
    CHECK(cache.c2.shape == std::vector<size_t>{16, 10, 10});
    CHECK(cache.p2.shape == std::vector<size_t>{16, 3, 3});
    CHECK(cache.p2.numel() == 144);
    CHECK(cache.f1.shape == std::vector<size_t>{50});
    CHECK(out.shape == std::vector<size_t>{20});

    // Wrong input size rejected.
    Tensor small({1, 64, 64});
    CHECK_THROWS_AS(net.enc1_.forward(small), ParamError);

    // Zero image with zero biases maps to the zero vector.
    Tensor zero({1, 128, 128});
    const Tensor z = net.enc1_.forward(zero);
    for (double v : z.data) CHECK(v == 0.0);

    // Determinism: same image, same output.
    const Tensor again = net.enc1_.forward(img);
    CHECK(again.data == out.data);
}

TEST_CASE("projection head normalizes onto the unit sphere") {
    FeatureNet net(desk_cfg());
    CounterRng rng(5, 0);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor r20({20});
        for (auto& v : r20.data) v = rng.uniform(-2, 2);
        const Tensor z = net.head_.forward(r20);
        CHECK(z.shape == std::vector<size_t>{128});
        double norm = 0;
        for (double v : z.data) norm += v * v;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }

    // All-zero weights: epsilon-floored and flagged.
    FeatureNet dead(desk_cfg());
    for (auto& [name, p] : dead.contrastive_params.params()) p.value.fill(0.0);
    Tensor r20({20});
    r20.data[3] = 1.0;
    dead.head_.forward(r20);
    CHECK(dead.head_.epsilon_events > 0);
}

TEST_CASE("gradients flow through head and supcon loss") {
    FeatureNet net(desk_cfg());
    CounterRng rng(6, 0);
    std::vector<Tensor> inputs(4, Tensor({20}));
    for (auto& t : inputs)
        for (auto& v : t.data) v = rng.uniform(-1, 1);
    const std::vector<int> labels = {0, 0, 1, 1};

    auto eval = [&](bool backward) {
        std::vector<ProjectionHead::Cache> caches(4);
        std::vector<std::vector<double>> z(4);
        for (size_t i = 0; i < 4; ++i) {
            z[i] = net.head_.forward(inputs[i], &caches[i]).data;
        }
        std::vector<std::vector<double>> dz;
        const double loss = nn::supcon_loss(z, labels, 0.3, backward ? &dz : nullptr);
        if (backward) {
            net.contrastive_params.zero_grads();
            for (size_t i = 0; i < 4; ++i) {
                net.head_.backward(caches[i], Tensor({128}, dz[i]));
            }
        }
        return loss;
    };
    CHECK(nn::grad_check(net.contrastive_params, eval, 1e-5, 60) < 1e-4);
}

TEST_CASE("full contrastive branch gradient (encoder1 + head + supcon)") {
    FeatureNet net(desk_cfg());
    // Dense bright images keep conv pre-activations away from the relu kink,
    // where finite differences and the subgradient convention rightly differ.
    CounterRng img_rng(4, 99);
    std::vector<FeatureSample> data(4);
    for (size_t i = 0; i < 4; ++i) {
        data[i].binary_label = static_cast<int>(i % 2);
        data[i].img128 = Tensor({1, 128, 128});
        for (auto& v : data[i].img128.data) v = 0.2 + img_rng.uniform();
    }
    const std::vector<int> labels = {data[0].binary_label, data[1].binary_label,
                                     data[2].binary_label, data[3].binary_label};

    auto eval = [&](bool backward) {
        std::vector<Encoder1::Cache> ec(4);
        std::vector<ProjectionHead::Cache> hc(4);
        std::vector<std::vector<double>> z(4);
        for (size_t i = 0; i < 4; ++i) {
            const Tensor r20 = net.enc1_.forward(data[i].img128, &ec[i]);
            z[i] = net.head_.forward(r20, &hc[i]).data;
        }
        std::vector<std::vector<double>> dz;
        const double loss = nn::supcon_loss(z, labels, 0.3, backward ? &dz : nullptr);
        if (backward) {
            net.contrastive_params.zero_grads();
            for (size_t i = 0; i < 4; ++i) {
                const Tensor d20 = net.head_.backward(hc[i], Tensor({128}, dz[i]));
                net.enc1_.backward(ec[i], d20);
            }
        }
        return loss;
    };
    CHECK(nn::grad_check(net.contrastive_params, eval, 1e-6, 40, 9) < 1e-4);
}

TEST_CASE("autoencoder halves: shapes, zero case, gradient") {
    FeatureNet net(desk_cfg());
    CounterRng rng(7, 0);
    std::vector<double> img(784);
    for (auto& v : img) v = rng.uniform() < 0.2 ? 1.0 : 0.0;

    const Tensor r30 = net.encode2(img);
    CHECK(r30.shape == std::vector<size_t>{30});
    const Tensor rec = net.reconstruct(r30);
    CHECK(rec.shape == std::vector<size_t>{784});
    for (double v : rec.data) CHECK(v >= 0.0); // final relu

    FeatureNet dead(desk_cfg());
    for (auto& [name, p] : dead.autoenc_params.params()) p.value.fill(0.0);
    const Tensor zr = dead.reconstruct(dead.encode2(std::vector<double>(784, 0.0)));
    for (double v : zr.data) CHECK(v == 0.0);

    auto eval = [&](bool backward) {
        Encoder2::Cache ec;
        Decoder::Cache dc;
        const Tensor code = net.enc2_.forward(Tensor({784}, img), &ec);
        const Tensor out = net.dec_.forward(code, &dc);
        std::vector<std::vector<double>> grad;
        const double loss = nn::recon_loss({img}, {out.data}, backward ? &grad : nullptr);
        if (backward) {
            net.autoenc_params.zero_grads();
            const Tensor d30 = net.dec_.backward(dc, Tensor({784}, grad[0]));
            net.enc2_.backward(ec, d30);
        }
        return loss;
    };
    CHECK(nn::grad_check(net.autoenc_params, eval, 1e-5, 40, 2) < 1e-4);
}

TEST_CASE("fusion layer identity recovery and gradient") {
    FeatureNetConfig cfg = desk_cfg();
    cfg.fusion_dim = 50;
    FeatureNet net(cfg);
    auto& w = net.fusion_params.get("fuse/w");
    auto& b = net.fusion_params.get("fuse/b");
    w.value.fill(0.0);
    b.value.fill(0.0);
    for (size_t i = 0; i < 50; ++i) w.value.at(i, i) = 1.0;

    CounterRng rng(8, 0);
    Tensor r20({20}), r30({30});
    for (auto& v : r20.data) v = rng.uniform(0, 1); // non-negative: relu transparent
    for (auto& v : r30.data) v = rng.uniform(0, 1);
    const Tensor fused = net.fuse(r20, r30);
    for (size_t i = 0; i < 20; ++i) CHECK(fused[i] == r20[i]);
    for (size_t i = 0; i < 30; ++i) CHECK(fused[20 + i] == r30[i]);

    // Zero r30: the trailing block of the identity fusion stays zero.
    const Tensor only20 = net.fuse(r20, Tensor({30}));
    for (size_t i = 20; i < 50; ++i) CHECK(only20[i] == 0.0);

    FeatureNet rnd(desk_cfg());
    auto eval = [&](bool backward) {
        FusionLayer::Cache cache;
        const Tensor out = rnd.fusion_.forward(r20, r30, &cache);
        double loss = 0.0;
        for (size_t i = 0; i < out.numel(); ++i) loss += (0.3 + 0.1 * i) * out[i];
        if (backward) {
            rnd.fusion_params.zero_grads();
            Tensor d_out({rnd.fusion_.fusion_dim()});
            for (size_t i = 0; i < d_out.numel(); ++i) d_out[i] = 0.3 + 0.1 * i;
            rnd.fusion_.backward(cache, d_out);
        }
        return loss;
    };
    CHECK(nn::grad_check(rnd.fusion_params, eval, 1e-6, 100) < 1e-4);
}

TEST_CASE("alternating training: both losses fall, embeddings separate") {
    const auto data = synthetic_corpus(48, 21);
    FeatureNetConfig cfg = desk_cfg();
    cfg.epochs = 40;
    FeatureNet net(cfg);
    const auto log = train_feature_net(net, data, cfg);

    double first_con = -1, last_con = -1, first_ae = -1, last_ae = -1;
    for (const auto& e : log) {
        if (e.branch == "contrastive") {
            if (first_con < 0) first_con = e.loss;
            last_con = e.loss;
        } else {
            if (first_ae < 0) first_ae = e.loss;
            last_ae = e.loss;
        }
    }
    CHECK(last_con < first_con);
    CHECK(last_ae < 0.5 * first_ae);

    // Mean cosine similarity: within-target vs target-to-clutter.
    std::vector<std::vector<double>> target_z, clutter_z;
    for (const auto& s : data) {
        auto z = net.contrastive_embedding(s.img128);
        (s.binary_label ? target_z : clutter_z).push_back(std::move(z));
    }
    double within = 0, cross = 0;
    long wn = 0, cn = 0;
    for (size_t i = 0; i < target_z.size(); ++i) {
        for (size_t j = i + 1; j < target_z.size(); ++j) {
            within += cosine(target_z[i], target_z[j]);
            ++wn;
        }
        for (const auto& c : clutter_z) {
            cross += cosine(target_z[i], c);
            ++cn;
        }
    }
    CHECK(within / wn > cross / cn);

    // Determinism: identical config replays the same loss curve.
    FeatureNet net2(cfg);
    const auto log2 = train_feature_net(net2, data, cfg);
    REQUIRE(log2.size() == log.size());
    for (size_t i = 0; i < log.size(); ++i) CHECK(log[i].loss == log2[i].loss);

    // Checkpoint roundtrip.
    net.save("/tmp/uavdet_featnet_test.ckpt");
    FeatureNet restored(cfg);
    restored.load("/tmp/uavdet_featnet_test.ckpt");
    const auto za = net.contrastive_embedding(data[0].img128);
    const auto zb = restored.contrastive_embedding(data[0].img128);
    CHECK(za == zb);
}

TEST_CASE("training preconditions") {
    auto data = synthetic_corpus(6, 31);
    FeatureNetConfig cfg = desk_cfg();
    cfg.batch_pairs = 1;
    FeatureNet net(cfg);
    CHECK_THROWS_AS(train_feature_net(net, data, cfg), ParamError);

    cfg.batch_pairs = 4;
    std::vector<FeatureSample> one_class(data.begin(), data.end());
    for (auto& s : one_class) s.binary_label = 1;
    CHECK_THROWS_AS(train_feature_net(net, one_class, cfg), ParamError);
}
