#include <cmath>
#include <vector>

#include "doctest.h"
#include "uavdet/detector.hpp"
#include "uavdet/rng.hpp"

using namespace uavdet;
using namespace uavdet::det;

namespace {

// Three well-separated class prototypes plus noise.
std::vector<FeatureSequence> synthetic_sequences(size_t n, size_t dim, size_t steps,
                                                 uint64_t seed) {
    CounterRng rng(seed, 0);
    std::vector<FeatureSequence> data;
    for (size_t i = 0; i < n; ++i) {
        FeatureSequence s;
        s.true_label = static_cast<int>(i % 3);
        s.sample_id = "syn" + std::to_string(i);
        for (size_t t = 0; t < steps; ++t) {
            std::vector<double> v(dim, 0.0);
            for (size_t d = 0; d < dim; ++d) {
                v[d] = (d % 3 == static_cast<size_t>(s.true_label) ? 1.0 : 0.0) +
                       0.15 * rng.uniform(-1, 1);
            }
            s.steps.push_back(std::move(v));
        }
        data.push_back(std::move(s));
    }
    return data;
}

} // namespace

TEST_CASE("decide rule and threshold monotonicity") {
    CHECK(decide({1.0, 0.0, 0.0}, 0.2) == 0);
    CHECK(decide({1.0, 0.0, 0.0}, 0.9) == 0);
    CHECK(decide({0.2, 0.5, 0.3}, 0.6) == 1);
    CHECK(decide({0.2, 0.5, 0.3}, 0.9) == 0);
    CHECK(decide({0.1, 0.2, 0.7}, 0.5) == 2);
    CHECK_THROWS_AS(decide({0.2, 0.5, 0.3}, 0.0), ParamError);

    // Raising theta never converts a 0-decision into a detection.
    CounterRng rng(41, 0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        const double sum = a + b + c;
        std::array<double, 3> probs = {a / sum, b / sum, c / sum};
        int prev = decide(probs, 0.01);
        for (double theta = 0.05; theta < 1.0; theta += 0.05) {
            const int cur = decide(probs, theta);
            if (prev == 0) CHECK(cur == 0);
            prev = cur;
        }
    }
}

TEST_CASE("uniform output from zero weights; length-agnostic weights") {
    GruClassifier gru(6, 10, 0);
    for (auto& [name, p] : gru.params.params()) p.value.fill(0.0);
    const auto probs = gru.classify({{0.3, 0.1, -0.2, 0.5, 0.0, 1.0}});
    CHECK(probs[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(probs[2] == doctest::Approx(1.0 / 3).epsilon(1e-12));

    GruClassifier wide(4, 8, 5);
    const auto s8 = synthetic_sequences(1, 4, 8, 1);
    const auto s16 = synthetic_sequences(1, 4, 16, 2);
    const auto p8 = wide.classify(s8[0].steps);
    const auto p16 = wide.classify(s16[0].steps);
    CHECK(p8[0] + p8[1] + p8[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p16[0] + p16[1] + p16[2] == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(wide.classify({}), ParamError);
}

TEST_CASE("training: loss falls, overfits small data, deterministic") {
    const auto data = synthetic_sequences(10, 6, 4, 7);
    GruClassifier gru(6, 12, 7);
    DetectorConfig cfg;
    cfg.epochs = 150;
    cfg.batch = 5;
    cfg.seed = 7;
    const auto log = train_detector(gru, data, cfg);
    CHECK(log.back().loss < 0.5 * log.front().loss);

    // Capacity: training accuracy 1.0 on the 10-sample set.
    int correct = 0;
    for (const auto& s : data) {
        const auto probs = gru.classify(s.steps);
        int argmax = 0;
        for (int k = 1; k < 3; ++k)
            if (probs[k] > probs[argmax]) argmax = k;
        correct += argmax == s.true_label;
    }
    CHECK(correct == 10);

    // Same seed, same final weights.
    GruClassifier gru2(6, 12, 7);
    train_detector(gru2, data, cfg);
    for (const auto& [name, p] : gru.params.params()) {
        CHECK(p.value.data == gru2.params.get(name).value.data);
    }

    CHECK_THROWS_AS(train_detector(gru, {}, cfg), ParamError);
}

TEST_CASE("holdout accuracy beats chance by 2x on separable data") {
    const auto train = synthetic_sequences(45, 6, 5, 11);
    const auto hold = synthetic_sequences(15, 6, 5, 1234);
    GruClassifier gru(6, 16, 3);
    DetectorConfig cfg;
    cfg.epochs = 120;
    cfg.batch = 9;
    cfg.seed = 3;
    train_detector(gru, train, cfg);

    int correct = 0;
    for (const auto& s : hold) {
        const auto r = gru.detect(s, 0.5);
        correct += r.label == s.true_label;
    }
    CHECK(static_cast<double>(correct) / 15.0 >= 0.67);
}

TEST_CASE("checkpoint roundtrip") {
    GruClassifier gru(5, 9, 2);
    gru.save("/tmp/uavdet_detector_test.ckpt");
    GruClassifier other(5, 9, 77);
    other.load("/tmp/uavdet_detector_test.ckpt");
    const auto seq = synthetic_sequences(1, 5, 6, 5);
    CHECK(gru.classify(seq[0].steps) == other.classify(seq[0].steps));
}

TEST_CASE("joint stage trains the fusion layer too") {
    featnet::FeatureNetConfig fcfg;
    fcfg.epochs = 2;
    fcfg.fusion_dim = 8;
    fcfg.seed = 9;
    featnet::FeatureNet net(fcfg);

    CounterRng rng(17, 0);
    std::vector<EncodedSequence> data;
    for (int i = 0; i < 12; ++i) {
        EncodedSequence s;
        s.true_label = i % 3;
        s.sample_id = "j" + std::to_string(i);
        for (int t = 0; t < 3; ++t) {
            featnet::Tensor r20({20}), r30({30});
            for (auto& v : r20.data) v = (i % 3) * 0.5 + 0.1 * rng.uniform(-1, 1);
            for (auto& v : r30.data) v = (i % 3 == 2 ? 1.0 : 0.0) + 0.1 * rng.uniform(-1, 1);
            s.steps.emplace_back(std::move(r20), std::move(r30));
        }
        data.push_back(std::move(s));
    }

    GruClassifier gru(8, 12, 5);
    const auto before = net.fusion_params.get("fuse/w").value.data;
    DetectorConfig cfg;
    cfg.epochs = 60;
    cfg.batch = 6;
    cfg.seed = 5;
    const auto log = train_detector_joint(gru, net, data, cfg);
    CHECK(log.back().loss < log.front().loss);
    CHECK(net.fusion_params.get("fuse/w").value.data != before);
}
