#include "uavdet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "json.hpp"
#include "uavdet/morphology.hpp"
#include "uavdet/pulse_compress.hpp"
#include "uavdet/rng.hpp"

namespace uavdet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

featnet::Tensor to_encoder_input(const tf::TFImage& img) {
    if (img.rows != 128 || img.cols != 128) throw ParamError("to_encoder_input: need 128x128");
    featnet::Tensor t({1, 128, 128});
    double lo = img.values[0], hi = img.values[0];
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (size_t i = 0; i < img.values.size(); ++i) t.data[i] = (img.values[i] - lo) / span;
    return t;
}

SampleImages transform_pulse_train(const sim::PulseTrain& train,
                                   const sim::RadarParams& radar,
                                   const TransformConfig& cfg) {
    if (cfg.segments < 1) throw ParamError("transform: segments must be >= 1");
    const auto taps = tf::matched_filter(radar);
    const auto compressed = tf::pulse_compress(train, taps);

    SampleImages out;
    double best = -1.0;
    for (int g = 0; g < compressed.fast_time_bins; ++g) {
        double energy = 0.0;
        for (int p = 0; p < compressed.num_pulses; ++p) energy += std::norm(compressed.at(g, p));
        if (energy > best) {
            best = energy;
            out.gate = g;
        }
    }

    const auto series = tf::slow_time_series(compressed, out.gate);
    tf::TFImage image;
    if (cfg.use_stft) {
        image = tf::stft(series, cfg.stft_window, cfg.stft_hop, train.pri);
    } else {
        image = tf::zam_transform(series, cfg.zam, train.pri);
    }
    image = tf::median_filter(image, cfg.median_k);

    const auto se = tf::StructuringElement::solid(3, 3);
    const int rows_per_segment = image.rows / cfg.segments;
    if (rows_per_segment < 2) throw ParamError("transform: too many segments for image rows");

    for (int s = 0; s < cfg.segments; ++s) {
        tf::TFImage segment(rows_per_segment, image.cols, image.time_step, image.freq_step);
        for (int r = 0; r < rows_per_segment; ++r) {
            for (int c = 0; c < image.cols; ++c) {
                segment.at(r, c) = image.at(s * rows_per_segment + r, c);
            }
        }
        out.large.push_back(tf::resize(segment, 128, 128));
        const auto bin = tf::binarize(segment).image;
        out.small.push_back(tf::resize(tf::morph_open(bin, se, se), 28, 28));
    }
    return out;
}

TransformedSet transform_dataset(const std::string& dataset_dir, const TransformConfig& cfg) {
    if (cfg.out_dir.empty()) throw ParamError("transform_dataset: out_dir required");
    const DatasetManifest manifest = load_manifest(dataset_dir);
    if (manifest.entries.empty()) throw ParamError("transform_dataset: empty manifest");
    fs::create_directories(cfg.out_dir);

    TransformedSet set;
    set.entries.resize(manifest.entries.size());
    std::vector<std::string> failures(manifest.entries.size());

    parallel_for(manifest.entries.size(), cfg.threads, [&](size_t i) {
        const auto& entry = manifest.entries[i];
        try {
            const auto scenario = load_scenario(dataset_dir, entry);
            const auto train =
                sim::load_pulse_train((fs::path(dataset_dir) / entry.pulse_file).string());
            const auto images = transform_pulse_train(train, scenario.radar, cfg);

            TransformedEntry te;
            te.id = entry.id;
            te.label = entry.label;
            te.snr_db = entry.snr_db;
            te.gate = images.gate;
            for (size_t s = 0; s < images.large.size(); ++s) {
                TransformedSegment seg;
                seg.tf_file = entry.id + "_seg" + std::to_string(s) + "_tf.bin";
                seg.bin_file = entry.id + "_seg" + std::to_string(s) + "_bin.bin";
                tf::save_tf_image(images.large[s], (fs::path(cfg.out_dir) / seg.tf_file).string());
                tf::save_binary_image(images.small[s],
                                      (fs::path(cfg.out_dir) / seg.bin_file).string());
                te.segments.push_back(std::move(seg));
            }
            set.entries[i] = std::move(te);
        } catch (const std::exception& e) {
            failures[i] = entry.id + ": " + e.what();
        }
    });

    TransformedSet kept;
    kept.version = set.version;
    for (size_t i = 0; i < set.entries.size(); ++i) {
        if (failures[i].empty()) {
            kept.entries.push_back(std::move(set.entries[i]));
        } else {
            std::fprintf(stderr, "transform: skipped %s\n", failures[i].c_str());
        }
    }
    if (kept.entries.empty()) throw IoError("transform_dataset: every sample failed");
    save_transformed(kept, cfg.out_dir);
    return kept;
}

void save_transformed(const TransformedSet& set, const std::string& dir) {
    json entries = json::array();
    for (const auto& e : set.entries) {
        json segs = json::array();
        for (const auto& s : e.segments) {
            segs.push_back({{"tf_file", s.tf_file}, {"bin_file", s.bin_file}});
        }
        entries.push_back({{"id", e.id},
                           {"label", e.label},
                           {"snr_db", std::isinf(e.snr_db) ? json("inf") : json(e.snr_db)},
                           {"gate", e.gate},
                           {"segments", segs}});
    }
    std::ofstream out(fs::path(dir) / "transformed.json");
    if (!out) throw IoError("cannot write transformed.json in " + dir);
    out << json{{"version", set.version}, {"entries", entries}}.dump(2) << "\n";
}

TransformedSet load_transformed(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "transformed.json");
    if (!in) throw IoError("no transformed.json in " + dir);
    json root;
    in >> root;
    TransformedSet set;
    set.version = root.at("version");
    for (const auto& e : root.at("entries")) {
        TransformedEntry te;
        te.id = e.at("id");
        te.label = e.at("label");
        te.snr_db = e.at("snr_db").is_string() ? std::numeric_limits<double>::infinity()
                                               : e.at("snr_db").get<double>();
        te.gate = e.at("gate");
        for (const auto& s : e.at("segments")) {
            te.segments.push_back({s.at("tf_file"), s.at("bin_file")});
        }
        set.entries.push_back(std::move(te));
    }
    return set;
}

tf::TFImage sample_rd_map(const sim::PulseTrain& train, const sim::RadarParams& radar,
                          int window) {
    const auto compressed = tf::pulse_compress(train, tf::matched_filter(radar));
    return tf::rd_map(compressed, window);
}

SplitIndices stratified_split(const std::vector<int>& labels, double train_frac,
                              double val_frac, uint64_t seed) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0) {
        throw ParamError("stratified_split: bad fractions");
    }
    SplitIndices split;
    std::map<int, std::vector<size_t>> by_label;
    for (size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
    for (auto& [label, idx] : by_label) {
        CounterRng rng(seed, 0x5B17ULL + static_cast<uint64_t>(label));
        for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.next_below(i)]);
        const auto n = idx.size();
        const auto n_train = static_cast<size_t>(std::lround(train_frac * n));
        const auto n_val = static_cast<size_t>(std::lround(val_frac * n));
        for (size_t i = 0; i < n; ++i) {
            if (i < n_train) {
                split.train.push_back(idx[i]);
            } else if (i < n_train + n_val) {
                split.val.push_back(idx[i]);
            } else {
                split.holdout.push_back(idx[i]);
            }
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.holdout.begin(), split.holdout.end());
    return split;
}

namespace {

featnet::FeatureSample load_feature_sample(const std::string& dir, const TransformedEntry& e,
                                           const TransformedSegment& seg) {
    featnet::FeatureSample s;
    s.img128 = to_encoder_input(tf::load_tf_image((fs::path(dir) / seg.tf_file).string()));
    const auto bin = tf::load_binary_image((fs::path(dir) / seg.bin_file).string());
    if (bin.rows != 28 || bin.cols != 28) throw IoError("bad binary image dims: " + seg.bin_file);
    s.img28.resize(784);
    for (size_t i = 0; i < 784; ++i) s.img28[i] = bin.bits[i] ? 1.0 : 0.0;
    s.count_label = e.label;
    s.binary_label = e.label > 0 ? 1 : 0;
    return s;
}

det::EncodedSequence encode_sequence(const featnet::FeatureNet& net, const std::string& dir,
                                     const TransformedEntry& e) {
    det::EncodedSequence seq;
    seq.sample_id = e.id;
    seq.true_label = e.label;
    for (const auto& seg : e.segments) {
        const auto sample = load_feature_sample(dir, e, seg);
        seq.steps.emplace_back(net.encode1(sample.img128), net.encode2(sample.img28));
    }
    return seq;
}

void write_featnet_log(const std::vector<featnet::TrainLogEntry>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,branch,loss\n";
    for (const auto& e : log) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
        out << e.epoch << "," << e.branch << "," << buf << "\n";
    }
}

void write_detector_log(const std::vector<det::TrainLogEntry>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,loss\n";
    for (const auto& e : log) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
        out << e.epoch << "," << buf << "\n";
    }
}

} // namespace

TrainOutputs train_pipeline(const TransformedSet& set, const std::string& transformed_dir,
                            const TrainConfig& cfg) {
    if (cfg.out_dir.empty()) throw ParamError("train_pipeline: out_dir required");
    fs::create_directories(cfg.out_dir);

    std::vector<int> labels;
    for (const auto& e : set.entries) labels.push_back(e.label);
    const auto split = stratified_split(labels, cfg.train_frac, cfg.val_frac, cfg.seed);
    if (split.train.empty()) throw ParamError("train_pipeline: empty training split");

    std::vector<featnet::FeatureSample> feature_data;
    for (size_t i : split.train) {
        for (const auto& seg : set.entries[i].segments) {
            feature_data.push_back(load_feature_sample(transformed_dir, set.entries[i], seg));
        }
    }

    featnet::FeatureNetConfig fcfg = cfg.featnet;
    fcfg.seed = cfg.seed;
    featnet::FeatureNet net(fcfg);
    const auto flog = featnet::train_feature_net(net, feature_data, fcfg);

    std::vector<det::EncodedSequence> sequences;
    for (size_t i : split.train) {
        sequences.push_back(encode_sequence(net, transformed_dir, set.entries[i]));
    }
    det::DetectorConfig dcfg = cfg.detector;
    dcfg.seed = cfg.seed;
    det::GruClassifier gru(fcfg.fusion_dim, 100, cfg.seed);
    const auto dlog = det::train_detector_joint(gru, net, sequences, dcfg);

    TrainOutputs out;
    out.featnet_ckpt = (fs::path(cfg.out_dir) / "featnet.ckpt").string();
    out.detector_ckpt = (fs::path(cfg.out_dir) / "detector.ckpt").string();
    out.featnet_log_csv = (fs::path(cfg.out_dir) / "featnet_loss.csv").string();
    out.detector_log_csv = (fs::path(cfg.out_dir) / "detector_loss.csv").string();
    net.save(out.featnet_ckpt);
    gru.save(out.detector_ckpt);
    write_featnet_log(flog, out.featnet_log_csv);
    write_detector_log(dlog, out.detector_log_csv);
    return out;
}

EvalOutputs eval_pipeline(const TransformedSet& set, const std::string& transformed_dir,
                          const std::string& featnet_ckpt, const std::string& detector_ckpt,
                          const TrainConfig& train_cfg, const EvalConfig& cfg) {
    if (cfg.out_dir.empty()) throw ParamError("eval_pipeline: out_dir required");
    fs::create_directories(cfg.out_dir);

    featnet::FeatureNetConfig fcfg = train_cfg.featnet;
    fcfg.seed = train_cfg.seed;
    featnet::FeatureNet net(fcfg);
    net.load(featnet_ckpt);
    det::GruClassifier gru(fcfg.fusion_dim, 100, 0);
    gru.load(detector_ckpt);

    std::vector<int> labels;
    for (const auto& e : set.entries) labels.push_back(e.label);
    const auto split =
        stratified_split(labels, train_cfg.train_frac, train_cfg.val_frac, train_cfg.seed);
    if (split.holdout.empty()) throw ParamError("eval_pipeline: empty holdout split");

    std::vector<eval::ScoredRecord> scored;
    std::vector<eval::EvalRecord> records;
    std::vector<std::vector<double>> heat_features;
    std::vector<int> heat_labels;
    std::array<int, 3> heat_count{};

    EvalOutputs out;
    out.predictions_csv = (fs::path(cfg.out_dir) / "predictions.csv").string();
    std::ofstream pred(out.predictions_csv);
    if (!pred) throw IoError("cannot write " + out.predictions_csv);
    pred << "sample_id,p0,p1,p2,label,true_label\n";

    for (size_t i : split.holdout) {
        const auto& entry = set.entries[i];
        const auto enc = encode_sequence(net, transformed_dir, entry);
        std::vector<std::vector<double>> fused;
        for (const auto& [r20, r30] : enc.steps) fused.push_back(net.fuse(r20, r30).data);
        const auto probs = gru.classify(fused);
        const int label = det::decide(probs, cfg.threshold);

        eval::ScoredRecord sr;
        sr.sample_id = entry.id;
        sr.true_label = entry.label;
        sr.probs = probs;
        scored.push_back(sr);
        records.push_back({entry.id, entry.label, label, probs[1] + probs[2]});

        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%d,%d\n", entry.id.c_str(), probs[0],
                      probs[1], probs[2], label, entry.label);
        pred << buf;

        // Fig-10 style heat map rows: 20 contrastive + 30 autoencoder features.
        if (heat_count[entry.label] < cfg.heatmap_per_label) {
            ++heat_count[entry.label];
            const auto& [r20, r30] = enc.steps.front();
            std::vector<double> row;
            row.insert(row.end(), r20.data.begin(), r20.data.end());
            row.insert(row.end(), r30.data.begin(), r30.data.end());
            heat_features.push_back(std::move(row));
            heat_labels.push_back(entry.label);
        }
    }
    pred.close();

    out.report = eval::compute_metrics(records);
    out.metrics_csv = (fs::path(cfg.out_dir) / "metrics.csv").string();
    out.confusion_csv = (fs::path(cfg.out_dir) / "confusion_matrix.csv").string();
    out.sweep_csv = (fs::path(cfg.out_dir) / "threshold_sweep.csv").string();
    out.operating_csv = (fs::path(cfg.out_dir) / "operating_points.csv").string();
    out.heatmap_csv = (fs::path(cfg.out_dir) / "feature_heatmap.csv").string();
    out.heatmap_pgm = (fs::path(cfg.out_dir) / "feature_heatmap.pgm").string();

    eval::write_metrics_csv(out.report, out.metrics_csv);
    eval::write_confusion_csv(out.report, out.confusion_csv);

    std::vector<double> thetas = cfg.sweep_thresholds;
    if (thetas.empty()) {
        for (double t = 0.02; t < 0.99; t += 0.02) thetas.push_back(t);
    }
    const auto sweep = eval::threshold_sweep(scored, thetas);
    eval::write_sweep_csv(sweep, out.sweep_csv);
    eval::write_operating_points_csv(sweep, {1e-3, 1e-2, 1e-1, 0.4}, out.operating_csv);
    eval::export_heatmap(heat_features, heat_labels, out.heatmap_csv, out.heatmap_pgm);
    return out;
}

} // namespace uavdet::pipeline
