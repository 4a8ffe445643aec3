#include "uavdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace uavdet::eval {

namespace {

std::string fmt(std::optional<double> v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

} // namespace

MetricReport compute_metrics(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw ParamError("compute_metrics: no records");
    MetricReport r;
    long correct = 0, false_alarm = 0, miss = 0, alt_fa = 0, confuse = 0;
    for (const auto& rec : records) {
        if (rec.true_label < 0 || rec.true_label > 2 || rec.predicted < 0 || rec.predicted > 2) {
            throw ParamError("compute_metrics: labels must be in {0,1,2}");
        }
        ++r.confusion[rec.true_label][rec.predicted];
        (rec.true_label == 0 ? r.n1 : r.n2)++;
        correct += rec.true_label == rec.predicted;
        // Verbatim false-alarm set: {0->1, 0->2, 1->2}.
        false_alarm += (rec.true_label == 0 && rec.predicted >= 1) ||
                       (rec.true_label == 1 && rec.predicted == 2);
        miss += rec.true_label >= 1 && rec.predicted == 0;
        alt_fa += rec.true_label == 0 && rec.predicted >= 1;
        confuse += (rec.true_label == 1 && rec.predicted == 2) ||
                   (rec.true_label == 2 && rec.predicted == 1);
    }
    r.p_d = static_cast<double>(correct) / static_cast<double>(r.n1 + r.n2);
    if (r.n2 > 0) {
        r.p_f = static_cast<double>(false_alarm) / static_cast<double>(r.n2);
        r.p_m = static_cast<double>(miss) / static_cast<double>(r.n2);
        r.p_m_alt = r.p_m;
        r.p_confuse = static_cast<double>(confuse) / static_cast<double>(r.n2);
    }
    if (r.n1 > 0) {
        r.p_f_alt = static_cast<double>(alt_fa) / static_cast<double>(r.n1);
    }
    return r;
}

std::vector<SweepRow> threshold_sweep(const std::vector<ScoredRecord>& records,
                                      const std::vector<double>& thresholds) {
    if (records.empty()) throw ParamError("threshold_sweep: no records");
    std::vector<SweepRow> rows;
    for (double theta : thresholds) {
        if (!(theta > 0.0 && theta < 1.0)) throw ParamError("threshold_sweep: theta in (0,1)");
        std::vector<EvalRecord> evals;
        evals.reserve(records.size());
        for (const auto& rec : records) {
            EvalRecord e;
            e.sample_id = rec.sample_id;
            e.true_label = rec.true_label;
            e.presence = rec.probs[1] + rec.probs[2];
            if (e.presence < theta) {
                e.predicted = 0;
            } else {
                e.predicted = rec.probs[1] >= rec.probs[2] ? 1 : 2;
            }
            evals.push_back(std::move(e));
        }
        rows.push_back({theta, compute_metrics(evals)});
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "threshold,p_d,p_f,p_m,p_f_alt,p_confuse\n";
    for (const auto& row : rows) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", row.threshold);
        out << buf << "," << fmt(row.report.p_d) << "," << fmt(row.report.p_f) << ","
            << fmt(row.report.p_m) << "," << fmt(row.report.p_f_alt) << ","
            << fmt(row.report.p_confuse) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_operating_points_csv(const std::vector<SweepRow>& rows,
                                const std::vector<double>& pf_targets,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "pf_target,threshold,p_d,p_f,p_m\n";
    for (double target : pf_targets) {
        const SweepRow* best = nullptr;
        for (const auto& row : rows) {
            if (!row.report.p_f || *row.report.p_f > target) continue;
            if (!best || *row.report.p_d > *best->report.p_d) best = &row;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", target);
        out << buf;
        if (best) {
            std::snprintf(buf, sizeof(buf), "%.17g", best->threshold);
            out << "," << buf << "," << fmt(best->report.p_d) << "," << fmt(best->report.p_f)
                << "," << fmt(best->report.p_m) << "\n";
        } else {
            out << ",unattained,,,\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_metrics_csv(const MetricReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "metric,value\n";
    out << "p_d," << fmt(report.p_d) << "\n";
    out << "p_f," << fmt(report.p_f) << "\n";
    out << "p_m," << fmt(report.p_m) << "\n";
    out << "p_f_alt," << fmt(report.p_f_alt) << "\n";
    out << "p_m_alt," << fmt(report.p_m_alt) << "\n";
    out << "p_confuse," << fmt(report.p_confuse) << "\n";
    out << "n1," << report.n1 << "\n";
    out << "n2," << report.n2 << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_confusion_csv(const MetricReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "true\\pred,0,1,2\n";
    for (int t = 0; t < 3; ++t) {
        out << t;
        for (int p = 0; p < 3; ++p) out << "," << report.confusion[t][p];
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void export_heatmap(const std::vector<std::vector<double>>& features,
                    const std::vector<int>& row_labels, const std::string& csv_path,
                    const std::string& pgm_path) {
    if (features.empty() || features.size() != row_labels.size()) {
        throw ParamError("export_heatmap: empty or mismatched features");
    }
    const size_t dims = features[0].size();
    for (const auto& row : features) {
        if (row.size() != dims) throw ParamError("export_heatmap: ragged feature rows");
    }

    // Rows grouped by label, stable within each group.
    std::vector<size_t> order(features.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return row_labels[a] < row_labels[b]; });

    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open for write: " + csv_path);
    csv << "label";
    for (size_t d = 0; d < dims; ++d) csv << ",f" << d;
    csv << "\n";
    double lo = features[order[0]][0], hi = lo;
    for (size_t i : order) {
        csv << row_labels[i];
        for (size_t d = 0; d < dims; ++d) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", features[i][d]);
            csv << "," << buf;
            lo = std::min(lo, features[i][d]);
            hi = std::max(hi, features[i][d]);
        }
        csv << "\n";
    }
    if (!csv) throw IoError("write failed: " + csv_path);

    std::ofstream pgm(pgm_path, std::ios::binary);
    if (!pgm) throw IoError("cannot open for write: " + pgm_path);
    const double span = hi > lo ? hi - lo : 1.0;
    pgm << "P5\n" << dims << " " << features.size() << "\n255\n";
    for (size_t i : order) {
        for (size_t d = 0; d < dims; ++d) {
            const auto px = static_cast<unsigned char>(
                std::lround(255.0 * (features[i][d] - lo) / span));
            pgm.put(static_cast<char>(px));
        }
    }
    if (!pgm) throw IoError("write failed: " + pgm_path);
}

} // namespace uavdet::eval
