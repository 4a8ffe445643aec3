#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::eval {

struct EvalRecord {
    std::string sample_id;
    int true_label = 0;      // L(x) in {0,1,2}
    int predicted = 0;       // p(x) in {0,1,2}
    double presence = 0.0;   // p1 + p2 from the classifier
};

/// Detection metrics over labels {0,1,2} with N1 = no-target samples and
/// N2 = target samples:
///   p_d = |L == p| / (N1 + N2)
///   p_f = |{0->1, 0->2, 1->2}| / N2
///   p_m = |{1->0, 2->0}| / N2
/// These follow the published definitions verbatim, asymmetries included
/// (2->1 counts in neither rate; false alarms divide by N2). The *_alt
/// fields are a conventional variant: false alarms over N1, and count
/// confusions (1<->2 both ways) reported separately.
struct MetricReport {
    std::optional<double> p_d, p_f, p_m;
    std::optional<double> p_f_alt;     // |{L=0, p>0}| / N1
    std::optional<double> p_m_alt;     // |{L>0, p=0}| / N2  (== p_m here)
    std::optional<double> p_confuse;   // |{1->2} u {2->1}| / N2
    long n1 = 0, n2 = 0;
    std::array<std::array<long, 3>, 3> confusion{}; // [true][predicted]
};

MetricReport compute_metrics(const std::vector<EvalRecord>& records);

/// Scored prediction, enough to re-decide at any threshold.
struct ScoredRecord {
    std::string sample_id;
    int true_label = 0;
    std::array<double, 3> probs{};
};

struct SweepRow {
    double threshold;
    MetricReport report;
};

/// Applies the presence-threshold decision rule at each theta, then
/// compute_metrics.
std::vector<SweepRow> threshold_sweep(const std::vector<ScoredRecord>& records,
                                      const std::vector<double>& thresholds);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

/// For each target false-alarm rate, the row of the sweep with the highest
/// p_d among rows with p_f <= target (operating-point table layout).
void write_operating_points_csv(const std::vector<SweepRow>& rows,
                                const std::vector<double>& pf_targets,
                                const std::string& path);

void write_metrics_csv(const MetricReport& report, const std::string& path);
void write_confusion_csv(const MetricReport& report, const std::string& path);

/// Feature heat map: CSV of raw values plus a min-max normalized PGM, rows
/// grouped by label. `row_labels` gives the label of each feature row.
void export_heatmap(const std::vector<std::vector<double>>& features,
                    const std::vector<int>& row_labels, const std::string& csv_path,
                    const std::string& pgm_path);

} // namespace uavdet::eval
