#include "uavdet/morphology.hpp"

#include <algorithm>
#include <cmath>

namespace uavdet::tf {

TFImage median_filter(const TFImage& img, int k) {
    if (k < 1 || k % 2 == 0) throw ParamError("median_filter: k must be odd and >= 1");
    if (img.values.empty()) throw ParamError("median_filter: empty image");
    if (k == 1) return img;

    TFImage out = img;
    const int r_half = k / 2;
    std::vector<double> window(static_cast<size_t>(k) * k);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            size_t n = 0;
            for (int dr = -r_half; dr <= r_half; ++dr) {
                const int rr = std::clamp(r + dr, 0, img.rows - 1);
                for (int dc = -r_half; dc <= r_half; ++dc) {
                    const int cc = std::clamp(c + dc, 0, img.cols - 1);
                    window[n++] = img.at(rr, cc);
                }
            }
            auto mid = window.begin() + static_cast<long>(n / 2);
            std::nth_element(window.begin(), mid, window.begin() + static_cast<long>(n));
            out.at(r, c) = *mid;
        }
    }
    return out;
}

BinarizeResult binarize(const TFImage& img, ThresholdMethod method) {
    if (img.values.empty()) throw ParamError("binarize: empty image");
    if (method != ThresholdMethod::kOtsu) throw ParamError("binarize: unknown method");

    BinarizeResult res;
    res.image = BinaryImage(img.rows, img.cols, img.time_step, img.freq_step);

    double lo = img.values[0], hi = img.values[0];
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        res.degenerate = true;
        res.threshold = hi; // nothing is strictly above it
        return res;
    }

    constexpr int kBins = 256;
    const double scale = kBins / (hi - lo);
    auto bin_of = [&](double v) {
        return std::min(kBins - 1, static_cast<int>((v - lo) * scale));
    };

    std::vector<long> hist(kBins, 0);
    for (double v : img.values) ++hist[bin_of(v)];

    const auto total = static_cast<double>(img.values.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += static_cast<double>(b) * hist[b];

    // Maximize between-class variance w0*w1*(mu0-mu1)^2; class 0 = bins <= t.
    int best_t = 0;
    double best_var = -1.0, w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < kBins - 1; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }

    res.threshold = lo + (best_t + 1) / scale; // lower edge of bin best_t + 1
    for (size_t i = 0; i < img.values.size(); ++i) {
        res.image.bits[i] = bin_of(img.values[i]) > best_t ? 1 : 0;
    }
    return res;
}

StructuringElement StructuringElement::solid(int rows, int cols) {
    StructuringElement se;
    se.rows = rows;
    se.cols = cols;
    se.anchor_r = rows / 2;
    se.anchor_c = cols / 2;
    se.bits.assign(static_cast<size_t>(rows) * cols, 1);
    return se;
}

namespace {

void check_se(const StructuringElement& se) {
    if (se.rows < 1 || se.cols < 1 || se.bits.size() != static_cast<size_t>(se.rows) * se.cols) {
        throw ParamError("StructuringElement: empty or inconsistent");
    }
    if (se.anchor_r < 0 || se.anchor_r >= se.rows || se.anchor_c < 0 || se.anchor_c >= se.cols) {
        throw ParamError("StructuringElement: anchor out of bounds");
    }
}

} // namespace

BinaryImage erode(const BinaryImage& bin, const StructuringElement& se) {
    check_se(se);
    BinaryImage out(bin.rows, bin.cols, bin.time_step, bin.freq_step);
    for (int r = 0; r < bin.rows; ++r) {
        for (int c = 0; c < bin.cols; ++c) {
            uint8_t all = 1;
            for (int i = 0; all && i < se.rows; ++i) {
                for (int j = 0; all && j < se.cols; ++j) {
                    if (!se.at(i, j)) continue;
                    const int rr = r + i - se.anchor_r;
                    const int cc = c + j - se.anchor_c;
                    if (rr < 0 || rr >= bin.rows || cc < 0 || cc >= bin.cols || !bin.at(rr, cc)) {
                        all = 0;
                    }
                }
            }
            out.at(r, c) = all;
        }
    }
    return out;
}

BinaryImage dilate(const BinaryImage& bin, const StructuringElement& se) {
    check_se(se);
    BinaryImage out(bin.rows, bin.cols, bin.time_step, bin.freq_step);
    for (int r = 0; r < bin.rows; ++r) {
        for (int c = 0; c < bin.cols; ++c) {
            uint8_t any = 0;
            for (int i = 0; !any && i < se.rows; ++i) {
                for (int j = 0; !any && j < se.cols; ++j) {
                    if (!se.at(i, j)) continue;
                    const int rr = r + i - se.anchor_r;
                    const int cc = c + j - se.anchor_c;
                    if (rr >= 0 && rr < bin.rows && cc >= 0 && cc < bin.cols && bin.at(rr, cc)) {
                        any = 1;
                    }
                }
            }
            out.at(r, c) = any;
        }
    }
    return out;
}

BinaryImage morph_open(const BinaryImage& bin, const StructuringElement& a1,
                       const StructuringElement& a2) {
    return dilate(erode(bin, a1), a2);
}

} // namespace uavdet::tf
