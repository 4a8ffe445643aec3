#pragma once

#include <vector>

#include "uavdet/tf_image.hpp"

namespace uavdet::tf {

/// Per-pixel k x k median with edge-replicated borders; k odd.
TFImage median_filter(const TFImage& img, int k);

enum class ThresholdMethod {
    kOtsu, // named strategy seam; only Otsu is implemented
};

struct BinarizeResult {
    BinaryImage image;
    bool degenerate = false;   // constant input: threshold above max, all zeros
    double threshold = 0.0;    // value-domain threshold actually applied
};

/// Global threshold by Otsu's between-class-variance maximization on a
/// 256-bin histogram; pixels strictly above the threshold become 1.
BinarizeResult binarize(const TFImage& img, ThresholdMethod method = ThresholdMethod::kOtsu);

struct StructuringElement {
    int rows = 0, cols = 0;
    int anchor_r = 0, anchor_c = 0;
    std::vector<uint8_t> bits;

    uint8_t at(int r, int c) const { return bits[static_cast<size_t>(r) * cols + c]; }

    /// Solid square with centered anchor (the default A1/A2).
    static StructuringElement solid(int rows, int cols);
};

/// Window-min over the element: 1 iff every set offset lands on a 1 inside the
/// image (outside counts as 0).
BinaryImage erode(const BinaryImage& bin, const StructuringElement& se);

/// Window-max over the element: 1 iff any set offset hits a 1.
BinaryImage dilate(const BinaryImage& bin, const StructuringElement& se);

/// Open = erode by a1 then dilate by a2.
BinaryImage morph_open(const BinaryImage& bin, const StructuringElement& a1,
                       const StructuringElement& a2);

} // namespace uavdet::tf
