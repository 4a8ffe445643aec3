#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::tf {

/// Real non-negative time-frequency magnitude image, [time_bins x freq_bins].
struct TFImage {
    int rows = 0;               // time bins
    int cols = 0;               // frequency bins
    double time_step = 0.0;     // s per row
    double freq_step = 0.0;     // Hz per column
    double freq_origin = 0.0;   // Hz of column 0 (not persisted)
    std::vector<double> values; // row-major, size rows*cols

    TFImage() = default;
    TFImage(int r, int c, double dt = 0.0, double df = 0.0)
        : rows(r), cols(c), time_step(dt), freq_step(df),
          values(static_cast<size_t>(r) * static_cast<size_t>(c)) {}

    double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

/// 0/1 image on the same axes as its source TFImage.
struct BinaryImage {
    int rows = 0;
    int cols = 0;
    double time_step = 0.0;
    double freq_step = 0.0;
    std::vector<uint8_t> bits; // row-major

    BinaryImage() = default;
    BinaryImage(int r, int c, double dt = 0.0, double df = 0.0)
        : rows(r), cols(c), time_step(dt), freq_step(df),
          bits(static_cast<size_t>(r) * static_cast<size_t>(c)) {}

    uint8_t& at(int r, int c) { return bits[static_cast<size_t>(r) * cols + c]; }
    uint8_t at(int r, int c) const { return bits[static_cast<size_t>(r) * cols + c]; }
};

// On-disk layout (little endian):
//   bytes  0..7   magic "UAVTF001"
//   bytes  8..11  rows (u32)
//   bytes 12..15  cols (u32)
//   bytes 16..23  time_step (f64)
//   bytes 24..31  freq_step (f64)
// then row-major f32 values. Binary images store 0.0/1.0.
void save_tf_image(const TFImage& img, const std::string& path);
TFImage load_tf_image(const std::string& path);
void save_binary_image(const BinaryImage& img, const std::string& path);
BinaryImage load_binary_image(const std::string& path);

/// 8-bit PGM (P5) export with min-max normalization, for eyeballing.
void save_pgm(const TFImage& img, const std::string& path);

/// Area-averaging resample to (out_rows, out_cols). Handles up and down
/// sampling by box overlap; identity dimensions copy exactly.
TFImage resize(const TFImage& img, int out_rows, int out_cols);

/// Binary resample: area average then re-threshold at 0.5 (>= 0.5 -> 1).
BinaryImage resize(const BinaryImage& img, int out_rows, int out_cols);

} // namespace uavdet::tf
