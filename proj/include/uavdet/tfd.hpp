#pragma once

#include <vector>

#include "uavdet/pulse_train.hpp"
#include "uavdet/tf_image.hpp"

namespace uavdet::tf {

/// Cone-kernel discretization. Lags run over tau = 2l, l in (-window_len/2,
/// window_len/2); g is a Hann taper over the lag support; the local
/// autocorrelation at lag l is summed over u in [-U, U] with U = round(2 *
/// cone_slope * |l|), so cone_slope = 0.5 integrates over [t - |tau|/2,
/// t + |tau|/2].
struct ZamParams {
    int window_len = 128;   // even, >= 8
    double cone_slope = 0.5;
    int num_freq_bins = 128; // >= window_len
};

/// Zhao-Atlas-Marks cone-kernel distribution of a complex series sampled at
/// 1/time_step. Output: rows = input samples, cols = num_freq_bins covering
/// [0, fs/2) (bilinear lag-2 discretization halves the band), magnitude values.
TFImage zam_transform(const std::vector<cd>& signal, const ZamParams& params,
                      double time_step = 1.0);

/// Hann-window STFT magnitude; cols = window_len bins covering [0, fs).
TFImage stft(const std::vector<cd>& signal, int window_len, int hop,
             double time_step = 1.0);

/// Range-Doppler magnitude map by per-gate coherent integration over the first
/// `window` pulses. Rows = range gates (row step = fast_time_step seconds),
/// cols = window Doppler bins covering [0, PRF).
TFImage rd_map(const sim::PulseTrain& train, int window);

} // namespace uavdet::tf
