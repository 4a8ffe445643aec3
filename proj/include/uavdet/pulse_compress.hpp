#pragma once

#include <vector>

#include "uavdet/pulse_train.hpp"
#include "uavdet/scenario.hpp"

namespace uavdet::tf {

/// Matched-filter taps h(t) = M * conj(S(t0 - t)) with t0 = pulse_width: the
/// conjugated, time-reversed transmit pulse. With the alignment applied in
/// pulse_compress, a point echo at delay tau peaks at bin round(tau * fs).
std::vector<cd> matched_filter(const sim::RadarParams& radar);

/// Per-pulse fast-time convolution with `taps`, peak-aligned so bin n holds the
/// correlation at delay n/fs. FFT implementation; matches direct convolution
/// within 1e-6 relative.
sim::PulseTrain pulse_compress(const sim::PulseTrain& train, const std::vector<cd>& taps);

/// The per-pulse sequence at one fast-time gate, sampled at the PRF.
std::vector<cd> slow_time_series(const sim::PulseTrain& train, int range_gate);

} // namespace uavdet::tf
