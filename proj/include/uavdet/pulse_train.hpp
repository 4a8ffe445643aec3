#pragma once

#include <string>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::sim {

/// Complex baseband receive matrix, fast time x slow time.
///
/// Logical shape is [fast_time_bins x num_pulses]; memory is pulse-major
/// (all fast-time samples of pulse 0 first) so per-pulse processing is
/// contiguous. The file format below is fast-time-major as documented.
struct PulseTrain {
    int fast_time_bins = 0;
    int num_pulses = 0;
    double fast_time_step = 0.0;  // s, 1/sample_rate
    double pri = 0.0;             // s
    double origin_time = 0.0;     // absolute time of pulse 0 (s)
    std::vector<cd> samples;      // size fast_time_bins * num_pulses, pulse-major

    PulseTrain() = default;
    PulseTrain(int fast_bins, int pulses, double dt, double pri_s, double origin = 0.0)
        : fast_time_bins(fast_bins), num_pulses(pulses), fast_time_step(dt), pri(pri_s),
          origin_time(origin),
          samples(static_cast<size_t>(fast_bins) * static_cast<size_t>(pulses)) {}

    cd& at(int fast_bin, int pulse) {
        return samples[static_cast<size_t>(pulse) * fast_time_bins + fast_bin];
    }
    cd at(int fast_bin, int pulse) const {
        return samples[static_cast<size_t>(pulse) * fast_time_bins + fast_bin];
    }
};

// On-disk layout (little endian):
//   bytes  0..7   magic "UAVPT001"
//   bytes  8..15  fast_time_bins (u64)
//   bytes 16..23  num_pulses (u64)
//   bytes 24..31  fast_time_step (f64)
//   bytes 32..39  pri (f64)
//   bytes 40..47  origin_time (f64)
//   bytes 48..63  zero padding
// then row-major [fast_time x pulse] interleaved (re, im) f32 pairs.
void save_pulse_train(const PulseTrain& train, const std::string& path);
PulseTrain load_pulse_train(const std::string& path);

} // namespace uavdet::sim
