#include "uavdet/pulse_compress.hpp"

#include <algorithm>

#include "uavdet/echo_sim.hpp"
#include "uavdet/fft.hpp"

namespace uavdet::tf {

std::vector<cd> matched_filter(const sim::RadarParams& radar) {
    sim::validate(radar);
    sim::RadarParams one_pulse = radar;
    one_pulse.num_pulses = std::max(radar.num_pulses, 1);
    const std::vector<cd> pulse = sim::lfm_pulse(one_pulse, 0);
    const int support = radar.pulse_support_bins();
    std::vector<cd> taps(support);
    for (int n = 0; n < support; ++n) {
        taps[n] = radar.gain * std::conj(pulse[support - 1 - n]);
    }
    return taps;
}

sim::PulseTrain pulse_compress(const sim::PulseTrain& train, const std::vector<cd>& taps) {
    const int fast = train.fast_time_bins;
    const int ntaps = static_cast<int>(taps.size());
    if (ntaps == 0 || ntaps > fast) {
        throw ParamError("pulse_compress: taps length must be in [1, fast_time_bins]");
    }

    const size_t fft_len = next_pow2(static_cast<size_t>(fast + ntaps - 1));
    std::vector<cd> taps_fd(fft_len);
    std::copy(taps.begin(), taps.end(), taps_fd.begin());
    fft_inplace(taps_fd, false);

    sim::PulseTrain out(fast, train.num_pulses, train.fast_time_step, train.pri,
                        train.origin_time);
    std::vector<cd> work(fft_len);
    for (int p = 0; p < train.num_pulses; ++p) {
        std::fill(work.begin(), work.end(), cd(0.0, 0.0));
        for (int n = 0; n < fast; ++n) work[n] = train.at(n, p);
        fft_inplace(work, false);
        for (size_t i = 0; i < fft_len; ++i) work[i] *= taps_fd[i];
        fft_inplace(work, true);
        // Shift so the correlation peak of an echo at delay d lands at bin d.
        for (int n = 0; n < fast; ++n) out.at(n, p) = work[n + ntaps - 1];
    }
    return out;
}

std::vector<cd> slow_time_series(const sim::PulseTrain& train, int range_gate) {
    if (range_gate < 0 || range_gate >= train.fast_time_bins) {
        throw ParamError("slow_time_series: range gate out of bounds");
    }
    std::vector<cd> series(train.num_pulses);
    for (int p = 0; p < train.num_pulses; ++p) series[p] = train.at(range_gate, p);
    return series;
}

} // namespace uavdet::tf
