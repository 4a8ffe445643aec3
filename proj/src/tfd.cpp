#include "uavdet/tfd.hpp"

#include <algorithm>
#include <cmath>

#include "uavdet/fft.hpp"

namespace uavdet::tf {

TFImage zam_transform(const std::vector<cd>& signal, const ZamParams& params,
                      double time_step) {
    if (params.window_len < 8 || params.window_len % 2 != 0) {
        throw ParamError("zam_transform: window_len must be even and >= 8");
    }
    if (params.cone_slope <= 0.0) throw ParamError("zam_transform: cone_slope must be > 0");
    if (params.num_freq_bins < params.window_len) {
        throw ParamError("zam_transform: num_freq_bins must be >= window_len");
    }
    const int n_samples = static_cast<int>(signal.size());
    if (n_samples < params.window_len) throw ParamError("zam_transform: signal too short");

    const int half = params.window_len / 2; // lags l in (-half, half)
    const int nf = params.num_freq_bins;
    const double fs = 1.0 / time_step;

    // Hann lag taper, 1 at l = 0, 0 at |l| = half.
    std::vector<double> taper(half);
    for (int l = 0; l < half; ++l) taper[l] = 0.5 * (1.0 + std::cos(kPi * l / half));

    auto sample = [&](int i) -> cd {
        return (i >= 0 && i < n_samples) ? signal[i] : cd(0.0, 0.0);
    };

    TFImage img(n_samples, nf, time_step, fs / (2.0 * nf));
    std::vector<cd> lag_row(nf);
    for (int n = 0; n < n_samples; ++n) {
        std::fill(lag_row.begin(), lag_row.end(), cd(0.0, 0.0));
        for (int l = 0; l < half; ++l) {
            const int u_max = static_cast<int>(std::lround(2.0 * params.cone_slope * l));
            cd acc(0.0, 0.0);
            for (int u = -u_max; u <= u_max; ++u) {
                acc += sample(n + u + l) * std::conj(sample(n + u - l));
            }
            acc *= taper[l];
            lag_row[l] += acc;
            if (l > 0) lag_row[nf - l] += std::conj(acc); // Hermitian in lag
        }
        fft_inplace(lag_row, false);
        for (int k = 0; k < nf; ++k) img.at(n, k) = std::abs(lag_row[k]);
    }
    return img;
}

TFImage stft(const std::vector<cd>& signal, int window_len, int hop, double time_step) {
    const int n_samples = static_cast<int>(signal.size());
    if (window_len < 2 || window_len > n_samples) {
        throw ParamError("stft: window_len must be in [2, signal length]");
    }
    if (hop < 1) throw ParamError("stft: hop must be >= 1");

    const double fs = 1.0 / time_step;
    std::vector<double> window(window_len);
    for (int i = 0; i < window_len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / window_len));
    }

    const int frames = (n_samples - window_len) / hop + 1;
    TFImage img(frames, window_len, hop * time_step, fs / window_len);
    std::vector<cd> buf(window_len);
    for (int f = 0; f < frames; ++f) {
        const int start = f * hop;
        for (int i = 0; i < window_len; ++i) buf[i] = signal[start + i] * window[i];
        const auto spec = dft(buf, false);
        for (int k = 0; k < window_len; ++k) img.at(f, k) = std::abs(spec[k]);
    }
    return img;
}

TFImage rd_map(const sim::PulseTrain& train, int window) {
    if (window < 1 || window > train.num_pulses) {
        throw ParamError("rd_map: window must be in [1, num_pulses]");
    }
    const double prf = 1.0 / train.pri;
    TFImage img(train.fast_time_bins, window, train.fast_time_step, prf / window);
    std::vector<cd> slow(window);
    for (int gate = 0; gate < train.fast_time_bins; ++gate) {
        for (int p = 0; p < window; ++p) slow[p] = train.at(gate, p);
        const auto spec = dft(slow, false);
        for (int k = 0; k < window; ++k) img.at(gate, k) = std::abs(spec[k]);
    }
    return img;
}

} // namespace uavdet::tf
