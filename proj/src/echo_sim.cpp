#include "uavdet/echo_sim.hpp"

#include <algorithm>
#include <cmath>

#include "uavdet/rng.hpp"

namespace uavdet::sim {

namespace {

// Noise and Rayleigh-beta draws use disjoint stream ids so adding a target
// never shifts the noise realization.
constexpr uint64_t kNoiseStreamBase = 1ULL << 32;
constexpr uint64_t kBetaStreamBase = 1ULL << 33;

// Chirp phase argument reduced mod 1 cycle before the trig call; carrier
// delays reach 1e5 cycles and would otherwise eat the mantissa.
cd unit_phasor(double cycles) {
    const double frac = cycles - std::floor(cycles);
    const double ang = 2.0 * kPi * frac;
    return {std::cos(ang), std::sin(ang)};
}

struct PathReturn {
    double weight;
    double delay;        // s, from pulse emission
    double phase_cycles; // carrier + reflection phase, in cycles
};

// Accumulates one path of the baseband echo into dst (length fast_time_bins).
// Sample n holds w * exp(j 2 pi (phase + f_off s + K/2 s^2)) for s = n/fs - delay
// inside the pulse envelope. Returns true if the echo tail was truncated by the
// PRI boundary.
bool add_path(std::vector<cd>& dst, const RadarParams& radar, const PathReturn& path) {
    const double fs = radar.sample_rate;
    const double t_p = radar.pulse_width;
    const double k_rate = radar.chirp_rate();
    const double f_off = -0.5 * radar.bandwidth;
    const int fast_bins = static_cast<int>(dst.size());

    const int n_begin = std::max(0, static_cast<int>(std::ceil(path.delay * fs)));
    const int n_end_full = static_cast<int>(std::ceil((path.delay + t_p) * fs));
    const int n_end = std::min(fast_bins, n_end_full);
    const double amp = path.weight * radar.amplitude;

    for (int n = n_begin; n < n_end; ++n) {
        const double s = n / fs - path.delay;
        if (s < 0.0 || s >= t_p) continue;
        const double cycles = path.phase_cycles + f_off * s + 0.5 * k_rate * s * s;
        dst[n] += amp * unit_phasor(cycles);
    }
    return n_end_full > fast_bins;
}

// Returns true if any path was truncated by the PRI boundary.
bool add_multipath(std::vector<cd>& dst, const TargetState& target, const GroundSpec& ground,
                   const RadarParams& radar, int pulse_index, double pulse_start_time,
                   uint64_t scenario_seed, int target_index) {
    const double range = target_range(target, pulse_start_time);
    const double tau = 2.0 * range / kSpeedOfLight;
    const double carrier_cycles = -radar.carrier_freq * tau + target.initial_phase / (2.0 * kPi);
    const double k = target.reflectivity;
    const double rho = specular_coefficient(ground);

    if (rho == 0.0) {
        // Collapses to the bare direct return, bit-for-bit.
        return add_path(dst, radar, {k, tau, carrier_cycles});
    }

    const double dh = radar.radar_height - target.height;
    const double horizontal = std::sqrt(std::max(range * range - dh * dh, 0.0));
    const double t_delta =
        path_difference(horizontal, radar.radar_height, target.height) / kSpeedOfLight;

    double bounce_cycles, double_cycles;
    if (ground.rayleigh_beta) {
        const double u = uniform_at(scenario_seed,
                                    kBetaStreamBase + static_cast<uint64_t>(target_index),
                                    static_cast<uint64_t>(pulse_index));
        const double beta = std::fmod(
            ground.rayleigh_sigma * std::sqrt(-2.0 * std::log(u > 0.0 ? u : 0x1.0p-53)),
            2.0 * kPi);
        bounce_cycles = carrier_cycles + beta / (2.0 * kPi);
        double_cycles = carrier_cycles + 2.0 * beta / (2.0 * kPi);
    } else {
        const double refl = ground.reflection_phase / (2.0 * kPi);
        bounce_cycles = -radar.carrier_freq * (tau + t_delta) +
                        target.initial_phase / (2.0 * kPi) + refl;
        double_cycles = -radar.carrier_freq * (tau + 2.0 * t_delta) +
                        target.initial_phase / (2.0 * kPi) + 2.0 * refl;
    }

    bool truncated = add_path(dst, radar, {k, tau, carrier_cycles});
    truncated |= add_path(dst, radar, {2.0 * rho * k, tau + t_delta, bounce_cycles});
    truncated |= add_path(dst, radar, {rho * rho * k, tau + 2.0 * t_delta, double_cycles});
    return truncated;
}

} // namespace

std::vector<cd> lfm_pulse(const RadarParams& radar, int pulse_index) {
    validate(radar);
    if (pulse_index < 0 || pulse_index >= radar.num_pulses) {
        throw ParamError("lfm_pulse: pulse index out of range");
    }
    std::vector<cd> out(radar.fast_time_bins());
    // Zero delay, zero extra phase: the transmit pulse itself.
    add_path(out, radar, {1.0, 0.0, 0.0});
    return out;
}

double target_range(const TargetState& target, double t) {
    const double cross = target.speed * std::cos(target.aspect_angle) * t;
    return std::sqrt(target.initial_range * target.initial_range + cross * cross);
}

double path_difference(double horizontal_dist, double h1, double h2) {
    const double sum = h1 + h2;
    const double diff = h1 - h2;
    return std::sqrt(horizontal_dist * horizontal_dist + sum * sum) -
           std::sqrt(horizontal_dist * horizontal_dist + diff * diff);
}

double specular_coefficient(const GroundSpec& ground) {
    validate(ground);
    const double g = 2.0 * kPi * ground.roughness;
    const double rho_s = ground.roughness <= 0.1 ? std::exp(-2.0 * g * g)
                                                 : 0.812537 / (1.0 + 2.0 * g * g);
    return ground.fresnel_rho0 * rho_s;
}

AmplitudeFactor amplitude_factor(double rho, double beta) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ParamError("amplitude_factor: rho must be in [0,1]");
    const double c = 1.0 + rho * std::cos(beta);
    const double s = rho * std::sin(beta);
    return {c * c + s * s, 2.0 * std::atan2(s, c)};
}

std::vector<cd> multipath_echo(const TargetState& target, const GroundSpec& ground,
                               const RadarParams& radar, int pulse_index,
                               double pulse_start_time,
                               std::vector<std::string>* warnings) {
    validate(radar);
    validate(target);
    std::vector<cd> out(radar.fast_time_bins());
    if (add_multipath(out, target, ground, radar, pulse_index, pulse_start_time, 0, 0) &&
        warnings) {
        warnings->push_back("pulse " + std::to_string(pulse_index) +
                            ": echo truncated at PRI boundary");
    }
    return out;
}

std::vector<cd> clutter_echo(const std::vector<ClutterScatterer>& clutter,
                             const RadarParams& radar, int pulse_index,
                             std::vector<std::string>* warnings) {
    validate(radar);
    (void)pulse_index; // static scatterers: every pulse sees the same return
    std::vector<cd> out(radar.fast_time_bins());
    const double max_range = kSpeedOfLight * radar.pri / 2.0;
    for (size_t i = 0; i < clutter.size(); ++i) {
        const auto& sc = clutter[i];
        if (sc.range > max_range) {
            if (warnings) {
                warnings->push_back("clutter scatterer " + std::to_string(i) +
                                    " beyond unambiguous range, skipped");
            }
            continue;
        }
        add_path(out, radar, {sc.amplitude, 2.0 * sc.range / kSpeedOfLight,
                              sc.phase / (2.0 * kPi)});
    }
    return out;
}

void add_noise_with_sigma2(PulseTrain& signal, double sigma2, uint64_t seed) {
    if (sigma2 < 0.0 || !std::isfinite(sigma2)) {
        throw ParamError("add_noise_with_sigma2: bad variance");
    }
    for (int p = 0; p < signal.num_pulses; ++p) {
        const uint64_t stream = kNoiseStreamBase + static_cast<uint64_t>(p);
        for (int ft = 0; ft < signal.fast_time_bins; ++ft) {
            signal.at(ft, p) += complex_gaussian_at(seed, stream, static_cast<uint64_t>(ft), sigma2);
        }
    }
}

void add_awgn(PulseTrain& signal, double snr_db, uint64_t seed) {
    if (signal.samples.empty()) throw ParamError("add_awgn: empty signal");
    if (std::isinf(snr_db) && snr_db > 0.0) return;
    double power = 0.0;
    size_t support = 0;
    for (const cd& v : signal.samples) {
        const double m2 = std::norm(v);
        if (m2 > 0.0) {
            power += m2;
            ++support;
        }
    }
    if (support == 0) throw ParamError("add_awgn: all-zero signal, SNR undefined");
    power /= static_cast<double>(support);
    add_noise_with_sigma2(signal, power / std::pow(10.0, snr_db / 10.0), seed);
}

SimOutput simulate(const Scenario& scenario) {
    validate(scenario);
    const RadarParams& radar = scenario.radar;
    const int fast = radar.fast_time_bins();

    SimOutput out;
    out.train = PulseTrain(fast, radar.num_pulses, 1.0 / radar.sample_rate, radar.pri,
                           scenario.start_time);

    // Targets first, accumulated into a scratch span per pulse so the clean
    // echo power is available as the SNR reference.
    std::vector<bool> target_truncated(scenario.targets.size(), false);
    std::vector<cd> pulse_buf(fast);
    for (int m = 0; m < radar.num_pulses; ++m) {
        std::fill(pulse_buf.begin(), pulse_buf.end(), cd(0.0, 0.0));
        const double t_m = scenario.start_time + m * radar.pri;
        for (size_t ti = 0; ti < scenario.targets.size(); ++ti) {
            if (add_multipath(pulse_buf, scenario.targets[ti], scenario.ground, radar, m, t_m,
                              scenario.seed, static_cast<int>(ti))) {
                target_truncated[ti] = true;
            }
        }
        for (int n = 0; n < fast; ++n) out.train.at(n, m) = pulse_buf[n];
    }
    for (size_t ti = 0; ti < target_truncated.size(); ++ti) {
        if (target_truncated[ti]) {
            out.warnings.push_back("target " + std::to_string(ti) +
                                   ": echo truncated at PRI boundary");
        }
    }

    double ref_power = scenario.noise_ref_power;
    if (!scenario.targets.empty()) {
        double power = 0.0;
        size_t support = 0;
        for (const cd& v : out.train.samples) {
            const double m2 = std::norm(v);
            if (m2 > 0.0) {
                power += m2;
                ++support;
            }
        }
        if (support > 0) ref_power = power / static_cast<double>(support);
    }

    if (!scenario.clutter.empty()) {
        const std::vector<cd> clut = clutter_echo(scenario.clutter, radar, 0, &out.warnings);
        for (int m = 0; m < radar.num_pulses; ++m) {
            for (int n = 0; n < fast; ++n) out.train.at(n, m) += clut[n];
        }
    }

    const bool noise_free = std::isinf(scenario.snr_db) && scenario.snr_db > 0.0;
    if (!noise_free) {
        if (!(ref_power > 0.0) || !std::isfinite(ref_power)) {
            throw ParamError("simulate: SNR reference power undefined (no target echo and "
                             "no positive noise_ref_power)");
        }
        add_noise_with_sigma2(out.train, ref_power / std::pow(10.0, scenario.snr_db / 10.0),
                              scenario.seed);
    }
    return out;
}

} // namespace uavdet::sim
