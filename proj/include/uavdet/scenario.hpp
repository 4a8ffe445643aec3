#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::sim {

/// Pulse-Doppler radar waveform and platform parameters.
/// All signals are stored as complex baseband: the carrier contributes only
/// Doppler rotation and multipath phase, never a sampled RF waveform.
struct RadarParams {
    double carrier_freq = 10.0e9;  // Hz
    double bandwidth = 2.0e6;      // Hz, chirp sweep
    double pulse_width = 20.0e-6;  // s
    double pri = 250.0e-6;         // s, 1/PRF
    int num_pulses = 512;
    double sample_rate = 4.0e6;    // Hz, >= 2*bandwidth
    double radar_height = 45.0;    // m (h1)
    double gain = 1.0;             // matched-filter gain scale
    double amplitude = 1.0;        // transmit envelope amplitude

    double prf() const { return 1.0 / pri; }
    int fast_time_bins() const { return static_cast<int>(std::lround(pri * sample_rate)); }
    int pulse_support_bins() const { return static_cast<int>(std::lround(pulse_width * sample_rate)); }
    double chirp_rate() const { return bandwidth / pulse_width; }
};

void validate(const RadarParams& radar);

/// One UAV target. Range follows R(t) = sqrt(R0^2 + (v cos(phi) t)^2), so the
/// radial speed grows from zero at t = 0 toward v cos(phi); scenarios place the
/// observation window at start_time > 0 when a specific radial speed is wanted.
struct TargetState {
    double initial_range = 800.0;  // m (R0, closest approach)
    double height = 45.0;          // m (h2)
    double speed = 20.0;           // m/s (v)
    double aspect_angle = 0.0;     // rad (phi)
    double reflectivity = 1.0;     // material coefficient k
    double initial_phase = 0.0;    // rad (phi0)
};

void validate(const TargetState& target);

/// Ground reflection: effective specular coefficient rho = rho0 * rho_s(roughness).
struct GroundSpec {
    double fresnel_rho0 = 0.0;      // [0,1]
    double roughness = 0.0;         // Gamma >= 0
    double reflection_phase = kPi;  // rad (phi_rho)
    // When true, the bounce-path relative phase beta is drawn Rayleigh-distributed
    // per pulse instead of following the deterministic geometry.
    bool rayleigh_beta = false;
    double rayleigh_sigma = kPi / 2.0;
};

void validate(const GroundSpec& ground);

/// Static ground scatterer (tree, wall). Identical in every pulse: zero Doppler.
struct ClutterScatterer {
    double range = 300.0;     // m
    double amplitude = 0.1;
    double phase = 0.0;       // rad
};

struct Scenario {
    RadarParams radar;
    std::vector<TargetState> targets;  // 0..2 entries
    GroundSpec ground;
    std::vector<ClutterScatterer> clutter;
    double snr_db = std::numeric_limits<double>::infinity();  // +inf = noise-free
    uint64_t seed = 0;
    int label = 0;            // target count, must equal targets.size()
    double start_time = 0.0;  // absolute time of pulse m = 0 (s)
    // SNR reference power when no target is present (label 0). With targets the
    // reference is the clean target echo power over its own support.
    double noise_ref_power = 1.0;
};

void validate(const Scenario& scenario);

} // namespace uavdet::sim
