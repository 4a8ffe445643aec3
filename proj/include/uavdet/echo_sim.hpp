#pragma once

#include <string>
#include <vector>

#include "uavdet/pulse_train.hpp"
#include "uavdet/scenario.hpp"

namespace uavdet::sim {

/// Baseband transmit pulse over one PRI. The chirp sweeps [-B/2, +B/2] across
/// the pulse width; samples outside the envelope are zero. The vector is the
/// same for every pulse index m (the PRI shift lives in absolute time).
std::vector<cd> lfm_pulse(const RadarParams& radar, int pulse_index);

/// R(t) = sqrt(R0^2 + (v cos(phi) t)^2).
double target_range(const TargetState& target, double t);

/// Path-length difference between bounce and direct propagation for a target at
/// horizontal distance h: sqrt(h^2 + (h1+h2)^2) - sqrt(h^2 + (h1-h2)^2).
double path_difference(double horizontal_dist, double h1, double h2);

/// Effective specular reflection coefficient rho = rho0 * rho_s(Gamma).
/// rho_s = exp(-2 (2 pi Gamma)^2) for Gamma <= 0.1, else 0.812537 / (1 + 2 (2 pi Gamma)^2).
double specular_coefficient(const GroundSpec& ground);

/// Composite multipath amplitude/phase: B e^{j phi_B} = (1 + rho e^{j beta})^2.
struct AmplitudeFactor {
    double b;      // (1 + rho cos b)^2 + rho^2 sin^2 b
    double phi_b;  // arg((1 + rho e^{j beta})^2)
};
AmplitudeFactor amplitude_factor(double rho, double beta);

/// Four-path echo (direct, two single bounces, double bounce) of one target for
/// pulse m, as a length fast_time_bins vector. Echo tails past the PRI are
/// truncated; a note is appended to `warnings` when that happens (once per call).
std::vector<cd> multipath_echo(const TargetState& target, const GroundSpec& ground,
                               const RadarParams& radar, int pulse_index,
                               double pulse_start_time,
                               std::vector<std::string>* warnings = nullptr);

/// Static clutter superposition for pulse m. Scatterers beyond the unambiguous
/// range c*PRI/2 are skipped with a warning record.
std::vector<cd> clutter_echo(const std::vector<ClutterScatterer>& clutter,
                             const RadarParams& radar, int pulse_index,
                             std::vector<std::string>* warnings = nullptr);

/// Adds circular complex white Gaussian noise. The per-sample variance is
/// P / 10^(snr_db/10) where P is the mean squared magnitude of `signal` over
/// its support (samples with nonzero magnitude). snr_db = +inf leaves the
/// signal untouched. Deterministic for a given (seed, noise_stream).
void add_awgn(PulseTrain& signal, double snr_db, uint64_t seed);

/// Low-level variant with an externally chosen noise variance.
void add_noise_with_sigma2(PulseTrain& signal, double sigma2, uint64_t seed);

struct SimOutput {
    PulseTrain train;
    std::vector<std::string> warnings;
};

/// Full receive matrix: sum of per-target multipath echoes, clutter, and noise.
/// Target delays follow the stop-and-hop approximation (range frozen within a
/// pulse, updated per pulse at absolute time start_time + m*PRI).
SimOutput simulate(const Scenario& scenario);

} // namespace uavdet::sim
