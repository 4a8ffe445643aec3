#include "uavdet/scenario.hpp"

#include <cmath>

namespace uavdet::sim {

namespace {

bool finite(double x) { return std::isfinite(x); }

} // namespace

void validate(const RadarParams& r) {
    if (!finite(r.carrier_freq) || !finite(r.bandwidth) || !finite(r.pulse_width) ||
        !finite(r.pri) || !finite(r.sample_rate) || !finite(r.gain) || !finite(r.amplitude)) {
        throw ParamError("RadarParams: non-finite field");
    }
    if (r.bandwidth <= 0.0) throw ParamError("RadarParams: bandwidth must be > 0");
    if (r.pulse_width <= 0.0 || r.pulse_width >= r.pri) {
        throw ParamError("RadarParams: require 0 < pulse_width < pri");
    }
    if (r.sample_rate < 2.0 * r.bandwidth) {
        throw ParamError("RadarParams: sample_rate must be >= 2*bandwidth");
    }
    if (r.num_pulses < 1) throw ParamError("RadarParams: num_pulses must be >= 1");
    if (r.carrier_freq <= 0.0) throw ParamError("RadarParams: carrier_freq must be > 0");
    if (r.radar_height <= 0.0) throw ParamError("RadarParams: radar_height must be > 0");
}

void validate(const TargetState& t) {
    if (!finite(t.initial_range) || !finite(t.height) || !finite(t.speed) ||
        !finite(t.aspect_angle) || !finite(t.reflectivity) || !finite(t.initial_phase)) {
        throw ParamError("TargetState: non-finite field");
    }
    if (t.initial_range <= 0.0) throw ParamError("TargetState: initial_range must be > 0");
    if (t.speed < 0.0) throw ParamError("TargetState: speed must be >= 0");
    if (t.height <= 0.0) throw ParamError("TargetState: height must be > 0");
}

void validate(const GroundSpec& g) {
    if (!finite(g.fresnel_rho0) || !finite(g.roughness) || !finite(g.reflection_phase)) {
        throw ParamError("GroundSpec: non-finite field");
    }
    if (g.fresnel_rho0 < 0.0 || g.fresnel_rho0 > 1.0) {
        throw ParamError("GroundSpec: fresnel_rho0 must be in [0,1]");
    }
    if (g.roughness < 0.0) throw ParamError("GroundSpec: roughness must be >= 0");
}

void validate(const Scenario& s) {
    validate(s.radar);
    if (s.targets.size() > 2) throw ParamError("Scenario: at most 2 targets");
    for (const auto& t : s.targets) validate(t);
    validate(s.ground);
    for (const auto& c : s.clutter) {
        if (!finite(c.range) || !finite(c.amplitude) || !finite(c.phase)) {
            throw ParamError("ClutterScatterer: non-finite field");
        }
        if (c.range <= 0.0) throw ParamError("ClutterScatterer: range must be > 0");
        if (c.amplitude < 0.0) throw ParamError("ClutterScatterer: amplitude must be >= 0");
    }
    if (s.label != static_cast<int>(s.targets.size())) {
        throw ParamError("Scenario: label must equal number of targets");
    }
    if (!finite(s.start_time) || s.start_time < 0.0) {
        throw ParamError("Scenario: start_time must be finite and >= 0");
    }
    if (std::isnan(s.snr_db)) throw ParamError("Scenario: snr_db is NaN");
}

} // namespace uavdet::sim
