#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "uavdet/echo_sim.hpp"
#include "uavdet/rng.hpp"

using namespace uavdet;
using namespace uavdet::sim;

namespace {

RadarParams desk_radar() {
    RadarParams r;
    r.carrier_freq = 10.0e9;
    r.bandwidth = 2.0e6;
    r.pulse_width = 20.0e-6;
    r.pri = 250.0e-6;
    r.num_pulses = 256;
    r.sample_rate = 4.0e6;
    r.radar_height = 45.0;
    return r;
}

double max_abs(const std::vector<cd>& v) {
    double m = 0.0;
    for (const cd& x : v) m = std::max(m, std::abs(x));
    return m;
}

// Naive DFT magnitude, independent of any library FFT.
std::vector<double> dft_mag(const std::vector<cd>& x) {
    const size_t n = x.size();
    std::vector<double> mag(n);
    for (size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double ang = -2.0 * kPi * static_cast<double>(k * i % n) / n;
            acc += x[i] * cd(std::cos(ang), std::sin(ang));
        }
        mag[k] = std::abs(acc);
    }
    return mag;
}

} // namespace

TEST_CASE("lfm_pulse basics") {
    RadarParams r = desk_radar();
    r.bandwidth = 10.0e6;
    r.pulse_width = 50.0e-6;
    r.sample_rate = 20.0e6;
    r.pri = 500.0e-6;
    CHECK(r.chirp_rate() == doctest::Approx(2.0e11).epsilon(1e-12));

    const auto p0 = lfm_pulse(r, 0);
    const auto p1 = lfm_pulse(r, 1);
    CHECK(p0.size() == static_cast<size_t>(r.fast_time_bins()));
    CHECK(p0 == p1); // identical envelope each PRI, shift lives in absolute time

    // Support is exactly the pulse width.
    int nonzero = 0;
    for (const cd& v : p0) nonzero += std::abs(v) > 0.0;
    CHECK(nonzero == r.pulse_support_bins());

    r.amplitude = 0.0;
    CHECK(max_abs(lfm_pulse(r, 0)) == 0.0);

    r.amplitude = 1.0;
    r.sample_rate = 1.0e6; // < 2B
    CHECK_THROWS_AS(lfm_pulse(r, 0), ParamError);
}

TEST_CASE("target_range law") {
    TargetState t;
    t.initial_range = 800.0;
    t.speed = 20.0;
    t.aspect_angle = 0.0;
    CHECK(target_range(t, 0.0) == doctest::Approx(800.0));
    // 3-4-5 triangle: v*cos(phi)*t = 600.
    CHECK(target_range(t, 30.0) == doctest::Approx(1000.0));
    t.aspect_angle = kPi / 2.0;
    for (double tt : {0.0, 1.0, 17.0, 1000.0}) {
        CHECK(target_range(t, tt) == doctest::Approx(800.0).epsilon(1e-9));
    }
}

TEST_CASE("path_difference geometry") {
    // Symmetric geometry closed form.
    const double h = 700.0, H = 45.0;
    CHECK(path_difference(h, H, H) ==
          doctest::Approx(std::sqrt(h * h + 4 * H * H) - h).epsilon(1e-12));

    // Independent algebraic route: l_d = 4 h1 h2 / (sqrt(h^2+(h1+h2)^2) + sqrt(h^2+(h1-h2)^2)).
    const double h1 = 40.0, h2 = 50.0, hd = 1000.0;
    const double oracle = 4.0 * h1 * h2 /
                          (std::sqrt(hd * hd + (h1 + h2) * (h1 + h2)) +
                           std::sqrt(hd * hd + (h1 - h2) * (h1 - h2)));
    CHECK(path_difference(hd, h1, h2) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(3.9918).epsilon(1e-3));

    // Asymptote 2 h1 h2 / h for h -> inf.
    const double far = 1.0e6;
    CHECK(path_difference(far, h1, h2) ==
          doctest::Approx(2.0 * h1 * h2 / far).epsilon(1e-3));
}

TEST_CASE("specular_coefficient branches") {
    GroundSpec g;
    g.fresnel_rho0 = 1.0;
    g.roughness = 0.0;
    CHECK(specular_coefficient(g) == doctest::Approx(1.0));

    // Both branch formulas evaluated independently at the seam.
    const double gam = 0.1;
    const double lo = std::exp(-2.0 * std::pow(2.0 * kPi * gam, 2.0));
    const double hi = 0.812537 / (1.0 + 2.0 * std::pow(2.0 * kPi * gam, 2.0));
    CHECK(std::abs(lo - hi) < 1e-4);
    CHECK(lo == doctest::Approx(0.45404).epsilon(1e-4));
    g.roughness = gam;
    CHECK(specular_coefficient(g) == doctest::Approx(lo).epsilon(1e-12));

    g.fresnel_rho0 = 0.0;
    for (double gg : {0.0, 0.05, 0.1, 0.7, 3.0}) {
        g.roughness = gg;
        CHECK(specular_coefficient(g) == 0.0);
    }
}

TEST_CASE("amplitude_factor matches complex square") {
    CHECK(amplitude_factor(0.0, 1.234).b == doctest::Approx(1.0));
    CHECK(amplitude_factor(0.0, 1.234).phi_b == doctest::Approx(0.0));
    CHECK(amplitude_factor(1.0, 0.0).b == doctest::Approx(4.0));
    CHECK(amplitude_factor(1.0, 0.0).phi_b == doctest::Approx(0.0));
    CHECK(amplitude_factor(1.0, kPi).b == doctest::Approx(0.0).epsilon(1e-12));

    CounterRng rng(42, 7);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double rho = rng.uniform();
        const double beta = rng.uniform(0.0, 2.0 * kPi);
        const auto [b, phi_b] = amplitude_factor(rho, beta);
        const cd w = 1.0 + rho * cd(std::cos(beta), std::sin(beta));
        worst = std::max(worst, std::abs(b - std::norm(w)));
        if (std::norm(w) > 1e-8) {
            // Compare phases as phasors to dodge branch cuts.
            const cd want = w * w / std::norm(w);
            const cd got = cd(std::cos(phi_b), std::sin(phi_b));
            CHECK(std::abs(want - got) < 1e-9);
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("multipath collapses to direct path when rho = 0") {
    RadarParams r = desk_radar();
    r.num_pulses = 4;
    TargetState t;
    t.initial_range = 600.0;
    t.height = 42.0;
    t.speed = 15.0;
    t.initial_phase = 0.7;
    GroundSpec off; // rho0 = 0

    const auto got = multipath_echo(t, off, r, 0, 3.0);

    // Independent direct-path evaluation (Eq 2 at baseband).
    const double tau = 2.0 * target_range(t, 3.0) / kSpeedOfLight;
    const double k_rate = r.chirp_rate();
    const double f_off = -0.5 * r.bandwidth;
    double worst = 0.0;
    int support = 0;
    for (int n = 0; n < r.fast_time_bins(); ++n) {
        const double s = n / r.sample_rate - tau;
        cd want = 0.0;
        if (s >= 0.0 && s < r.pulse_width) {
            const double ph = -2.0 * kPi * r.carrier_freq * tau + t.initial_phase +
                              2.0 * kPi * (f_off * s + 0.5 * k_rate * s * s);
            want = t.reflectivity * std::polar(1.0, std::fmod(ph, 2.0 * kPi));
            ++support;
        }
        worst = std::max(worst, std::abs(want - got[n]));
    }
    CHECK(support > 0);
    CHECK(worst < 1e-9);

    // Bit-level: varying the irrelevant ground fields must not disturb anything.
    GroundSpec off2;
    off2.roughness = 0.3;
    off2.reflection_phase = 1.1;
    const auto got2 = multipath_echo(t, off2, r, 0, 3.0);
    CHECK(got == got2);
}

TEST_CASE("multipath amplitude swing over beta covers (1+rho)^2/(1-rho)^2") {
    RadarParams r = desk_radar();
    r.bandwidth = 1000.0; // near-CW so the four envelopes align
    r.num_pulses = 2;
    TargetState t;
    t.initial_range = 500.0;
    t.height = 40.0;
    t.speed = 0.0;
    GroundSpec g;
    g.fresnel_rho0 = 0.8;
    g.roughness = 0.0;

    double peak_max = 0.0, peak_min = 1e300;
    for (int i = 0; i < 256; ++i) {
        g.reflection_phase = 2.0 * kPi * i / 256.0;
        const auto echo = multipath_echo(t, g, r, 0, 0.0);
        const double peak = max_abs(echo);
        peak_max = std::max(peak_max, peak);
        peak_min = std::min(peak_min, peak);
    }
    const double rho = 0.8;
    const double want = std::pow((1.0 + rho) / (1.0 - rho), 2.0);
    CHECK(peak_max / peak_min == doctest::Approx(want).epsilon(0.02));
    CHECK(peak_max == doctest::Approx((1.0 + rho) * (1.0 + rho)).epsilon(0.02));
}

TEST_CASE("degenerate geometry: coincident paths scale by (1+rho)^2") {
    RadarParams r = desk_radar();
    r.bandwidth = 1000.0;
    r.num_pulses = 2;
    TargetState t;
    t.initial_range = 500.0;
    t.height = 1e-9; // h2 -> 0: t_delta -> 0
    t.speed = 0.0;
    GroundSpec g;
    g.fresnel_rho0 = 0.6;
    g.reflection_phase = 0.0;

    const auto with = multipath_echo(t, g, r, 0, 0.0);
    GroundSpec off;
    const auto direct = multipath_echo(t, off, r, 0, 0.0);
    CHECK(max_abs(with) == doctest::Approx(max_abs(direct) * 1.6 * 1.6).epsilon(1e-6));
}

TEST_CASE("multipath truncation warning at PRI boundary") {
    RadarParams r = desk_radar();
    r.num_pulses = 2;
    TargetState t;
    t.initial_range = 37.3e3; // tau + pulse width spills past the PRI
    t.height = 40.0;
    GroundSpec off;
    std::vector<std::string> warnings;
    const auto echo = multipath_echo(t, off, r, 0, 0.0, &warnings);
    CHECK(warnings.size() == 1);
    CHECK(max_abs(echo) > 0.0);
}

TEST_CASE("clutter_echo") {
    RadarParams r = desk_radar();
    r.num_pulses = 2;

    CHECK(max_abs(clutter_echo({}, r, 0)) == 0.0);

    // Destructive pair cancels to numerical zero.
    std::vector<ClutterScatterer> pair = {{300.0, 0.5, 0.0}, {300.0, 0.5, kPi}};
    CHECK(max_abs(clutter_echo(pair, r, 0)) < 1e-12);

    // Out-of-range scatterer skipped with warning.
    std::vector<std::string> warnings;
    std::vector<ClutterScatterer> far = {{40.0e3, 1.0, 0.0}};
    CHECK(max_abs(clutter_echo(far, r, 0, &warnings)) == 0.0);
    CHECK(warnings.size() == 1);

    // Static: identical in every pulse.
    std::vector<ClutterScatterer> one = {{300.0, 0.5, 1.0}};
    CHECK(clutter_echo(one, r, 0) == clutter_echo(one, r, 100));
}

TEST_CASE("add_awgn measured SNR and determinism") {
    PulseTrain sig(1000, 128, 1.0, 1.0);
    for (auto& v : sig.samples) v = cd(1.0, 0.0); // unit power everywhere

    PulseTrain noisy = sig;
    add_awgn(noisy, 3.0, 99);
    double noise_power = 0.0;
    for (size_t i = 0; i < sig.samples.size(); ++i) {
        noise_power += std::norm(noisy.samples[i] - sig.samples[i]);
    }
    noise_power /= static_cast<double>(sig.samples.size());
    const double measured_db = 10.0 * std::log10(1.0 / noise_power);
    CHECK(measured_db == doctest::Approx(3.0).epsilon(0.034)); // +-0.1 dB

    PulseTrain again = sig;
    add_awgn(again, 3.0, 99);
    CHECK(again.samples == noisy.samples);

    PulseTrain inf_snr = sig;
    add_awgn(inf_snr, std::numeric_limits<double>::infinity(), 99);
    CHECK(inf_snr.samples == sig.samples);

    PulseTrain zero(10, 10, 1.0, 1.0);
    CHECK_THROWS_AS(add_awgn(zero, 3.0, 1), ParamError);
}

TEST_CASE("simulate: empty scene, linearity, reflectivity scaling, determinism") {
    Scenario empty;
    empty.radar = desk_radar();
    empty.radar.num_pulses = 8;
    empty.label = 0;
    auto out = simulate(empty);
    for (const cd& v : out.train.samples) CHECK(v == cd(0.0, 0.0));

    auto make = [](std::vector<TargetState> targets) {
        Scenario s;
        s.radar = desk_radar();
        s.radar.num_pulses = 16;
        s.targets = std::move(targets);
        s.label = static_cast<int>(s.targets.size());
        s.ground.fresnel_rho0 = 0.5;
        s.start_time = 10.0;
        return s;
    };
    TargetState a;
    a.initial_range = 500.0;
    a.height = 43.0;
    a.speed = 18.0;
    TargetState b = a;
    b.initial_range = 640.0;
    b.initial_phase = 2.2;

    const auto ab = simulate(make({a, b}));
    const auto ja = simulate(make({a}));
    const auto jb = simulate(make({b}));
    double worst_rel = 0.0;
    for (size_t i = 0; i < ab.train.samples.size(); ++i) {
        const cd sum = ja.train.samples[i] + jb.train.samples[i];
        worst_rel = std::max(worst_rel,
                             std::abs(ab.train.samples[i] - sum) /
                                 std::max(std::abs(sum), 1e-30));
    }
    CHECK(worst_rel < 1e-9);

    // Doubling reflectivity doubles the noiseless echo exactly.
    TargetState a2 = a;
    a2.reflectivity = 2.0 * a.reflectivity;
    const auto scaled = simulate(make({a2}));
    for (size_t i = 0; i < scaled.train.samples.size(); ++i) {
        CHECK(scaled.train.samples[i] == 2.0 * ja.train.samples[i]);
    }

    // Fixed seed with noise on: bit-identical runs.
    Scenario noisy = make({a});
    noisy.snr_db = 0.0;
    noisy.seed = 1234;
    const auto r1 = simulate(noisy);
    const auto r2 = simulate(noisy);
    CHECK(r1.train.samples == r2.train.samples);
}

TEST_CASE("simulate: slow-time Doppler matches the range-rate oracle") {
    Scenario s;
    s.radar = desk_radar();
    s.radar.num_pulses = 256;
    TargetState t;
    // Observation staged at start_time so the radial speed is ~16 m/s at 600 m.
    const double v_r = 16.0, range_obs = 600.0;
    t.speed = v_r / 0.98;
    t.initial_range = range_obs * std::sqrt(1.0 - 0.98 * 0.98);
    t.height = 45.0;
    s.start_time = range_obs * v_r / (t.speed * t.speed);
    s.targets = {t};
    s.label = 1;

    const auto out = simulate(s);

    // A gate safely inside the echo support (the raw support starts at
    // ceil(tau*fs); the rounded bin only matches after pulse compression).
    const int gate = static_cast<int>(
        std::ceil(2.0 * range_obs / kSpeedOfLight * s.radar.sample_rate)) + 2;
    std::vector<cd> slow(s.radar.num_pulses);
    for (int m = 0; m < s.radar.num_pulses; ++m) slow[m] = out.train.at(gate, m);
    CHECK(std::abs(slow[0]) > 0.0);

    // Oracle: instantaneous range rate by central difference at mid-observation.
    const double t_mid = s.start_time + 0.5 * s.radar.num_pulses * s.radar.pri;
    const double dt = 1e-3;
    const double range_rate =
        (target_range(t, t_mid + dt) - target_range(t, t_mid - dt)) / (2.0 * dt);
    CHECK(range_rate == doctest::Approx(v_r).epsilon(0.01));

    double f_slow = -2.0 * range_rate * s.radar.carrier_freq / kSpeedOfLight;
    const double prf = s.radar.prf();
    f_slow = std::fmod(std::fmod(f_slow, prf) + prf, prf);
    const int want_bin = static_cast<int>(std::lround(f_slow / prf * s.radar.num_pulses));

    const auto mag = dft_mag(slow);
    const int got_bin = static_cast<int>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    CHECK(std::abs(got_bin - want_bin) <= 2);
}
