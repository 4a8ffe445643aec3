#include "uavdet/dataset.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "uavdet/echo_sim.hpp"
#include "uavdet/rng.hpp"

namespace uavdet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using sim::Scenario;

sim::RadarParams preset_radar(const std::string& preset, bool paper_scale,
                              int num_pulses_override) {
    sim::RadarParams r;
    if (preset == "desk") {
        r.carrier_freq = 10.0e9;
        r.bandwidth = 1.0e6;
        r.pulse_width = 20.0e-6;
        r.pri = 250.0e-6;
        r.sample_rate = 2.0e6;
        r.num_pulses = 512;
    } else if (preset == "paper-sim") {
        r.carrier_freq = 35.0e9;
        r.bandwidth = 10.0e6;
        r.pulse_width = 50.0e-6;
        r.pri = 500.0e-6; // PRF 2 kHz
        r.sample_rate = 20.0e6;
        r.num_pulses = paper_scale ? 1000 : 512; // 500 ms at full scale
    } else {
        throw ParamError("unknown preset: " + preset);
    }
    r.radar_height = 45.0;
    if (num_pulses_override > 0) r.num_pulses = num_pulses_override;
    return r;
}

namespace {

struct SpeedBands {
    double lo1, hi1; // single target / first of two
    double lo2, hi2; // second of two, separated so Doppler lines stay apart
};

SpeedBands preset_speeds(const std::string& preset) {
    if (preset == "desk") return {10.0, 16.5, 19.5, 26.0};
    return {10.0, 24.0, 30.0, 42.0}; // paper-sim
}

double preset_range(const std::string& preset, CounterRng& rng) {
    if (preset == "desk") return rng.uniform(500.0, 900.0);
    return rng.uniform(600.0, 1000.0);
}

// Places a target so that at the scenario start time it sits at range r_obs
// with radial speed v_r: with R(t) = sqrt(R0^2 + (v t)^2), that requires
// v^2 = v_r r_obs / t_s and R0^2 = r_obs (r_obs - v_r t_s).
sim::TargetState stage_target(double r_obs, double v_r, double t_s, CounterRng& rng) {
    sim::TargetState t;
    t.speed = std::sqrt(v_r * r_obs / t_s);
    t.initial_range = std::sqrt(r_obs * (r_obs - v_r * t_s));
    t.height = rng.uniform(40.0, 50.0);
    t.aspect_angle = 0.0;
    t.reflectivity = rng.uniform(0.7, 1.3);
    t.initial_phase = rng.uniform(0.0, 2.0 * kPi);
    return t;
}

} // namespace

Scenario make_scenario(const GenerateConfig& cfg, int label, double snr_db,
                       uint64_t sample_seed) {
    if (label < 0 || label > 2) throw ParamError("make_scenario: label must be 0, 1 or 2");
    Scenario s;
    s.radar = preset_radar(cfg.preset, cfg.paper_scale, cfg.num_pulses_override);
    s.label = label;
    s.snr_db = snr_db;
    s.seed = sample_seed;
    s.noise_ref_power = 1.0; // canonical unit-reflectivity echo power

    CounterRng rng(sample_seed, 0xD0A7ULL);
    const SpeedBands bands = preset_speeds(cfg.preset);

    if (label >= 1) {
        const double r_obs = preset_range(cfg.preset, rng);
        const double v_r1 = rng.uniform(bands.lo1, bands.hi1);
        double v_r2 = 0.0;
        if (label == 2) v_r2 = rng.uniform(bands.lo2, bands.hi2);
        const double vr_hi = std::max(v_r1, v_r2);
        const double t_s = 0.9025 * r_obs / vr_hi;
        s.start_time = t_s;
        s.targets.push_back(stage_target(r_obs, v_r1, t_s, rng));
        if (label == 2) {
            // Same range gate, distinct Doppler line.
            const double gate_span = kSpeedOfLight / (2.0 * s.radar.sample_rate);
            const double r2 = r_obs + rng.uniform(-0.1, 0.1) * gate_span;
            s.targets.push_back(stage_target(r2, v_r2, t_s, rng));
        }
    }

    const bool strong = cfg.clutter == ClutterLevel::kStrong;
    s.ground.fresnel_rho0 = strong ? rng.uniform(0.55, 0.9) : rng.uniform(0.2, 0.45);
    s.ground.roughness = strong ? rng.uniform(0.0, 0.04) : rng.uniform(0.02, 0.08);
    s.ground.reflection_phase = kPi + rng.uniform(-0.5, 0.5);

    const int n_clutter = strong ? 14 : 6;
    const double amp_lo = strong ? 0.3 : 0.05;
    const double amp_hi = strong ? 0.8 : 0.2;
    for (int i = 0; i < n_clutter; ++i) {
        sim::ClutterScatterer c;
        c.range = rng.uniform(150.0, 950.0);
        c.amplitude = rng.uniform(amp_lo, amp_hi);
        c.phase = rng.uniform(0.0, 2.0 * kPi);
        s.clutter.push_back(c);
    }
    sim::validate(s);
    return s;
}

namespace {

json scenario_to_json(const Scenario& s) {
    json radar = {{"carrier_freq", s.radar.carrier_freq},
                  {"bandwidth", s.radar.bandwidth},
                  {"pulse_width", s.radar.pulse_width},
                  {"pri", s.radar.pri},
                  {"num_pulses", s.radar.num_pulses},
                  {"sample_rate", s.radar.sample_rate},
                  {"radar_height", s.radar.radar_height},
                  {"gain", s.radar.gain},
                  {"amplitude", s.radar.amplitude}};
    json targets = json::array();
    for (const auto& t : s.targets) {
        targets.push_back({{"initial_range", t.initial_range},
                           {"height", t.height},
                           {"speed", t.speed},
                           {"aspect_angle", t.aspect_angle},
                           {"reflectivity", t.reflectivity},
                           {"initial_phase", t.initial_phase}});
    }
    json clutter = json::array();
    for (const auto& c : s.clutter) {
        clutter.push_back({{"range", c.range}, {"amplitude", c.amplitude}, {"phase", c.phase}});
    }
    return {{"radar", radar},
            {"targets", targets},
            {"ground",
             {{"fresnel_rho0", s.ground.fresnel_rho0},
              {"roughness", s.ground.roughness},
              {"reflection_phase", s.ground.reflection_phase},
              {"rayleigh_beta", s.ground.rayleigh_beta},
              {"rayleigh_sigma", s.ground.rayleigh_sigma}}},
            {"clutter", clutter},
            {"snr_db", std::isinf(s.snr_db) ? json("inf") : json(s.snr_db)},
            {"seed", s.seed},
            {"label", s.label},
            {"start_time", s.start_time},
            {"noise_ref_power", s.noise_ref_power}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    const auto& r = j.at("radar");
    s.radar.carrier_freq = r.at("carrier_freq");
    s.radar.bandwidth = r.at("bandwidth");
    s.radar.pulse_width = r.at("pulse_width");
    s.radar.pri = r.at("pri");
    s.radar.num_pulses = r.at("num_pulses");
    s.radar.sample_rate = r.at("sample_rate");
    s.radar.radar_height = r.at("radar_height");
    s.radar.gain = r.at("gain");
    s.radar.amplitude = r.at("amplitude");
    for (const auto& t : j.at("targets")) {
        sim::TargetState ts;
        ts.initial_range = t.at("initial_range");
        ts.height = t.at("height");
        ts.speed = t.at("speed");
        ts.aspect_angle = t.at("aspect_angle");
        ts.reflectivity = t.at("reflectivity");
        ts.initial_phase = t.at("initial_phase");
        s.targets.push_back(ts);
    }
    const auto& g = j.at("ground");
    s.ground.fresnel_rho0 = g.at("fresnel_rho0");
    s.ground.roughness = g.at("roughness");
    s.ground.reflection_phase = g.at("reflection_phase");
    s.ground.rayleigh_beta = g.at("rayleigh_beta");
    s.ground.rayleigh_sigma = g.at("rayleigh_sigma");
    for (const auto& c : j.at("clutter")) {
        s.clutter.push_back({c.at("range"), c.at("amplitude"), c.at("phase")});
    }
    s.snr_db = j.at("snr_db").is_string() ? std::numeric_limits<double>::infinity()
                                          : j.at("snr_db").get<double>();
    s.seed = j.at("seed");
    s.label = j.at("label");
    s.start_time = j.at("start_time");
    s.noise_ref_power = j.at("noise_ref_power");
    return s;
}

} // namespace

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    int n_threads = threads;
    if (n_threads <= 0) {
        if (const char* env = std::getenv("UAVDET_THREADS")) n_threads = std::atoi(env);
        if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads <= 0) n_threads = 1;
    }
    n_threads = static_cast<int>(std::min<size_t>(n_threads, n));
    if (n_threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

DatasetManifest generate_dataset(const GenerateConfig& cfg) {
    if (cfg.out_dir.empty()) throw ParamError("generate_dataset: out_dir required");
    if (cfg.per_class < 1) throw ParamError("generate_dataset: per_class must be >= 1");
    for (int label : cfg.labels) {
        if (label < 0 || label > 2) throw ParamError("generate_dataset: labels must be 0..2");
    }
    fs::create_directories(cfg.out_dir);

    struct Job {
        int label;
        double snr;
        uint64_t seed;
        std::string id;
    };
    std::vector<Job> jobs;
    size_t index = 0;
    for (double snr : cfg.snr_db) {
        for (int label : cfg.labels) {
            for (int i = 0; i < cfg.per_class; ++i, ++index) {
                char id[32];
                std::snprintf(id, sizeof(id), "sample_%05zu", index);
                jobs.push_back({label, snr, hash_u64(cfg.seed, 0x5EED, index), id});
            }
        }
    }

    DatasetManifest manifest;
    manifest.preset = cfg.preset;
    manifest.entries.resize(jobs.size());

    parallel_for(jobs.size(), cfg.threads, [&](size_t i) {
        const Job& job = jobs[i];
        const Scenario scenario = make_scenario(cfg, job.label, job.snr, job.seed);
        const auto out = sim::simulate(scenario);

        const std::string pulse_file = job.id + ".pt";
        const std::string meta_file = job.id + ".json";
        sim::save_pulse_train(out.train, (fs::path(cfg.out_dir) / pulse_file).string());

        json meta = {{"id", job.id},
                     {"label", job.label},
                     {"contrastive_label", job.label > 0 ? 1 : 0},
                     {"snr_db", std::isinf(job.snr) ? json("inf") : json(job.snr)},
                     {"seed", job.seed},
                     {"scenario", scenario_to_json(scenario)},
                     {"warnings", out.warnings}};
        std::ofstream mf(fs::path(cfg.out_dir) / meta_file);
        if (!mf) throw IoError("cannot write metadata: " + meta_file);
        mf << meta.dump(2) << "\n";

        manifest.entries[i] = {job.id, pulse_file, meta_file, job.label, job.snr, job.seed};
    });

    save_manifest(manifest, cfg.out_dir);
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& dir) {
    json entries = json::array();
    for (const auto& e : manifest.entries) {
        entries.push_back({{"id", e.id},
                           {"pulse_file", e.pulse_file},
                           {"meta_file", e.meta_file},
                           {"label", e.label},
                           {"snr_db", std::isinf(e.snr_db) ? json("inf") : json(e.snr_db)},
                           {"seed", e.seed}});
    }
    const json root = {{"version", manifest.version},
                       {"preset", manifest.preset},
                       {"entries", entries}};
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + dir);
    out << root.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw IoError("no manifest.json in " + dir);
    json root;
    in >> root;
    DatasetManifest manifest;
    manifest.version = root.at("version");
    manifest.preset = root.value("preset", "");
    for (const auto& e : root.at("entries")) {
        ManifestEntry entry;
        entry.id = e.at("id");
        entry.pulse_file = e.at("pulse_file");
        entry.meta_file = e.at("meta_file");
        entry.label = e.at("label");
        entry.snr_db = e.at("snr_db").is_string() ? std::numeric_limits<double>::infinity()
                                                  : e.at("snr_db").get<double>();
        entry.seed = e.at("seed");
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

std::vector<std::string> validate_dataset(const std::string& dir) {
    std::vector<std::string> issues;
    DatasetManifest manifest;
    try {
        manifest = load_manifest(dir);
    } catch (const std::exception& e) {
        issues.push_back(e.what());
        return issues;
    }
    for (const auto& e : manifest.entries) {
        const fs::path pulse = fs::path(dir) / e.pulse_file;
        std::ifstream pf(pulse, std::ios::binary);
        char magic[8] = {};
        if (!pf || !pf.read(magic, 8) || std::string(magic, 8) != "UAVPT001") {
            issues.push_back(e.id + ": missing or corrupt pulse file " + e.pulse_file);
        }
        const fs::path meta = fs::path(dir) / e.meta_file;
        std::ifstream mf(meta);
        if (!mf) {
            issues.push_back(e.id + ": missing metadata " + e.meta_file);
            continue;
        }
        try {
            json j;
            mf >> j;
            if (j.at("label").get<int>() != e.label) {
                issues.push_back(e.id + ": metadata label disagrees with manifest");
            }
            scenario_from_json(j.at("scenario"));
        } catch (const std::exception& ex) {
            issues.push_back(e.id + ": bad metadata (" + ex.what() + ")");
        }
    }
    return issues;
}

Scenario load_scenario(const std::string& dataset_dir, const ManifestEntry& entry) {
    std::ifstream in(fs::path(dataset_dir) / entry.meta_file);
    if (!in) throw IoError("cannot open metadata: " + entry.meta_file);
    json j;
    in >> j;
    return scenario_from_json(j.at("scenario"));
}

} // namespace uavdet::pipeline
