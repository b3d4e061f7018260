#include "radocc/fmcw.hpp"

#include "radocc/errors.hpp"
#include "radocc/fft.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

namespace radocc {

std::string_view to_string(Domain domain) {
    return domain == Domain::Synthetic ? "synthetic" : "real";
}

Domain domain_from_string(std::string_view text) {
    if (text == "synthetic") return Domain::Synthetic;
    if (text == "real") return Domain::Real;
    throw ConfigError("unknown domain '" + std::string(text) + "'");
}

std::vector<double> hann_window(int n) {
    if (n < 2) throw ConfigError("Hann window needs at least 2 points");
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    }
    return w;
}

double range_of_bin(const RadarConfig& radar, int k) {
    return k * derive_params(radar).range_resolution;
}

double velocity_of_column(const RadarConfig& radar, int col) {
    return (col - Rdm::kZeroDopplerCol) * derive_params(radar).velocity_resolution;
}

namespace {

// Adds one path's fast-time tone to a chirp. The phasor advances by a fixed
// rotation per sample, so every chirp sees the same operation order.
void accumulate_path(cplx* chirp, int samples, const PropPath& path, const RadarConfig& radar,
                     double slope) {
    const double beat = slope * path.delay + path.doppler;
    const double step = 2.0 * std::numbers::pi * beat / radar.sample_rate;
    const cplx rotation = std::polar(1.0, step);
    cplx z = path_response(path, radar.carrier_freq);
    for (int n = 0; n < samples; ++n) {
        chirp[n] += z;
        z *= rotation;
    }
}

bool beyond_nyquist(const PropPath& path, const RadarConfig& radar, double slope) {
    const double beat = slope * path.delay + path.doppler;
    if (beat > 0.5 * radar.sample_rate) {
        spdlog::warn("dropping path of length {:.3f} m: beat frequency {:.1f} Hz exceeds fs/2",
                     path.length, beat);
        return true;
    }
    return false;
}

ChirpFrame synthesize(const std::vector<PropPath>& static_paths,
                      std::span<const std::vector<PropPath>> moving_paths,
                      const RadarConfig& radar) {
    const int n = radar.samples_per_chirp;
    const int m = radar.chirps_per_frame;
    if (!moving_paths.empty() && static_cast<int>(moving_paths.size()) != m) {
        throw ConfigError("expected paths for " + std::to_string(m) + " chirps, got " +
                          std::to_string(moving_paths.size()));
    }
    const double slope = derive_params(radar).chirp_slope;
    ChirpFrame frame(n, m);

    std::vector<cplx> base(static_cast<std::size_t>(n));
    for (const PropPath& p : static_paths) {
        if (beyond_nyquist(p, radar, slope)) continue;
        accumulate_path(base.data(), n, p, radar, slope);
    }
    for (int c = 0; c < m; ++c) {
        cplx* chirp = &frame.at(0, c);
        std::copy(base.begin(), base.end(), chirp);
        if (moving_paths.empty()) continue;
        for (const PropPath& p : moving_paths[c]) {
            if (beyond_nyquist(p, radar, slope)) continue;
            accumulate_path(chirp, n, p, radar, slope);
        }
    }
    return frame;
}

}  // namespace

ChirpFrame synth_beat(std::span<const std::vector<PropPath>> paths_per_chirp,
                      const RadarConfig& radar) {
    validate(radar);
    if (static_cast<int>(paths_per_chirp.size()) != radar.chirps_per_frame) {
        throw ConfigError("expected paths for " + std::to_string(radar.chirps_per_frame) +
                          " chirps, got " + std::to_string(paths_per_chirp.size()));
    }
    return synthesize({}, paths_per_chirp, radar);
}

RangeProfile range_fft(const ChirpFrame& frame) {
    const auto window = hann_window(frame.fast);
    const FftPlan plan(static_cast<std::size_t>(frame.fast));
    RangeProfile out = frame;
    for (int c = 0; c < frame.slow; ++c) {
        cplx* chirp = &out.at(0, c);
        for (int n = 0; n < frame.fast; ++n) chirp[n] *= window[n];
        plan.forward({chirp, static_cast<std::size_t>(frame.fast)});
    }
    return out;
}

std::vector<double> doppler_power(const RangeProfile& profile) {
    if (profile.fast < Rdm::kRows || profile.slow != Rdm::kCols) {
        throw ConfigError("range profile must be at least 128 x 128 chirps");
    }
    const FftPlan plan(static_cast<std::size_t>(profile.slow));
    std::vector<double> power(static_cast<std::size_t>(Rdm::kRows) * Rdm::kCols);
    std::vector<cplx> line(static_cast<std::size_t>(profile.slow));
    const int half = profile.slow / 2;
    for (int k = 0; k < Rdm::kRows; ++k) {
        for (int c = 0; c < profile.slow; ++c) line[c] = profile.at(k, c);
        plan.forward(line);
        for (int b = 0; b < profile.slow; ++b) {
            const int col = (b + half) % profile.slow;
            power[static_cast<std::size_t>(k) * Rdm::kCols + col] = std::norm(line[b]);
        }
    }
    return power;
}

Rdm doppler_fft(const RangeProfile& profile) {
    const auto power = doppler_power(profile);
    Rdm rdm;
    for (std::size_t i = 0; i < power.size(); ++i) {
        const double db = power[i] > 0.0 ? 10.0 * std::log10(power[i]) : kDbFloor;
        rdm.db[i] = static_cast<float>(std::isfinite(db) && db > kDbFloor ? db : kDbFloor);
    }
    return rdm;
}

Rdm simulate_frame(const Scene& scene, const RadarConfig& radar, double frame_start,
                   std::uint64_t seed) {
    validate(radar);
    const auto derived = derive_params(radar);
    const int chirps = radar.chirps_per_frame;

    std::vector<PropPath> static_paths;
    for (const StaticScatterer& s : scene.statics) {
        auto paths = trace_paths(scene, {s.position, s.reflectivity}, radar, 1);
        static_paths.insert(static_paths.end(), paths.begin(), paths.end());
    }

    std::vector<std::vector<PropPath>> moving;
    if (!scene.actors.empty()) {
        moving.resize(static_cast<std::size_t>(chirps));
        const double dt = radar.chirp_repetition;
        for (int c = 0; c < chirps; ++c) {
            const double t = frame_start + c * radar.chirp_repetition;
            auto& out = moving[static_cast<std::size_t>(c)];
            for (const Actor& actor : scene.actors) {
                const auto now = actor_points_at(actor, t);
                const auto before = actor_points_at(actor, t - dt);
                const auto after = actor_points_at(actor, t + dt);
                for (std::size_t i = 0; i < now.size(); ++i) {
                    auto paths =
                        trace_paths(scene, {now[i].position, now[i].reflectivity}, radar, 1);
                    for (PropPath& p : paths) {
                        assign_motion(p, before[i].position, after[i].position, dt,
                                      derived.wavelength);
                        out.push_back(p);
                    }
                }
            }
        }
    }

    Rdm rdm = doppler_fft(range_fft(synthesize(static_paths, moving, radar)));
    rdm.meta.label = scene.label();
    rdm.meta.scene = scene.kind;
    rdm.meta.seed = seed;
    return rdm;
}

}  // namespace radocc
