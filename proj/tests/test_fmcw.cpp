#include "radocc/fft.hpp"
#include "radocc/fmcw.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace radocc;
using Catch::Approx;

namespace {

PropPath path_at(double range, double velocity, double wavelength, double amplitude = 1.0) {
    PropPath p;
    p.length = range;
    p.delay = 2.0 * range / kSpeedOfLight;
    p.radial_velocity = velocity;
    p.doppler = 2.0 * velocity / wavelength;
    p.amplitude = amplitude;
    return p;
}

// One point target per chirp, moving at constant radial velocity.
std::vector<std::vector<PropPath>> target(const RadarConfig& radar, double range, double velocity,
                                          double amplitude = 1.0) {
    const double lambda = derive_params(radar).wavelength;
    std::vector<std::vector<PropPath>> out(static_cast<std::size_t>(radar.chirps_per_frame));
    for (int m = 0; m < radar.chirps_per_frame; ++m) {
        out[static_cast<std::size_t>(m)] = {
            path_at(range + velocity * m * radar.chirp_repetition, velocity, lambda, amplitude)};
    }
    return out;
}

std::pair<int, int> argmax_cell(const Rdm& rdm) {
    const auto it = std::max_element(rdm.db.begin(), rdm.db.end());
    const auto idx = static_cast<int>(it - rdm.db.begin());
    return {idx / Rdm::kCols, idx % Rdm::kCols};
}

double energy(const std::vector<cplx>& v) {
    double e = 0;
    for (const auto& z : v) e += std::norm(z);
    return e;
}

}  // namespace

TEST_CASE("beat frequency of a static 5 m return") {
    const RadarConfig radar;
    const auto d = derive_params(radar);
    const double fb = d.chirp_slope * 2.0 * 5.0 / kSpeedOfLight;
    CHECK(fb == Approx(114.8e3).margin(0.2e3));
    const auto frame = synth_beat(target(radar, 5.0, 0.0), radar);
    const double step = std::arg(frame.at(1, 0) / frame.at(0, 0));
    CHECK(step == Approx(2 * std::numbers::pi * fb / radar.sample_rate).margin(1e-9));
}

TEST_CASE("beat synthesis is linear") {
    const RadarConfig radar;
    std::vector<std::vector<PropPath>> none(static_cast<std::size_t>(radar.chirps_per_frame));
    const auto zero = synth_beat(none, radar);
    CHECK(energy(zero.data) == 0.0);

    auto one = target(radar, 7.3, 0.4);
    auto two = one;
    for (auto& chirp : two) chirp.push_back(chirp.front());
    const auto a = synth_beat(one, radar);
    const auto b = synth_beat(two, radar);
    for (std::size_t i = 0; i < a.data.size(); i += 97) {
        CHECK(std::abs(b.data[i] - 2.0 * a.data[i]) < 1e-12);
    }
}

TEST_CASE("paths beyond the sampling bandwidth are dropped") {
    const RadarConfig radar;
    const auto frame = synth_beat(target(radar, 50.0, 0.0), radar);
    CHECK(energy(frame.data) == 0.0);
}

TEST_CASE("hann window definition and energy") {
    const auto w = hann_window(256);
    CHECK(w.front() == 0.0);
    CHECK(w.back() == Approx(0.0).margin(1e-15));
    double e = 0;
    for (double x : w) e += x * x;
    CHECK(e == Approx(0.375 * 255));
}

TEST_CASE("fft matches a direct DFT and zero maps to zero") {
    FftPlan plan(16);
    std::vector<cplx> x(16);
    for (int n = 0; n < 16; ++n) x[n] = {std::cos(0.3 * n * n), std::sin(1.7 * n)};
    auto y = x;
    plan.forward(y);
    for (int k = 0; k < 16; ++k) {
        cplx ref{};
        for (int n = 0; n < 16; ++n) ref += x[n] * std::polar(1.0, -2 * std::numbers::pi * k * n / 16);
        CHECK(std::abs(y[k] - ref) < 1e-12);
    }
    std::vector<cplx> z(16);
    plan.forward(z);
    CHECK(energy(z) == 0.0);
}

TEST_CASE("range fft peak and Parseval") {
    const RadarConfig radar;
    const auto beat = synth_beat(target(radar, 5.0, 0.0), radar);
    const auto prof = range_fft(beat);
    int best = 0;
    for (int k = 0; k < prof.fast; ++k) {
        if (std::abs(prof.at(k, 0)) > std::abs(prof.at(best, 0))) best = k;
    }
    CHECK(best == 29);

    const auto w = hann_window(radar.samples_per_chirp);
    for (int m : {0, 77}) {
        double in = 0, out = 0;
        for (int n = 0; n < beat.fast; ++n) {
            in += std::norm(beat.at(n, m) * w[n]);
            out += std::norm(prof.at(n, m));
        }
        CHECK(out == Approx(beat.fast * in).epsilon(1e-6));
    }
    const auto zero = range_fft(ChirpFrame(radar.samples_per_chirp, radar.chirps_per_frame));
    CHECK(energy(zero.data) == 0.0);
}

TEST_CASE("doppler stage Parseval over the kept range bins") {
    const RadarConfig radar;
    const auto prof = range_fft(synth_beat(target(radar, 8.0, 1.3), radar));
    const auto power = doppler_power(prof);
    double in = 0;
    for (int m = 0; m < prof.slow; ++m) {
        for (int k = 0; k < Rdm::kRows; ++k) in += std::norm(prof.at(k, m));
    }
    double out = 0;
    for (double p : power) out += p;
    CHECK(out == Approx(prof.slow * in).epsilon(1e-6));
}

TEST_CASE("static scatterer sits in the zero-Doppler column") {
    const RadarConfig radar;
    const Rdm rdm = doppler_fft(range_fft(synth_beat(target(radar, 5.0, 0.0), radar)));
    const auto [row, col] = argmax_cell(rdm);
    CHECK(std::abs(row - 29) <= 1);
    CHECK(col == Rdm::kZeroDopplerCol);
    for (int r = 0; r < Rdm::kRows; ++r) {
        for (int c = 0; c < Rdm::kCols; ++c) {
            if (c != Rdm::kZeroDopplerCol) REQUIRE(rdm.at(r, c) == static_cast<float>(kDbFloor));
        }
    }
}

TEST_CASE("one metre per second lands fifteen Doppler bins off centre") {
    const RadarConfig radar;
    for (double v : {1.0, -1.0}) {
        const Rdm rdm = doppler_fft(range_fft(synth_beat(target(radar, 5.0, v), radar)));
        const auto [row, col] = argmax_cell(rdm);
        CHECK(std::abs(row - 29) <= 1);
        CHECK(std::abs((col - Rdm::kZeroDopplerCol) - (v > 0 ? 15 : -15)) <= 1);
    }
    CHECK(velocity_of_column(radar, Rdm::kZeroDopplerCol + 15) ==
          Approx(15 * derive_params(radar).velocity_resolution));
}

TEST_CASE("peak row follows R / delta R for static targets") {
    const RadarConfig radar;
    const double dr = derive_params(radar).range_resolution;
    for (double r : {1.1, 3.7, 9.99, 14.2, 20.5}) {
        const Rdm rdm = doppler_fft(range_fft(synth_beat(target(radar, r, 0.0), radar)));
        CHECK(std::abs(argmax_cell(rdm).first - static_cast<int>(std::lround(r / dr))) <= 1);
    }
    CHECK(range_of_bin(radar, 10) == Approx(10 * dr));
}

TEST_CASE("amplitude scaling scales linear power quadratically") {
    const RadarConfig radar;
    const auto a = doppler_power(range_fft(synth_beat(target(radar, 6.0, 0.7), radar)));
    const auto b = doppler_power(range_fft(synth_beat(target(radar, 6.0, 0.7, 3.0), radar)));
    const double peak = *std::max_element(a.begin(), a.end());
    for (std::size_t i = 0; i < a.size(); i += 61) {
        CHECK(std::abs(b[i] - 9.0 * a[i]) <= 1e-9 * 9.0 * peak);
    }
}

TEST_CASE("empty room frame is flat outside zero Doppler") {
    const Scene room = room_preset();
    const Rdm rdm = simulate_frame(room, preset_radar(SceneKind::Room), 0.0, 5);
    int above_floor = 0;
    for (int r = 0; r < Rdm::kRows; ++r) {
        for (int c = 0; c < Rdm::kCols; ++c) {
            if (c != Rdm::kZeroDopplerCol) {
                REQUIRE(rdm.at(r, c) == static_cast<float>(kDbFloor));
            } else if (rdm.at(r, c) > kDbFloor) {
                ++above_floor;
            }
        }
    }
    CHECK(above_floor > 0);
    CHECK(rdm.meta.label == 0);
    CHECK(rdm.meta.seed == 5);
}

TEST_CASE("walking actor produces Doppler energy at the predicted bin") {
    Scene s = corridor_preset();
    s.actors.push_back(make_walker({Vec3(4.0, 0.0, 0.0), Vec3(11.0, 0.0, 0.0)}, 1.0, 0.0));
    const RadarConfig radar = preset_radar(SceneKind::Corridor);
    const Rdm rdm = simulate_frame(s, radar, 1.0, 1);
    const auto d = derive_params(radar);
    const int row = static_cast<int>(std::lround(5.0 / d.range_resolution));
    const int col = Rdm::kZeroDopplerCol + 15;
    float best = static_cast<float>(kDbFloor);
    for (int r = row - 2; r <= row + 2; ++r) {
        for (int c = col - 2; c <= col + 2; ++c) best = std::max(best, rdm.at(r, c));
    }
    CHECK(best > kDbFloor + 20.0);
    CHECK(rdm.meta.label == 1);
}

TEST_CASE("two actors at distinct ranges give two range peaks") {
    Scene s = corridor_preset();
    s.actors.push_back(make_walker({Vec3(4.0, 0.3, 0.0), Vec3(11.0, 0.3, 0.0)}, 1.0, 0.0));
    s.actors.push_back(make_walker({Vec3(9.0, -0.3, 0.0), Vec3(1.0, -0.3, 0.0)}, 1.2, 0.0));
    const RadarConfig radar = preset_radar(SceneKind::Corridor);
    const Rdm rdm = simulate_frame(s, radar, 0.0, 2);
    const double dr = derive_params(radar).range_resolution;
    auto moving_peak = [&](int lo, int hi) {
        float best = static_cast<float>(kDbFloor);
        for (int r = lo; r <= hi; ++r) {
            for (int c = 0; c < Rdm::kCols; ++c) {
                if (c != Rdm::kZeroDopplerCol) best = std::max(best, rdm.at(r, c));
            }
        }
        return best;
    };
    const int r1 = static_cast<int>(std::lround(4.0 / dr));
    const int r2 = static_cast<int>(std::lround(9.0 / dr));
    const float gap = moving_peak(r1 + 8, r2 - 8);
    CHECK(moving_peak(r1 - 3, r1 + 3) > gap + 10.0f);
    CHECK(moving_peak(r2 - 3, r2 + 3) > gap + 10.0f);
    CHECK(rdm.meta.label == 2);
}

TEST_CASE("simulate_frame is bit-identical for identical inputs") {
    const Scene s = random_occupied_scene(SceneKind::Room, 2, 6.0, 99);
    const RadarConfig radar = preset_radar(SceneKind::Room);
    const Rdm a = simulate_frame(s, radar, 1.5, 0);
    const Rdm b = simulate_frame(s, radar, 1.5, 0);
    CHECK(a.db == b.db);
}
