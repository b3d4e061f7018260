#pragma once

#include "radocc/em_scatter.hpp"
#include "radocc/scene.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace radocc {

/// Complex fast-time x slow-time grid, chirp-major: data[m * fast + n].
/// Holds beat samples s[n, m] before the range FFT and S_r[k, m] after it.
struct ChirpFrame {
    int fast = 0;
    int slow = 0;
    std::vector<cplx> data;

    ChirpFrame() = default;
    ChirpFrame(int fast_len, int slow_len)
        : fast(fast_len), slow(slow_len),
          data(static_cast<std::size_t>(fast_len) * static_cast<std::size_t>(slow_len)) {}

    cplx& at(int n, int m) { return data[static_cast<std::size_t>(m) * fast + n]; }
    const cplx& at(int n, int m) const { return data[static_cast<std::size_t>(m) * fast + n]; }
};

using RangeProfile = ChirpFrame;

enum class Domain { Synthetic, Real };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view text);

struct RdmMeta {
    int label = 0;
    Domain domain = Domain::Synthetic;
    SceneKind scene = SceneKind::Corridor;
    std::string sequence;
    int frame = 0;
    std::uint64_t seed = 0;
};

inline constexpr double kDbFloor = -300.0;

/// 128 range bins (rows) x 128 Doppler bins (columns, zero Doppler at column
/// 64), power in dB.
struct Rdm {
    static constexpr int kRows = 128;
    static constexpr int kCols = 128;
    static constexpr int kZeroDopplerCol = kCols / 2;

    std::vector<float> db = std::vector<float>(static_cast<std::size_t>(kRows) * kCols,
                                               static_cast<float>(kDbFloor));
    RdmMeta meta{};

    float& at(int row, int col) { return db[static_cast<std::size_t>(row) * kCols + col]; }
    float at(int row, int col) const { return db[static_cast<std::size_t>(row) * kCols + col]; }
};

/// Symmetric N-point Hann window 0.5 (1 - cos(2 pi n / (N - 1))).
std::vector<double> hann_window(int n);

/// Range (m) at the centre of range bin k.
double range_of_bin(const RadarConfig& radar, int k);
/// Radial velocity (m/s) of an RDM column.
double velocity_of_column(const RadarConfig& radar, int col);

/// Beat samples for chirp m: sum over paths of
/// path_response * exp(j 2 pi (mu tau + f_D) n / fs). Paths whose beat
/// frequency exceeds fs/2 are dropped with a warning.
ChirpFrame synth_beat(std::span<const std::vector<PropPath>> paths_per_chirp,
                      const RadarConfig& radar);

/// Hann-windowed N-point DFT of every chirp.
RangeProfile range_fft(const ChirpFrame& frame);

/// |M-point DFT across chirps|^2 for the first 128 range bins, zero Doppler
/// shifted to column 64. Row-major 128 x 128 linear power.
std::vector<double> doppler_power(const RangeProfile& profile);

/// Power map converted to dB with kDbFloor substituted below the floor.
Rdm doppler_fft(const RangeProfile& profile);

/// Scene sampled at each chirp time frame_start + m * T_r, traced, synthesized,
/// and transformed. Deterministic in (scene, radar, frame_start); `seed` is
/// recorded in the metadata.
Rdm simulate_frame(const Scene& scene, const RadarConfig& radar, double frame_start,
                   std::uint64_t seed);

}  // namespace radocc
