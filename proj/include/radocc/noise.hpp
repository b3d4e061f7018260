#pragma once

#include "radocc/fmcw.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace radocc {

/// Noise stream key for one (file, SNR) pair; the same triple always yields
/// the same noisy frame, whichever model consumes it.
std::uint64_t derive_noise_seed(std::uint64_t base_seed, std::string_view file_id, double snr_db);

struct NoisyFrame {
    Rdm frame;
    double signal_power = 0.0;   // mean squared pixel value of the input
    double noise_variance = 0.0;
    bool flagged = false;        // zero-power input, returned unchanged
};

/// Adds i.i.d. Gaussian noise of variance P_x / 10^(snr/10) to every pixel,
/// where P_x is the mean squared pixel of the stored (dB) frame.
NoisyFrame inject_awgn(const Rdm& frame, double snr_db, std::uint64_t seed);

struct CellKey {
    Domain domain = Domain::Synthetic;
    SceneKind scene = SceneKind::Corridor;
    int label = 0;

    auto operator<=>(const CellKey&) const = default;
};

std::string to_string(const CellKey& cell);
CellKey cell_of(const RdmMeta& meta);

struct CellStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Per-cell pixel statistics, fitted on training frames only.
class Standardizer {
public:
    static constexpr double kDefaultEpsilon = 1e-6;

    explicit Standardizer(double epsilon = kDefaultEpsilon) : epsilon_(epsilon) {}

    /// Pooled mean and population standard deviation over all pixels of the
    /// frames in each cell. Every cell in `required` must receive at least
    /// one frame.
    static Standardizer fit(std::span<const Rdm* const> frames,
                            std::span<const CellKey> required = {},
                            double epsilon = kDefaultEpsilon);

    bool contains(const CellKey& cell) const { return stats_.count(cell) != 0; }
    const CellStats& stats(const CellKey& cell) const;
    const std::map<CellKey, CellStats>& cells() const { return stats_; }
    double epsilon() const { return epsilon_; }

    void set(const CellKey& cell, CellStats s) { stats_[cell] = s; }

    std::vector<float> apply(const Rdm& frame, const CellKey& cell) const;
    std::vector<float> apply(const Rdm& frame) const { return apply(frame, cell_of(frame.meta)); }
    std::vector<double> invert(std::span<const float> standardized, const CellKey& cell) const;

    void save(const std::filesystem::path& path) const;
    static Standardizer load(const std::filesystem::path& path);

private:
    double epsilon_;
    std::map<CellKey, CellStats> stats_;
};

}  // namespace radocc
