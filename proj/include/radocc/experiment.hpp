#pragma once

#include "radocc/dataset.hpp"
#include "radocc/metrics.hpp"
#include "radocc/model.hpp"
#include "radocc/noise.hpp"
#include "radocc/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace radocc {

struct ExperimentConfig {
    std::vector<SceneKind> scenes{SceneKind::Corridor, SceneKind::Room};
    std::string scene_file;          // optional YAML scene replacing the presets
    int sequences_per_cell = 10;
    int frames_per_sequence = 10;
    double frame_interval = 0.5;     // s between frame starts within a sequence
    std::uint64_t dataset_seed = 1234;
    std::uint64_t split_seed = 7;
    double train_fraction = 0.8;

    std::vector<Variant> variants{Variant::Hqnn, Variant::EstimatorMatched,
                                  Variant::Dequantization, Variant::CompactCnn};
    int epochs = 15;
    int batch = 32;
    qsim::Mode mode = qsim::Mode::Shots;
    int shots = 4096;
    bool deterministic = true;

    std::vector<double> snrs{-20.0, -10.0, 10.0, 20.0};
    std::uint64_t noise_seed = 2024;
    std::vector<std::uint64_t> seeds{11, 22, 33, 42, 55};
    std::vector<double> fractions{0.10, 0.30, 0.50};

    std::filesystem::path out = "out";

    int frames_per_cell() const { return sequences_per_cell * frames_per_sequence; }
    void validate() const;
};

/// YAML config; keys mirror the struct fields (variants, scenes and mode as
/// strings). Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Paths inside the output tree.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path dataset() const { return root / "dataset"; }
    std::filesystem::path manifest() const { return dataset() / "manifest.csv"; }
    std::filesystem::path split() const { return dataset() / "split.csv"; }
    std::filesystem::path standardizer() const { return dataset() / "standardizer.csv"; }
    std::filesystem::path models() const { return root / "models"; }
    std::filesystem::path eval() const { return root / "eval"; }
    std::filesystem::path ablation() const { return root / "ablation"; }
    std::filesystem::path report() const { return root / "report"; }

    /// "<variant>_seed<s>_frac<f>" with f printed to two decimals.
    static std::string run_name(Variant v, std::uint64_t seed, double fraction);
    std::filesystem::path checkpoint(Variant v, std::uint64_t seed, double fraction) const;
    std::filesystem::path train_log(Variant v, std::uint64_t seed, double fraction) const;
    std::filesystem::path eval_csv(Variant v, std::uint64_t seed, double fraction) const;
};

inline constexpr const char* kEvalHeader = "variant,domain,snr_db,seed,acc,ba,macro_f1,rec_pop";
inline constexpr const char* kAblationHeader = "variant,fraction,seed,ba";

/// Generates every (scene, label, sequence) recording, writes RDM1 frames,
/// the manifest, the sequence-level split, and the training-split
/// standardizer. Returns the manifest.
Manifest cmd_simulate(const ExperimentConfig& cfg);

struct TrainSummary {
    std::filesystem::path checkpoint;
    std::size_t train_frames = 0;
    double final_loss = 0.0;
    double final_acc = 0.0;
    std::uint64_t pqc_evaluations = 0;
    double seconds = 0.0;
};

TrainSummary cmd_train(const ExperimentConfig& cfg, Variant variant, std::uint64_t seed,
                       double fraction);

/// Clean plus every configured SNR on the full test split. Writes the eval
/// CSV, per-SNR confusion CSVs and the noisy-frame hashes.
std::vector<MetricsReport> cmd_eval(const ExperimentConfig& cfg, Variant variant,
                                    std::uint64_t seed, double fraction,
                                    bool include_noise = true);

struct AblationRow {
    Variant variant;
    double fraction;
    std::uint64_t seed;
    double ba;
};

/// Trains and clean-evaluates each variant x fraction x seed; writes
/// ablation.csv and the variant x fraction median table.
std::vector<AblationRow> cmd_ablate(const ExperimentConfig& cfg);

/// Loads the standardized test or train frames of the dataset.
struct LoadedSplit {
    Manifest manifest;
    Split split;
    Standardizer standardizer;
};
LoadedSplit load_split(const ExperimentConfig& cfg);

}  // namespace radocc
