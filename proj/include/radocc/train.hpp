#pragma once

#include "radocc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace radocc {

struct TrainConfig {
    int epochs = 15;
    int batch = 32;
    std::uint64_t seed = 11;
    nn::AdamConfig adam{};
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;  // mean batch loss weighted by batch size
    double acc = 0.0;   // running accuracy over the epoch's batches
};

struct TrainResult {
    std::vector<EpochLog> log;
    std::uint64_t pqc_evaluations = 0;
    double seconds = 0.0;
};

/// Mini-batch Adam with inverse-frequency class weights and a fresh seeded
/// shuffle each epoch. Throws DataError when a class is missing.
TrainResult train(Model<float>& model, std::span<const float* const> inputs,
                  std::span<const int> labels, const TrainConfig& cfg);

void write_train_log(const std::vector<EpochLog>& log, const std::filesystem::path& path);

/// argmax with ties resolved toward the lower class index.
template <typename T>
int argmax(const Probs<T>& p) {
    int best = 0;
    for (int c = 1; c < nn::kClasses; ++c) {
        if (p[c] > p[best]) best = c;
    }
    return best;
}

}  // namespace radocc
