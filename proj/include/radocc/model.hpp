#pragma once

#include "radocc/nn.hpp"
#include "radocc/qsim.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace radocc {

enum class Variant { Hqnn, EstimatorMatched, Dequantization, CompactCnn };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view text);
inline constexpr std::array<Variant, 4> kAllVariants{Variant::Hqnn, Variant::EstimatorMatched,
                                                     Variant::Dequantization, Variant::CompactCnn};

/// Two conv blocks (3x3 conv, ReLU, 2x2 max pool), adaptive average pool,
/// FC + ReLU, then a bottleneck FC to the 2-D latent (3 logits for the
/// compact CNN).
struct BackboneConfig {
    int height = 128;
    int width = 128;
    int conv1 = 16;
    int conv2 = 32;
    int pool_h = 2;
    int pool_w = 15;
    int hidden = 64;

    int flat() const { return conv2 * pool_h * pool_w; }

    /// 4x4 input, 2 and 3 channels, 1x1 pool, 4 hidden units.
    static BackboneConfig tiny() { return {4, 4, 2, 3, 1, 1, 4}; }
};

struct ModelOptions {
    qsim::Mode mode = qsim::Mode::Analytic;
    int shots = 4096;
    double latent_momentum = 0.1;
    double latent_eps = 1e-5;
};

template <typename T>
using Probs = std::array<T, nn::kClasses>;

/// One model variant over the shared backbone. Inputs are standardized
/// frames of config.height x config.width values.
template <typename T>
class Model {
public:
    Model(Variant variant, BackboneConfig config = {}, std::uint64_t init_seed = 0,
          ModelOptions options = {});

    Variant variant() const { return variant_; }
    const BackboneConfig& config() const { return cfg_; }
    const ModelOptions& options() const { return opts_; }
    nn::ParamStore<T>& params() { return params_; }
    const nn::ParamStore<T>& params() const { return params_; }
    qsim::PqcLayer& pqc() { return pqc_; }

    std::size_t count_trainable() const { return params_.count_trainable(); }
    /// Trainable parameters outside conv1/conv2/fc1/fc2 (for the compact CNN,
    /// its 64 -> 3 output layer).
    std::size_t count_head() const;

    struct BatchResult {
        T loss = 0;  // sum_i w_{y_i} l_i / sum_i w_{y_i}
        std::vector<Probs<T>> probs;
    };

    /// Forward and backward over a batch; gradients are written to
    /// params().grad (zeroed first). In training mode the latent EMA is
    /// updated from the batch before standardizing; the statistics are
    /// constants for the gradient either way.
    BatchResult loss_and_grad(std::span<const T* const> inputs, std::span<const int> labels,
                              std::span<const T, nn::kClasses> class_weights, bool training,
                              std::uint64_t shot_seed);

    /// Loss with frozen statistics and no gradient.
    T loss(std::span<const T* const> inputs, std::span<const int> labels,
           std::span<const T, nn::kClasses> class_weights, std::uint64_t shot_seed);

    std::vector<Probs<T>> predict(std::span<const T* const> inputs, std::uint64_t shot_seed);

    /// (<ZI>, <IZ>) fed to the HQNN head; empty for classical variants.
    std::vector<std::array<double, 2>> quantum_features(std::span<const T* const> inputs,
                                                        std::uint64_t shot_seed);

    nn::Checkpoint to_checkpoint() const;
    static Model from_checkpoint(const nn::Checkpoint& ckpt);

private:
    struct Cache;

    void forward_backbone(const T* input, Cache& c);
    void forward_head(Cache& c, std::uint64_t seed);
    std::array<T, 3> backward_head(Cache& c, const std::array<T, nn::kClasses>& logit_grad,
                                   std::uint64_t seed);
    void backward_backbone(Cache& c, const std::array<T, 3>& dfc2);
    void set_latent_stats(std::span<const Cache> caches, bool training);
    std::vector<Cache> run_forward(std::span<const T* const> inputs, std::uint64_t shot_seed,
                                   bool training);
    int latent_dim() const { return variant_ == Variant::CompactCnn ? nn::kClasses : 2; }

    Variant variant_;
    BackboneConfig cfg_;
    ModelOptions opts_;
    nn::ParamStore<T> params_;
    qsim::PqcLayer pqc_;

    // Latent standardization in effect for the current forward pass.
    std::array<T, 2> norm_mean_{};
    std::array<T, 2> norm_scale_{};

    // Scratch reused across samples.
    std::vector<T> conv_out_;
    std::vector<T> cols_;
    std::vector<T> scratch_;
    std::vector<T> grad_a_;
    std::vector<T> grad_b_;
};

/// Inverse class frequency normalized to mean 1. Throws DataError when a
/// class has no samples.
std::array<double, nn::kClasses> inverse_frequency_weights(std::span<const int> labels);

}  // namespace radocc
