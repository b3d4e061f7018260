#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace radocc::nn {

// Layout conventions: feature maps are channel-major (c, y, x), row-major
// within a channel. Linear weights are (out, in) row-major. Conv weights are
// (out, in, 3, 3).

// ---------------------------------------------------------------------------
// Conv 3x3, stride 1, padding 1

/// cols has (channels * 9) rows and height * width columns, row-major.
template <typename T>
void im2col3x3(const T* in, int channels, int height, int width, T* cols);

/// Adds the column-matrix gradient back onto the input gradient.
template <typename T>
void col2im3x3(const T* cols, int channels, int height, int width, T* in_grad);

/// out (c_out, h, w) = w * im2col(in) + b. `cols` is scratch of
/// c_in * 9 * h * w elements.
template <typename T>
void conv3x3_forward(const T* in, int c_in, int height, int width, const T* weight,
                     const T* bias, int c_out, T* out, T* cols);

/// Accumulates dW and db; writes dIn when `in_grad` is non-null (overwriting).
/// `cols` must hold im2col(in); `scratch` is c_in * 9 * h * w elements.
template <typename T>
void conv3x3_backward(const T* cols, const T* out_grad, int c_in, int height, int width,
                      const T* weight, int c_out, T* weight_grad, T* bias_grad, T* in_grad,
                      T* scratch);

// ---------------------------------------------------------------------------
// Pooling and activations

/// 2x2 max pool, stride 2. `argmax` records the winning position (0..3,
/// dy * 2 + dx) of each output cell.
template <typename T>
void maxpool2_forward(const T* in, int channels, int height, int width, T* out,
                      std::uint8_t* argmax);

/// Routes each output gradient to its argmax input; `in_grad` is overwritten.
/// When `relu_out` is given (the pooled outputs of a ReLU layer), gradients
/// of cells whose pooled value is not positive are dropped, which is the ReLU
/// derivative folded into the pool.
template <typename T>
void maxpool2_backward(const T* out_grad, const std::uint8_t* argmax, const T* relu_out,
                       int channels, int height, int width, T* in_grad);

/// Bin i along an axis of length n split into k bins covers
/// [floor(i n / k), ceil((i + 1) n / k)).
struct AdaptiveBin {
    int begin;
    int end;
};
std::vector<AdaptiveBin> adaptive_bins(int n, int k);

template <typename T>
void adaptive_avgpool_forward(const T* in, int channels, int height, int width, int out_h,
                              int out_w, T* out);

/// Accumulates into in_grad.
template <typename T>
void adaptive_avgpool_backward(const T* out_grad, int channels, int height, int width,
                               int out_h, int out_w, T* in_grad);

template <typename T>
void relu_inplace(T* x, std::size_t n);

/// y = W x + b.
template <typename T>
void linear_forward(const T* in, int n_in, const T* weight, const T* bias, int n_out, T* out);

/// Accumulates dW, db; writes dx when `in_grad` is non-null.
template <typename T>
void linear_backward(const T* in, const T* out_grad, int n_in, const T* weight, int n_out,
                     T* weight_grad, T* bias_grad, T* in_grad);

/// pi / (1 + exp(-x)), in (0, pi).
template <typename T>
T logistic_squash(T x);
/// d/dx of logistic_squash: pi sigma(x) (1 - sigma(x)).
template <typename T>
T logistic_squash_grad(T x);

inline constexpr int kClasses = 3;

template <typename T>
struct SoftmaxCe {
    std::array<T, kClasses> probs;
    T loss;                               // -w_y log p_y
    std::array<T, kClasses> logit_grad;   // w_y (p - onehot(y))
};

template <typename T>
SoftmaxCe<T> softmax_ce(std::span<const T, kClasses> logits, int label,
                        std::span<const T, kClasses> class_weights);

template <typename T>
std::array<T, kClasses> softmax(std::span<const T, kClasses> logits);

// ---------------------------------------------------------------------------
// Parameters and optimizer

template <typename T>
struct Param {
    std::string name;
    std::vector<int> shape;
    bool trainable = true;
    std::vector<T> value;
    std::vector<T> grad;

    std::size_t size() const { return value.size(); }
};

template <typename T>
class ParamStore {
public:
    Param<T>& add(const std::string& name, std::vector<int> shape, bool trainable = true);
    Param<T>& get(const std::string& name);
    const Param<T>& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<Param<T>>& all() { return params_; }
    const std::vector<Param<T>>& all() const { return params_; }

    void zero_grad();
    std::size_t count_trainable() const;

    /// Copies values (not gradients) from a store of another precision with
    /// the same layout.
    template <typename U>
    void assign_from(const ParamStore<U>& other);

private:
    std::vector<Param<T>> params_;
};

/// Kaiming-uniform U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
template <typename T>
void kaiming_uniform(Param<T>& p, int fan_in, std::uint64_t seed);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Bias-corrected update of every trainable parameter from its gradient.
    void step(ParamStore<T>& store);
    long steps() const { return t_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<T>> m_;
    std::vector<std::vector<T>> v_;
};

// ---------------------------------------------------------------------------
// CKPT1 checkpoints

/// "CKPT1", u32 header length, header text (key=value lines), u32 entry
/// count, per entry {u32 name length, name, u8 trainable, u32 rank, u32 dims,
/// u64 offset in floats}, u64 value count, f32 blob. Little-endian.
struct Checkpoint {
    std::map<std::string, std::string> header;
    ParamStore<float> params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
template <typename U>
void ParamStore<T>::assign_from(const ParamStore<U>& other) {
    const auto& src = other.all();
    if (src.size() != params_.size()) throw std::invalid_argument("parameter layouts differ");
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (src[i].name != params_[i].name || src[i].size() != params_[i].size()) {
            throw std::invalid_argument("parameter '" + src[i].name + "' does not match '" +
                                        params_[i].name + "'");
        }
        for (std::size_t j = 0; j < params_[i].size(); ++j) {
            params_[i].value[j] = static_cast<T>(src[i].value[j]);
        }
    }
}

}  // namespace radocc::nn
