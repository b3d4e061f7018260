#include "radocc/nn.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace radocc::nn {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;

}  // namespace

template <typename T>
void im2col3x3(const T* in, int channels, int height, int width, T* cols) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < channels; ++c) {
        const T* src = in + c * plane;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* dst = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
                const int dx = kx - 1;
                for (int y = 0; y < height; ++y) {
                    T* row = dst + static_cast<std::size_t>(y) * width;
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= height) {
                        std::fill(row, row + width, T(0));
                        continue;
                    }
                    const T* srow = src + static_cast<std::size_t>(sy) * width;
                    // Columns whose source x + dx falls inside [0, width).
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(width, width - dx);
                    std::fill(row, row + x0, T(0));
                    std::copy(srow + x0 + dx, srow + x1 + dx, row + x0);
                    std::fill(row + x1, row + width, T(0));
                }
            }
        }
    }
}

template <typename T>
void col2im3x3(const T* cols, int channels, int height, int width, T* in_grad) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < channels; ++c) {
        T* dst = in_grad + c * plane;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* src = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
                const int dx = kx - 1;
                const int x0 = std::max(0, -dx);
                const int x1 = std::min(width, width - dx);
                for (int y = 0; y < height; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= height) continue;
                    const T* row = src + static_cast<std::size_t>(y) * width;
                    T* drow = dst + static_cast<std::size_t>(sy) * width;
                    for (int x = x0; x < x1; ++x) drow[x + dx] += row[x];
                }
            }
        }
    }
}

template <typename T>
void conv3x3_forward(const T* in, int c_in, int height, int width, const T* weight,
                     const T* bias, int c_out, T* out, T* cols) {
    const int plane = height * width;
    im2col3x3(in, c_in, height, width, cols);
    CMapR<T> w(weight, c_out, c_in * 9);
    CMapR<T> x(cols, c_in * 9, plane);
    MapR<T> y(out, c_out, plane);
    y.noalias() = w * x;
    for (int o = 0; o < c_out; ++o) y.row(o).array() += bias[o];
}

template <typename T>
void conv3x3_backward(const T* cols, const T* out_grad, int c_in, int height, int width,
                      const T* weight, int c_out, T* weight_grad, T* bias_grad, T* in_grad,
                      T* scratch) {
    const int plane = height * width;
    CMapR<T> x(cols, c_in * 9, plane);
    CMapR<T> dy(out_grad, c_out, plane);
    MapR<T> dw(weight_grad, c_out, c_in * 9);
    dw.noalias() += dy * x.transpose();
    // Plain loop: Eigen's vectorized sum peels by pointer alignment, which
    // makes the rounding depend on where the buffer was allocated.
    for (int o = 0; o < c_out; ++o) {
        const T* row = out_grad + static_cast<std::size_t>(o) * plane;
        T acc = 0;
        for (int i = 0; i < plane; ++i) acc += row[i];
        bias_grad[o] += acc;
    }
    if (in_grad) {
        CMapR<T> w(weight, c_out, c_in * 9);
        MapR<T> dx(scratch, c_in * 9, plane);
        dx.noalias() = w.transpose() * dy;
        std::fill(in_grad, in_grad + static_cast<std::size_t>(c_in) * plane, T(0));
        col2im3x3(scratch, c_in, height, width, in_grad);
    }
}

template <typename T>
void maxpool2_forward(const T* in, int channels, int height, int width, T* out,
                      std::uint8_t* argmax) {
    if (height % 2 != 0 || width % 2 != 0) {
        throw ConfigError("maxpool2 needs even spatial dimensions");
    }
    const int oh = height / 2;
    const int ow = width / 2;
    for (int c = 0; c < channels; ++c) {
        const T* src = in + static_cast<std::size_t>(c) * height * width;
        T* dst = out + static_cast<std::size_t>(c) * oh * ow;
        std::uint8_t* arg = argmax + static_cast<std::size_t>(c) * oh * ow;
        for (int y = 0; y < oh; ++y) {
            const T* r0 = src + static_cast<std::size_t>(2 * y) * width;
            const T* r1 = r0 + width;
            for (int x = 0; x < ow; ++x) {
                T best = r0[2 * x];
                std::uint8_t k = 0;
                if (r0[2 * x + 1] > best) { best = r0[2 * x + 1]; k = 1; }
                if (r1[2 * x] > best) { best = r1[2 * x]; k = 2; }
                if (r1[2 * x + 1] > best) { best = r1[2 * x + 1]; k = 3; }
                dst[y * ow + x] = best;
                arg[y * ow + x] = k;
            }
        }
    }
}

template <typename T>
void maxpool2_backward(const T* out_grad, const std::uint8_t* argmax, const T* relu_out,
                       int channels, int height, int width, T* in_grad) {
    const int oh = height / 2;
    const int ow = width / 2;
    std::fill(in_grad, in_grad + static_cast<std::size_t>(channels) * height * width, T(0));
    for (int c = 0; c < channels; ++c) {
        const std::size_t obase = static_cast<std::size_t>(c) * oh * ow;
        T* dst = in_grad + static_cast<std::size_t>(c) * height * width;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                const std::size_t o = obase + static_cast<std::size_t>(y) * ow + x;
                if (relu_out && !(relu_out[o] > T(0))) continue;
                const int k = argmax[o];
                dst[static_cast<std::size_t>(2 * y + (k >> 1)) * width + 2 * x + (k & 1)] =
                    out_grad[o];
            }
        }
    }
}

std::vector<AdaptiveBin> adaptive_bins(int n, int k) {
    std::vector<AdaptiveBin> bins(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        bins[i].begin = (i * n) / k;
        bins[i].end = ((i + 1) * n + k - 1) / k;
    }
    return bins;
}

template <typename T>
void adaptive_avgpool_forward(const T* in, int channels, int height, int width, int out_h,
                              int out_w, T* out) {
    const auto rows = adaptive_bins(height, out_h);
    const auto cols = adaptive_bins(width, out_w);
    for (int c = 0; c < channels; ++c) {
        const T* src = in + static_cast<std::size_t>(c) * height * width;
        for (int i = 0; i < out_h; ++i) {
            for (int j = 0; j < out_w; ++j) {
                T sum = 0;
                for (int y = rows[i].begin; y < rows[i].end; ++y) {
                    for (int x = cols[j].begin; x < cols[j].end; ++x) sum += src[y * width + x];
                }
                const int count = (rows[i].end - rows[i].begin) * (cols[j].end - cols[j].begin);
                out[(static_cast<std::size_t>(c) * out_h + i) * out_w + j] = sum / T(count);
            }
        }
    }
}

template <typename T>
void adaptive_avgpool_backward(const T* out_grad, int channels, int height, int width,
                               int out_h, int out_w, T* in_grad) {
    const auto rows = adaptive_bins(height, out_h);
    const auto cols = adaptive_bins(width, out_w);
    for (int c = 0; c < channels; ++c) {
        T* dst = in_grad + static_cast<std::size_t>(c) * height * width;
        for (int i = 0; i < out_h; ++i) {
            for (int j = 0; j < out_w; ++j) {
                const int count = (rows[i].end - rows[i].begin) * (cols[j].end - cols[j].begin);
                const T g = out_grad[(static_cast<std::size_t>(c) * out_h + i) * out_w + j] / T(count);
                for (int y = rows[i].begin; y < rows[i].end; ++y) {
                    for (int x = cols[j].begin; x < cols[j].end; ++x) dst[y * width + x] += g;
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void linear_forward(const T* in, int n_in, const T* weight, const T* bias, int n_out, T* out) {
    for (int o = 0; o < n_out; ++o) {
        const T* w = weight + static_cast<std::size_t>(o) * n_in;
        T acc = bias[o];
        for (int i = 0; i < n_in; ++i) acc += w[i] * in[i];
        out[o] = acc;
    }
}

template <typename T>
void linear_backward(const T* in, const T* out_grad, int n_in, const T* weight, int n_out,
                     T* weight_grad, T* bias_grad, T* in_grad) {
    for (int o = 0; o < n_out; ++o) {
        const T g = out_grad[o];
        bias_grad[o] += g;
        T* dw = weight_grad + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) dw[i] += g * in[i];
    }
    if (in_grad) {
        std::fill(in_grad, in_grad + n_in, T(0));
        for (int o = 0; o < n_out; ++o) {
            const T g = out_grad[o];
            const T* w = weight + static_cast<std::size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) in_grad[i] += g * w[i];
        }
    }
}

template <typename T>
T logistic_squash(T x) {
    return T(std::numbers::pi) / (T(1) + std::exp(-x));
}

template <typename T>
T logistic_squash_grad(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return T(std::numbers::pi) * s * (T(1) - s);
}

template <typename T>
std::array<T, kClasses> softmax(std::span<const T, kClasses> z) {
    const T m = std::max({z[0], z[1], z[2]});
    std::array<T, kClasses> p{};
    T sum = 0;
    for (int c = 0; c < kClasses; ++c) {
        p[c] = std::exp(z[c] - m);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

template <typename T>
SoftmaxCe<T> softmax_ce(std::span<const T, kClasses> z, int label,
                        std::span<const T, kClasses> w) {
    if (label < 0 || label >= kClasses) throw ConfigError("label out of range");
    SoftmaxCe<T> out{};
    out.probs = softmax(z);
    const T m = std::max({z[0], z[1], z[2]});
    T sum = 0;
    for (int c = 0; c < kClasses; ++c) sum += std::exp(z[c] - m);
    out.loss = w[label] * (std::log(sum) + m - z[label]);
    for (int c = 0; c < kClasses; ++c) {
        out.logit_grad[c] = w[label] * (out.probs[c] - (c == label ? T(1) : T(0)));
    }
    return out;
}

// ---------------------------------------------------------------------------

template <typename T>
Param<T>& ParamStore<T>::add(const std::string& name, std::vector<int> shape, bool trainable) {
    if (contains(name)) throw ConfigError("duplicate parameter " + name);
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    Param<T> p;
    p.name = name;
    p.shape = std::move(shape);
    p.trainable = trainable;
    p.value.assign(n, T(0));
    p.grad.assign(n, T(0));
    params_.push_back(std::move(p));
    return params_.back();
}

template <typename T>
Param<T>& ParamStore<T>::get(const std::string& name) {
    for (auto& p : params_) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown parameter " + name);
}

template <typename T>
const Param<T>& ParamStore<T>::get(const std::string& name) const {
    for (const auto& p : params_) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown parameter " + name);
}

template <typename T>
bool ParamStore<T>::contains(const std::string& name) const {
    return std::any_of(params_.begin(), params_.end(),
                       [&](const Param<T>& p) { return p.name == name; });
}

template <typename T>
void ParamStore<T>::zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
}

template <typename T>
std::size_t ParamStore<T>::count_trainable() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        if (p.trainable) n += p.size();
    }
    return n;
}

template <typename T>
void kaiming_uniform(Param<T>& p, int fan_in, std::uint64_t seed) {
    const double bound = std::sqrt(6.0 / fan_in);
    CounterRng rng(seed);
    for (auto& v : p.value) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void Adam<T>::step(ParamStore<T>& store) {
    auto& params = store.all();
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.size(), T(0));
            v_.emplace_back(p.size(), T(0));
        }
    }
    if (m_.size() != params.size()) throw ConfigError("optimizer state does not match parameters");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T step = static_cast<T>(cfg_.lr / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(cfg_.eps);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        if (!p.trainable) continue;
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const T g = p.grad[i];
            m[i] = b1 * m[i] + (T(1) - b1) * g;
            v[i] = b2 * v[i] + (T(1) - b2) * g * g;
            p.value[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kCkptMagic[5] = {'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    Reader(const std::string& bytes, std::string origin) : b_(bytes), origin_(std::move(origin)) {}

    std::uint64_t uint(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    std::string text(std::size_t n) {
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n) const {
        if (pos_ + n > b_.size()) throw DataError(origin_ + ": truncated checkpoint");
    }

private:
    const std::string& b_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::string out(kCkptMagic, 5);
    std::string header;
    for (const auto& [k, v] : ckpt.header) header += k + "=" + v + "\n";
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out += header;
    const auto& params = ckpt.params.all();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    std::uint64_t offset = 0;
    for (const auto& p : params) {
        put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out += p.name;
        out.push_back(p.trainable ? 1 : 0);
        put_u32(out, static_cast<std::uint32_t>(p.shape.size()));
        for (int d : p.shape) put_u32(out, static_cast<std::uint32_t>(d));
        put_u64(out, offset);
        offset += p.size();
    }
    put_u64(out, offset);
    for (const auto& p : params) {
        for (float v : p.value) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint " + path.string());
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw DataError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read checkpoint " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string bytes = ss.str();
    Reader r(bytes, path.string());
    if (r.text(5) != std::string(kCkptMagic, 5)) throw DataError(path.string() + ": not a CKPT1 file");

    Checkpoint ckpt;
    const std::string header = r.text(r.uint(4));
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) ckpt.header[line.substr(0, eq)] = line.substr(eq + 1);
    }

    struct Entry {
        std::string name;
        bool trainable;
        std::vector<int> shape;
        std::uint64_t offset;
    };
    std::vector<Entry> entries(r.uint(4));
    for (auto& e : entries) {
        e.name = r.text(r.uint(4));
        e.trainable = r.uint(1) != 0;
        e.shape.resize(r.uint(4));
        for (int& d : e.shape) d = static_cast<int>(r.uint(4));
        e.offset = r.uint(8);
    }
    const std::uint64_t total = r.uint(8);
    std::vector<float> blob(total);
    for (auto& v : blob) v = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4)));
    for (const auto& e : entries) {
        auto& p = ckpt.params.add(e.name, e.shape, e.trainable);
        if (e.offset + p.size() > total) throw DataError(path.string() + ": entry exceeds blob");
        std::copy_n(blob.begin() + static_cast<std::ptrdiff_t>(e.offset), p.size(), p.value.begin());
    }
    return ckpt;
}

#define RADOCC_NN_INSTANTIATE(T)                                                              \
    template void im2col3x3<T>(const T*, int, int, int, T*);                                  \
    template void col2im3x3<T>(const T*, int, int, int, T*);                                  \
    template void conv3x3_forward<T>(const T*, int, int, int, const T*, const T*, int, T*, T*); \
    template void conv3x3_backward<T>(const T*, const T*, int, int, int, const T*, int, T*, T*, \
                                      T*, T*);                                                \
    template void maxpool2_forward<T>(const T*, int, int, int, T*, std::uint8_t*);            \
    template void maxpool2_backward<T>(const T*, const std::uint8_t*, const T*, int, int, int, \
                                       T*);                                                   \
    template void adaptive_avgpool_forward<T>(const T*, int, int, int, int, int, T*);         \
    template void adaptive_avgpool_backward<T>(const T*, int, int, int, int, int, T*);        \
    template void relu_inplace<T>(T*, std::size_t);                                           \
    template void linear_forward<T>(const T*, int, const T*, const T*, int, T*);              \
    template void linear_backward<T>(const T*, const T*, int, const T*, int, T*, T*, T*);     \
    template T logistic_squash<T>(T);                                                         \
    template T logistic_squash_grad<T>(T);                                                    \
    template std::array<T, kClasses> softmax<T>(std::span<const T, kClasses>);                \
    template SoftmaxCe<T> softmax_ce<T>(std::span<const T, kClasses>, int,                    \
                                        std::span<const T, kClasses>);                        \
    template class ParamStore<T>;                                                             \
    template void kaiming_uniform<T>(Param<T>&, int, std::uint64_t);                          \
    template class Adam<T>;

RADOCC_NN_INSTANTIATE(float)
RADOCC_NN_INSTANTIATE(double)

#undef RADOCC_NN_INSTANTIATE

}  // namespace radocc::nn
