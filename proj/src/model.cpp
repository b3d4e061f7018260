#include "radocc/model.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace radocc {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Hqnn: return "hqnn";
        case Variant::EstimatorMatched: return "estimator";
        case Variant::Dequantization: return "dequant";
        case Variant::CompactCnn: return "cnn";
    }
    return "?";
}

Variant variant_from_string(std::string_view text) {
    for (Variant v : kAllVariants) {
        if (text == to_string(v)) return v;
    }
    throw ConfigError("unknown variant '" + std::string(text) +
                      "' (expected hqnn, estimator, dequant or cnn)");
}

std::array<double, nn::kClasses> inverse_frequency_weights(std::span<const int> labels) {
    std::array<double, nn::kClasses> count{};
    for (int y : labels) {
        if (y < 0 || y >= nn::kClasses) throw DataError("label out of range");
        count[y] += 1.0;
    }
    std::array<double, nn::kClasses> w{};
    double sum = 0.0;
    for (int c = 0; c < nn::kClasses; ++c) {
        if (count[c] == 0.0) {
            throw DataError("training set has no frames of class " + std::to_string(c));
        }
        w[c] = 1.0 / count[c];
        sum += w[c];
    }
    for (auto& v : w) v *= nn::kClasses / sum;
    return w;
}

template <typename T>
struct Model<T>::Cache {
    const T* input = nullptr;
    std::vector<T> pool1;
    std::vector<std::uint8_t> arg1;
    std::vector<T> pool2;
    std::vector<std::uint8_t> arg2;
    std::vector<T> flat;
    std::vector<T> hidden;
    std::array<T, 3> fc2{};         // latent (first two) or compact-CNN logits
    std::array<T, 2> standardized{};
    std::array<double, 2> angles{};
    std::array<double, 2> quantum{};
    std::array<T, 2> dq_hidden{};   // dequantization head pre-activation
    std::array<T, 3> logits{};
};

template <typename T>
Model<T>::Model(Variant variant, BackboneConfig config, std::uint64_t init_seed,
                ModelOptions options)
    : variant_(variant), cfg_(config), opts_(options), pqc_(options.mode, options.shots) {
    if (cfg_.height % 4 != 0 || cfg_.width % 4 != 0) {
        throw ConfigError("backbone input dimensions must be multiples of 4");
    }
    auto add_linear = [&](const std::string& name, int in, int out) {
        auto& w = params_.add(name + ".weight", {out, in});
        nn::kaiming_uniform(w, in, mix_seed(init_seed, hash_string(w.name)));
        params_.add(name + ".bias", {out});
    };
    auto& c1 = params_.add("conv1.weight", {cfg_.conv1, 1, 3, 3});
    nn::kaiming_uniform(c1, 9, mix_seed(init_seed, hash_string(c1.name)));
    params_.add("conv1.bias", {cfg_.conv1});
    auto& c2 = params_.add("conv2.weight", {cfg_.conv2, cfg_.conv1, 3, 3});
    nn::kaiming_uniform(c2, cfg_.conv1 * 9, mix_seed(init_seed, hash_string(c2.name)));
    params_.add("conv2.bias", {cfg_.conv2});
    add_linear("fc1", cfg_.flat(), cfg_.hidden);
    add_linear("fc2", cfg_.hidden, latent_dim());

    switch (variant_) {
        case Variant::Hqnn: {
            auto& theta = params_.add("pqc.theta", {4});
            CounterRng rng(mix_seed(init_seed, hash_string("pqc.theta")));
            for (auto& v : theta.value) v = static_cast<T>(rng.uniform(-0.1, 0.1));
            add_linear("head", 2, nn::kClasses);
            params_.add("latent.mean", {2}, false);
            auto& var = params_.add("latent.var", {2}, false);
            std::fill(var.value.begin(), var.value.end(), T(1));
            break;
        }
        case Variant::EstimatorMatched:
            add_linear("head", 2, nn::kClasses);
            break;
        case Variant::Dequantization:
            add_linear("head1", 2, 2);
            add_linear("head2", 2, nn::kClasses);
            break;
        case Variant::CompactCnn:
            break;
    }

    const std::size_t plane = static_cast<std::size_t>(cfg_.height) * cfg_.width;
    conv_out_.resize(std::max<std::size_t>(cfg_.conv1 * plane, cfg_.conv2 * plane / 4));
    cols_.resize(std::max<std::size_t>(9 * plane, cfg_.conv1 * 9 * plane / 4));
    scratch_.resize(cols_.size());
    grad_a_.resize(conv_out_.size());
    grad_b_.resize(conv_out_.size());
}

template <typename T>
std::size_t Model<T>::count_head() const {
    std::size_t n = 0;
    for (const auto& p : params_.all()) {
        if (!p.trainable) continue;
        const bool backbone = p.name.rfind("conv", 0) == 0 || p.name.rfind("fc1", 0) == 0 ||
                              (p.name.rfind("fc2", 0) == 0 && variant_ != Variant::CompactCnn);
        if (!backbone) n += p.size();
    }
    return n;
}

template <typename T>
void Model<T>::forward_backbone(const T* input, Cache& c) {
    const int h = cfg_.height;
    const int w = cfg_.width;
    const int h2 = h / 2;
    const int w2 = w / 2;
    c.input = input;

    nn::conv3x3_forward(input, 1, h, w, params_.get("conv1.weight").value.data(),
                        params_.get("conv1.bias").value.data(), cfg_.conv1, conv_out_.data(),
                        cols_.data());
    nn::relu_inplace(conv_out_.data(), static_cast<std::size_t>(cfg_.conv1) * h * w);
    c.pool1.resize(static_cast<std::size_t>(cfg_.conv1) * h2 * w2);
    c.arg1.resize(c.pool1.size());
    nn::maxpool2_forward(conv_out_.data(), cfg_.conv1, h, w, c.pool1.data(), c.arg1.data());

    nn::conv3x3_forward(c.pool1.data(), cfg_.conv1, h2, w2,
                        params_.get("conv2.weight").value.data(),
                        params_.get("conv2.bias").value.data(), cfg_.conv2, conv_out_.data(),
                        cols_.data());
    nn::relu_inplace(conv_out_.data(), static_cast<std::size_t>(cfg_.conv2) * h2 * w2);
    c.pool2.resize(static_cast<std::size_t>(cfg_.conv2) * (h2 / 2) * (w2 / 2));
    c.arg2.resize(c.pool2.size());
    nn::maxpool2_forward(conv_out_.data(), cfg_.conv2, h2, w2, c.pool2.data(), c.arg2.data());

    c.flat.resize(static_cast<std::size_t>(cfg_.flat()));
    nn::adaptive_avgpool_forward(c.pool2.data(), cfg_.conv2, h2 / 2, w2 / 2, cfg_.pool_h,
                                 cfg_.pool_w, c.flat.data());
    c.hidden.resize(static_cast<std::size_t>(cfg_.hidden));
    nn::linear_forward(c.flat.data(), cfg_.flat(), params_.get("fc1.weight").value.data(),
                       params_.get("fc1.bias").value.data(), cfg_.hidden, c.hidden.data());
    nn::relu_inplace(c.hidden.data(), c.hidden.size());
    nn::linear_forward(c.hidden.data(), cfg_.hidden, params_.get("fc2.weight").value.data(),
                       params_.get("fc2.bias").value.data(), latent_dim(), c.fc2.data());
}

template <typename T>
void Model<T>::forward_head(Cache& c, std::uint64_t seed) {
    switch (variant_) {
        case Variant::CompactCnn:
            c.logits = c.fc2;
            break;
        case Variant::EstimatorMatched:
            nn::linear_forward(c.fc2.data(), 2, params_.get("head.weight").value.data(),
                               params_.get("head.bias").value.data(), nn::kClasses,
                               c.logits.data());
            break;
        case Variant::Dequantization: {
            nn::linear_forward(c.fc2.data(), 2, params_.get("head1.weight").value.data(),
                               params_.get("head1.bias").value.data(), 2, c.dq_hidden.data());
            std::array<T, 2> act{std::max(c.dq_hidden[0], T(0)), std::max(c.dq_hidden[1], T(0))};
            nn::linear_forward(act.data(), 2, params_.get("head2.weight").value.data(),
                               params_.get("head2.bias").value.data(), nn::kClasses,
                               c.logits.data());
            break;
        }
        case Variant::Hqnn: {
            for (int i = 0; i < 2; ++i) {
                c.standardized[i] = (c.fc2[i] - norm_mean_[i]) * norm_scale_[i];
                c.angles[i] = std::numbers::pi /
                              (1.0 + std::exp(-static_cast<double>(c.standardized[i])));
            }
            const auto& th = params_.get("pqc.theta").value;
            const std::array<double, 4> theta{th[0], th[1], th[2], th[3]};
            c.quantum = pqc_.forward(c.angles, theta, mix_seed(seed, 0)).z;
            const std::array<T, 2> q{static_cast<T>(c.quantum[0]), static_cast<T>(c.quantum[1])};
            nn::linear_forward(q.data(), 2, params_.get("head.weight").value.data(),
                               params_.get("head.bias").value.data(), nn::kClasses,
                               c.logits.data());
            break;
        }
    }
}

// d loss / d fc2; for the HQNN, d loss / d standardized latent.
template <typename T>
std::array<T, 3> Model<T>::backward_head(Cache& c, const std::array<T, nn::kClasses>& dlogits,
                                         std::uint64_t seed) {
    auto grad = [&](const char* name) { return params_.get(name).grad.data(); };
    auto value = [&](const char* name) { return params_.get(name).value.data(); };

    std::array<T, 3> dfc2{};
    switch (variant_) {
        case Variant::CompactCnn:
            dfc2 = dlogits;
            break;
        case Variant::EstimatorMatched:
            nn::linear_backward(c.fc2.data(), dlogits.data(), 2, value("head.weight"),
                                nn::kClasses, grad("head.weight"), grad("head.bias"), dfc2.data());
            break;
        case Variant::Dequantization: {
            const std::array<T, 2> act{std::max(c.dq_hidden[0], T(0)),
                                       std::max(c.dq_hidden[1], T(0))};
            std::array<T, 2> dact{};
            nn::linear_backward(act.data(), dlogits.data(), 2, value("head2.weight"),
                                nn::kClasses, grad("head2.weight"), grad("head2.bias"),
                                dact.data());
            for (int i = 0; i < 2; ++i) {
                if (!(c.dq_hidden[i] > T(0))) dact[i] = T(0);
            }
            nn::linear_backward(c.fc2.data(), dact.data(), 2, value("head1.weight"), 2,
                                grad("head1.weight"), grad("head1.bias"), dfc2.data());
            break;
        }
        case Variant::Hqnn: {
            const std::array<T, 2> q{static_cast<T>(c.quantum[0]), static_cast<T>(c.quantum[1])};
            std::array<T, 2> dq{};
            nn::linear_backward(q.data(), dlogits.data(), 2, value("head.weight"), nn::kClasses,
                                grad("head.weight"), grad("head.bias"), dq.data());
            const auto& th = params_.get("pqc.theta").value;
            const std::array<double, 4> theta{th[0], th[1], th[2], th[3]};
            const auto pq = pqc_.backward(c.angles, theta, {dq[0], dq[1]}, mix_seed(seed, 1));
            T* dtheta = grad("pqc.theta");
            for (int k = 0; k < 4; ++k) dtheta[k] += static_cast<T>(pq.d_theta[k]);
            for (int i = 0; i < 2; ++i) {
                dfc2[i] = static_cast<T>(pq.d_input[i]) * nn::logistic_squash_grad(c.standardized[i]);
            }
            break;
        }
    }
    return dfc2;
}

template <typename T>
void Model<T>::backward_backbone(Cache& c, const std::array<T, 3>& dfc2) {
    auto grad = [&](const char* name) { return params_.get(name).grad.data(); };
    auto value = [&](const char* name) { return params_.get(name).value.data(); };

    // fc2 -> fc1
    std::vector<T> dhidden(static_cast<std::size_t>(cfg_.hidden));
    nn::linear_backward(c.hidden.data(), dfc2.data(), cfg_.hidden, value("fc2.weight"),
                        latent_dim(), grad("fc2.weight"), grad("fc2.bias"), dhidden.data());
    for (int i = 0; i < cfg_.hidden; ++i) {
        if (!(c.hidden[i] > T(0))) dhidden[i] = T(0);
    }
    std::vector<T> dflat(static_cast<std::size_t>(cfg_.flat()));
    nn::linear_backward(c.flat.data(), dhidden.data(), cfg_.flat(), value("fc1.weight"),
                        cfg_.hidden, grad("fc1.weight"), grad("fc1.bias"), dflat.data());

    const int h = cfg_.height;
    const int w = cfg_.width;
    const int h2 = h / 2;
    const int w2 = w / 2;
    // grad_a_: d pool2 ; grad_b_: d conv2 output
    std::fill(grad_a_.begin(), grad_a_.begin() + static_cast<std::ptrdiff_t>(c.pool2.size()), T(0));
    nn::adaptive_avgpool_backward(dflat.data(), cfg_.conv2, h2 / 2, w2 / 2, cfg_.pool_h,
                                  cfg_.pool_w, grad_a_.data());
    nn::maxpool2_backward(grad_a_.data(), c.arg2.data(), c.pool2.data(), cfg_.conv2, h2, w2,
                          grad_b_.data());

    nn::im2col3x3(c.pool1.data(), cfg_.conv1, h2, w2, cols_.data());
    nn::conv3x3_backward(cols_.data(), grad_b_.data(), cfg_.conv1, h2, w2, value("conv2.weight"),
                         cfg_.conv2, grad("conv2.weight"), grad("conv2.bias"), grad_a_.data(),
                         scratch_.data());
    nn::maxpool2_backward(grad_a_.data(), c.arg1.data(), c.pool1.data(), cfg_.conv1, h, w,
                          grad_b_.data());
    nn::im2col3x3(c.input, 1, h, w, cols_.data());
    nn::conv3x3_backward<T>(cols_.data(), grad_b_.data(), 1, h, w, value("conv1.weight"),
                            cfg_.conv1, grad("conv1.weight"), grad("conv1.bias"), nullptr,
                            scratch_.data());
}

template <typename T>
void Model<T>::set_latent_stats(std::span<const Cache> caches, bool training) {
    if (variant_ != Variant::Hqnn) return;
    auto& mean = params_.get("latent.mean").value;
    auto& var = params_.get("latent.var").value;
    if (training && !caches.empty()) {
        const T m = static_cast<T>(opts_.latent_momentum);
        const T n = static_cast<T>(caches.size());
        for (int i = 0; i < 2; ++i) {
            T sum = 0;
            for (const Cache& c : caches) sum += c.fc2[i];
            const T bm = sum / n;
            T sq = 0;
            for (const Cache& c : caches) sq += (c.fc2[i] - bm) * (c.fc2[i] - bm);
            mean[i] = (T(1) - m) * mean[i] + m * bm;
            var[i] = (T(1) - m) * var[i] + m * sq / n;
        }
    }
    for (int i = 0; i < 2; ++i) {
        norm_mean_[i] = mean[i];
        norm_scale_[i] = T(1) / std::sqrt(var[i] + static_cast<T>(opts_.latent_eps));
    }
}

template <typename T>
std::vector<typename Model<T>::Cache> Model<T>::run_forward(std::span<const T* const> inputs,
                                                            std::uint64_t shot_seed,
                                                            bool training) {
    std::vector<Cache> caches(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) forward_backbone(inputs[i], caches[i]);
    set_latent_stats(caches, training);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        forward_head(caches[i], mix_seed(shot_seed, i));
    }
    return caches;
}

template <typename T>
typename Model<T>::BatchResult Model<T>::loss_and_grad(std::span<const T* const> inputs,
                                                       std::span<const int> labels,
                                                       std::span<const T, nn::kClasses> weights,
                                                       bool training,
                                                       std::uint64_t shot_seed) {
    if (inputs.size() != labels.size() || inputs.empty()) {
        throw ConfigError("batch inputs and labels must be non-empty and equally long");
    }
    params_.zero_grad();
    auto caches = run_forward(inputs, shot_seed, training);
    T weight_sum = 0;
    for (int y : labels) weight_sum += weights[y];
    BatchResult out;
    out.probs.reserve(inputs.size());
    std::vector<std::array<T, 3>> dlatent(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto ce = nn::softmax_ce<T>(caches[i].logits, labels[i], weights);
        out.loss += ce.loss / weight_sum;
        out.probs.push_back(ce.probs);
        std::array<T, 3> dl{};
        for (int k = 0; k < nn::kClasses; ++k) dl[k] = ce.logit_grad[k] / weight_sum;
        dlatent[i] = backward_head(caches[i], dl, mix_seed(shot_seed, i));
    }
    if (variant_ == Variant::Hqnn) {
        for (auto& d : dlatent) {
            for (int k = 0; k < 2; ++k) d[k] *= norm_scale_[k];
        }
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) backward_backbone(caches[i], dlatent[i]);
    return out;
}

template <typename T>
T Model<T>::loss(std::span<const T* const> inputs, std::span<const int> labels,
                 std::span<const T, nn::kClasses> weights, std::uint64_t shot_seed) {
    auto caches = run_forward(inputs, shot_seed, false);
    T weight_sum = 0;
    for (int y : labels) weight_sum += weights[y];
    T total = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        total += nn::softmax_ce<T>(caches[i].logits, labels[i], weights).loss / weight_sum;
    }
    return total;
}

template <typename T>
std::vector<Probs<T>> Model<T>::predict(std::span<const T* const> inputs,
                                        std::uint64_t shot_seed) {
    auto caches = run_forward(inputs, shot_seed, false);
    std::vector<Probs<T>> out;
    out.reserve(caches.size());
    for (const Cache& c : caches) out.push_back(nn::softmax<T>(c.logits));
    return out;
}

template <typename T>
std::vector<std::array<double, 2>> Model<T>::quantum_features(std::span<const T* const> inputs,
                                                              std::uint64_t shot_seed) {
    if (variant_ != Variant::Hqnn) return {};
    auto caches = run_forward(inputs, shot_seed, false);
    std::vector<std::array<double, 2>> out;
    for (const Cache& c : caches) out.push_back(c.quantum);
    return out;
}

template <typename T>
nn::Checkpoint Model<T>::to_checkpoint() const {
    nn::Checkpoint ck;
    ck.header["variant"] = std::string(to_string(variant_));
    ck.header["height"] = std::to_string(cfg_.height);
    ck.header["width"] = std::to_string(cfg_.width);
    ck.header["conv1"] = std::to_string(cfg_.conv1);
    ck.header["conv2"] = std::to_string(cfg_.conv2);
    ck.header["pool_h"] = std::to_string(cfg_.pool_h);
    ck.header["pool_w"] = std::to_string(cfg_.pool_w);
    ck.header["hidden"] = std::to_string(cfg_.hidden);
    ck.header["mode"] = opts_.mode == qsim::Mode::Analytic ? "analytic" : "shots";
    ck.header["shots"] = std::to_string(opts_.shots);
    for (const auto& p : params_.all()) {
        auto& q = ck.params.add(p.name, p.shape, p.trainable);
        for (std::size_t i = 0; i < p.size(); ++i) q.value[i] = static_cast<float>(p.value[i]);
    }
    return ck;
}

template <typename T>
Model<T> Model<T>::from_checkpoint(const nn::Checkpoint& ck) {
    auto field = [&](const char* key) {
        const auto it = ck.header.find(key);
        if (it == ck.header.end()) throw DataError(std::string("checkpoint header lacks ") + key);
        return it->second;
    };
    BackboneConfig cfg;
    cfg.height = std::stoi(field("height"));
    cfg.width = std::stoi(field("width"));
    cfg.conv1 = std::stoi(field("conv1"));
    cfg.conv2 = std::stoi(field("conv2"));
    cfg.pool_h = std::stoi(field("pool_h"));
    cfg.pool_w = std::stoi(field("pool_w"));
    cfg.hidden = std::stoi(field("hidden"));
    ModelOptions opts;
    opts.mode = field("mode") == "shots" ? qsim::Mode::Shots : qsim::Mode::Analytic;
    opts.shots = std::stoi(field("shots"));
    Model m(variant_from_string(field("variant")), cfg, 0, opts);
    try {
        m.params_.assign_from(ck.params);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("checkpoint layout mismatch: ") + e.what());
    }
    return m;
}

template class Model<float>;
template class Model<double>;

}  // namespace radocc
