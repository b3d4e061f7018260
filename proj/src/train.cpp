#include "radocc/train.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace radocc {

TrainResult train(Model<float>& model, std::span<const float* const> inputs,
                  std::span<const int> labels, const TrainConfig& cfg) {
    if (inputs.size() != labels.size()) throw ConfigError("inputs and labels differ in length");
    if (cfg.epochs < 1 || cfg.batch < 1) throw ConfigError("epochs and batch must be positive");
    const auto w = inverse_frequency_weights(labels);
    const std::array<float, nn::kClasses> weights{static_cast<float>(w[0]),
                                                  static_cast<float>(w[1]),
                                                  static_cast<float>(w[2])};
    nn::Adam<float> adam(cfg.adam);
    const auto start = std::chrono::steady_clock::now();
    const auto evals_before = model.pqc().evaluations();

    TrainResult result;
    std::vector<std::size_t> order(inputs.size());
    std::vector<const float*> batch_in;
    std::vector<int> batch_y;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        CounterRng rng(mix_seed(cfg.seed, 0x5348u, static_cast<std::uint64_t>(epoch)));
        shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t batch_index = 0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch));
            batch_in.clear();
            batch_y.clear();
            for (std::size_t k = at; k < end; ++k) {
                batch_in.push_back(inputs[order[k]]);
                batch_y.push_back(labels[order[k]]);
            }
            const auto shot_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), batch_index++);
            const auto r = model.loss_and_grad(batch_in, batch_y, weights, true, shot_seed);
            if (!std::isfinite(r.loss)) {
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
            }
            adam.step(model.params());
            loss_sum += static_cast<double>(r.loss) * static_cast<double>(batch_in.size());
            for (std::size_t k = 0; k < batch_y.size(); ++k) {
                if (argmax(r.probs[k]) == batch_y[k]) ++correct;
            }
        }
        EpochLog e{epoch, loss_sum / static_cast<double>(order.size()),
                   static_cast<double>(correct) / static_cast<double>(order.size())};
        spdlog::info("{} epoch {:2d}  loss {:.4f}  acc {:.3f}", to_string(model.variant()), e.epoch,
                     e.loss, e.acc);
        result.log.push_back(e);
    }
    result.pqc_evaluations = model.pqc().evaluations() - evals_before;
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_train_log(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << "epoch,loss,acc\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", e.epoch, e.loss, e.acc);
        os << buf;
    }
}

}  // namespace radocc
