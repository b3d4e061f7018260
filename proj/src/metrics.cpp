#include "radocc/metrics.hpp"

#include "radocc/errors.hpp"

namespace radocc {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (const auto& row : counts) {
        for (auto v : row) n += v;
    }
    return n;
}

std::int64_t ConfusionMatrix::support(int cls) const {
    const auto& row = counts.at(static_cast<std::size_t>(cls));
    return row[0] + row[1] + row[2];
}

std::array<std::array<double, 3>, 3> ConfusionMatrix::row_normalized() const {
    std::array<std::array<double, 3>, 3> out{};
    for (int r = 0; r < 3; ++r) {
        const auto s = support(r);
        for (int c = 0; c < 3; ++c) out[r][c] = s > 0 ? static_cast<double>(counts[r][c]) / s : 0.0;
    }
    return out;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw DataError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                        std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] > 2 || predicted[i] < 0 || predicted[i] > 2) {
            throw DataError("confusion: class index out of range");
        }
        ++cm.counts[truth[i]][predicted[i]];
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const auto n = cm.total();
    if (n == 0) throw DataError("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.counts[0][0] + cm.counts[1][1] + cm.counts[2][2]) / n;
}

double recall(const ConfusionMatrix& cm, int cls) {
    const auto s = cm.support(cls);
    if (s == 0) throw DataError("recall undefined: class " + std::to_string(cls) + " has no samples");
    return static_cast<double>(cm.counts[cls][cls]) / s;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    return (recall(cm, 0) + recall(cm, 1) + recall(cm, 2)) / 3.0;
}

double macro_f1(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double tp = static_cast<double>(cm.counts[c][c]);
        const double predicted = static_cast<double>(cm.counts[0][c] + cm.counts[1][c] + cm.counts[2][c]);
        const double actual = static_cast<double>(cm.support(c));
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = actual > 0 ? tp / actual : 0.0;
        sum += (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    return sum / 3.0;
}

double recall_populated(const ConfusionMatrix& cm) {
    const auto hits = cm.counts[1][1] + cm.counts[1][2] + cm.counts[2][1] + cm.counts[2][2];
    const auto misses = cm.counts[1][0] + cm.counts[2][0];
    if (hits + misses == 0) throw DataError("populated recall undefined: no populated samples");
    return static_cast<double>(hits) / static_cast<double>(hits + misses);
}

MetricsReport make_report(const ConfusionMatrix& cm) {
    MetricsReport r;
    r.cm = cm;
    r.acc = accuracy(cm);
    for (int c = 0; c < 3; ++c) r.recalls[c] = recall(cm, c);
    r.ba = balanced_accuracy(cm);
    r.macro_f1 = macro_f1(cm);
    r.rec_pop = recall_populated(cm);
    return r;
}

}  // namespace radocc
