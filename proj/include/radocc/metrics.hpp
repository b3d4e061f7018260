#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace radocc {

/// Rows are true classes, columns predictions.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    std::int64_t total() const;
    std::int64_t support(int cls) const;
    std::array<std::array<double, 3>, 3> row_normalized() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

double accuracy(const ConfusionMatrix& cm);
/// Recall TP_c / (TP_c + FN_c); throws DataError for a class with no support.
double recall(const ConfusionMatrix& cm, int cls);
double balanced_accuracy(const ConfusionMatrix& cm);
/// Mean per-class F1 with F1_c = 0 when precision + recall = 0.
double macro_f1(const ConfusionMatrix& cm);
/// Recall of the merged populated class {1, 2}: a 1 <-> 2 confusion still
/// counts as a hit.
double recall_populated(const ConfusionMatrix& cm);

struct MetricsReport {
    std::string variant;
    std::string domain;
    std::string snr;  // "clean" or the dB value
    std::uint64_t seed = 0;
    double acc = 0.0;
    double ba = 0.0;
    double macro_f1 = 0.0;
    double rec_pop = 0.0;
    std::array<double, 3> recalls{};
    ConfusionMatrix cm;
};

MetricsReport make_report(const ConfusionMatrix& cm);

}  // namespace radocc
