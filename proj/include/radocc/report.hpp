#pragma once

#include "radocc/experiment.hpp"

#include <span>
#include <string>
#include <vector>

namespace radocc {

struct CiStats {
    std::size_t n = 0;
    double mean = 0.0;
    double half_width = 0.0;  // t_{n-1, 0.975} s / sqrt(n); 0 when n < 2
    bool has_interval = false;
};

/// Mean and two-sided Student-t confidence half-width.
CiStats t_interval(std::span<const double> values, double confidence = 0.95);

struct ReportRow {
    std::string variant;
    std::string domain;
    std::string snr;
    CiStats acc, ba, macro_f1, rec_pop;
};

struct ReportSummary {
    std::vector<ReportRow> rows;
    std::vector<std::string> gaps;
};

inline constexpr const char* kSummaryHeader =
    "variant,domain,snr_db,n,acc_mean,acc_ci,ba_mean,ba_ci,macro_f1_mean,macro_f1_ci,"
    "rec_pop_mean,rec_pop_ci";

/// Aggregates the full-fraction eval CSVs across seeds into report/summary.csv,
/// report/summary.txt and per-variant, per-metric .dat plot files.
ReportSummary cmd_report(const ExperimentConfig& cfg);

}  // namespace radocc
