#include "radocc/report.hpp"

#include "radocc/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace radocc {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::string ci_text(const CiStats& s) { return s.has_interval ? fmt("%.6f", s.half_width) : "NA"; }

}  // namespace

CiStats t_interval(std::span<const double> values, double confidence) {
    CiStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(sq / static_cast<double>(s.n - 1));
    boost::math::students_t dist(static_cast<double>(s.n - 1));
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    s.half_width = t * sd / std::sqrt(static_cast<double>(s.n));
    s.has_interval = true;
    return s;
}

ReportSummary cmd_report(const ExperimentConfig& cfg) {
    const OutputLayout out{cfg.out};
    std::vector<std::string> conditions{"clean"};
    for (double s : cfg.snrs) conditions.push_back(fmt("%g", s));

    // (variant, snr) -> metric columns across seeds
    struct Columns {
        std::string domain = "synthetic";
        std::vector<double> acc, ba, f1, rec;
    };
    std::map<std::pair<std::string, std::string>, Columns> cells;
    ReportSummary summary;

    for (Variant v : cfg.variants) {
        for (auto seed : cfg.seeds) {
            const auto path = out.eval_csv(v, seed, 1.0);
            const std::string run = OutputLayout::run_name(v, seed, 1.0);
            std::ifstream is(path);
            if (!is) {
                summary.gaps.push_back(run + ": no eval results");
                continue;
            }
            std::string line;
            std::getline(is, line);
            if (line != kEvalHeader) throw DataError(path.string() + ": unexpected header");
            std::map<std::string, bool> seen;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                const auto f = split_csv(line);
                if (f.size() != 8) throw DataError(path.string() + ": malformed row");
                auto& c = cells[{f[0], f[2]}];
                c.domain = f[1];
                c.acc.push_back(std::stod(f[4]));
                c.ba.push_back(std::stod(f[5]));
                c.f1.push_back(std::stod(f[6]));
                c.rec.push_back(std::stod(f[7]));
                seen[f[2]] = true;
            }
            for (const auto& snr : conditions) {
                if (!seen.count(snr)) summary.gaps.push_back(run + ": no " + snr + " row");
            }
        }
    }

    for (Variant v : cfg.variants) {
        for (const auto& snr : conditions) {
            const auto it = cells.find({std::string(to_string(v)), snr});
            if (it == cells.end()) {
                summary.gaps.push_back(std::string(to_string(v)) + " @ " + snr +
                                       ": omitted, no seeds");
                continue;
            }
            const Columns& c = it->second;
            summary.rows.push_back({std::string(to_string(v)), c.domain, snr, t_interval(c.acc),
                                    t_interval(c.ba), t_interval(c.f1), t_interval(c.rec)});
        }
    }

    fs::create_directories(out.report());
    std::ofstream csv(out.report() / "summary.csv");
    csv << kSummaryHeader << '\n';
    for (const auto& r : summary.rows) {
        csv << r.variant << ',' << r.domain << ',' << r.snr << ',' << r.ba.n;
        for (const CiStats* s : {&r.acc, &r.ba, &r.macro_f1, &r.rec_pop}) {
            csv << ',' << fmt("%.6f", s->mean) << ',' << ci_text(*s);
        }
        csv << '\n';
    }

    // One plot-data file per variant and metric: snr_db mean yerr
    const std::pair<const char*, CiStats ReportRow::*> metrics[] = {
        {"acc", &ReportRow::acc}, {"ba", &ReportRow::ba},
        {"macro_f1", &ReportRow::macro_f1}, {"rec_pop", &ReportRow::rec_pop}};
    for (Variant v : cfg.variants) {
        for (const auto& [name, member] : metrics) {
            std::ofstream dat(out.report() / (std::string(to_string(v)) + "_" + name + ".dat"));
            dat << "# snr_db mean yerr (" << name << ", " << to_string(v) << ")\n";
            for (const auto& r : summary.rows) {
                if (r.variant != to_string(v)) continue;
                const CiStats& s = r.*member;
                if (r.snr == "clean") {
                    dat << "# clean " << fmt("%.6f", s.mean) << ' ' << fmt("%.6f", s.half_width) << '\n';
                } else {
                    dat << r.snr << ' ' << fmt("%.6f", s.mean) << ' ' << fmt("%.6f", s.half_width) << '\n';
                }
            }
        }
    }

    std::ofstream txt(out.report() / "summary.txt");
    txt << "Mean +/- 95% t-interval across seeds (full training set)\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-7s %3s  %-17s %-17s %-17s %-17s\n", "variant", "snr",
                  "n", "acc", "ba", "macro_f1", "rec_pop");
    txt << line;
    for (const auto& r : summary.rows) {
        auto cell = [](const CiStats& s) {
            return s.has_interval ? fmt("%.3f", s.mean) + " +/- " + fmt("%.3f", s.half_width)
                                  : fmt("%.3f", s.mean) + " (point)";
        };
        std::snprintf(line, sizeof line, "%-10s %-7s %3zu  %-17s %-17s %-17s %-17s\n",
                      r.variant.c_str(), r.snr.c_str(), r.ba.n, cell(r.acc).c_str(),
                      cell(r.ba).c_str(), cell(r.macro_f1).c_str(), cell(r.rec_pop).c_str());
        txt << line;
    }
    if (cfg.seeds.size() < 2) txt << "\nFewer than two seeds: point estimates only.\n";
    txt << "\nGaps\n";
    if (summary.gaps.empty()) txt << "  none\n";
    for (const auto& g : summary.gaps) txt << "  " << g << '\n';
    return summary;
}

}  // namespace radocc
