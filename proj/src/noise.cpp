#include "radocc/noise.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace radocc {

std::uint64_t derive_noise_seed(std::uint64_t base_seed, std::string_view file_id, double snr_db) {
    const auto milli = static_cast<std::int64_t>(std::llround(snr_db * 1000.0));
    return mix_seed(base_seed, hash_string(file_id), static_cast<std::uint64_t>(milli));
}

NoisyFrame inject_awgn(const Rdm& frame, double snr_db, std::uint64_t seed) {
    NoisyFrame out{frame};
    double sum_sq = 0.0;
    for (float v : frame.db) {
        if (!std::isfinite(v)) throw NumericError("cannot add noise to a non-finite frame");
        sum_sq += static_cast<double>(v) * v;
    }
    out.signal_power = sum_sq / static_cast<double>(frame.db.size());
    if (out.signal_power == 0.0) {
        out.flagged = true;
        return out;
    }
    out.noise_variance = out.signal_power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(out.noise_variance);
    CounterRng rng(seed);
    for (float& v : out.frame.db) {
        v = static_cast<float>(static_cast<double>(v) + sigma * rng.normal());
    }
    return out;
}

std::string to_string(const CellKey& cell) {
    return std::string(to_string(cell.domain)) + "/" + std::string(to_string(cell.scene)) +
           "/label" + std::to_string(cell.label);
}

CellKey cell_of(const RdmMeta& meta) { return {meta.domain, meta.scene, meta.label}; }

Standardizer Standardizer::fit(std::span<const Rdm* const> frames,
                               std::span<const CellKey> required, double epsilon) {
    std::map<CellKey, std::vector<const Rdm*>> groups;
    for (const Rdm* f : frames) groups[cell_of(f->meta)].push_back(f);
    for (const CellKey& cell : required) {
        if (groups.count(cell) == 0) {
            throw DataError("standardizer cell " + to_string(cell) + " has no training frames");
        }
    }
    Standardizer out(epsilon);
    for (const auto& [cell, members] : groups) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const Rdm* f : members) {
            for (float v : f->db) sum += v;
            count += f->db.size();
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (const Rdm* f : members) {
            for (float v : f->db) {
                const double d = v - mean;
                sq += d * d;
            }
        }
        out.stats_[cell] = {mean, std::sqrt(sq / static_cast<double>(count))};
    }
    return out;
}

const CellStats& Standardizer::stats(const CellKey& cell) const {
    const auto it = stats_.find(cell);
    if (it == stats_.end()) throw DataError("no standardizer statistics for cell " + to_string(cell));
    return it->second;
}

std::vector<float> Standardizer::apply(const Rdm& frame, const CellKey& cell) const {
    const CellStats& s = stats(cell);
    const double scale = std::max(s.stddev, epsilon_);
    std::vector<float> out(frame.db.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>((frame.db[i] - s.mean) / scale);
    }
    return out;
}

std::vector<double> Standardizer::invert(std::span<const float> standardized,
                                         const CellKey& cell) const {
    const CellStats& s = stats(cell);
    const double scale = std::max(s.stddev, epsilon_);
    std::vector<double> out(standardized.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = standardized[i] * scale + s.mean;
    return out;
}

void Standardizer::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << std::setprecision(17);
    os << "domain,scene,label,mean,stddev,epsilon\n";
    for (const auto& [cell, s] : stats_) {
        os << to_string(cell.domain) << ',' << to_string(cell.scene) << ',' << cell.label << ','
           << s.mean << ',' << s.stddev << ',' << epsilon_ << '\n';
    }
}

Standardizer Standardizer::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read " + path.string());
    std::string line;
    std::getline(is, line);
    Standardizer out;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string domain, scene, label, mean, stddev, eps;
        if (!std::getline(ss, domain, ',') || !std::getline(ss, scene, ',') ||
            !std::getline(ss, label, ',') || !std::getline(ss, mean, ',') ||
            !std::getline(ss, stddev, ',') || !std::getline(ss, eps, ',')) {
            throw DataError("malformed standardizer row in " + path.string() + ": " + line);
        }
        if (first) {
            out.epsilon_ = std::stod(eps);
            first = false;
        }
        out.stats_[{domain_from_string(domain), scene_kind_from_string(scene), std::stoi(label)}] =
            {std::stod(mean), std::stod(stddev)};
    }
    return out;
}

}  // namespace radocc
