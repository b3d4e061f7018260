#include "radocc/dataset.hpp"

#include "radocc/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace radocc {

namespace {

constexpr char kMagic[4] = {'R', 'D', 'M', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("invalid " + what + " '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("invalid " + what + " '" + text + "'");
    }
}

std::string stratum_of(const RdmMeta& m) {
    return std::string(to_string(m.domain)) + "/" + std::string(to_string(m.scene)) + "/" +
           std::to_string(m.label);
}

}  // namespace

std::string encode_meta(const RdmMeta& meta) {
    std::ostringstream os;
    os << "label=" << meta.label << '\n'
       << "domain=" << to_string(meta.domain) << '\n'
       << "scene=" << to_string(meta.scene) << '\n'
       << "sequence=" << meta.sequence << '\n'
       << "frame=" << meta.frame << '\n'
       << "seed=" << meta.seed << '\n';
    return os.str();
}

RdmMeta decode_meta(const std::string& text) {
    RdmMeta meta;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed metadata line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "label") meta.label = parse_int(value, "label");
        else if (key == "domain") meta.domain = domain_from_string(value);
        else if (key == "scene") meta.scene = scene_kind_from_string(value);
        else if (key == "sequence") meta.sequence = value;
        else if (key == "frame") meta.frame = parse_int(value, "frame");
        else if (key == "seed") meta.seed = parse_u64(value, "seed");
    }
    return meta;
}

std::vector<std::uint8_t> encode_rdm(const Rdm& frame) {
    const std::string meta = encode_meta(frame.meta);
    std::vector<std::uint8_t> out;
    out.reserve(16 + frame.db.size() * 4 + meta.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, Rdm::kRows);
    put_u32(out, Rdm::kCols);
    for (float v : frame.db) {
        if (!std::isfinite(v)) throw NumericError("refusing to write a non-finite RDM");
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out.insert(out.end(), meta.begin(), meta.end());
    return out;
}

Rdm decode_rdm(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    using Kind = RdmFormatError::Kind;
    if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
        throw RdmFormatError(Kind::BadMagic, origin + ": not an RDM1 file");
    }
    if (bytes.size() < 12) throw RdmFormatError(Kind::Truncated, origin + ": truncated header");
    const std::uint32_t height = get_u32(&bytes[4]);
    const std::uint32_t width = get_u32(&bytes[8]);
    if (height != Rdm::kRows || width != Rdm::kCols) {
        throw RdmFormatError(Kind::DimensionMismatch,
                             origin + ": grid is " + std::to_string(height) + "x" +
                                 std::to_string(width) + ", expected 128x128");
    }
    const std::size_t grid_bytes = std::size_t{height} * width * 4;
    if (bytes.size() < 12 + grid_bytes + 4) {
        throw RdmFormatError(Kind::Truncated, origin + ": truncated payload");
    }
    Rdm frame;
    for (std::size_t i = 0; i < frame.db.size(); ++i) {
        frame.db[i] = std::bit_cast<float>(get_u32(&bytes[12 + 4 * i]));
    }
    const std::size_t meta_at = 12 + grid_bytes;
    const std::uint32_t meta_len = get_u32(&bytes[meta_at]);
    if (bytes.size() < meta_at + 4 + meta_len) {
        throw RdmFormatError(Kind::Truncated, origin + ": truncated metadata");
    }
    frame.meta = decode_meta(std::string(bytes.begin() + static_cast<std::ptrdiff_t>(meta_at + 4),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(meta_at + 4 + meta_len)));
    return frame;
}

void write_rdm(const Rdm& frame, const std::filesystem::path& path) {
    const auto bytes = encode_rdm(frame);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw DataError("write failed for " + path.string());
}

Rdm read_rdm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return decode_rdm(bytes, path.string());
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << kManifestHeader << '\n';
    for (const FrameRecord& r : manifest) {
        os << r.path << ',' << r.meta.label << ',' << to_string(r.meta.domain) << ','
           << to_string(r.meta.scene) << ',' << r.meta.sequence << ',' << r.meta.frame << ','
           << r.meta.seed << '\n';
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read manifest " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != kManifestHeader) {
        throw DataError(path.string() + ": unexpected manifest header");
    }
    Manifest manifest;
    std::set<std::pair<std::string, int>> seen;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw DataError(path.string() + ": malformed row '" + line + "'");
        FrameRecord r;
        r.path = f[0];
        r.meta.label = parse_int(f[1], "label");
        if (r.meta.label < 0 || r.meta.label > 2) throw DataError("label out of range: " + f[1]);
        r.meta.domain = domain_from_string(f[2]);
        r.meta.scene = scene_kind_from_string(f[3]);
        r.meta.sequence = f[4];
        r.meta.frame = parse_int(f[5], "frame");
        r.meta.seed = parse_u64(f[6], "seed");
        if (!seen.insert({r.meta.sequence, r.meta.frame}).second) {
            throw DataError("duplicate (sequence, frame) " + r.meta.sequence + "/" + f[5]);
        }
        manifest.push_back(std::move(r));
    }
    return manifest;
}

void check_consistency(const Manifest& manifest, const std::filesystem::path& root) {
    for (const FrameRecord& r : manifest) {
        const auto file = root / r.path;
        if (!std::filesystem::exists(file)) throw DataError("missing frame file " + file.string());
        const Rdm frame = read_rdm(file);
        const RdmMeta& a = frame.meta;
        const RdmMeta& b = r.meta;
        if (a.label != b.label || a.domain != b.domain || a.scene != b.scene ||
            a.sequence != b.sequence || a.frame != b.frame || a.seed != b.seed) {
            throw DataError("metadata of " + file.string() + " disagrees with the manifest");
        }
    }
}

Split make_split(const Manifest& manifest, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    // stratum -> sequence -> frame count
    std::map<std::string, std::map<std::string, std::size_t>> strata;
    for (const FrameRecord& r : manifest) ++strata[stratum_of(r.meta)][r.meta.sequence];

    std::set<std::string> train_sequences;
    for (const auto& [name, sequences] : strata) {
        if (sequences.size() < 2) {
            throw DataError("stratum " + name + " has a single sequence; cannot split");
        }
        std::vector<std::string> order;
        std::size_t total = 0;
        for (const auto& [seq, count] : sequences) {
            order.push_back(seq);
            total += count;
        }
        CounterRng rng(mix_seed(seed, hash_string(name)));
        shuffle(order.begin(), order.end(), rng);
        const double target = train_fraction * static_cast<double>(total);
        std::size_t taken = 0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            if (static_cast<double>(taken) >= target) break;
            train_sequences.insert(order[i]);
            taken += sequences.at(order[i]);
        }
    }
    Split split;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        (train_sequences.count(manifest[i].meta.sequence) ? split.train : split.test).push_back(i);
    }
    return split;
}

void write_split(const Manifest& manifest, const Split& split, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    std::vector<const char*> side(manifest.size(), nullptr);
    for (auto i : split.train) side[i] = "train";
    for (auto i : split.test) side[i] = "test";
    os << "path,split\n";
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (side[i]) os << manifest[i].path << ',' << side[i] << '\n';
    }
}

Split read_split(const Manifest& manifest, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read split " + path.string());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < manifest.size(); ++i) index[manifest[i].path] = i;
    std::string line;
    std::getline(is, line);
    Split split;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 2) throw DataError(path.string() + ": malformed row '" + line + "'");
        const auto it = index.find(f[0]);
        if (it == index.end()) throw DataError("split references unknown frame " + f[0]);
        if (f[1] == "train") split.train.push_back(it->second);
        else if (f[1] == "test") split.test.push_back(it->second);
        else throw DataError("unknown split side '" + f[1] + "'");
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::size_t> subsample_fraction(const Manifest& manifest,
                                            const std::vector<std::size_t>& train,
                                            double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
    if (fraction == 1.0) return train;
    std::map<int, std::vector<std::size_t>> by_label;
    for (auto i : train) by_label[manifest.at(i).meta.label].push_back(i);
    std::vector<std::size_t> subset;
    for (auto& [label, rows] : by_label) {
        std::sort(rows.begin(), rows.end());
        CounterRng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        shuffle(rows.begin(), rows.end(), rng);
        const auto keep = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(rows.size()) + 0.5 + 1e-9));
        if (keep == 0) {
            throw DataError("fraction " + std::to_string(fraction) + " leaves label " +
                            std::to_string(label) + " without training frames");
        }
        subset.insert(subset.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

}  // namespace radocc
