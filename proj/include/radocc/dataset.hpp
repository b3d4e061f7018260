#pragma once

#include "radocc/errors.hpp"
#include "radocc/fmcw.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace radocc {

// ---------------------------------------------------------------------------
// RDM1 binary frames

class RdmFormatError : public DataError {
public:
    enum class Kind { BadMagic, Truncated, DimensionMismatch };

    RdmFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// "RDM1", u32 height, u32 width, height*width f32 row-major, u32 metadata
/// length, metadata bytes. All integers and floats little-endian.
std::vector<std::uint8_t> encode_rdm(const Rdm& frame);
Rdm decode_rdm(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

void write_rdm(const Rdm& frame, const std::filesystem::path& path);
Rdm read_rdm(const std::filesystem::path& path);

std::string encode_meta(const RdmMeta& meta);
RdmMeta decode_meta(const std::string& text);

// ---------------------------------------------------------------------------
// Manifest

struct FrameRecord {
    std::string path;  // relative to the dataset root
    RdmMeta meta;
};

using Manifest = std::vector<FrameRecord>;

inline constexpr const char* kManifestHeader = "path,label,domain,scene,sequence,frame,seed";

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Every row's file exists, parses, and carries the row's metadata. Throws
/// DataError on the first mismatch.
void check_consistency(const Manifest& manifest, const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Splits

struct Split {
    std::vector<std::size_t> train;  // manifest row indices, ascending
    std::vector<std::size_t> test;
};

/// Sequence-level split within each (domain, scene, label) stratum: sequences
/// are shuffled and moved to train until it holds at least `train_fraction`
/// of the stratum's frames, always leaving one sequence for test.
Split make_split(const Manifest& manifest, double train_fraction, std::uint64_t seed);

void write_split(const Manifest& manifest, const Split& split, const std::filesystem::path& path);
Split read_split(const Manifest& manifest, const std::filesystem::path& path);

/// Label-stratified subset of `train` holding round-half-up(fraction * n) rows
/// per label. One permutation per label, so smaller fractions are prefixes of
/// larger ones for the same seed.
std::vector<std::size_t> subsample_fraction(const Manifest& manifest,
                                            const std::vector<std::size_t>& train,
                                            double fraction, std::uint64_t seed);

}  // namespace radocc
