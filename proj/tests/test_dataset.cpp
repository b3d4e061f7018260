#include "radocc/dataset.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

using namespace radocc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("radocc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Rdm sample_frame() {
    Rdm f;
    for (std::size_t i = 0; i < f.db.size(); ++i) f.db[i] = static_cast<float>(-300.0 + 0.37 * (i % 811));
    f.db[5] = -0.0f;
    f.db[6] = 1e-30f;
    f.meta.label = 2;
    f.meta.domain = Domain::Real;
    f.meta.scene = SceneKind::Room;
    f.meta.sequence = "room_l2_s004";
    f.meta.frame = 17;
    f.meta.seed = 0xFFFFFFFFFFFFFFFFull;
    return f;
}

// Three labels x `seqs` sequences x `frames` frames, in one scene.
Manifest synthetic_manifest(int seqs, int frames, SceneKind scene = SceneKind::Corridor) {
    Manifest m;
    for (int label = 0; label < 3; ++label) {
        for (int s = 0; s < seqs; ++s) {
            for (int k = 0; k < frames; ++k) {
                FrameRecord r;
                r.meta.label = label;
                r.meta.scene = scene;
                r.meta.sequence = std::string(to_string(scene)) + "_l" + std::to_string(label) + "_s" +
                                  std::to_string(s);
                r.meta.frame = k;
                r.meta.seed = static_cast<std::uint64_t>(label * 1000 + s * 10 + k);
                r.path = r.meta.sequence + "/" + std::to_string(k) + ".rdm";
                m.push_back(r);
            }
        }
    }
    return m;
}

}  // namespace

TEST_CASE("RDM1 round trip is bit-identical") {
    const Rdm f = sample_frame();
    const auto bytes = encode_rdm(f);
    const std::string meta = encode_meta(f.meta);
    CHECK(bytes.size() == 4 + 8 + 4 * 128 * 128 + 4 + meta.size());
    CHECK(std::memcmp(bytes.data(), "RDM1", 4) == 0);

    const Rdm g = decode_rdm(bytes);
    REQUIRE(g.db.size() == f.db.size());
    CHECK(std::memcmp(g.db.data(), f.db.data(), f.db.size() * sizeof(float)) == 0);
    CHECK(g.meta.label == f.meta.label);
    CHECK(g.meta.domain == f.meta.domain);
    CHECK(g.meta.scene == f.meta.scene);
    CHECK(g.meta.sequence == f.meta.sequence);
    CHECK(g.meta.frame == f.meta.frame);
    CHECK(g.meta.seed == f.meta.seed);

    const auto dir = fresh_dir("rdm");
    write_rdm(f, dir / "a.rdm");
    CHECK(fs::file_size(dir / "a.rdm") == bytes.size());
    CHECK(encode_rdm(read_rdm(dir / "a.rdm")) == bytes);
    fs::remove_all(dir);
}

TEST_CASE("malformed RDM1 inputs give distinct errors") {
    using Kind = RdmFormatError::Kind;
    const auto bytes = encode_rdm(sample_frame());
    auto kind_of = [](const std::vector<std::uint8_t>& b) {
        try {
            decode_rdm(b);
        } catch (const RdmFormatError& e) {
            return static_cast<int>(e.kind());
        }
        return -1;
    };
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(kind_of(bad) == static_cast<int>(Kind::BadMagic));
    CHECK(kind_of({bytes.begin(), bytes.begin() + 1000}) == static_cast<int>(Kind::Truncated));
    CHECK(kind_of({bytes.begin(), bytes.end() - 3}) == static_cast<int>(Kind::Truncated));
    auto dims = bytes;
    dims[4] = 64;
    CHECK(kind_of(dims) == static_cast<int>(Kind::DimensionMismatch));

    Rdm nan = sample_frame();
    nan.db[0] = std::nanf("");
    const auto dir = fresh_dir("rdm_nan");
    CHECK_THROWS_AS(write_rdm(nan, dir / "n.rdm"), NumericError);
    fs::remove_all(dir);
}

TEST_CASE("manifest round trip, duplicates and consistency") {
    const auto dir = fresh_dir("manifest");
    Manifest m = synthetic_manifest(2, 2);
    for (const auto& r : m) {
        fs::create_directories((dir / r.path).parent_path());
        Rdm f;
        f.meta = r.meta;
        write_rdm(f, dir / r.path);
    }
    write_manifest(m, dir / "manifest.csv");
    const Manifest back = read_manifest(dir / "manifest.csv");
    REQUIRE(back.size() == m.size());
    CHECK(back[5].path == m[5].path);
    CHECK(back[5].meta.sequence == m[5].meta.sequence);
    CHECK_NOTHROW(check_consistency(back, dir));

    Manifest wrong = back;
    wrong[3].meta.label = (wrong[3].meta.label + 1) % 3;
    CHECK_THROWS_AS(check_consistency(wrong, dir), DataError);
    Manifest missing = back;
    missing[0].path = "nope.rdm";
    CHECK_THROWS_AS(check_consistency(missing, dir), DataError);

    Manifest dup = m;
    dup.push_back(m[0]);
    write_manifest(dup, dir / "dup.csv");
    CHECK_THROWS_AS(read_manifest(dir / "dup.csv"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("split keeps sequences whole and is deterministic") {
    Manifest m = synthetic_manifest(5, 8);
    const auto corridor = m.size();
    for (auto& r : synthetic_manifest(4, 8, SceneKind::Room)) m.push_back(r);
    const Split a = make_split(m, 0.8, 42);
    CHECK(a.train.size() + a.test.size() == m.size());

    std::set<std::string> train_seq, test_seq;
    for (auto i : a.train) train_seq.insert(m[i].meta.sequence);
    for (auto i : a.test) test_seq.insert(m[i].meta.sequence);
    for (const auto& s : train_seq) CHECK(test_seq.count(s) == 0);

    // Every stratum contributes to both sides.
    for (int label = 0; label < 3; ++label) {
        for (bool room : {false, true}) {
            auto in = [&](std::size_t i) {
                return m[i].meta.label == label && (i >= corridor) == room;
            };
            CHECK(std::any_of(a.train.begin(), a.train.end(), in));
            CHECK(std::any_of(a.test.begin(), a.test.end(), in));
        }
    }
    const Split b = make_split(m, 0.8, 42);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    const auto dir = fresh_dir("split");
    write_split(m, a, dir / "split.csv");
    const Split c = read_split(m, dir / "split.csv");
    CHECK(c.train == a.train);
    CHECK(c.test == a.test);
    fs::remove_all(dir);

    CHECK_THROWS_AS(make_split(synthetic_manifest(1, 8), 0.8, 1), DataError);
    CHECK_THROWS_AS(make_split(m, 1.0, 1), ConfigError);
}

TEST_CASE("subsampling is stratified and nested") {
    const Manifest m = synthetic_manifest(10, 10);
    std::vector<std::size_t> train(m.size());
    for (std::size_t i = 0; i < train.size(); ++i) train[i] = i;

    CHECK(subsample_fraction(m, train, 1.0, 3) == train);
    const auto tenth = subsample_fraction(m, train, 0.1, 3);
    CHECK(tenth.size() == 30);
    int per_label[3] = {};
    for (auto i : tenth) ++per_label[m[i].meta.label];
    CHECK(per_label[0] == 10);
    CHECK(per_label[1] == 10);
    CHECK(per_label[2] == 10);

    const auto half = subsample_fraction(m, train, 0.5, 3);
    CHECK(half.size() == 150);
    CHECK(std::includes(half.begin(), half.end(), tenth.begin(), tenth.end()));
    CHECK(subsample_fraction(m, train, 0.1, 3) == tenth);
    CHECK(subsample_fraction(m, train, 0.1, 4) != tenth);

    CHECK_THROWS_AS(subsample_fraction(m, train, 0.001, 3), DataError);
    CHECK_THROWS_AS(subsample_fraction(m, train, 0.0, 3), ConfigError);
}
