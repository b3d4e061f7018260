#include "radocc/errors.hpp"
#include "radocc/experiment.hpp"
#include "radocc/report.hpp"
#include "radocc/scene_file.hpp"
#include "radocc/train.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace radocc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("Student t interval") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto ci = t_interval(v);
    CHECK(ci.n == 5);
    CHECK(ci.has_interval);
    CHECK(ci.mean == 3.0);
    CHECK(ci.half_width == Approx(2.776445 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-6));

    const std::vector<double> same{0.9, 0.9, 0.9};
    CHECK(t_interval(same).half_width == 0.0);
    const std::vector<double> one{0.4};
    CHECK_FALSE(t_interval(one).has_interval);
    CHECK(t_interval(one).half_width == 0.0);
}

TEST_CASE("argmax resolves ties downward") {
    CHECK(argmax(Probs<double>{0.2, 0.4, 0.4}) == 1);
    CHECK(argmax(Probs<double>{0.5, 0.5, 0.0}) == 0);
    CHECK(argmax(Probs<double>{0.1, 0.2, 0.7}) == 2);
}

TEST_CASE("experiment config validation and loading") {
    ExperimentConfig ok;
    CHECK_NOTHROW(ok.validate());
    auto bad = ok;
    bad.sequences_per_cell = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.fractions = {1.5};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.train_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    const auto dir = fs::temp_directory_path() / "radocc_test_config";
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "c.yaml");
        os << "scenes: [room]\nvariants: [hqnn, cnn]\nmode: analytic\nepochs: 3\nseeds: [1, 2]\n";
    }
    const auto cfg = load_experiment_config(dir / "c.yaml");
    CHECK(cfg.scenes == std::vector<SceneKind>{SceneKind::Room});
    CHECK(cfg.variants == std::vector<Variant>{Variant::Hqnn, Variant::CompactCnn});
    CHECK(cfg.mode == qsim::Mode::Analytic);
    CHECK(cfg.epochs == 3);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
    {
        std::ofstream os(dir / "bad.yaml");
        os << "epoch: 3\n";
    }
    CHECK_THROWS_AS(load_experiment_config(dir / "bad.yaml"), ConfigError);
    fs::remove_all(dir);

    CHECK(OutputLayout::run_name(Variant::Hqnn, 42, 0.1) == "hqnn_seed42_frac0.10");
}

TEST_CASE("scene YAML parsing") {
    const auto spec = parse_scene_spec(R"(
preset: room
scatterers:
  - {position: [2.0, 0.5, 1.0], reflectivity: 0.4}
actors:
  - {path: [[1, 0, 0], [4, 0, 0]], speed: 0.8}
)");
    const auto base = room_preset();
    CHECK(spec.scene.statics.size() == base.statics.size() + 1);
    CHECK(spec.scene.actors.size() == 1);
    CHECK(spec.radar.carrier_freq == RadarConfig{}.carrier_freq);

    const auto bare = parse_scene_spec(R"(
radar: {carrier_freq: 77.0e9, position: [0, 0, 1]}
walls:
  - {origin: [3, -1, 0], edge_u: [0, 2, 0], edge_v: [0, 0, 2], reflection: 0.5}
)");
    CHECK(bare.radar.carrier_freq == 77.0e9);
    CHECK(bare.scene.walls.size() == 1);
    CHECK(bare.scene.actors.empty());

    CHECK_THROWS_AS(parse_scene_spec("walls: 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("furniture: []\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("actors:\n  - {speed: 1.0}\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("scatterers:\n  - {position: [1, 2]}\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("preset: garage\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("radar: {bandwidth: 1.0e12}\n"), ConfigError);
}

TEST_CASE("miniature pipeline runs end to end and is reproducible") {
    ExperimentConfig cfg;
    cfg.scenes = {SceneKind::Room};
    cfg.sequences_per_cell = 2;
    cfg.frames_per_sequence = 1;
    cfg.train_fraction = 0.5;
    cfg.variants = {Variant::EstimatorMatched};
    cfg.epochs = 1;
    cfg.batch = 4;
    cfg.mode = qsim::Mode::Analytic;
    cfg.snrs = {10.0};
    cfg.seeds = {1};
    cfg.out = fs::temp_directory_path() / "radocc_test_pipeline";
    fs::remove_all(cfg.out);

    const auto manifest = cmd_simulate(cfg);
    CHECK(manifest.size() == 6);
    const OutputLayout layout{cfg.out};
    CHECK(fs::exists(layout.standardizer()));
    CHECK_NOTHROW(check_consistency(read_manifest(layout.manifest()), layout.dataset()));

    const auto loaded = load_split(cfg);
    CHECK(loaded.split.train.size() == 3);
    CHECK(loaded.split.test.size() == 3);

    const auto ts = cmd_train(cfg, Variant::EstimatorMatched, 1, 1.0);
    CHECK(fs::exists(ts.checkpoint));
    CHECK(ts.train_frames == 3);
    CHECK(std::isfinite(ts.final_loss));

    const auto reports = cmd_eval(cfg, Variant::EstimatorMatched, 1, 1.0);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].snr == "clean");
    const auto eval_text = slurp(layout.eval_csv(Variant::EstimatorMatched, 1, 1.0));
    CHECK(eval_text.rfind(kEvalHeader, 0) == 0);

    const auto summary = cmd_report(cfg);
    CHECK_FALSE(summary.rows.empty());
    CHECK(slurp(layout.report() / "summary.csv").rfind(kSummaryHeader, 0) == 0);

    const auto first = slurp(layout.report() / "summary.csv");
    cmd_train(cfg, Variant::EstimatorMatched, 1, 1.0);
    cmd_eval(cfg, Variant::EstimatorMatched, 1, 1.0);
    cmd_report(cfg);
    CHECK(slurp(layout.report() / "summary.csv") == first);
    fs::remove_all(cfg.out);
}
