#include "radocc/experiment.hpp"

#include "radocc/errors.hpp"
#include "radocc/fmcw.hpp"
#include "radocc/rng.hpp"
#include "radocc/scene_file.hpp"
#include "radocc/train.hpp"

#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace radocc {

namespace fs = std::filesystem;

namespace {

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string snr_label(std::optional<double> snr) {
    if (!snr) return "clean";
    return format("%g", *snr);
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create directory " + p.string() + ": " + ec.message());
}

template <typename T>
std::vector<T> as_list(const YAML::Node& node, const char* key) {
    if (!node.IsSequence()) throw ConfigError(std::string(key) + " must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(item.as<T>());
    return out;
}

qsim::Mode mode_from_string(const std::string& s) {
    if (s == "analytic") return qsim::Mode::Analytic;
    if (s == "shots") return qsim::Mode::Shots;
    throw ConfigError("mode must be 'analytic' or 'shots', got '" + s + "'");
}

std::uint64_t training_seed(std::uint64_t seed) { return mix_seed(seed, 0x7EA1u); }
std::uint64_t subsample_seed(std::uint64_t seed) { return mix_seed(seed, 0xF4AC7u); }

// Frames standardized with the training statistics of their cell.
std::vector<std::vector<float>> standardized_frames(const LoadedSplit& data,
                                                    const std::vector<std::size_t>& rows,
                                                    const fs::path& root) {
    std::vector<std::vector<float>> out;
    out.reserve(rows.size());
    for (auto i : rows) out.push_back(data.standardizer.apply(read_rdm(root / data.manifest[i].path)));
    return out;
}

std::vector<const float*> pointers(const std::vector<std::vector<float>>& frames) {
    std::vector<const float*> p;
    p.reserve(frames.size());
    for (const auto& f : frames) p.push_back(f.data());
    return p;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (scenes.empty()) throw ConfigError("at least one scene is required");
    if (sequences_per_cell < 2) throw ConfigError("sequences_per_cell must be at least 2");
    if (frames_per_sequence < 1) throw ConfigError("frames_per_sequence must be positive");
    if (!(frame_interval > 0.0)) throw ConfigError("frame_interval must be positive");
    if (variants.empty()) throw ConfigError("at least one variant is required");
    if (epochs < 1 || batch < 1) throw ConfigError("epochs and batch must be positive");
    if (shots < 1) throw ConfigError("shots must be positive");
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1)");
    }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    ExperimentConfig cfg;
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) throw ConfigError("config must be a mapping");
    try {
        for (const auto& kv : root) {
            const auto key = kv.first.as<std::string>();
            const YAML::Node& v = kv.second;
            if (key == "scenes") {
                cfg.scenes.clear();
                for (const auto& s : as_list<std::string>(v, "scenes")) {
                    cfg.scenes.push_back(scene_kind_from_string(s));
                }
            } else if (key == "scene_file") cfg.scene_file = v.as<std::string>();
            else if (key == "sequences_per_cell") cfg.sequences_per_cell = v.as<int>();
            else if (key == "frames_per_sequence") cfg.frames_per_sequence = v.as<int>();
            else if (key == "frame_interval") cfg.frame_interval = v.as<double>();
            else if (key == "dataset_seed") cfg.dataset_seed = v.as<std::uint64_t>();
            else if (key == "split_seed") cfg.split_seed = v.as<std::uint64_t>();
            else if (key == "train_fraction") cfg.train_fraction = v.as<double>();
            else if (key == "variants") {
                cfg.variants.clear();
                for (const auto& s : as_list<std::string>(v, "variants")) {
                    cfg.variants.push_back(variant_from_string(s));
                }
            } else if (key == "epochs") cfg.epochs = v.as<int>();
            else if (key == "batch") cfg.batch = v.as<int>();
            else if (key == "mode") cfg.mode = mode_from_string(v.as<std::string>());
            else if (key == "shots") cfg.shots = v.as<int>();
            else if (key == "deterministic") cfg.deterministic = v.as<bool>();
            else if (key == "snrs") cfg.snrs = as_list<double>(v, "snrs");
            else if (key == "noise_seed") cfg.noise_seed = v.as<std::uint64_t>();
            else if (key == "seeds") cfg.seeds = as_list<std::uint64_t>(v, "seeds");
            else if (key == "fractions") cfg.fractions = as_list<double>(v, "fractions");
            else if (key == "out") cfg.out = v.as<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string OutputLayout::run_name(Variant v, std::uint64_t seed, double fraction) {
    return std::string(to_string(v)) + "_seed" + std::to_string(seed) + "_frac" +
           format("%.2f", fraction);
}

fs::path OutputLayout::checkpoint(Variant v, std::uint64_t seed, double fraction) const {
    return models() / (run_name(v, seed, fraction) + ".ckpt");
}

fs::path OutputLayout::train_log(Variant v, std::uint64_t seed, double fraction) const {
    return models() / (run_name(v, seed, fraction) + ".log.csv");
}

fs::path OutputLayout::eval_csv(Variant v, std::uint64_t seed, double fraction) const {
    return eval() / (run_name(v, seed, fraction) + ".csv");
}

// ---------------------------------------------------------------------------

Manifest cmd_simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    const OutputLayout out{cfg.out};
    ensure_dir(out.dataset() / "frames");

    std::optional<SceneSpec> custom;
    if (!cfg.scene_file.empty()) custom = load_scene_spec(cfg.scene_file);

    Manifest manifest;
    std::vector<Rdm> frames;
    for (SceneKind kind : cfg.scenes) {
        const RadarConfig radar = custom ? custom->radar : preset_radar(kind);
        const auto d = derive_params(radar);
        spdlog::info("{}: dR {:.4f} m, R_max {:.3f} m, slope {:.4e} Hz/s, v_max {:.3f} m/s, "
                     "dv {:.4f} m/s, N {}, M {}",
                     to_string(kind), d.range_resolution, d.max_range, d.chirp_slope,
                     d.max_velocity, d.velocity_resolution, radar.samples_per_chirp,
                     radar.chirps_per_frame);
        const double duration = cfg.frames_per_sequence * cfg.frame_interval +
                                radar.chirps_per_frame * radar.chirp_repetition;
        for (int label = 0; label < 3; ++label) {
            for (int s = 0; s < cfg.sequences_per_cell; ++s) {
                char seq[64];
                std::snprintf(seq, sizeof seq, "%s-l%d-s%02d",
                              std::string(to_string(kind)).c_str(), label, s);
                const std::uint64_t seq_seed =
                    mix_seed(cfg.dataset_seed, static_cast<std::uint64_t>(kind),
                             static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(s));
                Scene scene = random_occupied_scene(kind, label, duration, seq_seed);
                if (custom) {
                    scene.walls = custom->scene.walls;
                    scene.statics = custom->scene.statics;
                }
                for (int f = 0; f < cfg.frames_per_sequence; ++f) {
                    const std::uint64_t frame_seed = mix_seed(seq_seed, static_cast<std::uint64_t>(f));
                    Rdm rdm = simulate_frame(scene, radar, f * cfg.frame_interval, frame_seed);
                    rdm.meta.domain = Domain::Synthetic;
                    rdm.meta.sequence = seq;
                    rdm.meta.frame = f;
                    char name[96];
                    std::snprintf(name, sizeof name, "frames/%s_f%02d.rdm", seq, f);
                    write_rdm(rdm, out.dataset() / name);
                    manifest.push_back({name, rdm.meta});
                    frames.push_back(std::move(rdm));
                }
            }
        }
    }
    write_manifest(manifest, out.manifest());
    const Split split = make_split(manifest, cfg.train_fraction, cfg.split_seed);
    write_split(manifest, split, out.split());

    std::vector<const Rdm*> train_frames;
    std::set<CellKey> cells;
    for (auto i : split.train) train_frames.push_back(&frames[i]);
    for (const auto& r : manifest) cells.insert(cell_of(r.meta));
    const std::vector<CellKey> required(cells.begin(), cells.end());
    Standardizer::fit(train_frames, required).save(out.standardizer());
    spdlog::info("simulated {} frames ({} train / {} test)", manifest.size(), split.train.size(),
                 split.test.size());
    return manifest;
}

LoadedSplit load_split(const ExperimentConfig& cfg) {
    const OutputLayout out{cfg.out};
    if (!fs::exists(out.manifest())) {
        throw DataError("no dataset at " + out.dataset().string() + "; run simulate first");
    }
    LoadedSplit d;
    d.manifest = read_manifest(out.manifest());
    d.split = read_split(d.manifest, out.split());
    d.standardizer = Standardizer::load(out.standardizer());
    return d;
}

TrainSummary cmd_train(const ExperimentConfig& cfg, Variant variant, std::uint64_t seed,
                       double fraction) {
    cfg.validate();
    const OutputLayout out{cfg.out};
    const LoadedSplit data = load_split(cfg);
    const auto rows = subsample_fraction(data.manifest, data.split.train, fraction, subsample_seed(seed));
    const auto frames = standardized_frames(data, rows, out.dataset());
    std::vector<int> labels;
    for (auto i : rows) labels.push_back(data.manifest[i].meta.label);

    ModelOptions opts;
    opts.mode = cfg.mode;
    opts.shots = cfg.shots;
    Model<float> model(variant, BackboneConfig{}, seed, opts);
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch = cfg.batch;
    tc.seed = training_seed(seed);
    const auto result = train(model, pointers(frames), labels, tc);

    ensure_dir(out.models());
    nn::Checkpoint ck = model.to_checkpoint();
    ck.header["seed"] = std::to_string(seed);
    ck.header["fraction"] = format("%.2f", fraction);
    ck.header["train_frames"] = std::to_string(rows.size());
    TrainSummary summary;
    summary.checkpoint = out.checkpoint(variant, seed, fraction);
    nn::save_checkpoint(ck, summary.checkpoint);
    write_train_log(result.log, out.train_log(variant, seed, fraction));
    summary.train_frames = rows.size();
    summary.final_loss = result.log.back().loss;
    summary.final_acc = result.log.back().acc;
    summary.pqc_evaluations = result.pqc_evaluations;
    summary.seconds = result.seconds;
    spdlog::info("trained {} on {} frames in {:.1f} s ({} PQC evaluations)",
                 OutputLayout::run_name(variant, seed, fraction), rows.size(), result.seconds,
                 result.pqc_evaluations);
    return summary;
}

std::vector<MetricsReport> cmd_eval(const ExperimentConfig& cfg, Variant variant,
                                    std::uint64_t seed, double fraction, bool include_noise) {
    const OutputLayout out{cfg.out};
    const auto ckpt_path = out.checkpoint(variant, seed, fraction);
    if (!fs::exists(ckpt_path)) throw DataError("missing checkpoint " + ckpt_path.string());
    Model<float> model = Model<float>::from_checkpoint(nn::load_checkpoint(ckpt_path));
    const LoadedSplit data = load_split(cfg);
    const std::string run = OutputLayout::run_name(variant, seed, fraction);

    std::vector<Rdm> raw;
    std::vector<int> truth;
    for (auto i : data.split.test) {
        raw.push_back(read_rdm(out.dataset() / data.manifest[i].path));
        truth.push_back(data.manifest[i].meta.label);
    }

    std::vector<std::optional<double>> conditions{std::nullopt};
    if (include_noise) {
        for (double s : cfg.snrs) conditions.emplace_back(s);
    }

    ensure_dir(out.eval() / "confusion");
    ensure_dir(out.eval() / "noise");
    std::ofstream hashes(out.eval() / "noise" / (run + ".csv"));
    hashes << "path,snr_db,hash\n";

    std::vector<MetricsReport> reports;
    constexpr std::size_t kEvalBatch = 64;
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
        const auto& snr = conditions[ci];
        std::vector<std::vector<float>> inputs;
        inputs.reserve(raw.size());
        std::size_t flagged = 0;
        for (std::size_t k = 0; k < raw.size(); ++k) {
            const std::string& path = data.manifest[data.split.test[k]].path;
            if (snr) {
                const auto noisy = inject_awgn(raw[k], *snr,
                                               derive_noise_seed(cfg.noise_seed, path, *snr));
                if (noisy.flagged) ++flagged;
                hashes << path << ',' << snr_label(snr) << ','
                       << hex64(hash_bytes(noisy.frame.db.data(), noisy.frame.db.size() * sizeof(float)))
                       << '\n';
                inputs.push_back(data.standardizer.apply(noisy.frame));
            } else {
                inputs.push_back(data.standardizer.apply(raw[k]));
            }
        }
        if (flagged) spdlog::warn("{} zero-power frames left without noise", flagged);
        std::vector<int> predicted;
        const auto ptrs = pointers(inputs);
        for (std::size_t at = 0; at < ptrs.size(); at += kEvalBatch) {
            const std::size_t n = std::min(kEvalBatch, ptrs.size() - at);
            const auto probs = model.predict(std::span<const float* const>(ptrs.data() + at, n),
                                             mix_seed(seed, 0xE7A1u, ci, at));
            for (const auto& p : probs) predicted.push_back(argmax(p));
        }
        MetricsReport r = make_report(confusion(truth, predicted));
        r.variant = std::string(to_string(variant));
        r.domain = "synthetic";
        r.snr = snr_label(snr);
        r.seed = seed;
        reports.push_back(r);

        std::ofstream cm(out.eval() / "confusion" / (run + "_" + r.snr + ".csv"));
        cm << "true,pred0,pred1,pred2\n";
        for (int t = 0; t < 3; ++t) {
            cm << t << ',' << r.cm.counts[t][0] << ',' << r.cm.counts[t][1] << ','
               << r.cm.counts[t][2] << '\n';
        }
    }

    std::ofstream os(out.eval_csv(variant, seed, fraction));
    if (!os) throw DataError("cannot write eval CSV for " + run);
    os << kEvalHeader << '\n';
    for (const auto& r : reports) {
        os << r.variant << ',' << r.domain << ',' << r.snr << ',' << r.seed << ','
           << format("%.6f", r.acc) << ',' << format("%.6f", r.ba) << ','
           << format("%.6f", r.macro_f1) << ',' << format("%.6f", r.rec_pop) << '\n';
        spdlog::info("{} [{}] acc {:.3f} ba {:.3f} f1 {:.3f} rec_pop {:.3f}", run, r.snr, r.acc,
                     r.ba, r.macro_f1, r.rec_pop);
    }
    return reports;
}

std::vector<AblationRow> cmd_ablate(const ExperimentConfig& cfg) {
    cfg.validate();
    const OutputLayout out{cfg.out};
    std::vector<AblationRow> rows;
    for (Variant v : cfg.variants) {
        for (double f : cfg.fractions) {
            for (auto seed : cfg.seeds) {
                cmd_train(cfg, v, seed, f);
                const auto reports = cmd_eval(cfg, v, seed, f, false);
                rows.push_back({v, f, seed, reports.front().ba});
            }
        }
    }
    ensure_dir(out.ablation());
    std::ofstream os(out.ablation() / "ablation.csv");
    os << kAblationHeader << '\n';
    for (const auto& r : rows) {
        os << to_string(r.variant) << ',' << format("%.2f", r.fraction) << ',' << r.seed << ','
           << format("%.6f", r.ba) << '\n';
    }

    // variant x fraction table of median BA across seeds
    std::ofstream table(out.ablation() / "ablation_table.csv");
    table << "variant";
    for (double f : cfg.fractions) table << ",frac" << format("%.2f", f);
    table << '\n';
    for (Variant v : cfg.variants) {
        table << to_string(v);
        double previous = -1.0;
        for (double f : cfg.fractions) {
            std::vector<double> bas;
            for (const auto& r : rows) {
                if (r.variant == v && r.fraction == f) bas.push_back(r.ba);
            }
            std::sort(bas.begin(), bas.end());
            const std::size_t n = bas.size();
            const double median = n % 2 ? bas[n / 2] : 0.5 * (bas[n / 2 - 1] + bas[n / 2]);
            table << ',' << format("%.6f", median);
            if (v == Variant::CompactCnn && median < previous) {
                spdlog::warn("cnn median BA drops from {:.3f} to {:.3f} at fraction {:.2f}",
                             previous, median, f);
            }
            previous = median;
        }
        table << '\n';
    }
    return rows;
}

}  // namespace radocc
