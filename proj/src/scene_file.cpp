#include "radocc/scene_file.hpp"

#include "radocc/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <numbers>
#include <sstream>

namespace radocc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 as_vec3(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence() || node.size() != 3) {
        throw ConfigError(what + " must be a 3-element list");
    }
    return {node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
}

template <typename T>
void read_opt(const YAML::Node& node, const char* key, T& out) {
    if (node[key]) out = node[key].as<T>();
}

void parse_radar(const YAML::Node& node, RadarConfig& radar) {
    if (!node.IsMap()) throw ConfigError("radar must be a mapping");
    read_opt(node, "carrier_freq", radar.carrier_freq);
    read_opt(node, "bandwidth", radar.bandwidth);
    read_opt(node, "sample_rate", radar.sample_rate);
    read_opt(node, "chirp_duration", radar.chirp_duration);
    read_opt(node, "samples_per_chirp", radar.samples_per_chirp);
    read_opt(node, "chirps_per_frame", radar.chirps_per_frame);
    read_opt(node, "chirp_repetition", radar.chirp_repetition);
    if (node["position"]) radar.pose.position = as_vec3(node["position"], "radar.position");
    if (node["boresight"]) radar.pose.boresight = as_vec3(node["boresight"], "radar.boresight");
    if (node["tilt_deg"]) radar.pose.tilt = node["tilt_deg"].as<double>() * kDeg;
    if (node["hpbw_azimuth_deg"]) radar.hpbw_azimuth = node["hpbw_azimuth_deg"].as<double>() * kDeg;
    if (node["hpbw_elevation_deg"]) {
        radar.hpbw_elevation = node["hpbw_elevation_deg"].as<double>() * kDeg;
    }
}

}  // namespace

SceneSpec parse_scene_spec(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scene file: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("scene file must be a mapping");

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key != "preset" && key != "radar" && key != "walls" && key != "scatterers" &&
            key != "actors") {
            throw ConfigError("unknown scene key '" + key + "'");
        }
    }
    auto list = [&](const char* key) {
        const YAML::Node node = root[key];
        if (node && !node.IsSequence()) throw ConfigError(std::string(key) + " must be a list");
        return node;
    };

    SceneSpec spec;
    try {
        if (root["preset"]) {
            const auto kind = scene_kind_from_string(root["preset"].as<std::string>());
            spec.scene = preset_scene(kind);
            spec.radar = preset_radar(kind);
        }
        if (root["radar"]) parse_radar(root["radar"], spec.radar);

        for (const auto& w : list("walls")) {
            Wall wall;
            wall.origin = as_vec3(w["origin"], "wall.origin");
            wall.edge_u = as_vec3(w["edge_u"], "wall.edge_u");
            wall.edge_v = as_vec3(w["edge_v"], "wall.edge_v");
            read_opt(w, "reflection", wall.reflection);
            if (wall.reflection < 0.0 || wall.reflection > 1.0) {
                throw ConfigError("wall reflection must lie in [0, 1]");
            }
            if (wall.edge_u.cross(wall.edge_v).norm() == 0.0) {
                throw ConfigError("wall edges must not be parallel");
            }
            spec.scene.walls.push_back(wall);
        }
        for (const auto& s : list("scatterers")) {
            StaticScatterer sc;
            sc.position = as_vec3(s["position"], "scatterer.position");
            read_opt(s, "reflectivity", sc.reflectivity);
            spec.scene.statics.push_back(sc);
        }
        for (const auto& a : list("actors")) {
            std::vector<Vec3> path;
            if (!a["path"].IsSequence()) throw ConfigError("actor path must be a list of points");
            for (const auto& p : a["path"]) path.push_back(as_vec3(p, "actor.path point"));
            if (path.empty()) throw ConfigError("actor path must have at least one point");
            const double speed = a["speed"] ? a["speed"].as<double>() : 1.0;
            const double start = a["start_time"] ? a["start_time"].as<double>() : 0.0;
            const double height = a["height_scale"] ? a["height_scale"].as<double>() : 1.0;
            spec.scene.actors.push_back(make_walker(path, speed, start, height));
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scene file: ") + e.what());
    }
    validate(spec.radar);
    return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read scene file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scene_spec(ss.str());
}

}  // namespace radocc
