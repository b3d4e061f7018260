#pragma once

#include "radocc/scene.hpp"

#include <filesystem>
#include <string>

namespace radocc {

struct SceneSpec {
    Scene scene;
    RadarConfig radar;
};

/// Parses a YAML scene description:
///
///   preset: corridor | room        # optional starting point
///   radar: {carrier_freq, bandwidth, sample_rate, chirp_duration,
///           samples_per_chirp, chirps_per_frame, chirp_repetition,
///           position: [x,y,z], boresight: [x,y,z], tilt_deg,
///           hpbw_azimuth_deg, hpbw_elevation_deg}
///   walls:      - {origin: [..], edge_u: [..], edge_v: [..], reflection}
///   scatterers: - {position: [..], reflectivity}
///   actors:     - {path: [[..], ..], speed, start_time, height_scale}
///
/// Listed walls, scatterers and actors are appended to the preset contents.
/// Throws ConfigError on schema violations.
SceneSpec parse_scene_spec(const std::string& yaml_text);
SceneSpec load_scene_spec(const std::filesystem::path& path);

}  // namespace radocc
