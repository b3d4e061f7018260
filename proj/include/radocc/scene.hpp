#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace radocc {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadarPose {
    Vec3 position{0.0, 0.0, 1.5};
    /// Horizontal pointing direction; the vertical component is ignored.
    Vec3 boresight{1.0, 0.0, 0.0};
    /// Downward tilt of the beam below the horizontal, radians.
    double tilt = 0.0;
};

/// FMCW waveform plus antenna placement. Defaults model a 60 GHz module with
/// 128 chirps of 0.3 ms repetition per frame.
struct RadarConfig {
    double carrier_freq = 60e9;
    double bandwidth = 882.35e6;
    double sample_rate = 1e6;
    double chirp_duration = 0.256e-3;
    int samples_per_chirp = 256;
    int chirps_per_frame = 128;
    double chirp_repetition = 0.3e-3;
    RadarPose pose{};
    double hpbw_azimuth = 30.5 * 3.14159265358979323846 / 180.0;
    double hpbw_elevation = 60.5 * 3.14159265358979323846 / 180.0;
};

struct DerivedParams {
    double chirp_slope;          // Hz/s
    double range_resolution;     // m
    double max_range;            // m
    double max_velocity;         // m/s
    double velocity_resolution;  // m/s
    double wavelength;           // m
};

/// Closed-form waveform limits. Throws ConfigError when fs * T_chirp is not
/// the integer sample count or the other config invariants fail.
DerivedParams derive_params(const RadarConfig& cfg);

void validate(const RadarConfig& cfg);

/// Angles of `direction` off boresight in the antenna frame, radians.
struct BeamAngles {
    double azimuth;
    double elevation;
};
BeamAngles beam_angles(const RadarPose& pose, const Vec3& direction);

/// Separable Gaussian main lobe, power pattern: 0.5 at half the HPBW.
double antenna_power_gain(const RadarConfig& cfg, const Vec3& direction);

/// One-way amplitude pattern, sqrt of the power pattern (1/sqrt(2) at the
/// half-power angles).
double antenna_gain(const RadarConfig& cfg, const Vec3& direction);

// ---------------------------------------------------------------------------
// Actors

struct MicroMotion {
    double amplitude = 0.0;  // m
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad
};

/// Offsets are in the body frame: x forward along the walk direction, y to
/// the left, z up.
struct BodyPoint {
    Vec3 offset = Vec3::Zero();
    double reflectivity = 1.0;
    MicroMotion motion{};
};

struct Waypoint {
    Vec3 position = Vec3::Zero();
    double time = 0.0;
};

struct Actor {
    std::vector<Waypoint> trajectory;
    double walk_speed = 0.0;
    std::vector<BodyPoint> body;
};

struct PointSample {
    Vec3 position;
    double reflectivity;
};

inline constexpr double kStrideLength = 1.2;

/// Torso plus two arms and two legs. Limb swing frequency follows the gait
/// cadence walk_speed / stride length.
std::vector<BodyPoint> default_body(double walk_speed, double height_scale = 1.0);

/// Walker that traverses `path` at constant `walk_speed` starting at
/// `start_time`; waypoint times follow from segment lengths.
Actor make_walker(const std::vector<Vec3>& path, double walk_speed, double start_time,
                  double height_scale = 1.0);

/// Body center at time t; t outside the trajectory span is clamped.
Vec3 body_center_at(const Actor& actor, double t);

/// Unit direction of the trajectory segment active at t (zero when the
/// actor has no displacement).
Vec3 walk_direction_at(const Actor& actor, double t);

std::vector<PointSample> actor_points_at(const Actor& actor, double t);

// ---------------------------------------------------------------------------
// Scenes

enum class SceneKind { Corridor, Room };

std::string_view to_string(SceneKind kind);
SceneKind scene_kind_from_string(std::string_view text);

/// Planar rectangle origin + s*edge_u + t*edge_v, s,t in [0,1].
struct Wall {
    Vec3 origin = Vec3::Zero();
    Vec3 edge_u = Vec3::UnitX();
    Vec3 edge_v = Vec3::UnitZ();
    double reflection = 0.5;  // amplitude reflection coefficient in [0,1]

    Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
};

struct StaticScatterer {
    Vec3 position = Vec3::Zero();
    double reflectivity = 1.0;
};

struct Scene {
    SceneKind kind = SceneKind::Corridor;
    std::vector<Wall> walls;
    std::vector<StaticScatterer> statics;
    std::vector<Actor> actors;

    /// Occupancy class: number of actors capped at 2.
    int label() const { return actors.size() >= 2 ? 2 : static_cast<int>(actors.size()); }
};

/// Scene extents (x length, y width) of the presets.
struct SceneExtent {
    double length;
    double width;
};
SceneExtent preset_extent(SceneKind kind);

/// 12 m x 2 m corridor with its two side walls and door-frame clutter.
Scene corridor_preset();
/// 8 m x 6 m furnished room: four walls, floor, sofa and chair clutter.
Scene room_preset();
Scene preset_scene(SceneKind kind);

/// Radar at the corridor end at 1.5 m looking down the axis, or at 2 m on the
/// room wall tilted 30 degrees down toward the activity area.
RadarConfig preset_radar(SceneKind kind);

/// Procedurally populated preset with `occupants` walkers whose trajectories
/// span [0, duration]. Deterministic in `seed`.
Scene random_occupied_scene(SceneKind kind, int occupants, double duration, std::uint64_t seed);

}  // namespace radocc
