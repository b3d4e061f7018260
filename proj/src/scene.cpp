#include "radocc/scene.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace radocc {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Vec3 horizontal(const Vec3& v) {
    Vec3 h(v.x(), v.y(), 0.0);
    const double n = h.norm();
    return n > 0.0 ? Vec3(h / n) : Vec3::UnitX();
}

}  // namespace

void validate(const RadarConfig& cfg) {
    if (!(cfg.bandwidth > 0.0) || !(cfg.carrier_freq > cfg.bandwidth)) {
        throw ConfigError("radar config: require carrier_freq > bandwidth > 0");
    }
    if (!(cfg.sample_rate > 0.0) || !(cfg.chirp_duration > 0.0)) {
        throw ConfigError("radar config: sample_rate and chirp_duration must be positive");
    }
    const double samples = cfg.sample_rate * cfg.chirp_duration;
    const double rounded = std::round(samples);
    if (std::abs(samples - rounded) > 1e-6 * std::max(1.0, rounded) ||
        static_cast<long long>(rounded) != cfg.samples_per_chirp) {
        throw ConfigError("radar config: sample_rate * chirp_duration = " + std::to_string(samples) +
                          " is not the integer samples_per_chirp " +
                          std::to_string(cfg.samples_per_chirp));
    }
    if (cfg.chirp_repetition < cfg.chirp_duration) {
        throw ConfigError("radar config: chirp_repetition must be >= chirp_duration");
    }
    if (!is_power_of_two(cfg.chirps_per_frame)) {
        throw ConfigError("radar config: chirps_per_frame must be a power of two");
    }
    if (!(cfg.hpbw_azimuth > 0.0) || !(cfg.hpbw_elevation > 0.0)) {
        throw ConfigError("radar config: beamwidths must be positive");
    }
}

DerivedParams derive_params(const RadarConfig& cfg) {
    validate(cfg);
    const double slope = cfg.bandwidth / cfg.chirp_duration;
    const double wavelength = kSpeedOfLight / cfg.carrier_freq;
    return DerivedParams{
        .chirp_slope = slope,
        .range_resolution = kSpeedOfLight / (2.0 * cfg.bandwidth),
        .max_range = kSpeedOfLight * cfg.sample_rate / (4.0 * slope),
        .max_velocity = wavelength / (4.0 * cfg.chirp_repetition),
        .velocity_resolution =
            wavelength / (2.0 * cfg.chirps_per_frame * cfg.chirp_repetition),
        .wavelength = wavelength,
    };
}

BeamAngles beam_angles(const RadarPose& pose, const Vec3& direction) {
    const Vec3 flat = horizontal(pose.boresight);
    const Vec3 forward = std::cos(pose.tilt) * flat - std::sin(pose.tilt) * Vec3::UnitZ();
    const Vec3 right = flat.cross(Vec3::UnitZ()).normalized();
    const Vec3 up = right.cross(forward);
    const double f = direction.dot(forward);
    const double r = direction.dot(right);
    const double u = direction.dot(up);
    return {std::atan2(r, f), std::atan2(u, std::hypot(f, r))};
}

double antenna_power_gain(const RadarConfig& cfg, const Vec3& direction) {
    const auto [az, el] = beam_angles(cfg.pose, direction);
    const double a = 2.0 * az / cfg.hpbw_azimuth;
    const double e = 2.0 * el / cfg.hpbw_elevation;
    return std::exp(-std::numbers::ln2 * a * a) * std::exp(-std::numbers::ln2 * e * e);
}

double antenna_gain(const RadarConfig& cfg, const Vec3& direction) {
    return std::sqrt(antenna_power_gain(cfg, direction));
}

// ---------------------------------------------------------------------------

std::vector<BodyPoint> default_body(double walk_speed, double height_scale) {
    const double cadence = walk_speed / kStrideLength;
    const double h = height_scale;
    const double pi = std::numbers::pi;
    return {
        {Vec3(0.0, 0.0, 0.3 * h), 1.0, {}},
        {Vec3(0.0, 0.22, 0.35 * h), 0.25, {0.2 * h, cadence, 0.0}},
        {Vec3(0.0, -0.22, 0.35 * h), 0.25, {0.2 * h, cadence, pi}},
        {Vec3(0.0, 0.1, -0.5 * h), 0.35, {0.3 * h, cadence, pi}},
        {Vec3(0.0, -0.1, -0.5 * h), 0.35, {0.3 * h, cadence, 0.0}},
    };
}

Actor make_walker(const std::vector<Vec3>& path, double walk_speed, double start_time,
                  double height_scale) {
    if (path.empty()) throw ConfigError("walker path needs at least one waypoint");
    if (!(walk_speed > 0.0)) throw ConfigError("walk_speed must be positive");
    Actor actor;
    actor.walk_speed = walk_speed;
    double t = start_time;
    actor.trajectory.push_back({path.front(), t});
    for (std::size_t i = 1; i < path.size(); ++i) {
        t += (path[i] - path[i - 1]).norm() / walk_speed;
        actor.trajectory.push_back({path[i], t});
    }
    actor.body = default_body(walk_speed, height_scale);
    return actor;
}

namespace {

// Index i of the segment [i, i+1] containing clamped t, or npos for a
// single-waypoint trajectory.
std::size_t segment_at(const std::vector<Waypoint>& traj, double t) {
    if (traj.size() < 2) return static_cast<std::size_t>(-1);
    if (t <= traj.front().time) return 0;
    if (t >= traj.back().time) return traj.size() - 2;
    const auto it = std::upper_bound(traj.begin(), traj.end(), t,
                                     [](double v, const Waypoint& w) { return v < w.time; });
    return static_cast<std::size_t>(it - traj.begin()) - 1;
}

}  // namespace

Vec3 body_center_at(const Actor& actor, double t) {
    const auto& traj = actor.trajectory;
    if (traj.empty()) throw ConfigError("actor has an empty trajectory");
    if (traj.size() == 1 || t <= traj.front().time) return traj.front().position;
    if (t >= traj.back().time) return traj.back().position;
    const std::size_t i = segment_at(traj, t);
    const Waypoint& a = traj[i];
    const Waypoint& b = traj[i + 1];
    const double span = b.time - a.time;
    if (span <= 0.0) return b.position;
    const double s = (t - a.time) / span;
    return a.position + s * (b.position - a.position);
}

Vec3 walk_direction_at(const Actor& actor, double t) {
    const auto& traj = actor.trajectory;
    const std::size_t i = segment_at(traj, t);
    if (i == static_cast<std::size_t>(-1)) return Vec3::Zero();
    const Vec3 d = traj[i + 1].position - traj[i].position;
    const double n = d.norm();
    return n > 0.0 ? Vec3(d / n) : Vec3::Zero();
}

std::vector<PointSample> actor_points_at(const Actor& actor, double t) {
    if (actor.body.empty()) throw ConfigError("actor needs at least one body point");
    const Vec3 center = body_center_at(actor, t);
    const Vec3 dir = walk_direction_at(actor, t);
    const Vec3 forward = horizontal(dir);
    const Vec3 left = Vec3::UnitZ().cross(forward);
    std::vector<PointSample> out;
    out.reserve(actor.body.size());
    for (const BodyPoint& p : actor.body) {
        Vec3 pos = center + forward * p.offset.x() + left * p.offset.y() +
                   Vec3::UnitZ() * p.offset.z();
        const MicroMotion& m = p.motion;
        if (m.amplitude != 0.0) {
            pos += dir * (m.amplitude *
                          std::sin(2.0 * std::numbers::pi * m.frequency * t + m.phase));
        }
        out.push_back({pos, p.reflectivity});
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SceneKind kind) {
    return kind == SceneKind::Corridor ? "corridor" : "room";
}

SceneKind scene_kind_from_string(std::string_view text) {
    if (text == "corridor") return SceneKind::Corridor;
    if (text == "room") return SceneKind::Room;
    throw ConfigError("unknown scene kind '" + std::string(text) + "'");
}

SceneExtent preset_extent(SceneKind kind) {
    return kind == SceneKind::Corridor ? SceneExtent{12.0, 2.0} : SceneExtent{8.0, 6.0};
}

Scene corridor_preset() {
    Scene s;
    s.kind = SceneKind::Corridor;
    const double height = 3.0;
    s.walls = {
        {Vec3(0.0, 1.0, 0.0), Vec3(12.0, 0.0, 0.0), Vec3(0.0, 0.0, height), 0.6},
        {Vec3(0.0, -1.0, 0.0), Vec3(12.0, 0.0, 0.0), Vec3(0.0, 0.0, height), 0.6},
    };
    s.statics = {
        {Vec3(3.0, 0.95, 1.0), 0.3},   // door frame
        {Vec3(7.0, -0.95, 1.0), 0.3},  // door frame
        {Vec3(5.2, 0.9, 0.5), 0.2},    // extinguisher cabinet
        {Vec3(11.9, 0.3, 1.2), 0.8},   // end wall
        {Vec3(11.9, -0.4, 0.6), 0.6},
    };
    return s;
}

Scene room_preset() {
    Scene s;
    s.kind = SceneKind::Room;
    const double h = 2.8;
    s.walls = {
        {Vec3(0.0, -3.0, 0.0), Vec3(0.0, 6.0, 0.0), Vec3(0.0, 0.0, h), 0.5},
        {Vec3(8.0, -3.0, 0.0), Vec3(0.0, 6.0, 0.0), Vec3(0.0, 0.0, h), 0.5},
        {Vec3(0.0, -3.0, 0.0), Vec3(8.0, 0.0, 0.0), Vec3(0.0, 0.0, h), 0.5},
        {Vec3(0.0, 3.0, 0.0), Vec3(8.0, 0.0, 0.0), Vec3(0.0, 0.0, h), 0.5},
        {Vec3(0.0, -3.0, 0.0), Vec3(8.0, 0.0, 0.0), Vec3(0.0, 6.0, 0.0), 0.3},  // floor
    };
    s.statics = {
        // sofa
        {Vec3(5.6, -2.0, 0.45), 0.5},
        {Vec3(5.6, -1.4, 0.45), 0.5},
        {Vec3(5.6, -0.8, 0.45), 0.5},
        {Vec3(6.0, -1.4, 0.85), 0.4},
        // chair
        {Vec3(3.4, 1.9, 0.5), 0.4},
        {Vec3(3.6, 2.1, 0.9), 0.3},
        // table and shelf
        {Vec3(4.3, 0.6, 0.7), 0.3},
        {Vec3(7.8, 2.2, 1.5), 0.6},
    };
    return s;
}

Scene preset_scene(SceneKind kind) {
    return kind == SceneKind::Corridor ? corridor_preset() : room_preset();
}

RadarConfig preset_radar(SceneKind kind) {
    RadarConfig cfg;
    if (kind == SceneKind::Corridor) {
        cfg.pose = RadarPose{Vec3(0.0, 0.0, 1.5), Vec3::UnitX(), 0.0};
    } else {
        cfg.pose = RadarPose{Vec3(0.1, 0.0, 2.0), Vec3::UnitX(), 30.0 * std::numbers::pi / 180.0};
    }
    return cfg;
}

namespace {

// Back-and-forth walk along the corridor axis long enough for `needed` metres.
std::vector<Vec3> corridor_path(CounterRng& rng, double lane, double height, double needed) {
    const double lo = 1.2;
    const double hi = 11.2;
    double x = rng.uniform(lo, hi);
    double dir = rng.uniform() < 0.5 ? -1.0 : 1.0;
    std::vector<Vec3> path{Vec3(x, lane, height)};
    double walked = 0.0;
    while (walked < needed) {
        const double target = dir > 0 ? hi : lo;
        const double leg = std::min(std::abs(target - x), needed - walked + 0.5);
        x += dir * leg;
        walked += leg;
        path.emplace_back(x, lane, height);
        dir = -dir;
    }
    return path;
}

std::vector<Vec3> room_path(CounterRng& rng, double height, double needed) {
    auto sample = [&] { return Vec3(rng.uniform(1.2, 7.0), rng.uniform(-2.4, 2.4), height); };
    std::vector<Vec3> path{sample()};
    double walked = 0.0;
    while (walked < needed) {
        Vec3 next = sample();
        const double d = (next - path.back()).norm();
        if (d < 1.0) continue;
        walked += d;
        path.push_back(next);
    }
    return path;
}

}  // namespace

Scene random_occupied_scene(SceneKind kind, int occupants, double duration, std::uint64_t seed) {
    if (occupants < 0) throw ConfigError("occupants must be non-negative");
    Scene scene = preset_scene(kind);
    CounterRng rng(mix_seed(seed, 0x5CE7Eull));
    double previous_lane = 10.0;
    for (int i = 0; i < occupants; ++i) {
        const double speed = rng.uniform(0.8, 1.5);
        const double height_scale = rng.uniform(0.9, 1.1);
        const double center_height = 1.0 * height_scale;
        const double needed = speed * (duration + 1.0);
        std::vector<Vec3> path;
        if (kind == SceneKind::Corridor) {
            double lane = rng.uniform(-0.6, 0.6);
            while (std::abs(lane - previous_lane) < 0.35) lane = rng.uniform(-0.6, 0.6);
            previous_lane = lane;
            path = corridor_path(rng, lane, center_height, needed);
        } else {
            path = room_path(rng, center_height, needed);
        }
        scene.actors.push_back(make_walker(path, speed, 0.0, height_scale));
    }
    return scene;
}

}  // namespace radocc
