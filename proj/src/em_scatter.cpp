#include "radocc/em_scatter.hpp"

#include "radocc/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace radocc {

namespace {

constexpr double kPlaneTolerance = 1e-9;
constexpr double kRectTolerance = 1e-12;

bool inside_rectangle(const Wall& wall, const Vec3& q) {
    const Vec3 rel = q - wall.origin;
    const double su = rel.dot(wall.edge_u) / wall.edge_u.squaredNorm();
    const double sv = rel.dot(wall.edge_v) / wall.edge_v.squaredNorm();
    return su >= -kRectTolerance && su <= 1.0 + kRectTolerance && sv >= -kRectTolerance &&
           sv <= 1.0 + kRectTolerance;
}

double signed_distance(const Wall& wall, const Vec3& p) {
    return (p - wall.origin).dot(wall.normal());
}

bool occluded(const Scene& scene, const Vec3& a, const Vec3& b, int skip_wall) {
    for (std::size_t i = 0; i < scene.walls.size(); ++i) {
        if (static_cast<int>(i) == skip_wall) continue;
        if (segment_hits_wall(scene.walls[i], a, b)) return true;
    }
    return false;
}

}  // namespace

std::optional<Bounce> specular_bounce(const Wall& wall, const Vec3& a, const Vec3& b) {
    const Vec3 n = wall.normal();
    const double da = signed_distance(wall, a);
    const double db = signed_distance(wall, b);
    if (da * db <= 0.0) return std::nullopt;
    const Vec3 image = a - 2.0 * da * n;
    // image sits at -da, b at db: the segment crosses the plane at this fraction.
    const double s = da / (da + db);
    const Vec3 q = image + s * (b - image);
    if (!inside_rectangle(wall, q)) return std::nullopt;
    return Bounce{q, (b - image).norm()};
}

bool segment_hits_wall(const Wall& wall, const Vec3& a, const Vec3& b) {
    const double da = signed_distance(wall, a);
    const double db = signed_distance(wall, b);
    if (da * db >= 0.0) return false;
    const double s = da / (da - db);
    if (s <= kPlaneTolerance || s >= 1.0 - kPlaneTolerance) return false;
    return inside_rectangle(wall, a + s * (b - a));
}

std::vector<PropPath> trace_paths(const Scene& scene, const ScatterPoint& point,
                                  const RadarConfig& radar, int max_bounces) {
    if (max_bounces < 0 || max_bounces > 1) {
        throw ConfigError("trace_paths supports max_bounces in {0, 1}");
    }
    const Vec3& origin = radar.pose.position;
    const Vec3& p = point.position;
    std::vector<PropPath> paths;

    bool degenerate = false;
    for (const Wall& w : scene.walls) {
        if (std::abs(signed_distance(w, p)) < kPlaneTolerance) degenerate = true;
    }
    if (degenerate && max_bounces > 0) {
        spdlog::warn("scatterer at ({}, {}, {}) lies on a wall plane; tracing direct path only",
                     p.x(), p.y(), p.z());
        max_bounces = 0;
    }

    const double direct = (p - origin).norm();
    if (direct > 0.0 && !occluded(scene, origin, p, -1)) {
        const double gain = antenna_power_gain(radar, (p - origin) / direct);
        const double amp = gain * point.reflectivity / (direct * direct);
        if (amp != 0.0) {
            PropPath path;
            path.length = direct;
            path.delay = 2.0 * direct / kSpeedOfLight;
            path.amplitude = amp;
            path.image_origin = origin;
            paths.push_back(path);
        }
    }

    if (max_bounces == 1) {
        for (std::size_t i = 0; i < scene.walls.size(); ++i) {
            const Wall& wall = scene.walls[i];
            if (wall.reflection == 0.0) continue;
            const auto bounce = specular_bounce(wall, origin, p);
            if (!bounce) continue;
            const int wi = static_cast<int>(i);
            if (occluded(scene, origin, bounce->reflection_point, wi) ||
                occluded(scene, bounce->reflection_point, p, wi)) {
                continue;
            }
            const Vec3 launch = bounce->reflection_point - origin;
            const double launch_len = launch.norm();
            if (launch_len == 0.0) continue;
            const double gain = antenna_power_gain(radar, launch / launch_len);
            const double r = bounce->length;
            const double amp =
                gain * wall.reflection * wall.reflection * point.reflectivity / (r * r);
            if (amp == 0.0) continue;
            PropPath path;
            path.length = r;
            path.delay = 2.0 * r / kSpeedOfLight;
            path.amplitude = amp;
            path.bounces = 1;
            path.wall = wi;
            path.image_origin = origin - 2.0 * signed_distance(wall, origin) * wall.normal();
            paths.push_back(path);
        }
    }

    std::stable_sort(paths.begin(), paths.end(), [](const PropPath& a, const PropPath& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.wall < b.wall;
    });
    return paths;
}

double radial_velocity(const std::function<Vec3(double)>& trajectory, const Vec3& radar,
                       double t, double dt) {
    const double ahead = (trajectory(t + dt) - radar).norm();
    const double behind = (trajectory(t - dt) - radar).norm();
    return (ahead - behind) / (2.0 * dt);
}

void assign_motion(PropPath& path, const Vec3& before, const Vec3& after, double dt,
                   double wavelength) {
    const double ahead = (after - path.image_origin).norm();
    const double behind = (before - path.image_origin).norm();
    path.radial_velocity = (ahead - behind) / (2.0 * dt);
    path.doppler = 2.0 * path.radial_velocity / wavelength;
}

cplx path_response(const PropPath& path, double carrier_freq) {
    const double cycles = carrier_freq * path.delay;
    const double frac = cycles - std::floor(cycles);
    return path.amplitude * std::polar(1.0, 2.0 * std::numbers::pi * frac);
}

// ---------------------------------------------------------------------------

Vec3 PlaneWave::wavevector() const {
    return k0 * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                     std::cos(theta));
}

Vec3 PlaneWave::theta_hat() const {
    return Vec3(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                -std::sin(theta));
}

Vec3 PlaneWave::phi_hat() const { return Vec3(-std::sin(phi), std::cos(phi), 0.0); }

Eigen::Vector3cd PlaneWave::field_at(const Vec3& r) const {
    const cplx phase = std::polar(1.0, wavevector().dot(r));
    const Eigen::Vector3cd pol =
        -phi_hat().cast<cplx>() * perpendicular + theta_hat().cast<cplx>() * parallel;
    return pol * phase;
}

Ray Ray::launched_from(const PlaneWave& wave, const Vec3& origin) {
    const Vec3 dir(-std::sin(wave.theta) * std::cos(wave.phi),
                   -std::sin(wave.theta) * std::sin(wave.phi), -std::cos(wave.theta));
    return Ray{origin, dir};
}

std::optional<Vec3> Ray::hit_aperture_plane() const {
    if (direction.z() == 0.0) return std::nullopt;
    const double t = -origin.z() / direction.z();
    if (t < 0.0) return std::nullopt;
    return at(t);
}

namespace {

int intervals_for(double extent, double spacing) {
    if (extent <= 0.0) return 0;
    return std::max(1, static_cast<int>(std::ceil(extent / spacing - 1e-9)));
}

}  // namespace

Aperture Aperture::uniform(double width, double height, double spacing, cplx ex, cplx ey) {
    Aperture ap;
    ap.width = width;
    ap.height = height;
    ap.nx = intervals_for(width, spacing);
    ap.ny = intervals_for(height, spacing);
    const std::size_t nodes = static_cast<std::size_t>(ap.nx + 1) * (ap.ny + 1);
    ap.ex.assign(nodes, ex);
    ap.ey.assign(nodes, ey);
    return ap;
}

Aperture Aperture::from_plane_wave(const PlaneWave& wave, double width, double height,
                                   double spacing) {
    Aperture ap = uniform(width, height, spacing, {}, {});
    for (int j = 0; j <= ap.ny; ++j) {
        for (int i = 0; i <= ap.nx; ++i) {
            const auto e = wave.field_at(Vec3(ap.x_at(i), ap.y_at(j), 0.0));
            const std::size_t idx = static_cast<std::size_t>(j) * (ap.nx + 1) + i;
            ap.ex[idx] = e.x();
            ap.ey[idx] = e.y();
        }
    }
    return ap;
}

RadiationCoefficients po_backscatter(const Aperture& aperture, double theta, double phi,
                                     double k0) {
    if (aperture.width <= 0.0 || aperture.height <= 0.0 || aperture.nx == 0 ||
        aperture.ny == 0) {
        return {};
    }
    const std::size_t nodes = static_cast<std::size_t>(aperture.nx + 1) * (aperture.ny + 1);
    if (aperture.ex.size() != nodes || aperture.ey.size() != nodes) {
        throw ConfigError("aperture field samples do not match the node grid");
    }
    const double wavelength = 2.0 * std::numbers::pi / k0;
    const double required = wavelength / 8.0;
    if (aperture.dx() > required * (1.0 + 1e-12) || aperture.dy() > required * (1.0 + 1e-12)) {
        throw ConfigError("aperture grid spacing (" + std::to_string(aperture.dx()) + ", " +
                          std::to_string(aperture.dy()) + ") m exceeds lambda/8 = " +
                          std::to_string(required) + " m");
    }

    const double kx = k0 * std::sin(theta) * std::cos(phi);
    const double ky = k0 * std::sin(theta) * std::sin(phi);
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double dx = aperture.dx();
    const double dy = aperture.dy();

    cplx sum_theta{};
    cplx sum_phi{};
    for (int j = 0; j <= aperture.ny; ++j) {
        const double wy = (j == 0 || j == aperture.ny) ? 0.5 * dy : dy;
        const double y = aperture.y_at(j);
        for (int i = 0; i <= aperture.nx; ++i) {
            const double wx = (i == 0 || i == aperture.nx) ? 0.5 * dx : dx;
            const double x = aperture.x_at(i);
            const std::size_t idx = static_cast<std::size_t>(j) * (aperture.nx + 1) + i;
            const cplx kernel = std::polar(wx * wy, kx * x + ky * y);
            sum_theta += (aperture.ex[idx] * cp + aperture.ey[idx] * sp) * kernel;
            sum_phi += (-aperture.ex[idx] * sp + aperture.ey[idx] * cp) * kernel;
        }
    }
    const cplx scale(0.0, k0 / (2.0 * std::numbers::pi));
    return {scale * sum_theta, scale * std::cos(theta) * sum_phi};
}

double radar_cross_section(const RadiationCoefficients& coeffs) {
    return 4.0 * std::numbers::pi * (std::norm(coeffs.a_theta) + std::norm(coeffs.a_phi));
}

}  // namespace radocc
