#pragma once

#include "radocc/scene.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace radocc {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Geometric-optics multipath

struct ScatterPoint {
    Vec3 position;
    double reflectivity;
};

/// One monostatic propagation path collapsed to an equivalent range.
struct PropPath {
    double length = 0.0;           // one-way path length r, m
    double delay = 0.0;            // 2r/c, s
    double radial_velocity = 0.0;  // dr/dt, m/s, positive when receding
    double doppler = 0.0;          // 2v/lambda, Hz
    cplx amplitude{};              // g_tx g_rx Gamma^(2 bounces) rho / r^2
    int bounces = 0;
    int wall = -1;                 // reflecting wall index, -1 for the direct path
    Vec3 image_origin = Vec3::Zero();  // radar position, mirrored for bounce paths
};

/// Reflection point and unfolded length of the specular path a -> wall -> b.
struct Bounce {
    Vec3 reflection_point;
    double length;
};

/// Image-method bounce between two points; empty when the specular point
/// falls outside the wall rectangle or the points sit on opposite sides.
std::optional<Bounce> specular_bounce(const Wall& wall, const Vec3& a, const Vec3& b);

/// True when the open segment a-b crosses the wall rectangle.
bool segment_hits_wall(const Wall& wall, const Vec3& a, const Vec3& b);

/// Direct path plus (max_bounces == 1) one image-method path per wall, sorted
/// by length. Occluded and zero-amplitude paths are dropped. A point lying
/// on a wall plane yields the direct path only.
std::vector<PropPath> trace_paths(const Scene& scene, const ScatterPoint& point,
                                  const RadarConfig& radar, int max_bounces);

/// d/dt |p(t) - radar| by central difference with step dt.
double radial_velocity(const std::function<Vec3(double)>& trajectory, const Vec3& radar,
                       double t, double dt);

/// Fill radial velocity and Doppler of `path` from the scatterer positions one
/// step before and after the sampling instant.
void assign_motion(PropPath& path, const Vec3& before, const Vec3& after, double dt,
                   double wavelength);

/// A * exp(+j 2 pi fc tau): carrier phase of the dechirped return.
cplx path_response(const PropPath& path, double carrier_freq);

// ---------------------------------------------------------------------------
// Physical-optics aperture validator

/// Incident plane wave with polarization weights I (perpendicular) and
/// Ibar (parallel).
struct PlaneWave {
    cplx perpendicular{1.0, 0.0};
    cplx parallel{0.0, 0.0};
    double theta = 0.0;
    double phi = 0.0;
    double k0 = 0.0;

    Vec3 wavevector() const;
    Vec3 theta_hat() const;
    Vec3 phi_hat() const;
    /// Complex field vector at r, e^{+j k.r} convention.
    Eigen::Vector3cd field_at(const Vec3& r) const;
};

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = -Vec3::UnitZ();  // unit direction cosines

    /// Ray launched from `origin` against the incidence direction of `wave`.
    static Ray launched_from(const PlaneWave& wave, const Vec3& origin);
    Vec3 at(double t) const { return origin + direction * t; }
    /// Intersection with the z = 0 plane, if the ray reaches it.
    std::optional<Vec3> hit_aperture_plane() const;
};

/// Rectangle width x height centred on the origin of the local z = 0 plane,
/// with tangential fields sampled on a regular (nx+1) x (ny+1) node grid,
/// row-major with x fastest.
struct Aperture {
    double width = 0.0;
    double height = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<cplx> ex;
    std::vector<cplx> ey;

    static Aperture uniform(double width, double height, double spacing, cplx ex, cplx ey);
    /// Samples the tangential incident field of `wave` on the aperture.
    static Aperture from_plane_wave(const PlaneWave& wave, double width, double height,
                                    double spacing);

    double dx() const { return nx > 0 ? width / nx : 0.0; }
    double dy() const { return ny > 0 ? height / ny : 0.0; }
    double x_at(int i) const { return -0.5 * width + i * dx(); }
    double y_at(int j) const { return -0.5 * height + j * dy(); }
};

struct RadiationCoefficients {
    cplx a_theta;
    cplx a_phi;
};

/// Trapezoid-rule evaluation of the aperture radiation integrals for the
/// observation direction (theta, phi). Throws ConfigError when the grid is
/// coarser than lambda/8.
RadiationCoefficients po_backscatter(const Aperture& aperture, double theta, double phi,
                                     double k0);

/// Monostatic RCS 4 pi |A_theta|^2 + 4 pi |A_phi|^2.
double radar_cross_section(const RadiationCoefficients& coeffs);

}  // namespace radocc
