// WGS-84 geodetic <-> ECEF <-> local ENU conversions. Only what dataset
// ingestion needs to express positions relative to a declared anchor.

#pragma once

#include <Eigen/Core>
#include <cmath>

namespace fgnav {

struct Geodetic {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

namespace wgs84 {
constexpr double kA = 6378137.0;                // semi-major axis, m
constexpr double kF = 1.0 / 298.257223563;      // flattening
constexpr double kB = kA * (1.0 - kF);          // semi-minor axis, m
constexpr double kE2 = kF * (2.0 - kF);         // first eccentricity squared
constexpr double kEp2 = kE2 / (1.0 - kE2);      // second eccentricity squared
}  // namespace wgs84

inline Eigen::Vector3d geodetic_to_ecef(const Geodetic& g) {
  const double lat = g.lat_deg * M_PI / 180.0;
  const double lon = g.lon_deg * M_PI / 180.0;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double N = wgs84::kA / std::sqrt(1.0 - wgs84::kE2 * sl * sl);
  return {(N + g.alt_m) * cl * std::cos(lon),
          (N + g.alt_m) * cl * std::sin(lon),
          (N * (1.0 - wgs84::kE2) + g.alt_m) * sl};
}

/// Bowring's closed-form approximation followed by one Newton refinement;
/// sub-millimeter for terrestrial altitudes.
inline Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef) {
  const double x = ecef.x(), y = ecef.y(), z = ecef.z();
  const double p = std::hypot(x, y);
  const double theta = std::atan2(z * wgs84::kA, p * wgs84::kB);
  const double st = std::sin(theta), ct = std::cos(theta);
  double lat = std::atan2(z + wgs84::kEp2 * wgs84::kB * st * st * st,
                          p - wgs84::kE2 * wgs84::kA * ct * ct * ct);
  for (int i = 0; i < 2; ++i) {
    const double sl = std::sin(lat);
    const double N = wgs84::kA / std::sqrt(1.0 - wgs84::kE2 * sl * sl);
    const double alt = p / std::cos(lat) - N;
    lat = std::atan2(z, p * (1.0 - wgs84::kE2 * N / (N + alt)));
  }
  const double sl = std::sin(lat);
  const double N = wgs84::kA / std::sqrt(1.0 - wgs84::kE2 * sl * sl);
  Geodetic g;
  g.lat_deg = lat * 180.0 / M_PI;
  g.lon_deg = std::atan2(y, x) * 180.0 / M_PI;
  g.alt_m = p / std::cos(lat) - N;
  return g;
}

/// Rotation from ECEF deltas to the anchor's local ENU axes.
inline Eigen::Matrix3d ecef_to_enu_rotation(const Geodetic& anchor) {
  const double lat = anchor.lat_deg * M_PI / 180.0;
  const double lon = anchor.lon_deg * M_PI / 180.0;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  Eigen::Matrix3d R;
  R << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return R;
}

inline Eigen::Vector3d geodetic_to_enu(const Geodetic& point,
                                       const Geodetic& anchor) {
  return ecef_to_enu_rotation(anchor) *
         (geodetic_to_ecef(point) - geodetic_to_ecef(anchor));
}

inline Geodetic enu_to_geodetic(const Eigen::Vector3d& enu,
                                const Geodetic& anchor) {
  return ecef_to_geodetic(geodetic_to_ecef(anchor) +
                          ecef_to_enu_rotation(anchor).transpose() * enu);
}

}  // namespace fgnav
