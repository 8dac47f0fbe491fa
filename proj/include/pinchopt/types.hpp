#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pinchopt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Defaults follow the indoor 28 GHz setup: 30 m x 20 m hall, ceiling
// waveguides at 2.5 m, 30 dBm budget. noise_power_watts is the total noise
// power (-120 dBm); n_eff = 1.4 is an assumed dielectric waveguide value.
struct PhysicsParams {
  double carrier_frequency_hz = 28e9;
  double light_speed_m_s = 3e8;
  double effective_refractive_index = 1.4;
  double noise_power_watts = 1e-15;
  double total_power_watts = 1.0;
  double target_rate_bps_hz = 0.5;
  double area_x_m = 30.0;
  double area_y_m = 20.0;
  double height_m = 2.5;

  friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

struct Waveguide {
  int index = 0;
  double y_m = 0.0;
  double feed_x_m = 0.0;
  friend bool operator==(const Waveguide&, const Waveguide&) = default;
};

// Vertical cylinder of height d; only its footprint disc matters.
struct Obstacle {
  Point2 center_m;
  double radius_m = 0.0;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct User {
  int index = 0;
  Point2 position_m;
  friend bool operator==(const User&, const User&) = default;
};

struct Scenario {
  PhysicsParams physics;
  std::vector<Waveguide> waveguides;
  std::vector<User> users;
  std::vector<Obstacle> obstacles;
  std::uint64_t seed = 0;

  int num_waveguides() const { return static_cast<int>(waveguides.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  int num_obstacles() const { return static_cast<int>(obstacles.size()); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace pinchopt
