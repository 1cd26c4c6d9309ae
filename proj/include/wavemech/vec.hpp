#pragma once

#include <array>
#include <cmath>

namespace wavemech {

/// Spatial point or vector; components beyond the grid dimension stay zero.
struct Vec3 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y = 0.0, double z = 0.0) : c{x, y, z} {}

  constexpr double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  constexpr double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) (*this)[i] += o[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) (*this)[i] -= o[i];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator-(Vec3 a) { return a *= -1.0; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace wavemech
