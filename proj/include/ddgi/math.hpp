#pragma once

// Direction encodings, sampling patterns and small vector/matrix helpers.
// All direction math runs in double precision; atlases store floats.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace ddgi {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  static constexpr Vec3 splat(double v) { return {v, v, v}; }

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  constexpr Vec3& operator/=(double s) { x /= s; y /= s; z /= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return a /= s; }
  // Componentwise product; used for colors and per-axis scaling.
  friend constexpr Vec3 operator*(const Vec3& a, const Vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
  friend constexpr Vec3 operator/(const Vec3& a, const Vec3& b) { return {a.x / b.x, a.y / b.y, a.z / b.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

/// Linear RGB radiance or reflectance triple.
using Rgb = Vec3;

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v / length(v); }
constexpr Vec3 vmin(const Vec3& a, const Vec3& b) { return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)}; }
constexpr Vec3 vmax(const Vec3& a, const Vec3& b) { return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}; }
constexpr Vec3 vabs(const Vec3& a) { return {std::abs(a.x), std::abs(a.y), std::abs(a.z)}; }
constexpr double max_component(const Vec3& a) { return std::max(a.x, std::max(a.y, a.z)); }
constexpr double min_component(const Vec3& a) { return std::min(a.x, std::min(a.y, a.z)); }
inline double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate for nearly parallel vectors.
  return std::atan2(length(cross(a, b)), dot(a, b));
}
inline Vec3 reflect(const Vec3& d, const Vec3& n) { return d - 2.0 * dot(d, n) * n; }

struct Int3 {
  int x = 0, y = 0, z = 0;
  constexpr int operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr int& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr bool operator==(const Int3&, const Int3&) = default;
};

/// Unit-length direction. Construction checks the norm; use `normalized` for arbitrary input.
class UnitVec3 {
 public:
  static constexpr double kNormTolerance = 1e-3;

  UnitVec3() : v_{0, 0, 1} {}
  explicit UnitVec3(const Vec3& v) : v_(v) {
    if (!(std::abs(length(v) - 1.0) <= kNormTolerance)) throw std::invalid_argument("UnitVec3: input is not unit length");
  }
  static UnitVec3 normalized(const Vec3& v) { return UnitVec3(ddgi::normalize(v), Trusted{}); }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT: directions flow into vector math freely
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  UnitVec3 operator-() const { return UnitVec3(-v_, Trusted{}); }

 private:
  struct Trusted {};
  UnitVec3(const Vec3& v, Trusted) : v_(v) {}
  Vec3 v_;
};

struct OctUV {
  double u = 0.5, v = 0.5;
};

struct Rotation3 {
  std::array<Vec3, 3> rows{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  Vec3 operator*(const Vec3& v) const { return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)}; }
  UnitVec3 operator*(const UnitVec3& v) const { return UnitVec3::normalized((*this) * v.vec()); }
  Rotation3 transposed() const {
    Rotation3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.rows[i][j] = rows[j][i];
    return t;
  }
  double determinant() const { return dot(rows[0], cross(rows[1], rows[2])); }

  static Rotation3 about_y(double radians) {
    const double c = std::cos(radians), s = std::sin(radians);
    Rotation3 r;
    r.rows = {Vec3{c, 0, s}, Vec3{0, 1, 0}, Vec3{-s, 0, c}};
    return r;
  }
};

inline Rotation3 operator*(const Rotation3& a, const Rotation3& b) {
  Rotation3 bt = b.transposed(), r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.rows[i][j] = dot(a.rows[i], bt.rows[j]);
  return r;
}

// ---------------------------------------------------------------------------
// Octahedral map: +Z at the square center, -Z at the four corners.
// ---------------------------------------------------------------------------

namespace detail {
constexpr double sign_not_zero(double v) { return v >= 0.0 ? 1.0 : -1.0; }
}  // namespace detail

inline OctUV octa_encode(const UnitVec3& d) {
  const Vec3& v = d.vec();
  const double l1 = std::abs(v.x) + std::abs(v.y) + std::abs(v.z);
  double px = v.x / l1, py = v.y / l1;
  if (v.z < 0.0) {
    const double fx = (1.0 - std::abs(py)) * detail::sign_not_zero(px);
    const double fy = (1.0 - std::abs(px)) * detail::sign_not_zero(py);
    px = fx;
    py = fy;
  }
  return {std::clamp(px * 0.5 + 0.5, 0.0, 1.0), std::clamp(py * 0.5 + 0.5, 0.0, 1.0)};
}

inline UnitVec3 octa_decode(const OctUV& uv) {
  if (!(uv.u >= 0.0 && uv.u <= 1.0 && uv.v >= 0.0 && uv.v <= 1.0))
    throw std::out_of_range("octa_decode: uv outside [0,1]^2");
  double x = uv.u * 2.0 - 1.0, y = uv.v * 2.0 - 1.0;
  const double z = 1.0 - std::abs(x) - std::abs(y);
  if (z < 0.0) {
    const double fx = (1.0 - std::abs(y)) * detail::sign_not_zero(x);
    const double fy = (1.0 - std::abs(x)) * detail::sign_not_zero(y);
    x = fx;
    y = fy;
  }
  return UnitVec3::normalized({x, y, z});
}

/// Direction of the center of interior texel (tx, ty) in a res x res octahedral tile.
inline UnitVec3 texel_direction(int tx, int ty, int res) {
  if (res <= 0 || tx < 0 || ty < 0 || tx >= res || ty >= res)
    throw std::out_of_range("texel_direction: border or out-of-range texel");
  return octa_decode({(tx + 0.5) / res, (ty + 0.5) / res});
}

// ---------------------------------------------------------------------------
// Sampling patterns.
// ---------------------------------------------------------------------------

inline constexpr double kGoldenRatioConjugate = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

inline UnitVec3 spherical_fibonacci(int i, int n) {
  if (n < 1 || i < 0 || i >= n) throw std::out_of_range("spherical_fibonacci: index out of range");
  const double z = 1.0 - (2.0 * i + 1.0) / n;
  const double frac = i * kGoldenRatioConjugate - std::floor(i * kGoldenRatioConjugate);
  const double phi = 2.0 * std::numbers::pi * frac;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return UnitVec3::normalized({r * std::cos(phi), r * std::sin(phi), z});
}

/// Counter-based 64-bit generator (SplitMix64). Also used to hash seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
  return g.next();
}

/// Uniformly distributed rotation from a seed (Shoemake's uniform quaternion).
inline Rotation3 random_rotation(std::uint64_t seed) {
  SplitMix64 g(seed);
  const double u1 = g.uniform(), u2 = g.uniform(), u3 = g.uniform();
  const double s1 = std::sqrt(1.0 - u1), s2 = std::sqrt(u1);
  const double t1 = 2.0 * std::numbers::pi * u2, t2 = 2.0 * std::numbers::pi * u3;
  const double w = s2 * std::cos(t2), x = s1 * std::sin(t1), y = s1 * std::cos(t1), z = s2 * std::sin(t2);
  Rotation3 r;
  r.rows = {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
            Vec3{2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
            Vec3{2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
  return r;
}

/// Per-frame, per-volume rotation for the probe ray pattern.
inline Rotation3 frame_rotation(std::uint64_t run_seed, std::uint64_t frame, std::uint64_t volume_id) {
  return random_rotation(hash_combine(hash_combine(run_seed, frame), volume_id));
}

/// Orthonormal basis with `n` as the third axis.
inline void make_basis(const Vec3& n, Vec3& t, Vec3& b) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double c = n.x * n.y * a;
  t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
  b = {c, sign + n.y * n.y * a, -n.y};
}

inline Vec3 sample_cosine_hemisphere(const Vec3& n, double u1, double u2) {
  const double r = std::sqrt(u1), phi = 2.0 * std::numbers::pi * u2;
  Vec3 t, b;
  make_basis(n, t, b);
  return normalize(t * (r * std::cos(phi)) + b * (r * std::sin(phi)) + n * std::sqrt(std::max(0.0, 1.0 - u1)));
}

}  // namespace ddgi
