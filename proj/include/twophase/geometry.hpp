#pragma once

// Interface motion laws, phase membership and interface normals.

#include <cmath>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace twophase {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class Phase : int { One = 1, Two = 2 };

struct Box {
  double xmin = 0.0;
  double xmax = 3.0;
  double ymin = 0.0;
  double ymax = 3.0;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePolygon : GeometryError {
  using GeometryError::GeometryError;
};
struct PolygonSelfIntersection : GeometryError {
  using GeometryError::GeometryError;
};
struct ZeroTangent : GeometryError {
  using GeometryError::GeometryError;
};

/// How the rotating ellipse decides membership. `Parametrization` rotates
/// into the ellipse frame; `PaperText` uses the axis-aligned inequality.
enum class Membership { Parametrization, PaperText };

/// Ellipse with semi-axes a(t) = a0 + a1 t, b(t) = b0 + b1 t, translating
/// with (vx, vy) and rotating with angular velocity omega.
struct HelicoidEllipse {
  double x0 = 1.2, y0 = 1.2;
  double vx = 0.6, vy = 0.6;
  double omega = 2.0 * std::numbers::pi;
  double a0 = 1.0, a1 = 0.1;
  double b0 = 1.0, b1 = -0.1;
  Membership membership = Membership::Parametrization;

  double a(double t) const { return a0 + a1 * t; }
  double b(double t) const { return b0 + b1 * t; }
};

/// Star curve r(theta, t) = 1 - amp * t * cos(lobes * theta), translating and rotating.
struct CyclicHarmonic {
  double x0 = 1.2, y0 = 1.2;
  double vx = 0.6, vy = 0.6;
  double omega = 2.0 * std::numbers::pi;
  double amp = 0.3;
  int lobes = 5;

  double r(double theta, double t) const { return 1.0 - amp * t * std::cos(lobes * theta); }
};

struct Circle {
  double cx = 1.5, cy = 1.5;
  double radius = 1.0;
};

/// Ordered interface polygons on a shared grid of slice times.
class InterfaceState {
 public:
  /// Validates the slices (>= 3 vertices, simple, common vertex count) and
  /// reverses every slice when the first one is clockwise.
  static InterfaceState create(std::vector<double> times, std::vector<std::vector<Vec2>> slices);

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec2>& slice(std::size_t k) const { return slices_[k]; }
  std::size_t num_slices() const { return slices_.size(); }
  std::size_t num_vertices() const { return slices_.front().size(); }
  /// Position of vertex i on the initial interface.
  Vec2 origin(std::size_t i) const { return slices_.front()[i]; }

  /// Index k with times[k] <= t <= times[k+1] (k = last-1 at the right end).
  std::size_t bracket(double t) const;
  /// Per-vertex linear interpolation between the bracketing slices.
  std::vector<Vec2> interp_vertices(double t) const;

  friend bool operator==(const InterfaceState&, const InterfaceState&) = default;

 private:
  std::vector<double> times_;
  std::vector<std::vector<Vec2>> slices_;
};

struct SolutionDriven {
  std::shared_ptr<const InterfaceState> state;
};

using MotionLaw = std::variant<HelicoidEllipse, CyclicHarmonic, Circle, SolutionDriven>;

/// Point on the interface at parameter theta and time t (analytic laws only).
Vec2 interface_point(const MotionLaw& law, double theta, double t);

/// Phase2 iff inside (or on) the closed interface curve at time t.
Phase classify(const MotionLaw& law, Vec2 p, double t);

/// Crossing parity of a horizontal ray to +x. An edge counts when one
/// endpoint is strictly above the ray and the other at or below it.
bool ray_cast(std::span<const Vec2> polygon, Vec2 p);

/// Winding number of a closed polygon around p (independent of ray_cast).
int winding_number(std::span<const Vec2> polygon, Vec2 p);

double signed_area(std::span<const Vec2> polygon);
/// O(N^2) check that no two non-adjacent edges intersect.
bool is_simple(std::span<const Vec2> polygon);

/// Unit normal n1 at parameter theta, pointing from phase 1 into phase 2.
Vec2 normal(const MotionLaw& law, double theta, double t);

/// Vertex normal of a counter-clockwise polygon: renormalised mean of the
/// two adjacent inward edge normals.
Vec2 polygon_vertex_normal(std::span<const Vec2> ccw_polygon, std::size_t i);

/// Vertex normal of a solution-driven interface at vertex i and time t.
Vec2 normal_at_vertex(const InterfaceState& state, std::size_t i, double t);

/// Appends rows (epoch, slice_time, vertex_index, x, y).
void write_interface_history(std::ostream& os, long long epoch, const InterfaceState& state);
void write_interface_history_header(std::ostream& os);

}  // namespace twophase
