#include "twophase/geometry.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace twophase {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double sqr(double v) { return v * v; }

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 ellipse_center(const HelicoidEllipse& e, double t) { return {e.x0 + e.vx * t, e.y0 + e.vy * t}; }
Vec2 harmonic_center(const CyclicHarmonic& h, double t) { return {h.x0 + h.vx * t, h.y0 + h.vy * t}; }

// Inward normal of a counter-clockwise curve from its tangent.
Vec2 inward_from_tangent(Vec2 tangent) {
  const double len = norm(tangent);
  if (len < 1e-12) throw ZeroTangent("interface tangent vanishes");
  return {-tangent.y / len, tangent.x / len};
}

int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

std::string dump_polygon(std::span<const Vec2> poly) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < poly.size(); ++i) os << "  " << i << ": (" << poly[i].x << ", " << poly[i].y << ")\n";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// InterfaceState

InterfaceState InterfaceState::create(std::vector<double> times, std::vector<std::vector<Vec2>> slices) {
  if (times.empty() || times.size() != slices.size())
    throw GeometryError("interface state needs one polygon per slice time");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw GeometryError("slice times must be strictly increasing");
  const std::size_t n = slices.front().size();
  if (n < 3) throw DegeneratePolygon("interface polygon needs at least 3 vertices");
  for (const auto& s : slices)
    if (s.size() != n) throw GeometryError("all slices must share the same vertex count");

  if (signed_area(slices.front()) < 0.0)
    for (auto& s : slices) std::reverse(s.begin(), s.end());

  for (std::size_t k = 0; k < slices.size(); ++k) {
    if (!is_simple(slices[k])) {
      std::ostringstream os;
      os << "interface polygon at slice " << k << " (t = " << times[k] << ") self-intersects:\n"
         << dump_polygon(slices[k]);
      throw PolygonSelfIntersection(os.str());
    }
  }
  InterfaceState st;
  st.times_ = std::move(times);
  st.slices_ = std::move(slices);
  return st;
}

std::size_t InterfaceState::bracket(double t) const {
  if (t < times_.front() || t > times_.back()) throw std::out_of_range("time outside interface slice range");
  if (times_.size() == 1) return 0;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(times_.begin(), it));
  return std::min(k == 0 ? 0 : k - 1, times_.size() - 2);
}

std::vector<Vec2> InterfaceState::interp_vertices(double t) const {
  const std::size_t k = bracket(t);
  if (times_.size() == 1 || t == times_[k]) return slices_[k];
  if (t == times_[k + 1]) return slices_[k + 1];
  const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  std::vector<Vec2> out(slices_[k].size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * slices_[k][i] + w * slices_[k + 1][i];
  return out;
}

// ---------------------------------------------------------------------------
// Laws

Vec2 interface_point(const MotionLaw& law, double theta, double t) {
  return std::visit(
      overloaded{
          [&](const HelicoidEllipse& e) {
            return ellipse_center(e, t) + rotate({e.a(t) * std::cos(theta), e.b(t) * std::sin(theta)}, e.omega * t);
          },
          [&](const CyclicHarmonic& h) {
            const double r = h.r(theta, t);
            const double phi = theta + h.omega * t;
            return harmonic_center(h, t) + Vec2{r * std::cos(phi), r * std::sin(phi)};
          },
          [&](const Circle& c) {
            return Vec2{c.cx + c.radius * std::cos(theta), c.cy + c.radius * std::sin(theta)};
          },
          [&](const SolutionDriven&) -> Vec2 {
            throw GeometryError("solution-driven interfaces have no parametrisation; interpolate vertices");
          },
      },
      law);
}

Phase classify(const MotionLaw& law, Vec2 p, double t) {
  const bool inside = std::visit(
      overloaded{
          [&](const HelicoidEllipse& e) {
            Vec2 d = p - ellipse_center(e, t);
            if (e.membership == Membership::Parametrization) d = rotate(d, -e.omega * t);
            return sqr(d.x / e.a(t)) + sqr(d.y / e.b(t)) <= 1.0;
          },
          [&](const CyclicHarmonic& h) {
            const Vec2 d = p - harmonic_center(h, t);
            const double phi = std::atan2(d.y, d.x);
            return norm(d) <= h.r(phi - h.omega * t, t);
          },
          [&](const Circle& c) { return sqr(p.x - c.cx) + sqr(p.y - c.cy) <= sqr(c.radius); },
          [&](const SolutionDriven& s) {
            const auto poly = s.state->interp_vertices(t);
            return ray_cast(poly, p);
          },
      },
      law);
  return inside ? Phase::Two : Phase::One;
}

bool ray_cast(std::span<const Vec2> poly, Vec2 p) {
  if (poly.size() < 3) throw DegeneratePolygon("ray casting needs at least 3 vertices");
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j];
    const Vec2 b = poly[i];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

int winding_number(std::span<const Vec2> poly, Vec2 p) {
  double total = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j] - p;
    const Vec2 b = poly[i] - p;
    total += std::atan2(cross(a, b), dot(a, b));
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) a += cross(poly[j], poly[i]);
  return 0.5 * a;
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = poly[i];
    const Vec2 a2 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share exactly one endpoint and are skipped.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

Vec2 normal(const MotionLaw& law, double theta, double t) {
  return std::visit(
      overloaded{
          [&](const HelicoidEllipse& e) {
            const Vec2 tangent = rotate({-e.a(t) * std::sin(theta), e.b(t) * std::cos(theta)}, e.omega * t);
            return inward_from_tangent(tangent);
          },
          [&](const CyclicHarmonic& h) {
            const double r = h.r(theta, t);
            const double dr = h.amp * t * h.lobes * std::sin(h.lobes * theta);
            const double phi = theta + h.omega * t;
            const Vec2 radial{std::cos(phi), std::sin(phi)};
            const Vec2 tangent = dr * radial + r * Vec2{-radial.y, radial.x};
            return inward_from_tangent(tangent);
          },
          [&](const Circle& c) {
            return inward_from_tangent({-c.radius * std::sin(theta), c.radius * std::cos(theta)});
          },
          [&](const SolutionDriven& s) {
            const auto i = static_cast<std::size_t>(theta);
            return normal_at_vertex(*s.state, i, t);
          },
      },
      law);
}

Vec2 polygon_vertex_normal(std::span<const Vec2> poly, std::size_t i) {
  const std::size_t n = poly.size();
  if (n < 3) throw DegeneratePolygon("vertex normal needs at least 3 vertices");
  const Vec2 prev = poly[(i + n - 1) % n];
  const Vec2 cur = poly[i % n];
  const Vec2 next = poly[(i + 1) % n];
  auto edge_normal = [](Vec2 e) {
    const double len = norm(e);
    if (len < 1e-12) throw ZeroTangent("degenerate polygon edge");
    return Vec2{-e.y / len, e.x / len};
  };
  const Vec2 m = edge_normal(cur - prev) + edge_normal(next - cur);
  const double len = norm(m);
  if (len < 1e-12) throw ZeroTangent("adjacent polygon edges cancel");
  return (1.0 / len) * m;
}

Vec2 normal_at_vertex(const InterfaceState& state, std::size_t i, double t) {
  const auto poly = state.interp_vertices(t);
  return polygon_vertex_normal(poly, i);
}

void write_interface_history_header(std::ostream& os) { os << "epoch,slice_time,vertex_index,x,y\n"; }

void write_interface_history(std::ostream& os, long long epoch, const InterfaceState& state) {
  const auto prec = os.precision(17);
  for (std::size_t k = 0; k < state.num_slices(); ++k) {
    const auto& s = state.slice(k);
    for (std::size_t i = 0; i < s.size(); ++i)
      os << epoch << ',' << state.times()[k] << ',' << i << ',' << s[i].x << ',' << s[i].y << '\n';
  }
  os.precision(prec);
}

}  // namespace twophase
