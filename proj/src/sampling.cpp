#include "twophase/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

namespace twophase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(std::initializer_list<int> counts) {
  for (int c : counts)
    if (c < 1) throw SamplingError("sample counts must be at least 1");
}

Split classify_all(const std::vector<Point3>& pts, const MotionLaw& law) {
  Split s;
  for (const auto& p : pts) (classify(law, {p.x, p.y}, p.t) == Phase::Two ? s.phase2 : s.phase1).push_back(p);
  return s;
}

double cell_center(double lo, double hi, int j, int n) { return lo + (j + 0.5) * (hi - lo) / n; }

}  // namespace

std::vector<int> parse_dims(std::string_view text) {
  const auto bad = [&] { return SamplingError("malformed dimension string '" + std::string(text) + "'"); };
  std::vector<int> dims;
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  // Exactly one separator between factors.
  auto separator = [&] {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 'x' || c == 'X' || c == '*') {
      ++i;
    } else if (c == 0xC3 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x97) {
      i += 2;  // UTF-8 multiplication sign
    } else {
      throw bad();
    }
  };
  skip_space();
  while (true) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    if (ec != std::errc() || ptr == text.data() + i) throw bad();
    if (v < 1) throw SamplingError("dimension factors must be >= 1 in '" + std::string(text) + "'");
    dims.push_back(v);
    i = static_cast<std::size_t>(ptr - text.data());
    skip_space();
    if (i == text.size()) break;
    separator();
    skip_space();
  }
  return dims;
}

std::string format_dims(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) s += "x";
    s += std::to_string(dims[k]);
  }
  return s;
}

std::vector<double> closed_time_grid(int n, double T) {
  require_positive({n});
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = n == 1 ? 0.0 : T * k / (n - 1);
  return t;
}

Split gen_interior(const SamplingSpec& spec, const MotionLaw& law, const Box& box, double T) {
  const auto& s = spec.interior;
  require_positive({s.nx, s.ny, s.nt});
  std::vector<Point3> pts;
  pts.reserve(spec.interior_count());
  if (spec.mode == SamplingMode::Uniform) {
    // Times k T / nt, k = 1..nt: the momentum equation holds on (0, T].
    for (int k = 1; k <= s.nt; ++k) {
      const double t = T * k / s.nt;
      for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i)
          pts.push_back({cell_center(box.xmin, box.xmax, i, s.nx), cell_center(box.ymin, box.ymax, j, s.ny), t});
    }
  } else {
    std::mt19937_64 rng(spec.seed ^ 0x1a2b3c4dULL);
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax), ut(0.0, T);
    for (std::size_t n = 0; n < spec.interior_count(); ++n) {
      const double x = ux(rng);
      const double y = uy(rng);
      const double t = T - ut(rng);  // (0, T]
      pts.push_back({x, y, t});
    }
    canonical_order(pts);
  }
  return classify_all(pts, law);
}

std::vector<Point3> gen_boundary(const SamplingSpec& spec, const Box& box, double T) {
  const auto& s = spec.boundary;
  require_positive({s.per_side, s.sides, s.nt});
  if (s.sides != 4) throw SamplingError("the rectangular domain has exactly 4 sides");
  std::vector<Point3> pts;
  pts.reserve(spec.boundary_count());
  std::mt19937_64 rng(spec.seed ^ 0x5e5e5e5eULL);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const bool uniform = spec.mode == SamplingMode::Uniform;
  const auto times = closed_time_grid(s.nt, T);
  for (int k = 0; k < s.nt; ++k) {
    for (int side = 0; side < 4; ++side) {
      for (int j = 0; j < s.per_side; ++j) {
        const double f = uniform ? (j + 0.5) / s.per_side : u01(rng);
        const double t = uniform ? times[k] : T * u01(rng);
        const double x = box.xmin + f * (box.xmax - box.xmin);
        const double y = box.ymin + f * (box.ymax - box.ymin);
        switch (side) {
          case 0: pts.push_back({x, box.ymin, t}); break;
          case 1: pts.push_back({box.xmax, y, t}); break;
          case 2: pts.push_back({box.xmax - (x - box.xmin), box.ymax, t}); break;
          default: pts.push_back({box.xmin, box.ymax - (y - box.ymin), t}); break;
        }
      }
    }
  }
  return pts;
}

std::vector<InterfaceSample> interface_samples(const InterfaceState& st) {
  std::vector<InterfaceSample> out;
  out.reserve(st.num_slices() * st.num_vertices());
  for (std::size_t k = 0; k < st.num_slices(); ++k) {
    const auto& poly = st.slice(k);
    for (std::size_t i = 0; i < poly.size(); ++i)
      out.push_back({{poly[i].x, poly[i].y, st.times()[k]}, static_cast<double>(i), polygon_vertex_normal(poly, i)});
  }
  return out;
}

std::vector<InterfaceSample> gen_interface(const SamplingSpec& spec, const MotionLaw& law, double T) {
  std::vector<InterfaceSample> out;
  if (const auto* sd = std::get_if<SolutionDriven>(&law)) return interface_samples(*sd->state);
  const auto& s = spec.interface;
  require_positive({s.ntheta, s.nt});
  out.reserve(spec.interface_count());
  const auto times = closed_time_grid(s.nt, T);
  std::mt19937_64 rng(spec.seed ^ 0x0f0f0f0fULL);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < s.nt; ++k) {
    for (int j = 0; j < s.ntheta; ++j) {
      const bool uniform = spec.mode == SamplingMode::Uniform;
      const double theta = uniform ? kTwoPi * j / s.ntheta : kTwoPi * u01(rng);
      const double t = uniform ? times[k] : T * u01(rng);
      const Vec2 p = interface_point(law, theta, t);
      out.push_back({{p.x, p.y, t}, theta, normal(law, theta, t)});
    }
  }
  return out;
}

Split gen_initial(const SamplingSpec& spec, const MotionLaw& law, const Box& box) {
  const auto& s = spec.initial;
  require_positive({s.nx, s.ny});
  std::vector<Point3> pts;
  pts.reserve(spec.initial_count());
  if (spec.mode == SamplingMode::Uniform) {
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i)
        pts.push_back({cell_center(box.xmin, box.xmax, i, s.nx), cell_center(box.ymin, box.ymax, j, s.ny), 0.0});
  } else {
    std::mt19937_64 rng(spec.seed ^ 0x77777777ULL);
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax);
    for (std::size_t n = 0; n < spec.initial_count(); ++n) {
      const double x = ux(rng);
      pts.push_back({x, uy(rng), 0.0});
    }
    canonical_order(pts);
  }
  return classify_all(pts, law);
}

std::vector<double> observation_times() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back((1 + 11 * k) / 100.0);
  return t;
}

Vec2 advect_exact(const ManufacturedData& data, Vec2 x0, double t, double h) {
  if (t <= 0.0) return x0;
  const long steps = std::max(1L, std::lround(t / h));
  const double dt = t / static_cast<double>(steps);
  auto vel = [&](Vec2 x, double s) { return data.velocity(Phase::Two, {x.x, x.y, s}); };
  Vec2 x = x0;
  for (long n = 0; n < steps; ++n) {
    const double s = n * dt;
    const Vec2 k1 = vel(x, s);
    const Vec2 k2 = vel(x + (0.5 * dt) * k1, s + 0.5 * dt);
    const Vec2 k3 = vel(x + (0.5 * dt) * k2, s + 0.5 * dt);
    const Vec2 k4 = vel(x + dt * k3, s + dt);
    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

std::vector<ObservationSample> gen_observation(int example, const ManufacturedData& data, Membership coordinates) {
  std::vector<ObservationSample> out;
  const auto times = observation_times();
  if (example == 2) {
    const CyclicHarmonic law;
    for (double t : times) {
      for (int j = 0; j < 5; ++j) {
        const double theta = kTwoPi * j / 5.0;
        Vec2 p;
        if (coordinates == Membership::Parametrization) {
          p = interface_point(law, theta, t);
        } else {
          const double r = law.r(theta, t);
          p = {law.x0 + law.vx * t + r * std::cos(theta), law.y0 + law.vy * t + r * std::sin(theta)};
        }
        const Point3 q{p.x, p.y, t};
        out.push_back({q, data.pressure(Phase::Two, q)});
      }
    }
  } else if (example == 3) {
    const Circle c;
    for (double t : times) {
      for (int j = 0; j < 5; ++j) {
        const double theta = kTwoPi * j / 5.0;
        const Vec2 x0{c.cx + c.radius * std::cos(theta), c.cy + c.radius * std::sin(theta)};
        const Vec2 p = advect_exact(data, x0, t);
        const Point3 q{p.x, p.y, t};
        out.push_back({q, data.pressure(Phase::Two, q)});
      }
    }
  } else {
    throw SamplingError("observation points are defined for examples 2 and 3 only");
  }
  return out;
}

void canonical_order(std::vector<Point3>& pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point3& a, const Point3& b) { return std::tie(a.t, a.y, a.x) < std::tie(b.t, b.y, b.x); });
}

Split reclassify_points(const std::vector<Point3>& a, const std::vector<Point3>& b, const MotionLaw& law) {
  std::vector<Point3> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  canonical_order(all);
  return classify_all(all, law);
}

SampleSet gen_samples(const SamplingSpec& spec, const MotionLaw& law, const Box& box, double T) {
  SampleSet s;
  auto interior = gen_interior(spec, law, box, T);
  s.interior1 = std::move(interior.phase1);
  s.interior2 = std::move(interior.phase2);
  s.boundary = gen_boundary(spec, box, T);
  s.interface = gen_interface(spec, law, T);
  auto init = gen_initial(spec, law, box);
  s.initial1 = std::move(init.phase1);
  s.initial2 = std::move(init.phase2);
  return s;
}

// ---------------------------------------------------------------------------
// CSV

void write_samples_csv(std::ostream& os, const SampleSet& s) {
  os << "category,x,y,t,phase,nx1,ny1,data\n";
  char buf[256];
  auto row = [&](const char* cat, const Point3& p, int phase, double nx, double ny, double data) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", cat, p.x, p.y, p.t, phase, nx, ny,
                  data);
    os << buf;
  };
  for (const auto& p : s.interior1) row("interior", p, 1, 0, 0, 0);
  for (const auto& p : s.interior2) row("interior", p, 2, 0, 0, 0);
  for (const auto& p : s.boundary) row("boundary", p, 1, 0, 0, 0);
  for (const auto& q : s.interface) row("interface", q.pt, 0, q.n1.x, q.n1.y, q.param);
  for (const auto& p : s.initial1) row("initial", p, 1, 0, 0, 0);
  for (const auto& p : s.initial2) row("initial", p, 2, 0, 0, 0);
  for (const auto& o : s.observation) row("observation", o.pt, 2, 0, 0, o.pressure);
}

SampleSet read_samples_csv(std::istream& is) {
  SampleSet s;
  std::string line;
  if (!std::getline(is, line) || line.rfind("category,", 0) != 0) throw SamplingError("missing sample CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cat, field;
    std::getline(ls, cat, ',');
    double v[7];
    for (double& x : v) {
      if (!std::getline(ls, field, ',')) throw SamplingError("short sample CSV row: " + line);
      x = std::stod(field);
    }
    const Point3 p{v[0], v[1], v[2]};
    const int phase = static_cast<int>(v[3]);
    if (cat == "interior") {
      (phase == 2 ? s.interior2 : s.interior1).push_back(p);
    } else if (cat == "boundary") {
      s.boundary.push_back(p);
    } else if (cat == "interface") {
      s.interface.push_back({p, v[6], {v[4], v[5]}});
    } else if (cat == "initial") {
      (phase == 2 ? s.initial2 : s.initial1).push_back(p);
    } else if (cat == "observation") {
      s.observation.push_back({p, v[6]});
    } else {
      throw SamplingError("unknown sample category '" + cat + "'");
    }
  }
  return s;
}

}  // namespace twophase
