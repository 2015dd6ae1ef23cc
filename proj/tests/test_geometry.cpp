#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "twophase/geometry.hpp"

using namespace twophase;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Random star-shaped polygon around c: simple by construction.
std::vector<Vec2> random_star(std::mt19937_64& rng, Vec2 c, int n) {
  std::uniform_real_distribution<double> r(0.2, 1.0);
  std::uniform_real_distribution<double> jitter(0.0, 0.9);
  std::vector<Vec2> poly;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * (i + jitter(rng)) / n;
    const double rr = r(rng);
    poly.push_back({c.x + rr * std::cos(th), c.y + rr * std::sin(th)});
  }
  return poly;
}

const std::vector<Vec2> kSquare = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("interface points of the three laws") {
  const Vec2 a = interface_point(HelicoidEllipse{}, 0.0, 0.0);
  CHECK(a.x == Approx(2.2));
  CHECK(a.y == Approx(1.2));
  const Vec2 b = interface_point(CyclicHarmonic{}, 0.0, 1.0);
  CHECK(b.x == Approx(2.5));
  CHECK(b.y == Approx(1.8));
  const Vec2 c = interface_point(Circle{}, kPi / 2, 0.0);
  CHECK(c.x == Approx(1.5));
  CHECK(c.y == Approx(2.5));
}

TEST_CASE("law invariants on [0, 1]") {
  const HelicoidEllipse e;
  const CyclicHarmonic h;
  double rmin = 1e9;
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    CHECK(e.a(t) > 0);
    CHECK(e.b(t) > 0);
    for (int j = 0; j < 360; ++j) rmin = std::min(rmin, h.r(2 * kPi * j / 360, t));
  }
  CHECK(rmin == Approx(0.7));
}

TEST_CASE("membership") {
  CHECK(classify(HelicoidEllipse{}, {1.2, 1.2}, 0.0) == Phase::Two);
  CHECK(classify(HelicoidEllipse{}, {3, 3}, 0.0) == Phase::One);
  CHECK(classify(Circle{}, {1.5, 2.6}, 0.0) == Phase::One);
  CHECK(classify(Circle{}, {1.5, 2.4}, 0.0) == Phase::Two);
  // Centre of the ellipse moves with (0.6, 0.6).
  CHECK(classify(HelicoidEllipse{}, {1.8, 1.8}, 1.0) == Phase::Two);
  CHECK(classify(CyclicHarmonic{}, {1.8, 1.8}, 1.0) == Phase::Two);
  CHECK(classify(CyclicHarmonic{}, {0.1, 0.1}, 0.5) == Phase::One);
}

TEST_CASE("analytic membership agrees with a fine polygon of the interface") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 3.0), T(0.0, 1.0);
  for (const MotionLaw& law : std::vector<MotionLaw>{HelicoidEllipse{}, CyclicHarmonic{}, Circle{}}) {
    for (int trial = 0; trial < 2000; ++trial) {
      const double t = T(rng);
      std::vector<Vec2> poly;
      for (int j = 0; j < 2000; ++j) poly.push_back(interface_point(law, 2 * kPi * j / 2000, t));
      const Vec2 p{U(rng), U(rng)};
      // Skip points too close to the curve for the polygon to decide.
      double dmin = 1e9;
      for (const Vec2& q : poly) dmin = std::min(dmin, norm(q - p));
      if (dmin < 1e-2) continue;
      CHECK((classify(law, p, t) == Phase::Two) == (winding_number(poly, p) != 0));
    }
  }
}

TEST_CASE("ray casting on the unit square") {
  CHECK(ray_cast(kSquare, {0.5, 0.5}));
  CHECK_FALSE(ray_cast(kSquare, {1.5, 0.5}));
  CHECK_FALSE(ray_cast(kSquare, {0.5, -0.5}));
  // A ray through a vertex is counted once.
  const std::vector<Vec2> diamond = {{1, 0}, {2, 1}, {1, 2}, {0, 1}};
  CHECK(ray_cast(diamond, {0.5, 1.0}));
  CHECK_FALSE(ray_cast(diamond, {-0.5, 1.0}));
}

TEST_CASE("ray casting agrees with the winding number on random star polygons") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.2, 1.2);
  for (int k = 0; k < 50; ++k) {
    const auto poly = random_star(rng, {0, 0}, 3 + k % 20);
    REQUIRE(is_simple(poly));
    for (int i = 0; i < 1000; ++i) {
      const Vec2 p{U(rng), U(rng)};
      CHECK(ray_cast(poly, p) == (winding_number(poly, p) != 0));
    }
  }
}

TEST_CASE("simplicity and area") {
  CHECK(signed_area(kSquare) == Approx(1.0));
  CHECK(is_simple(kSquare));
  const std::vector<Vec2> bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(is_simple(bowtie));
}

TEST_CASE("normals point from phase 1 into phase 2") {
  const Vec2 c = normal(Circle{}, 0.0, 0.0);
  CHECK(c.x == Approx(-1.0));
  CHECK(std::abs(c.y) < 1e-15);
  const Vec2 e = normal(HelicoidEllipse{}, 0.0, 0.0);
  CHECK(e.x == Approx(-1.0));
  CHECK(std::abs(e.y) < 1e-15);
  // Stepping along n1 from the interface enters phase 2.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const MotionLaw& law : std::vector<MotionLaw>{HelicoidEllipse{}, CyclicHarmonic{}, Circle{}}) {
    for (int i = 0; i < 200; ++i) {
      const double th = 2 * kPi * U(rng), t = U(rng);
      const Vec2 p = interface_point(law, th, t);
      const Vec2 n = normal(law, th, t);
      CHECK(norm(n) == Approx(1.0));
      CHECK(classify(law, p + 1e-6 * n, t) == Phase::Two);
      CHECK(classify(law, p - 1e-6 * n, t) == Phase::One);
    }
  }
}

TEST_CASE("polygon vertex normals of a counter-clockwise square point inward") {
  const Vec2 n = polygon_vertex_normal(kSquare, 0);
  CHECK(n.x == Approx(std::sqrt(0.5)));
  CHECK(n.y == Approx(std::sqrt(0.5)));
  // Clockwise input is reversed by the state, so the normal flips back inward.
  std::vector<Vec2> cw(kSquare.rbegin(), kSquare.rend());
  const auto st = InterfaceState::create({0.0}, {cw});
  CHECK(signed_area(st.slice(0)) > 0);
  const Vec2 m = normal_at_vertex(st, 0, 0.0);
  const Vec2 v = st.slice(0)[0];
  CHECK(ray_cast(st.slice(0), v + 1e-3 * m));
}

TEST_CASE("interface state construction errors") {
  CHECK_THROWS_AS(InterfaceState::create({0.0}, {{{0, 0}, {1, 0}}}), DegeneratePolygon);
  CHECK_THROWS_AS(InterfaceState::create({0.0}, {{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), PolygonSelfIntersection);
  CHECK_THROWS_AS(InterfaceState::create({0.0, 0.0}, {kSquare, kSquare}), GeometryError);
  CHECK_THROWS_AS(InterfaceState::create({0.0, 1.0}, {kSquare, {{0, 0}, {1, 0}, {1, 1}}}), GeometryError);
  try {
    InterfaceState::create({0.0}, {{{0, 0}, {1, 1}, {1, 0}, {0, 1}}});
  } catch (const PolygonSelfIntersection& e) {
    CHECK(std::string(e.what()).find("slice 0") != std::string::npos);
  }
}

TEST_CASE("slice interpolation") {
  const std::vector<Vec2> a = {{0, 0}, {2, 0}, {0, 2}};
  const std::vector<Vec2> b = {{1, 0}, {3, 0}, {1, 2}};
  const auto st = InterfaceState::create({0.0, 1.0}, {a, b});
  CHECK(st.interp_vertices(0.0) == a);
  CHECK(st.interp_vertices(1.0) == b);
  const auto mid = st.interp_vertices(0.5);
  CHECK(mid[0].x == 0.5);
  CHECK(mid[0].y == 0.0);
  CHECK_THROWS_AS(st.interp_vertices(1.5), std::out_of_range);
}

TEST_CASE("bracket search agrees with a linear scan") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> times = {0.0};
    for (int k = 1; k < 10; ++k) times.push_back(times.back() + 0.01 + U(rng));
    const auto st = InterfaceState::create(times, std::vector<std::vector<Vec2>>(10, kSquare));
    for (int q = 0; q < 100; ++q) {
      const double t = times.back() * U(rng);
      std::size_t lin = 0;
      for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (times[k] <= t) lin = k;
      CHECK(st.bracket(t) == lin);
    }
    CHECK(st.bracket(times.back()) == times.size() - 2);
  }
}

TEST_CASE("solution-driven membership uses the interpolated polygon") {
  const std::vector<Vec2> a = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> b;
  for (Vec2 v : a) b.push_back(v + Vec2{2, 0});
  const MotionLaw law = SolutionDriven{std::make_shared<const InterfaceState>(InterfaceState::create({0, 1}, {a, b}))};
  CHECK(classify(law, {0.5, 0.5}, 0.0) == Phase::Two);
  CHECK(classify(law, {1.6, 0.5}, 0.5) == Phase::Two);
  CHECK(classify(law, {0.5, 0.5}, 1.0) == Phase::One);
}

TEST_CASE("interface history rows") {
  const auto st = InterfaceState::create({0.0, 0.5, 1.0}, {kSquare, kSquare, kSquare});
  std::ostringstream os;
  write_interface_history_header(os);
  write_interface_history(os, 7, st);
  std::istringstream is(os.str());
  std::string line;
  int rows = -1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 12);
  CHECK(os.str().rfind("epoch,slice_time,vertex_index,x,y\n", 0) == 0);
}

}
