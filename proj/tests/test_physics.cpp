#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "twophase/physics.hpp"

using namespace twophase;
using doctest::Approx;

namespace {

FieldJets<double> zero_jets() { return {}; }

// Finite-difference momentum forcing from the value closures alone.
Vec2 fd_force(const ManufacturedData& d, Phase ph, const Point3& q) {
  const double h = 1e-4;
  auto V = [&](double dx, double dy, double dt) { return d.velocity(ph, {q.x + dx, q.y + dy, q.t + dt}); };
  auto P = [&](double dx, double dy) { return d.pressure(ph, {q.x + dx, q.y + dy, q.t}); };
  const Vec2 v = V(0, 0, 0);
  const Vec2 vt = (1 / (2 * h)) * (V(0, 0, h) - V(0, 0, -h));
  const Vec2 vx = (1 / (2 * h)) * (V(h, 0, 0) - V(-h, 0, 0));
  const Vec2 vy = (1 / (2 * h)) * (V(0, h, 0) - V(0, -h, 0));
  const Vec2 vxx = (1 / (h * h)) * (V(h, 0, 0) - 2.0 * v + V(-h, 0, 0));
  const Vec2 vyy = (1 / (h * h)) * (V(0, h, 0) - 2.0 * v + V(0, -h, 0));
  const Vec2 vxy = (1 / (4 * h * h)) * (V(h, h, 0) - V(h, -h, 0) - V(-h, h, 0) + V(-h, -h, 0));
  const double px = (P(h, 0) - P(-h, 0)) / (2 * h);
  const double py = (P(0, h) - P(0, -h)) / (2 * h);
  const PhaseParams& pp = d.params(ph);
  return {pp.rho * (vt.x + v.x * vx.x + v.y * vy.x) - pp.mu * (2 * vxx.x + vyy.x + vxy.y) + px,
          pp.rho * (vt.y + v.x * vx.y + v.y * vy.y) - pp.mu * (vxx.y + 2 * vyy.y + vxy.x) + py};
}

}  // namespace

TEST_SUITE("physics") {

TEST_CASE("traction") {
  auto f = zero_jets();
  f.p.val = 1.0;
  const auto t = stress_apply(f, 1.0, {1, 0});
  CHECK(t[0] == -1.0);
  CHECK(t[1] == 0.0);

  auto s = zero_jets();
  s.u.dy = 1.0;  // u = y
  const auto ts = stress_apply(s, 1.0, {0, 1});
  CHECK(ts[0] == 1.0);
  CHECK(ts[1] == 0.0);
  const auto tn = stress_apply(s, 1.0, {0, -1});
  CHECK(tn[0] == -1.0);
}

TEST_CASE("momentum and divergence on simple fields") {
  const PhaseParams pp{2.0, 3.0};
  const auto z = momentum_residual(zero_jets(), pp, {});
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  auto c = zero_jets();
  c.u.val = 1.0;
  const auto r = momentum_residual(c, pp, {});
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  auto lin = zero_jets();
  lin.u.val = 0.4;
  lin.u.dx = 1.0;  // (x, 0)
  CHECK(divergence_residual(lin) == 1.0);
}

TEST_CASE("interface residuals vanish for identical fields") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  FieldJets<double> f;
  for (Jet<double>* j : {&f.u, &f.v, &f.p}) *j = {U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), U(rng)};
  const PhaseParams pp{1.0, 1.0};
  const auto r = interface_residuals(f, f, pp, pp, {0.6, 0.8}, {}, {});
  CHECK(r.velocity_jump[0] == 0.0);
  CHECK(r.velocity_jump[1] == 0.0);
  CHECK(std::abs(r.traction_jump[0]) < 1e-15);
  CHECK(std::abs(r.traction_jump[1]) < 1e-15);
}

TEST_CASE("exact solutions are divergence free and solve the manufactured system") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 3.5), T(0.0, 1.0), A(0.0, 2 * std::numbers::pi);
  for (ExactSolution ex : {ExactSolution::Example1And2, ExactSolution::Example3}) {
    for (PhaseParams p2 : {PhaseParams{1, 1}, PhaseParams{1000, 1000}}) {
      const auto d = manufacture_data(ex, {1, 1}, p2);
      for (int i = 0; i < 2000; ++i) {
        const Point3 q{U(rng), U(rng), T(rng)};
        for (Phase ph : {Phase::One, Phase::Two}) {
          const auto j = exact_jets(ex, ph, q);
          CHECK(std::abs(divergence_residual(j)) <= 1e-14);
          const auto m = momentum_residual(j, d.params(ph), d.force(ph, q));
          CHECK(std::abs(m[0]) <= 1e-10);
          CHECK(std::abs(m[1]) <= 1e-10);
        }
        const double th = A(rng);
        const Vec2 n{std::cos(th), std::sin(th)};
        const auto r = interface_residuals(exact_jets(ex, Phase::One, q), exact_jets(ex, Phase::Two, q), d.phase1,
                                           d.phase2, n, d.velocity_jump(q), d.traction_jump(q, n));
        for (double v : {r.velocity_jump[0], r.velocity_jump[1], r.traction_jump[0], r.traction_jump[1]})
          CHECK(std::abs(v) <= 1e-10);
      }
    }
  }
}

TEST_CASE("manufactured forcing agrees with finite differences of the exact fields") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 3.0), T(0.05, 0.95);
  for (ExactSolution ex : {ExactSolution::Example1And2, ExactSolution::Example3}) {
    const auto d = manufacture_data(ex, {1, 1}, {1000, 1000});
    for (int i = 0; i < 1000; ++i) {
      const Point3 q{U(rng), U(rng), T(rng)};
      for (Phase ph : {Phase::One, Phase::Two}) {
        const Vec2 f = d.force(ph, q), g = fd_force(d, ph, q);
        const double scale = std::max({1.0, norm(f), d.params(ph).rho});
        CHECK(norm(f - g) <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("exact fields by hand") {
  const auto d = manufacture_data(ExactSolution::Example1And2, {1, 1}, {1, 1});
  const Vec2 f = d.force(Phase::One, {0, 0, 0});
  CHECK(std::abs(f.x) < 1e-15);
  CHECK(std::abs(f.y) < 1e-15);
  const Point3 q{0.7, 1.1, 0.3};
  const double e = std::exp(q.t);
  CHECK(d.velocity(Phase::One, q).x == Approx(e * std::sin(q.x) * std::cos(q.y)));
  CHECK(d.velocity(Phase::One, q).y == Approx(-e * std::cos(q.x) * std::sin(q.y)));
  CHECK(d.pressure(Phase::One, q) == Approx(e * std::sin(q.x) * std::sin(q.y)));
  CHECK(d.velocity(Phase::Two, q).x == Approx(std::cos(q.t) * std::cos(q.x) * std::cos(q.y)));
  CHECK(d.pressure(Phase::Two, q) == Approx(std::cos(q.t) * std::cos(q.x + q.y)));
  const Vec2 jump = d.velocity_jump(q);
  CHECK(jump.x == Approx(d.velocity(Phase::One, q).x - d.velocity(Phase::Two, q).x));
}

TEST_CASE("the third example has continuous velocity") {
  const auto d = manufacture_data(ExactSolution::Example3, {1, 1}, {1000, 1000});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Point3 q{U(rng), U(rng), U(rng) / 3};
    CHECK(d.velocity_jump(q) == Vec2{0, 0});
  }
  CHECK_THROWS_AS(manufacture_data(ExactSolution::Example3, {0, 1}, {1, 1}), std::invalid_argument);
}

}
