#include "twophase/physics.hpp"

#include <cmath>

namespace twophase {

namespace {

// (a(t) sin x cos y, -a(t) cos x sin y): the divergence-free Taylor-Green pair.
void taylor_green(double a, double da, double x, double y, Jet<double>& u, Jet<double>& v) {
  const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
  u.val = a * sx * cy;
  u.dt = da * sx * cy;
  u.dx = a * cx * cy;
  u.dy = -(a * sx * sy);
  u.dxx = -(a * sx * cy);
  u.dxy = -(a * cx * sy);
  u.dyy = -(a * sx * cy);

  v.val = -(a * cx * sy);
  v.dt = -(da * cx * sy);
  v.dx = a * sx * sy;
  v.dy = -(a * cx * cy);
  v.dxx = a * cx * sy;
  v.dxy = a * sx * cy;
  v.dyy = a * cx * sy;
}

// (a(t) cos x cos y, a(t) sin x sin y)
void cos_sin_pair(double a, double da, double x, double y, Jet<double>& u, Jet<double>& v) {
  const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
  u.val = a * cx * cy;
  u.dt = da * cx * cy;
  u.dx = -(a * sx * cy);
  u.dy = -(a * cx * sy);
  u.dxx = -(a * cx * cy);
  u.dxy = a * sx * sy;
  u.dyy = -(a * cx * cy);

  v.val = a * sx * sy;
  v.dt = da * sx * sy;
  v.dx = a * cx * sy;
  v.dy = a * sx * cy;
  v.dxx = -(a * sx * sy);
  v.dxy = a * cx * cy;
  v.dyy = -(a * sx * sy);
}

// e^t sin x sin y
Jet<double> exp_sin_sin(double x, double y, double t) {
  const double e = std::exp(t);
  const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
  Jet<double> p;
  p.val = e * sx * sy;
  p.dt = p.val;
  p.dx = e * cx * sy;
  p.dy = e * sx * cy;
  p.dxx = -p.val;
  p.dxy = e * cx * cy;
  p.dyy = -p.val;
  return p;
}

// cos t cos(x + y)
Jet<double> cos_cos_sum(double x, double y, double t) {
  const double c = std::cos(t);
  const double cs = std::cos(x + y);
  const double sn = std::sin(x + y);
  Jet<double> p;
  p.val = c * cs;
  p.dt = -std::sin(t) * cs;
  p.dx = -(c * sn);
  p.dy = -(c * sn);
  p.dxx = -(c * cs);
  p.dxy = -(c * cs);
  p.dyy = -(c * cs);
  return p;
}

}  // namespace

FieldJets<double> exact_jets(ExactSolution exact, Phase phase, const Point3& q) {
  FieldJets<double> f;
  if (exact == ExactSolution::Example1And2) {
    if (phase == Phase::One) {
      const double e = std::exp(q.t);
      taylor_green(e, e, q.x, q.y, f.u, f.v);
      f.p = exp_sin_sin(q.x, q.y, q.t);
    } else {
      cos_sin_pair(std::cos(q.t), -std::sin(q.t), q.x, q.y, f.u, f.v);
      f.p = cos_cos_sum(q.x, q.y, q.t);
    }
  } else {
    taylor_green(std::cos(q.t), -std::sin(q.t), q.x, q.y, f.u, f.v);
    f.p = phase == Phase::One ? exp_sin_sin(q.x, q.y, q.t) : cos_cos_sum(q.x, q.y, q.t);
  }
  return f;
}

Vec2 ManufacturedData::force(Phase ph, const Point3& p) const {
  const auto r = momentum_residual(exact_jets(exact, ph, p), params(ph), Vec2{});
  return {r[0], r[1]};
}

Vec2 ManufacturedData::velocity_jump(const Point3& p) const {
  const auto a = exact_jets(exact, Phase::One, p);
  const auto b = exact_jets(exact, Phase::Two, p);
  return {a.u.val - b.u.val, a.v.val - b.v.val};
}

Vec2 ManufacturedData::traction_jump(const Point3& p, Vec2 n1) const {
  const auto t1 = stress_apply(exact_jets(exact, Phase::One, p), phase1.mu, n1);
  const auto t2 = stress_apply(exact_jets(exact, Phase::Two, p), phase2.mu, -n1);
  return {t1[0] + t2[0], t1[1] + t2[1]};
}

Vec2 ManufacturedData::velocity(Phase ph, const Point3& p) const {
  const auto f = exact_jets(exact, ph, p);
  return {f.u.val, f.v.val};
}

double ManufacturedData::pressure(Phase ph, const Point3& p) const { return exact_jets(exact, ph, p).p.val; }

ManufacturedData manufacture_data(ExactSolution exact, const PhaseParams& phase1, const PhaseParams& phase2) {
  if (!(phase1.rho > 0.0 && phase1.mu > 0.0 && phase2.rho > 0.0 && phase2.mu > 0.0))
    throw std::invalid_argument("densities and viscosities must be positive");
  return ManufacturedData{exact, phase1, phase2};
}

}  // namespace twophase
