#pragma once

// Navier-Stokes residual operators on jets, the Newtonian stress, and the
// manufactured data that make the benchmark exact solutions exact.
//
// The operators are templated on the scalar so the same code runs on tape
// variables during training and on plain doubles for ground truth.

#include <array>
#include <stdexcept>

#include "twophase/geometry.hpp"
#include "twophase/jet.hpp"

namespace twophase {

struct PhaseParams {
  double rho = 1.0;
  double mu = 1.0;
};

template <class T>
using Pair = std::array<T, 2>;

/// Traction sigma n with sigma = -p I + mu (grad v + grad v^T); mu constant per phase.
template <class T>
Pair<T> stress_apply(const FieldJets<T>& f, double mu, Vec2 n) {
  const T s11 = 2.0 * mu * f.u.dx - f.p.val;
  const T s22 = 2.0 * mu * f.v.dy - f.p.val;
  const T s12 = mu * (f.u.dy + f.v.dx);
  return {s11 * n.x + s12 * n.y, s12 * n.x + s22 * n.y};
}

/// rho (dv/dt + (v . grad) v) - div sigma - f.
template <class T>
Pair<T> momentum_residual(const FieldJets<T>& f, const PhaseParams& pp, Vec2 force) {
  const auto& u = f.u;
  const auto& v = f.v;
  const auto& p = f.p;
  const T div_sigma_x = pp.mu * (2.0 * u.dxx + u.dyy + v.dxy) - p.dx;
  const T div_sigma_y = pp.mu * (v.dxx + 2.0 * v.dyy + u.dxy) - p.dy;
  const T acc_x = u.dt + u.val * u.dx + v.val * u.dy;
  const T acc_y = v.dt + u.val * v.dx + v.val * v.dy;
  return {pp.rho * acc_x - div_sigma_x - force.x, pp.rho * acc_y - div_sigma_y - force.y};
}

template <class T>
T divergence_residual(const FieldJets<T>& f) {
  return f.u.dx + f.v.dy;
}

template <class T>
struct InterfaceResiduals {
  Pair<T> velocity_jump;
  Pair<T> traction_jump;
};

/// (v1 - v2 - g1, sigma1 n1 + sigma2 n2 - g2) with n2 = -n1.
template <class T>
InterfaceResiduals<T> interface_residuals(const FieldJets<T>& f1, const FieldJets<T>& f2, const PhaseParams& p1,
                                          const PhaseParams& p2, Vec2 n1, Vec2 g1, Vec2 g2) {
  const Pair<T> t1 = stress_apply(f1, p1.mu, n1);
  const Pair<T> t2 = stress_apply(f2, p2.mu, -n1);
  return {{f1.u.val - f2.u.val - g1.x, f1.v.val - f2.v.val - g1.y},
          {t1[0] + t2[0] - g2.x, t1[1] + t2[1] - g2.y}};
}

// ---------------------------------------------------------------------------
// Exact solutions and manufactured data

enum class ExactSolution {
  /// Discontinuous velocity and pressure; used by the two prescribed-motion examples.
  Example1And2,
  /// Continuous velocity, discontinuous pressure; used by the solution-driven example.
  Example3,
};

/// Closed-form jets of the exact solution of one phase.
FieldJets<double> exact_jets(ExactSolution exact, Phase phase, const Point3& p);

struct ManufacturedData {
  ExactSolution exact = ExactSolution::Example1And2;
  PhaseParams phase1;
  PhaseParams phase2;

  const PhaseParams& params(Phase ph) const { return ph == Phase::One ? phase1 : phase2; }

  Vec2 force(Phase ph, const Point3& p) const;
  /// Kinematic jump v1 - v2.
  Vec2 velocity_jump(const Point3& p) const;
  /// Traction jump sigma1 n1 + sigma2 n2.
  Vec2 traction_jump(const Point3& p, Vec2 n1) const;
  Vec2 velocity(Phase ph, const Point3& p) const;
  double pressure(Phase ph, const Point3& p) const;
};

ManufacturedData manufacture_data(ExactSolution exact, const PhaseParams& phase1, const PhaseParams& phase2);

}  // namespace twophase
