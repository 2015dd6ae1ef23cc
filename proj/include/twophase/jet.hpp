#pragma once

#include "twophase/tape.hpp"

namespace twophase {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Value plus the input derivatives the residual operators consume.
/// Mixed space-time second derivatives are never needed and not carried.
template <class T>
struct Jet {
  T val{};
  T dx{};
  T dy{};
  T dt{};
  T dxx{};
  T dxy{};
  T dyy{};
};

/// Jets of the three network outputs (u, v, p) at one spatiotemporal point.
template <class T>
struct FieldJets {
  Jet<T> u;
  Jet<T> v;
  Jet<T> p;
};

}  // namespace twophase
