#pragma once

// Spatiotemporal training sets: interior, boundary, interface, initial and
// observation points, classified into phases.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "twophase/geometry.hpp"
#include "twophase/jet.hpp"
#include "twophase/physics.hpp"

namespace twophase {

struct InteriorSpec {
  int nx = 10, ny = 10, nt = 5;
};
/// Read from "a x b x c" as (points per side, sides, times); sides must be 4.
struct BoundarySpec {
  int per_side = 4, sides = 4, nt = 5;
};
struct InterfaceSpec {
  int ntheta = 4, nt = 5;
};
struct InitialSpec {
  int nx = 4, ny = 4;
};

enum class SamplingMode { Uniform, SeededRandom };

struct SamplingSpec {
  InteriorSpec interior;
  BoundarySpec boundary;
  InterfaceSpec interface;
  InitialSpec initial;
  SamplingMode mode = SamplingMode::Uniform;
  std::uint64_t seed = 0;

  std::size_t interior_count() const { return std::size_t(interior.nx) * interior.ny * interior.nt; }
  std::size_t boundary_count() const { return std::size_t(boundary.per_side) * boundary.sides * boundary.nt; }
  std::size_t interface_count() const { return std::size_t(interface.ntheta) * interface.nt; }
  std::size_t initial_count() const { return std::size_t(initial.nx) * initial.ny; }
};

struct SamplingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parses "a×b×c" (or with 'x'/'X'/'*') into its factors; every factor >= 1.
std::vector<int> parse_dims(std::string_view text);
std::string format_dims(const std::vector<int>& dims);

struct InterfaceSample {
  Point3 pt;
  /// Parameter angle for analytic laws, vertex index for solution-driven ones.
  double param = 0.0;
  Vec2 n1;
  friend bool operator==(const InterfaceSample&, const InterfaceSample&) = default;
};

struct ObservationSample {
  Point3 pt;
  double pressure = 0.0;
  friend bool operator==(const ObservationSample&, const ObservationSample&) = default;
};

struct SampleSet {
  std::vector<Point3> interior1, interior2;
  std::vector<Point3> boundary;
  std::vector<InterfaceSample> interface;
  std::vector<Point3> initial1, initial2;  // t = 0
  std::vector<ObservationSample> observation;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// Uniform times k T / (n - 1), k = 0..n-1, endpoints included; {0} when n = 1.
std::vector<double> closed_time_grid(int n, double T);

struct Split {
  std::vector<Point3> phase1;
  std::vector<Point3> phase2;
};

Split gen_interior(const SamplingSpec& spec, const MotionLaw& law, const Box& box, double T);
std::vector<Point3> gen_boundary(const SamplingSpec& spec, const Box& box, double T);
std::vector<InterfaceSample> gen_interface(const SamplingSpec& spec, const MotionLaw& law, double T);
/// Vertex samples of every slice with polygon normals; param is the vertex index.
std::vector<InterfaceSample> interface_samples(const InterfaceState& state);
Split gen_initial(const SamplingSpec& spec, const MotionLaw& law, const Box& box);

/// Example 2: five angles on the star curve at ten times, coordinates from
/// the law itself (or the axis-aligned text formula). Example 3: five
/// points on the initial circle advected by the exact phase-2 velocity.
std::vector<ObservationSample> gen_observation(int example, const ManufacturedData& data,
                                               Membership coordinates = Membership::Parametrization);

/// Observation times 0.01, 0.12, ..., 1.00.
std::vector<double> observation_times();

/// RK4 integration of the exact phase-2 velocity from (x0, t = 0) to t.
Vec2 advect_exact(const ManufacturedData& data, Vec2 x0, double t, double h = 1e-3);

/// Lexicographic (t, y, x) order. Generated point lists are kept in this
/// order so a re-split is a pure function of the point set.
void canonical_order(std::vector<Point3>& pts);

/// Merges both halves, restores canonical order and re-splits by the law,
/// each point at its own time.
Split reclassify_points(const std::vector<Point3>& a, const std::vector<Point3>& b, const MotionLaw& law);

SampleSet gen_samples(const SamplingSpec& spec, const MotionLaw& law, const Box& box, double T);

/// CSV with header category,x,y,t,phase,nx1,ny1,data.
void write_samples_csv(std::ostream& os, const SampleSet& s);
SampleSet read_samples_csv(std::istream& is);

}  // namespace twophase
