#pragma once

// Training loop: pretrain and main phases, fixed or adaptive weights, and the
// solution-driven interface tracking of the third benchmark.
//
// Gradients are computed per shard (a fixed-size chunk of one loss term's
// points) on an independent tape; shard results are reduced in shard order,
// so a run is bitwise reproducible for any thread count.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twophase/geometry.hpp"
#include "twophase/loss.hpp"
#include "twophase/net.hpp"
#include "twophase/physics.hpp"
#include "twophase/sampling.hpp"

namespace twophase {

struct NonFiniteLoss : std::runtime_error {
  NonFiniteLoss(const std::string& what, std::int64_t epoch) : std::runtime_error(what), epoch(epoch) {}
  std::int64_t epoch;
};

enum class WeightMode { Fixed, Adaptive };
enum class LrSchedule { Cosine, Constant };

struct TrainConfig {
  std::int64_t pretrain_epochs = 20000;
  std::int64_t main_epochs = 80000;
  double pretrain_lr = 1e-3;
  double lr_max = 1e-3;
  double lr_min = 1e-6;
  LrSchedule main_schedule = LrSchedule::Cosine;
  WeightMode weight_mode = WeightMode::Fixed;
  /// Main-phase weights of the fixed mode.
  double fixed_interface_weight = 10.0;
  double fixed_boundary_weight = 10.0;
  double observation_weight = 1.0;
  std::int64_t interface_update_cadence = 1;
  std::uint64_t seed = 0;
  std::vector<int> shape = kDefaultShape;
  int threads = 1;
  std::size_t shard_size = 256;
  /// Progress line every this many epochs; 0 disables.
  std::int64_t progress_every = 0;
  /// Interface snapshot every this many epochs (plus the last epoch); 0 keeps first and last only.
  std::int64_t history_every = 0;
  /// Periodic trainer checkpoint; also written on NonFiniteLoss when set.
  std::string checkpoint_path;
  std::int64_t checkpoint_every = 0;

  std::int64_t total_epochs() const { return pretrain_epochs + main_epochs; }
};

/// Throws std::invalid_argument on a configuration that cannot run.
void validate(const TrainConfig& cfg);

/// What is being solved: exact data, interface law and generated samples.
/// For the solution-driven case the law holds the initial interface state.
struct Problem {
  ManufacturedData data;
  MotionLaw law;
  SampleSet samples;

  bool solution_driven() const { return std::holds_alternative<SolutionDriven>(law); }
};

/// Sample points together with their precomputed targets.
struct TrainingData {
  PhaseParams params[2];
  std::vector<Point3> interior[2];
  std::vector<Vec2> force[2];
  std::vector<Point3> boundary;
  std::vector<Vec2> boundary_velocity;
  std::vector<Point3> interface;
  std::vector<Vec2> n1, g1, g2;
  std::vector<Point3> initial[2];
  std::vector<Vec2> initial_velocity[2];
  std::vector<Point3> observation;
  std::vector<double> observation_pressure;

  TermArray<std::size_t> counts() const;
  TermArray<bool> active() const;
};

/// Boundary points belong to phase 1: the inner phase never touches the box.
TrainingData prepare(const ManufacturedData& data, const SampleSet& samples);

/// Per-term mean values and their parameter gradients.
struct TermGradients {
  TermArray<double> F{};
  TermArray<bool> active{};
  TermArray<std::vector<double>> grad1;
  TermArray<std::vector<double>> grad2;
};

TermGradients term_gradients(const Mlp& net1, const Mlp& net2, const TrainingData& data, std::size_t shard_size = 256,
                             int threads = 1);

struct LossGradient {
  TermArray<double> F{};
  TermArray<bool> active{};
  double total = 0.0;
  std::vector<double> grad1;
  std::vector<double> grad2;
};

/// sum_j w_j grad F_j, summed in term order.
LossGradient combine(const TermGradients& tg, const Weights& w);

LossGradient loss_gradient(const Mlp& net1, const Mlp& net2, const TrainingData& data, const Weights& w,
                           std::size_t shard_size = 256, int threads = 1);

/// Same loss and gradient with every parameter and intermediate on one tape.
LossGradient reference_loss_gradient(const Mlp& net1, const Mlp& net2, const TrainingData& data, const Weights& w);

// ---- interface tracking ----------------------------------------------------

/// Slice k holds the vertex positions at times()[k]; slice 0 is Gamma(0).
using TrajectoryTable = InterfaceState;

using VelocityField = std::function<std::vector<Vec2>(std::span<const Point3>)>;

VelocityField network_velocity(const Mlp& net);

/// Trapezoidal displacement along the stored trajectories, velocities taken
/// at the stored positions; the partial last step uses the linearly
/// interpolated position at t.
std::vector<Vec2> interface_position(double t, const TrajectoryTable& table, const VelocityField& velocity);

/// Recomputes every slice from the trajectories; throws PolygonSelfIntersection.
InterfaceState update_interface(const InterfaceState& state, const VelocityField& velocity);
InterfaceState update_interface(const InterfaceState& state, const Mlp& net2);

/// Re-splits interior and initial points against the state and refreshes the
/// interface samples from its slices. Observation points are kept.
SampleSet reclassify(const SampleSet& samples, const InterfaceState& state);

/// Circle sampled at n_vertices angles 2 pi j / n, copied to every slice time.
InterfaceState cylinder_state(const Circle& c, int n_vertices, const std::vector<double>& times);

// ---- the loop --------------------------------------------------------------

struct InterfaceSnapshot {
  std::int64_t epoch = 0;
  InterfaceState state;

  friend bool operator==(const InterfaceSnapshot&, const InterfaceSnapshot&) = default;
};

struct TrainerState {
  std::int64_t epoch = 0;  // epochs completed
  ParamSet p1;
  ParamSet p2;
  AdaptiveState adaptive;
  std::optional<InterfaceState> interface;
  std::vector<EpochRecord> history;
  std::vector<InterfaceSnapshot> interface_history;

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

/// Fresh networks from the seed (phase 2 uses seed + 1).
TrainerState initial_state(const Problem& problem, const TrainConfig& cfg);

/// Advances state up to (not including) epoch `until`.
void train_epochs(TrainerState& state, const Problem& problem, const TrainConfig& cfg, std::int64_t until,
                  std::ostream* progress = nullptr);

TrainerState train(const Problem& problem, const TrainConfig& cfg, std::ostream* progress = nullptr);

/// Samples seen by the networks in the given state.
SampleSet current_samples(const Problem& problem, const TrainerState& state);

void save_trainer(const std::string& path, const TrainerState& state);
TrainerState load_trainer(const std::string& path);

}  // namespace twophase
