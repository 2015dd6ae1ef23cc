#pragma once

// Benchmark presets, run configuration, evaluation metrics, artifacts and
// the sampling-density sweep.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "twophase/geometry.hpp"
#include "twophase/physics.hpp"
#include "twophase/sampling.hpp"
#include "twophase/trainer.hpp"

namespace twophase {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateFit : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Uniform evaluation grid: cell-centred nx x ny in space, nt closed times on [0, T].
struct EvalGrid {
  int nx = 100, ny = 100, nt = 11;
};

struct RunConfig {
  int example = 1;
  SamplingSpec sampling;
  TrainConfig train;
  bool observation = false;
  Membership membership = Membership::Parametrization;
  Membership observation_coords = Membership::Parametrization;
  PhaseParams phase1;
  PhaseParams phase2;
  Box box;
  double T = 1.0;
  EvalGrid eval;
  /// Vertex count of the reference interface used to classify the
  /// evaluation grid of the solution-driven example.
  int exact_vertices = 512;
  std::string output_dir = "twophase_out";
};

/// Benchmark setup of an example with the smallest sampling row.
RunConfig preset(int example);

/// Flat "key = value" text; '#' starts a comment. The `example` key selects
/// the preset the remaining keys override. Throws ConfigError.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
/// Writes every key so the file reproduces cfg through parse_config.
void write_config(std::ostream& os, const RunConfig& cfg);
/// Checks cross-field consistency; returns warnings (the run may proceed).
std::vector<std::string> check_config(const RunConfig& cfg);

/// Thread count from TWOPHASE_THREADS, default 1.
int threads_from_env();

ManufacturedData make_data(const RunConfig& cfg);
MotionLaw make_law(const RunConfig& cfg);
Problem make_problem(const RunConfig& cfg);

/// Phase labelling of the evaluation grid: the prescribed law for the first
/// two examples, a finely resolved exactly advected circle for the third.
MotionLaw reference_law(const RunConfig& cfg);

// ---- metrics -----------------------------------------------------------------

/// Predicted (u, v, p) of one phase at a batch of points.
using FieldPredictor = std::function<std::vector<std::array<double, 3>>(Phase, std::span<const Point3>)>;

FieldPredictor network_predictor(const Mlp& net1, const Mlp& net2);
FieldPredictor exact_predictor(const ManufacturedData& data);

std::vector<Point3> eval_points(const EvalGrid& grid, const Box& box, double T);

struct GenError {
  double velocity = 0.0;
  double pressure = 0.0;
};

/// Relative L2 error over both phases. Pressure errors have their mean
/// removed per phase and time slice, since the pressure of a Dirichlet
/// velocity problem is fixed only up to such constants.
GenError gen_error(const FieldPredictor& pred, const ManufacturedData& data, const MotionLaw& law,
                   std::span<const Point3> points);

struct MetricsReport {
  double gen_error_velocity = 0.0;
  double gen_error_pressure = 0.0;
  double loss_error = 0.0;
  TermArray<double> final_terms{};
  double wall_seconds = 0.0;
  std::int64_t epochs = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// sqrt of the unit-weight total loss.
double loss_error(const TermArray<double>& F, const TermArray<bool>& active);

MetricsReport evaluate_state(const RunConfig& cfg, const Problem& problem, const TrainerState& state);

void write_metrics_json(std::ostream& os, const MetricsReport& m);

// ---- runs ------------------------------------------------------------------

struct RunResult {
  MetricsReport metrics;
  TrainerState state;
};

/// Sampling, training, evaluation; writes loss_log.csv, checkpoint.bin,
/// samples.csv, fields.csv, metrics.json, config.txt and (solution-driven
/// runs) interface_history.csv under cfg.output_dir unless write_artifacts is false.
RunResult run_example(const RunConfig& cfg, std::ostream* progress = nullptr, bool write_artifacts = true);

/// Field CSV at time t: x,y,t,phase,u,v,p,u_exact,v_exact,p_exact,err.
void write_fields_csv(std::ostream& os, const RunConfig& cfg, const Mlp& net1, const Mlp& net2, double t);

struct FieldRow {
  double x, y, t;
  int phase;
  double u, v, p, u_exact, v_exact, p_exact, err;
};
std::vector<FieldRow> read_fields_csv(std::istream& is);

void write_interface_history_csv(std::ostream& os, const TrainerState& state);

// ---- sweep ---------------------------------------------------------------------

struct SweepRow {
  std::vector<int> interior, boundary, interface, initial;
};

/// One row per line: four dimension strings (interior, boundary, interface,
/// initial) separated by whitespace or commas.
std::vector<SweepRow> parse_sweep_rows(std::istream& is);
SamplingSpec apply_row(SamplingSpec base, const SweepRow& row);

struct SweepResult {
  SweepRow row;
  MetricsReport metrics;
};

std::vector<SweepResult> sweep(const std::vector<SweepRow>& rows, const RunConfig& base,
                               std::ostream* progress = nullptr);
/// Columns M_L,M_B,M_Gamma,M_I,gen_error,loss_error,gen_error_pressure.
void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results);

// ---- quadrature rate ---------------------------------------------------------

/// alpha = -slope of the least-squares line through (log M, log e).
double fit_convergence_rate(std::span<const std::pair<double, double>> samples);

/// Root-mean-square error of plain Monte Carlo integration of a smooth
/// integrand over the unit cube, per sample count.
std::vector<std::pair<double, double>> mc_quadrature_errors(std::span<const int> counts, int repetitions,
                                                            std::uint64_t seed);

}  // namespace twophase
