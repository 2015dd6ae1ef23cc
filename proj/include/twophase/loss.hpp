#pragma once

// Mean-squared loss terms, their weighted sum, and the adaptive weighting
// recurrence.
//
// Each term has a *_sum form (unnormalised sum of squared residuals over a
// span of jets) so the trainer can shard a term across tapes, and a term_*
// form that divides by the point count.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>

#include "twophase/jet.hpp"
#include "twophase/physics.hpp"
#include "twophase/tape.hpp"

namespace twophase {

enum class Term : int { L1, L2, Gamma, B1, B2, I1, I2, D };
inline constexpr int kNumTerms = 8;
/// L1 .. I2; the observation term is not part of the adaptive set.
inline constexpr int kNumAdaptive = 7;

std::string_view term_name(Term t);

template <class T>
using TermArray = std::array<T, kNumTerms>;

struct EmptySet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Weights {
  TermArray<double> w{1, 1, 1, 1, 1, 1, 1, 1};

  double& operator[](Term t) { return w[static_cast<int>(t)]; }
  double operator[](Term t) const { return w[static_cast<int>(t)]; }
  friend bool operator==(const Weights&, const Weights&) = default;
};

struct LossBreakdown {
  TermArray<Var> F{};
  /// Terms with no sample points (e.g. the phase-2 outer boundary) are inactive.
  TermArray<bool> active{};
  Var total;
};

// ---- unnormalised sums -----------------------------------------------------

/// sum |momentum|^2 + div^2.
Var interior_sum(Tape& tape, std::span<const FieldJets<Var>> jets, const PhaseParams& pp,
                 std::span<const Vec2> forces);
/// sum |v1 - v2 - g1|^2 + |sigma1 n1 + sigma2 n2 - g2|^2.
Var interface_sum(Tape& tape, std::span<const FieldJets<Var>> j1, std::span<const FieldJets<Var>> j2,
                  const PhaseParams& p1, const PhaseParams& p2, std::span<const Vec2> n1, std::span<const Vec2> g1,
                  std::span<const Vec2> g2);
/// scale * sum |target - (u, v)|^2; boundary uses scale 1, initial uses rho.
Var velocity_sum(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets, double scale);
/// sum (target - p)^2.
Var pressure_sum(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const double> targets);

// ---- means -------------------------------------------------------------------

Var term_interior(Tape& tape, std::span<const FieldJets<Var>> jets, const PhaseParams& pp,
                  std::span<const Vec2> forces);
Var term_interface(Tape& tape, std::span<const FieldJets<Var>> j1, std::span<const FieldJets<Var>> j2,
                   const PhaseParams& p1, const PhaseParams& p2, std::span<const Vec2> n1, std::span<const Vec2> g1,
                   std::span<const Vec2> g2);
Var term_boundary(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets);
Var term_initial(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets, double rho);
Var term_observation(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const double> targets);

/// sum_j w_j F_j over active terms.
Var total(const LossBreakdown& b, const Weights& w);
/// Same sum on plain values.
double total(const TermArray<double>& F, const TermArray<bool>& active, const Weights& w);

// ---- adaptive weights ------------------------------------------------------

struct AdaptiveState {
  double beta = 0.2;
  double alpha = 0.1;
  double eps = 1e-6;
  bool initialised = false;
  TermArray<double> ema{};
  Weights weights;

  friend bool operator==(const AdaptiveState&, const AdaptiveState&) = default;
};

/// One step of the EMA / relative-scale / smoothing / normalisation recurrence
/// over the active terms among L1..I2. The first call seeds the EMA with the
/// current values. Inactive adaptive terms keep weight 1, so the mean over all
/// seven is 1 as well. The observation weight is left untouched.
Weights adaptive_update(AdaptiveState& state, const TermArray<double>& current, const TermArray<bool>& active);

// ---- loss log --------------------------------------------------------------

struct EpochRecord {
  std::int64_t epoch = 0;
  TermArray<double> F{};
  Weights weights;
  double total = 0.0;
  double lr = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

void write_loss_log_header(std::ostream& os);
void write_loss_log_row(std::ostream& os, const EpochRecord& r);

}  // namespace twophase
