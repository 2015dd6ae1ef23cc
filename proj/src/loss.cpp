#include "twophase/loss.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace twophase {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("size mismatch between jets and ") + what);
}

void check_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw EmptySet(std::string(what) + " term has no sample points");
}

// Adds v into acc, starting the chain at the first value.
void accumulate(Var& acc, bool& started, Var v) {
  if (started) {
    acc = acc + v;
  } else {
    acc = v;
    started = true;
  }
}

Var finish(Tape& tape, Var acc, bool started) { return started ? acc : tape.constant(0.0); }

}  // namespace

std::string_view term_name(Term t) {
  static constexpr std::string_view names[kNumTerms] = {"L1", "L2", "Gamma", "B1", "B2", "I1", "I2", "D"};
  return names[static_cast<int>(t)];
}

Var interior_sum(Tape& tape, std::span<const FieldJets<Var>> jets, const PhaseParams& pp,
                 std::span<const Vec2> forces) {
  check_sizes(jets.size(), forces.size(), "forces");
  Var acc;
  bool started = false;
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const auto m = momentum_residual(jets[i], pp, forces[i]);
    const Var d = divergence_residual(jets[i]);
    accumulate(acc, started, sq(m[0]) + sq(m[1]) + sq(d));
  }
  return finish(tape, acc, started);
}

Var interface_sum(Tape& tape, std::span<const FieldJets<Var>> j1, std::span<const FieldJets<Var>> j2,
                  const PhaseParams& p1, const PhaseParams& p2, std::span<const Vec2> n1, std::span<const Vec2> g1,
                  std::span<const Vec2> g2) {
  check_sizes(j1.size(), j2.size(), "phase-2 jets");
  check_sizes(j1.size(), n1.size(), "normals");
  check_sizes(j1.size(), g1.size(), "velocity jumps");
  check_sizes(j1.size(), g2.size(), "traction jumps");
  Var acc;
  bool started = false;
  for (std::size_t i = 0; i < j1.size(); ++i) {
    const auto r = interface_residuals(j1[i], j2[i], p1, p2, n1[i], g1[i], g2[i]);
    accumulate(acc, started,
               sq(r.velocity_jump[0]) + sq(r.velocity_jump[1]) + sq(r.traction_jump[0]) + sq(r.traction_jump[1]));
  }
  return finish(tape, acc, started);
}

Var velocity_sum(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets, double scale) {
  check_sizes(jets.size(), targets.size(), "velocity targets");
  Var acc;
  bool started = false;
  for (std::size_t i = 0; i < jets.size(); ++i)
    accumulate(acc, started, sq(jets[i].u.val - targets[i].x) + sq(jets[i].v.val - targets[i].y));
  if (started && scale != 1.0) acc = acc * scale;
  return finish(tape, acc, started);
}

Var pressure_sum(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const double> targets) {
  check_sizes(jets.size(), targets.size(), "pressure targets");
  Var acc;
  bool started = false;
  for (std::size_t i = 0; i < jets.size(); ++i) accumulate(acc, started, sq(jets[i].p.val - targets[i]));
  return finish(tape, acc, started);
}

Var term_interior(Tape& tape, std::span<const FieldJets<Var>> jets, const PhaseParams& pp,
                  std::span<const Vec2> forces) {
  check_nonempty(jets.size(), "interior");
  return interior_sum(tape, jets, pp, forces) / static_cast<double>(jets.size());
}

Var term_interface(Tape& tape, std::span<const FieldJets<Var>> j1, std::span<const FieldJets<Var>> j2,
                   const PhaseParams& p1, const PhaseParams& p2, std::span<const Vec2> n1, std::span<const Vec2> g1,
                   std::span<const Vec2> g2) {
  check_nonempty(j1.size(), "interface");
  return interface_sum(tape, j1, j2, p1, p2, n1, g1, g2) / static_cast<double>(j1.size());
}

Var term_boundary(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets) {
  check_nonempty(jets.size(), "boundary");
  return velocity_sum(tape, jets, targets, 1.0) / static_cast<double>(jets.size());
}

Var term_initial(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const Vec2> targets, double rho) {
  check_nonempty(jets.size(), "initial");
  return velocity_sum(tape, jets, targets, rho) / static_cast<double>(jets.size());
}

Var term_observation(Tape& tape, std::span<const FieldJets<Var>> jets, std::span<const double> targets) {
  check_nonempty(jets.size(), "observation");
  return pressure_sum(tape, jets, targets) / static_cast<double>(jets.size());
}

Var total(const LossBreakdown& b, const Weights& w) {
  Var acc;
  bool started = false;
  for (int j = 0; j < kNumTerms; ++j)
    if (b.active[j]) accumulate(acc, started, b.F[j] * w.w[j]);
  if (!started) throw EmptySet("loss has no active terms");
  return acc;
}

double total(const TermArray<double>& F, const TermArray<bool>& active, const Weights& w) {
  double s = 0.0;
  for (int j = 0; j < kNumTerms; ++j)
    if (active[j]) s += w.w[j] * F[j];
  return s;
}

Weights adaptive_update(AdaptiveState& st, const TermArray<double>& current, const TermArray<bool>& active) {
  int n_active = 0;
  for (int j = 0; j < kNumAdaptive; ++j) n_active += active[j] ? 1 : 0;
  if (n_active == 0) return st.weights;

  for (int j = 0; j < kNumAdaptive; ++j) {
    if (!active[j]) continue;
    st.ema[j] = st.initialised ? (1.0 - st.beta) * st.ema[j] + st.beta * current[j] : current[j];
  }
  st.initialised = true;

  double mean_ema = 0.0;
  for (int j = 0; j < kNumAdaptive; ++j)
    if (active[j]) mean_ema += st.ema[j];
  mean_ema /= n_active;

  for (int j = 0; j < kNumAdaptive; ++j) {
    if (!active[j]) continue;
    const double r = mean_ema > 0.0 ? st.ema[j] / mean_ema : 1.0;
    const double raw = 1.0 / (r + st.eps);
    st.weights.w[j] = (1.0 - st.alpha) * st.weights.w[j] + st.alpha * raw;
  }

  double mean_w = 0.0;
  for (int j = 0; j < kNumAdaptive; ++j)
    if (active[j]) mean_w += st.weights.w[j];
  mean_w /= n_active;
  for (int j = 0; j < kNumAdaptive; ++j) st.weights.w[j] = active[j] ? st.weights.w[j] / mean_w : 1.0;
  return st.weights;
}

void write_loss_log_header(std::ostream& os) {
  os << "epoch";
  for (int j = 0; j < kNumTerms; ++j) os << ",F_" << term_name(static_cast<Term>(j));
  for (int j = 0; j < kNumTerms; ++j) os << ",w_" << term_name(static_cast<Term>(j));
  os << ",total,lr\n";
}

void write_loss_log_row(std::ostream& os, const EpochRecord& r) {
  char buf[64];
  os << r.epoch;
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  for (double f : r.F) put(f);
  for (double w : r.weights.w) put(w);
  put(r.total);
  put(r.lr);
  os << '\n';
}

}  // namespace twophase
