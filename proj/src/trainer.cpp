#include "twophase/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "twophase/checkpoint.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace twophase {

namespace {

constexpr int idx(Term t) { return static_cast<int>(t); }

std::vector<Vec2> map_points(std::span<const Point3> pts, auto&& f) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(f(p));
  return out;
}

// ---- shards ----------------------------------------------------------------

struct Shard {
  Term term;
  std::size_t begin;
  std::size_t size;
};

struct ShardResult {
  double sum = 0.0;
  std::vector<double> g1;
  std::vector<double> g2;
};

std::vector<Shard> make_shards(const TrainingData& d, std::size_t shard_size) {
  const auto counts = d.counts();
  std::vector<Shard> shards;
  for (int j = 0; j < kNumTerms; ++j)
    for (std::size_t b = 0; b < counts[j]; b += shard_size)
      shards.push_back({static_cast<Term>(j), b, std::min(shard_size, counts[j] - b)});
  return shards;
}

// Differentiates one shard's sum through the tape and back into both nets.
ShardResult run_shard(const Shard& s, const Mlp& net1, const Mlp& net2, const TrainingData& d) {
  thread_local Tape tape;
  tape.clear();
  ShardResult r;
  const Mlp* nets[2] = {&net1, &net2};

  auto single = [&](int phase, std::span<const Point3> pts, JetOrder order, auto&& build) {
    const BatchForward fwd = forward_batch(*nets[phase], pts, order);
    const auto jets = bind_outputs(tape, fwd);
    const Var sum = build(std::span<const FieldJets<Var>>(jets));
    r.sum = sum.value;
    const Gradient g = tape.backward(sum);
    auto& grad = phase == 0 ? r.g1 : r.g2;
    grad.assign(nets[phase]->num_params(), 0.0);
    backward_batch(*nets[phase], fwd, gather_adjoints(fwd, jets, g), grad);
  };

  const std::size_t b = s.begin, n = s.size;
  switch (s.term) {
    case Term::L1:
    case Term::L2: {
      const int ph = s.term == Term::L1 ? 0 : 1;
      single(ph, std::span(d.interior[ph]).subspan(b, n), JetOrder::Second, [&](auto jets) {
        return interior_sum(tape, jets, d.params[ph], std::span(d.force[ph]).subspan(b, n));
      });
      break;
    }
    case Term::B1:
      single(0, std::span(d.boundary).subspan(b, n), JetOrder::Value, [&](auto jets) {
        return velocity_sum(tape, jets, std::span(d.boundary_velocity).subspan(b, n), 1.0);
      });
      break;
    case Term::I1:
    case Term::I2: {
      const int ph = s.term == Term::I1 ? 0 : 1;
      single(ph, std::span(d.initial[ph]).subspan(b, n), JetOrder::Value, [&](auto jets) {
        return velocity_sum(tape, jets, std::span(d.initial_velocity[ph]).subspan(b, n), d.params[ph].rho);
      });
      break;
    }
    case Term::D:
      single(1, std::span(d.observation).subspan(b, n), JetOrder::Value, [&](auto jets) {
        return pressure_sum(tape, jets, std::span(d.observation_pressure).subspan(b, n));
      });
      break;
    case Term::Gamma: {
      const auto pts = std::span(d.interface).subspan(b, n);
      const BatchForward f1 = forward_batch(net1, pts, JetOrder::First);
      const BatchForward f2 = forward_batch(net2, pts, JetOrder::First);
      const auto j1 = bind_outputs(tape, f1);
      const auto j2 = bind_outputs(tape, f2);
      const Var sum = interface_sum(tape, j1, j2, d.params[0], d.params[1], std::span(d.n1).subspan(b, n),
                                    std::span(d.g1).subspan(b, n), std::span(d.g2).subspan(b, n));
      r.sum = sum.value;
      const Gradient g = tape.backward(sum);
      r.g1.assign(net1.num_params(), 0.0);
      r.g2.assign(net2.num_params(), 0.0);
      backward_batch(net1, f1, gather_adjoints(f1, j1, g), r.g1);
      backward_batch(net2, f2, gather_adjoints(f2, j2, g), r.g2);
      break;
    }
    case Term::B2:
      throw std::logic_error("phase 2 has no outer boundary samples");
  }
  return r;
}

void add_into(std::vector<double>& acc, const std::vector<double>& v) {
  if (v.empty()) return;
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

// ---- checkpoint helpers ------------------------------------------------------

void write_state(BinaryWriter& w, const InterfaceState& st) {
  w.u64(st.num_slices());
  w.u64(st.num_vertices());
  w.f64s(st.times());
  for (std::size_t k = 0; k < st.num_slices(); ++k)
    for (const auto& p : st.slice(k)) {
      w.f64(p.x);
      w.f64(p.y);
    }
}

InterfaceState read_state(BinaryReader& r) {
  const auto K = r.u64();
  const auto N = r.u64();
  if (K == 0 || K > (1u << 20) || N > (1u << 20)) throw CheckpointError("implausible interface dimensions");
  auto times = r.f64s(K);
  std::vector<std::vector<Vec2>> slices(K, std::vector<Vec2>(N));
  for (auto& s : slices)
    for (auto& p : s) {
      p.x = r.f64();
      p.y = r.f64();
    }
  return InterfaceState::create(std::move(times), std::move(slices));
}

void write_record(BinaryWriter& w, const EpochRecord& e) {
  w.i64(e.epoch);
  w.f64s(e.F);
  w.f64s(e.weights.w);
  w.f64(e.total);
  w.f64(e.lr);
}

EpochRecord read_record(BinaryReader& r) {
  EpochRecord e;
  e.epoch = r.i64();
  for (double& f : e.F) f = r.f64();
  for (double& x : e.weights.w) x = r.f64();
  e.total = r.f64();
  e.lr = r.f64();
  return e;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.pretrain_epochs < 0 || cfg.main_epochs < 0 || cfg.total_epochs() <= 0)
    throw std::invalid_argument("epoch counts must be nonnegative with a positive total");
  if (cfg.interface_update_cadence < 1) throw std::invalid_argument("interface update cadence must be >= 1");
  if (cfg.shard_size < 1) throw std::invalid_argument("shard size must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("thread count must be >= 1");
  if (!(cfg.pretrain_lr > 0 && cfg.lr_max > 0 && cfg.lr_min >= 0))
    throw std::invalid_argument("learning rates must be positive");
  if (cfg.shape.size() < 2 || cfg.shape.front() != 3 || cfg.shape.back() != 3)
    throw std::invalid_argument("network shape must start and end with 3");
}

// ---------------------------------------------------------------------------
// TrainingData

TermArray<std::size_t> TrainingData::counts() const {
  return {interior[0].size(), interior[1].size(), interface.size(), boundary.size(), 0,
          initial[0].size(),  initial[1].size(),  observation.size()};
}

TermArray<bool> TrainingData::active() const {
  TermArray<bool> a{};
  const auto c = counts();
  for (int j = 0; j < kNumTerms; ++j) a[j] = c[j] > 0;
  return a;
}

TrainingData prepare(const ManufacturedData& data, const SampleSet& s) {
  TrainingData d;
  d.params[0] = data.phase1;
  d.params[1] = data.phase2;
  const Phase phases[2] = {Phase::One, Phase::Two};
  d.interior[0] = s.interior1;
  d.interior[1] = s.interior2;
  d.initial[0] = s.initial1;
  d.initial[1] = s.initial2;
  for (int ph = 0; ph < 2; ++ph) {
    d.force[ph] = map_points(d.interior[ph], [&](const Point3& p) { return data.force(phases[ph], p); });
    d.initial_velocity[ph] =
        map_points(d.initial[ph], [&](const Point3& p) { return data.velocity(phases[ph], p); });
  }
  d.boundary = s.boundary;
  d.boundary_velocity = map_points(d.boundary, [&](const Point3& p) { return data.velocity(Phase::One, p); });
  for (const auto& q : s.interface) {
    d.interface.push_back(q.pt);
    d.n1.push_back(q.n1);
    d.g1.push_back(data.velocity_jump(q.pt));
    d.g2.push_back(data.traction_jump(q.pt, q.n1));
  }
  for (const auto& o : s.observation) {
    d.observation.push_back(o.pt);
    d.observation_pressure.push_back(o.pressure);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Gradients

TermGradients term_gradients(const Mlp& net1, const Mlp& net2, const TrainingData& data, std::size_t shard_size,
                             int threads) {
  if (shard_size == 0) throw std::invalid_argument("shard size must be positive");
  const auto shards = make_shards(data, shard_size);
  std::vector<ShardResult> results(shards.size());

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(shards.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < shards.size();) {
      if (failed.load()) return;
      try {
        results[i] = run_shard(shards[i], net1, net2, data);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  TermGradients tg;
  tg.active = data.active();
  const auto counts = data.counts();
  for (int j = 0; j < kNumTerms; ++j) {
    if (!tg.active[j]) continue;
    tg.grad1[j].assign(net1.num_params(), 0.0);
    tg.grad2[j].assign(net2.num_params(), 0.0);
  }
  TermArray<double> sums{};
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const int j = idx(shards[i].term);
    sums[j] += results[i].sum;
    add_into(tg.grad1[j], results[i].g1);
    add_into(tg.grad2[j], results[i].g2);
  }
  for (int j = 0; j < kNumTerms; ++j) tg.F[j] = tg.active[j] ? sums[j] / static_cast<double>(counts[j]) : 0.0;
  // Per-term gradients of the means.
  for (int j = 0; j < kNumTerms; ++j) {
    if (!tg.active[j]) continue;
    const double inv = 1.0 / static_cast<double>(counts[j]);
    for (double& g : tg.grad1[j]) g *= inv;
    for (double& g : tg.grad2[j]) g *= inv;
  }
  return tg;
}

LossGradient combine(const TermGradients& tg, const Weights& w) {
  LossGradient lg;
  lg.F = tg.F;
  lg.active = tg.active;
  lg.total = total(tg.F, tg.active, w);
  for (int j = 0; j < kNumTerms; ++j) {
    if (!tg.active[j]) continue;
    if (lg.grad1.empty()) {
      lg.grad1.assign(tg.grad1[j].size(), 0.0);
      lg.grad2.assign(tg.grad2[j].size(), 0.0);
    }
    const double wj = w.w[j];
    for (std::size_t i = 0; i < lg.grad1.size(); ++i) lg.grad1[i] += wj * tg.grad1[j][i];
    for (std::size_t i = 0; i < lg.grad2.size(); ++i) lg.grad2[i] += wj * tg.grad2[j][i];
  }
  return lg;
}

LossGradient loss_gradient(const Mlp& net1, const Mlp& net2, const TrainingData& data, const Weights& w,
                           std::size_t shard_size, int threads) {
  return combine(term_gradients(net1, net2, data, shard_size, threads), w);
}

LossGradient reference_loss_gradient(const Mlp& net1, const Mlp& net2, const TrainingData& d, const Weights& w) {
  Tape tape;
  const auto p1 = bind_params(tape, net1);
  const auto p2 = bind_params(tape, net2);
  auto jets = [&](const Mlp& net, const std::vector<Var>& params, const std::vector<Point3>& pts) {
    std::vector<FieldJets<Var>> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(forward_jet(net, tape, params, p));
    return out;
  };
  LossBreakdown b;
  b.active = d.active();
  const Mlp* nets[2] = {&net1, &net2};
  const std::vector<Var>* params[2] = {&p1, &p2};
  for (int ph = 0; ph < 2; ++ph) {
    const Term L = ph == 0 ? Term::L1 : Term::L2;
    const Term I = ph == 0 ? Term::I1 : Term::I2;
    if (b.active[idx(L)])
      b.F[idx(L)] = term_interior(tape, jets(*nets[ph], *params[ph], d.interior[ph]), d.params[ph], d.force[ph]);
    if (b.active[idx(I)])
      b.F[idx(I)] = term_initial(tape, jets(*nets[ph], *params[ph], d.initial[ph]), d.initial_velocity[ph],
                                 d.params[ph].rho);
  }
  if (b.active[idx(Term::B1)])
    b.F[idx(Term::B1)] = term_boundary(tape, jets(net1, p1, d.boundary), d.boundary_velocity);
  if (b.active[idx(Term::Gamma)])
    b.F[idx(Term::Gamma)] = term_interface(tape, jets(net1, p1, d.interface), jets(net2, p2, d.interface),
                                           d.params[0], d.params[1], d.n1, d.g1, d.g2);
  if (b.active[idx(Term::D)])
    b.F[idx(Term::D)] = term_observation(tape, jets(net2, p2, d.observation), d.observation_pressure);
  b.total = total(b, w);

  const Gradient g = tape.backward(b.total);
  LossGradient lg;
  lg.active = b.active;
  for (int j = 0; j < kNumTerms; ++j) lg.F[j] = b.active[j] ? b.F[j].value : 0.0;
  lg.total = b.total.value;
  for (const auto& v : p1) lg.grad1.push_back(g[v]);
  for (const auto& v : p2) lg.grad2.push_back(g[v]);
  return lg;
}

// ---------------------------------------------------------------------------
// Interface tracking

VelocityField network_velocity(const Mlp& net) {
  return [&net](std::span<const Point3> pts) {
    const auto out = evaluate(net, pts);
    std::vector<Vec2> v(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) v[i] = {out[i][0], out[i][1]};
    return v;
  };
}

std::vector<Vec2> interface_position(double t, const TrajectoryTable& table, const VelocityField& velocity) {
  const auto& times = table.times();
  if (t < times.front() || t > times.back()) throw std::out_of_range("time outside trajectory table");
  const std::size_t N = table.num_vertices();
  std::vector<Vec2> x(N);
  for (std::size_t i = 0; i < N; ++i) x[i] = table.origin(i);
  if (t == times.front()) return x;

  // First slice index k with t <= times[k]; then times[k - 1] < t.
  const std::size_t k =
      static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());

  std::vector<Point3> pts;
  pts.reserve(N * (k + 1));
  for (std::size_t j = 0; j < k; ++j)
    for (const auto& p : table.slice(j)) pts.push_back({p.x, p.y, times[j]});
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec2 xt = (1.0 - w) * table.slice(k - 1)[i] + w * table.slice(k)[i];
    pts.push_back({xt.x, xt.y, t});
  }
  const auto v = velocity(pts);
  for (std::size_t i = 0; i < N; ++i) {
    Vec2 d{};
    for (std::size_t j = 0; j + 1 < k; ++j)
      d = d + (0.5 * (times[j + 1] - times[j])) * (v[j * N + i] + v[(j + 1) * N + i]);
    d = d + (0.5 * (t - times[k - 1])) * (v[(k - 1) * N + i] + v[k * N + i]);
    x[i] = x[i] + d;
  }
  return x;
}

InterfaceState update_interface(const InterfaceState& state, const VelocityField& velocity) {
  const auto& times = state.times();
  const std::size_t K = state.num_slices(), N = state.num_vertices();
  std::vector<Point3> pts;
  pts.reserve(K * N);
  for (std::size_t k = 0; k < K; ++k)
    for (const auto& p : state.slice(k)) pts.push_back({p.x, p.y, times[k]});
  const auto v = velocity(pts);

  std::vector<std::vector<Vec2>> slices(K, std::vector<Vec2>(N));
  for (std::size_t i = 0; i < N; ++i) {
    Vec2 d{};
    slices[0][i] = state.origin(i);
    for (std::size_t k = 1; k < K; ++k) {
      d = d + (0.5 * (times[k] - times[k - 1])) * (v[(k - 1) * N + i] + v[k * N + i]);
      slices[k][i] = state.origin(i) + d;
    }
  }
  return InterfaceState::create(times, std::move(slices));
}

InterfaceState update_interface(const InterfaceState& state, const Mlp& net2) {
  return update_interface(state, network_velocity(net2));
}

SampleSet reclassify(const SampleSet& samples, const InterfaceState& state) {
  const MotionLaw law = SolutionDriven{std::make_shared<const InterfaceState>(state)};
  SampleSet out;
  auto interior = reclassify_points(samples.interior1, samples.interior2, law);
  out.interior1 = std::move(interior.phase1);
  out.interior2 = std::move(interior.phase2);
  auto initial = reclassify_points(samples.initial1, samples.initial2, law);
  out.initial1 = std::move(initial.phase1);
  out.initial2 = std::move(initial.phase2);
  out.boundary = samples.boundary;
  out.interface = interface_samples(state);
  out.observation = samples.observation;
  return out;
}

InterfaceState cylinder_state(const Circle& c, int n_vertices, const std::vector<double>& times) {
  if (n_vertices < 3) throw DegeneratePolygon("interface polygon needs at least 3 vertices");
  std::vector<Vec2> ring(n_vertices);
  for (int j = 0; j < n_vertices; ++j)
    ring[j] = interface_point(c, 2.0 * std::numbers::pi * j / n_vertices, 0.0);
  return InterfaceState::create(times, std::vector<std::vector<Vec2>>(times.size(), ring));
}

// ---------------------------------------------------------------------------
// Loop

TrainerState initial_state(const Problem& problem, const TrainConfig& cfg) {
  TrainerState st;
  st.p1 = ParamSet(init_mlp(cfg.seed, cfg.shape));
  st.p2 = ParamSet(init_mlp(cfg.seed + 1, cfg.shape));
  if (const auto* sd = std::get_if<SolutionDriven>(&problem.law)) st.interface = *sd->state;
  return st;
}

SampleSet current_samples(const Problem& problem, const TrainerState& state) {
  if (problem.solution_driven() && state.interface) return reclassify(problem.samples, *state.interface);
  return problem.samples;
}

namespace {

// The jet buffers are a few hundred kB each and live for one epoch; served by
// mmap they cost a page-fault round trip per allocation.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

}  // namespace

void train_epochs(TrainerState& st, const Problem& problem, const TrainConfig& cfg, std::int64_t until,
                  std::ostream* progress) {
  tune_allocator();
  validate(cfg);
  until = std::min(until, cfg.total_epochs());
  if (st.epoch >= until) return;
  TrainingData data = prepare(problem.data, current_samples(problem, st));
  const bool tracking = problem.solution_driven();
  const std::int64_t last = cfg.total_epochs() - 1;

  for (std::int64_t e = st.epoch; e < until; ++e) {
    if (tracking && e > 0 && e % cfg.interface_update_cadence == 0) {
      st.interface = update_interface(*st.interface, st.p2.net);
      data = prepare(problem.data, reclassify(problem.samples, *st.interface));
    }

    const TermGradients tg = term_gradients(st.p1.net, st.p2.net, data, cfg.shard_size, cfg.threads);
    bool finite = true;
    for (int j = 0; j < kNumTerms; ++j) finite = finite && std::isfinite(tg.F[j]);
    if (!finite) {
      if (!cfg.checkpoint_path.empty()) save_trainer(cfg.checkpoint_path, st);
      throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(e), e);
    }

    const bool main_phase = e >= cfg.pretrain_epochs;
    Weights w;
    if (main_phase) {
      if (cfg.weight_mode == WeightMode::Fixed) {
        w[Term::Gamma] = cfg.fixed_interface_weight;
        w[Term::B1] = cfg.fixed_boundary_weight;
        w[Term::B2] = cfg.fixed_boundary_weight;
      } else {
        w = adaptive_update(st.adaptive, tg.F, tg.active);
      }
    }
    w[Term::D] = cfg.observation_weight;

    double lr = cfg.pretrain_lr;
    if (main_phase)
      lr = cfg.main_schedule == LrSchedule::Cosine
               ? cosine_lr(e - cfg.pretrain_epochs, cfg.main_epochs, cfg.lr_max, cfg.lr_min)
               : cfg.lr_max;

    const LossGradient lg = combine(tg, w);
    if (!std::isfinite(lg.total)) {
      if (!cfg.checkpoint_path.empty()) save_trainer(cfg.checkpoint_path, st);
      throw NonFiniteLoss("non-finite weighted loss at epoch " + std::to_string(e), e);
    }
    adam_step(st.p1, lg.grad1, lr);
    adam_step(st.p2, lg.grad2, lr);

    st.history.push_back({e, tg.F, w, lg.total, lr});
    if (tracking && (e == 0 || e == last || (cfg.history_every > 0 && e % cfg.history_every == 0)))
      st.interface_history.push_back({e, *st.interface});
    st.epoch = e + 1;

    if (progress && cfg.progress_every > 0 && (e % cfg.progress_every == 0 || e == last)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %lld  loss %.6e  lr %.3e\n", static_cast<long long>(e), lg.total, lr);
      *progress << buf << std::flush;
    }
    if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 && st.epoch % cfg.checkpoint_every == 0)
      save_trainer(cfg.checkpoint_path, st);
  }
}

TrainerState train(const Problem& problem, const TrainConfig& cfg, std::ostream* progress) {
  validate(cfg);
  TrainerState st = initial_state(problem, cfg);
  train_epochs(st, problem, cfg, cfg.total_epochs(), progress);
  return st;
}

// ---------------------------------------------------------------------------
// Trainer checkpoint

void save_trainer(const std::string& path, const TrainerState& st) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot open " + tmp + " for writing");
    BinaryWriter w(os);
    write_header(w, kKindTrainer);
    w.i64(st.epoch);
    write_paramset(w, st.p1);
    write_paramset(w, st.p2);
    const auto& a = st.adaptive;
    w.f64(a.beta);
    w.f64(a.alpha);
    w.f64(a.eps);
    w.u32(a.initialised ? 1 : 0);
    w.f64s(a.ema);
    w.f64s(a.weights.w);
    w.u32(st.interface ? 1 : 0);
    if (st.interface) write_state(w, *st.interface);
    w.u64(st.history.size());
    for (const auto& e : st.history) write_record(w, e);
    w.u64(st.interface_history.size());
    for (const auto& s : st.interface_history) {
      w.i64(s.epoch);
      write_state(w, s.state);
    }
    if (!os) throw CheckpointError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot move checkpoint into " + path);
}

TrainerState load_trainer(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path);
  BinaryReader r(is);
  if (read_header(r) != kKindTrainer) throw CheckpointError(path + " is not a trainer checkpoint");
  TrainerState st;
  st.epoch = r.i64();
  st.p1 = read_paramset(r);
  st.p2 = read_paramset(r);
  auto& a = st.adaptive;
  a.beta = r.f64();
  a.alpha = r.f64();
  a.eps = r.f64();
  a.initialised = r.u32() != 0;
  for (double& x : a.ema) x = r.f64();
  for (double& x : a.weights.w) x = r.f64();
  if (r.u32()) st.interface = read_state(r);
  const auto nh = r.u64();
  if (nh > (1ull << 32)) throw CheckpointError("implausible history length");
  st.history.reserve(nh);
  for (std::uint64_t i = 0; i < nh; ++i) st.history.push_back(read_record(r));
  const auto ns = r.u64();
  if (ns > (1ull << 32)) throw CheckpointError("implausible interface history length");
  for (std::uint64_t i = 0; i < ns; ++i) {
    const auto e = r.i64();
    st.interface_history.push_back({e, read_state(r)});
  }
  return st;
}

}  // namespace twophase
