#include "twophase/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace twophase {

ManufacturedData make_data(const RunConfig& cfg) {
  const ExactSolution exact = cfg.example == 3 ? ExactSolution::Example3 : ExactSolution::Example1And2;
  return manufacture_data(exact, cfg.phase1, cfg.phase2);
}

MotionLaw make_law(const RunConfig& cfg) {
  switch (cfg.example) {
    case 1: {
      HelicoidEllipse e;
      e.membership = cfg.membership;
      return e;
    }
    case 2:
      return CyclicHarmonic{};
    case 3: {
      const auto& s = cfg.sampling.interface;
      return SolutionDriven{
          std::make_shared<const InterfaceState>(cylinder_state(Circle{}, s.ntheta, closed_time_grid(s.nt, cfg.T)))};
    }
    default:
      throw ConfigError("example must be 1, 2 or 3");
  }
}

Problem make_problem(const RunConfig& cfg) {
  Problem p{make_data(cfg), make_law(cfg), {}};
  SamplingSpec spec = cfg.sampling;
  spec.seed = cfg.train.seed;
  p.samples = gen_samples(spec, p.law, cfg.box, cfg.T);
  if (cfg.observation) p.samples.observation = gen_observation(cfg.example, p.data, cfg.observation_coords);
  return p;
}

MotionLaw reference_law(const RunConfig& cfg) {
  if (cfg.example != 3) return make_law(cfg);
  // The exact interface is the circle carried by the exact velocity; each
  // vertex is integrated slice to slice with the same RK4 step as advect_exact.
  const ManufacturedData data = make_data(cfg);
  const std::vector<double> times = closed_time_grid(std::max(cfg.eval.nt, 2), cfg.T);
  const int n = cfg.exact_vertices;
  const Circle c;
  std::vector<std::vector<Vec2>> slices(times.size(), std::vector<Vec2>(n));
  const double h = 1e-3;
  for (int j = 0; j < n; ++j) {
    Vec2 x = interface_point(c, 2.0 * std::numbers::pi * j / n, 0.0);
    slices[0][j] = x;
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double t0 = times[k - 1];
      const int steps = std::max(1L, std::lround((times[k] - t0) / h));
      const double dt = (times[k] - t0) / steps;
      auto f = [&](Vec2 p, double t) { return data.velocity(Phase::Two, {p.x, p.y, t}); };
      for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * dt;
        const Vec2 k1 = f(x, t);
        const Vec2 k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt);
        const Vec2 k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt);
        const Vec2 k4 = f(x + dt * k3, t + dt);
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      slices[k][j] = x;
    }
  }
  return SolutionDriven{std::make_shared<const InterfaceState>(InterfaceState::create(times, std::move(slices)))};
}

// ---------------------------------------------------------------------------
// Metrics

FieldPredictor network_predictor(const Mlp& net1, const Mlp& net2) {
  return [&net1, &net2](Phase ph, std::span<const Point3> pts) {
    return evaluate(ph == Phase::One ? net1 : net2, pts);
  };
}

FieldPredictor exact_predictor(const ManufacturedData& data) {
  return [data](Phase ph, std::span<const Point3> pts) {
    std::vector<std::array<double, 3>> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 v = data.velocity(ph, pts[i]);
      out[i] = {v.x, v.y, data.pressure(ph, pts[i])};
    }
    return out;
  };
}

std::vector<Point3> eval_points(const EvalGrid& g, const Box& box, double T) {
  std::vector<Point3> pts;
  pts.reserve(std::size_t(g.nx) * g.ny * g.nt);
  const double hx = (box.xmax - box.xmin) / g.nx;
  const double hy = (box.ymax - box.ymin) / g.ny;
  for (double t : closed_time_grid(g.nt, T))
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) pts.push_back({box.xmin + (i + 0.5) * hx, box.ymin + (j + 0.5) * hy, t});
  return pts;
}

GenError gen_error(const FieldPredictor& pred, const ManufacturedData& data, const MotionLaw& law,
                   std::span<const Point3> points) {
  std::vector<Point3> by_phase[2];
  for (const Point3& p : points) by_phase[classify(law, {p.x, p.y}, p.t) == Phase::One ? 0 : 1].push_back(p);

  double vnum = 0.0, vden = 0.0, pnum = 0.0, pden = 0.0;
  for (int k = 0; k < 2; ++k) {
    auto& pts = by_phase[k];
    if (pts.empty()) continue;
    // Sorting makes the sums independent of the caller's point order.
    canonical_order(pts);
    const Phase ph = k == 0 ? Phase::One : Phase::Two;
    const auto out = pred(ph, pts);

    struct Slice {
      double n = 0, se = 0, sp = 0;
    };
    std::map<double, Slice> slices;
    std::vector<double> perr(pts.size()), pex(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 v = data.velocity(ph, pts[i]);
      const double du = out[i][0] - v.x, dv = out[i][1] - v.y;
      vnum += du * du + dv * dv;
      vden += v.x * v.x + v.y * v.y;
      pex[i] = data.pressure(ph, pts[i]);
      perr[i] = out[i][2] - pex[i];
      auto& s = slices[pts[i].t];
      s.n += 1;
      s.se += perr[i];
      s.sp += pex[i];
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& s = slices[pts[i].t];
      const double e = perr[i] - s.se / s.n;
      const double q = pex[i] - s.sp / s.n;
      pnum += e * e;
      pden += q * q;
    }
  }
  GenError g;
  g.velocity = vden > 0 ? std::sqrt(vnum / vden) : std::sqrt(vnum);
  g.pressure = pden > 0 ? std::sqrt(pnum / pden) : std::sqrt(pnum);
  return g;
}

double loss_error(const TermArray<double>& F, const TermArray<bool>& active) {
  double s = 0.0;
  for (int j = 0; j < kNumTerms; ++j)
    if (active[j]) s += F[j];
  return std::sqrt(s);
}

MetricsReport evaluate_state(const RunConfig& cfg, const Problem& problem, const TrainerState& state) {
  MetricsReport m;
  const MotionLaw law = reference_law(cfg);
  const auto pts = eval_points(cfg.eval, cfg.box, cfg.T);
  const GenError g = gen_error(network_predictor(state.p1.net, state.p2.net), problem.data, law, pts);
  m.gen_error_velocity = g.velocity;
  m.gen_error_pressure = g.pressure;
  const TrainingData data = prepare(problem.data, current_samples(problem, state));
  const TermGradients tg = term_gradients(state.p1.net, state.p2.net, data, cfg.train.shard_size, cfg.train.threads);
  m.final_terms = tg.F;
  m.loss_error = loss_error(tg.F, tg.active);
  m.epochs = state.epoch;
  return m;
}

void write_metrics_json(std::ostream& os, const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["gen_error_velocity"] = m.gen_error_velocity;
  j["gen_error_pressure"] = m.gen_error_pressure;
  j["loss_error"] = m.loss_error;
  nlohmann::ordered_json terms;
  for (int k = 0; k < kNumTerms; ++k) terms[std::string(term_name(static_cast<Term>(k)))] = m.final_terms[k];
  j["final_terms"] = terms;
  j["wall_seconds"] = m.wall_seconds;
  j["epochs"] = m.epochs;
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Runs

namespace {

void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  body(os);
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

RunResult run_example(const RunConfig& cfg, std::ostream* progress, bool write_artifacts) {
  const auto start = std::chrono::steady_clock::now();
  const Problem problem = make_problem(cfg);
  TrainConfig tc = cfg.train;
  const std::filesystem::path dir(cfg.output_dir);
  if (write_artifacts) {
    std::filesystem::create_directories(dir);
    write_file(dir / "config.txt", [&](std::ostream& os) { write_config(os, cfg); });
    write_file(dir / "samples.csv", [&](std::ostream& os) { write_samples_csv(os, problem.samples); });
    if (tc.checkpoint_path.empty()) tc.checkpoint_path = (dir / "checkpoint.bin").string();
  } else {
    tc.checkpoint_path.clear();
  }

  RunResult r;
  r.state = train(problem, tc, progress);
  r.metrics = evaluate_state(cfg, problem, r.state);
  r.metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (write_artifacts) {
    save_trainer(tc.checkpoint_path, r.state);
    write_file(dir / "loss_log.csv", [&](std::ostream& os) {
      write_loss_log_header(os);
      for (const auto& rec : r.state.history) write_loss_log_row(os, rec);
    });
    write_file(dir / "fields.csv",
               [&](std::ostream& os) { write_fields_csv(os, cfg, r.state.p1.net, r.state.p2.net, cfg.T); });
    write_file(dir / "metrics.json", [&](std::ostream& os) { write_metrics_json(os, r.metrics); });
    if (problem.solution_driven())
      write_file(dir / "interface_history.csv", [&](std::ostream& os) { write_interface_history_csv(os, r.state); });
  }
  return r;
}

void write_fields_csv(std::ostream& os, const RunConfig& cfg, const Mlp& net1, const Mlp& net2, double t) {
  const MotionLaw law = reference_law(cfg);
  const ManufacturedData data = make_data(cfg);
  const auto pts = eval_points({cfg.eval.nx, cfg.eval.ny, 1}, cfg.box, 0.0);
  std::vector<Point3> plane(pts.begin(), pts.end());
  for (auto& p : plane) p.t = t;
  std::vector<Phase> phase(plane.size());
  std::vector<Point3> split[2];
  std::vector<std::size_t> idx[2];
  for (std::size_t i = 0; i < plane.size(); ++i) {
    phase[i] = classify(law, {plane[i].x, plane[i].y}, t);
    const int k = phase[i] == Phase::One ? 0 : 1;
    split[k].push_back(plane[i]);
    idx[k].push_back(i);
  }
  std::vector<std::array<double, 3>> pred(plane.size());
  for (int k = 0; k < 2; ++k) {
    const auto out = evaluate(k == 0 ? net1 : net2, split[k]);
    for (std::size_t m = 0; m < out.size(); ++m) pred[idx[k][m]] = out[m];
  }
  os << "x,y,t,phase,u,v,p,u_exact,v_exact,p_exact,err\n";
  char buf[512];
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const Vec2 v = data.velocity(phase[i], plane[i]);
    const double pe = data.pressure(phase[i], plane[i]);
    const double err = std::hypot(pred[i][0] - v.x, pred[i][1] - v.y);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", plane[i].x,
                  plane[i].y, plane[i].t, static_cast<int>(phase[i]), pred[i][0], pred[i][1], pred[i][2], v.x, v.y, pe,
                  err);
    os << buf;
  }
}

std::vector<FieldRow> read_fields_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y,t,phase,u,v,p,u_exact,v_exact,p_exact,err")
    throw std::runtime_error("fields csv: bad header");
  std::vector<FieldRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    FieldRow r{};
    const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.x, &r.y, &r.t,
                                &r.phase, &r.u, &r.v, &r.p, &r.u_exact, &r.v_exact, &r.p_exact, &r.err);
    if (got != 11) throw std::runtime_error("fields csv: malformed row: " + line);
    rows.push_back(r);
  }
  return rows;
}

void write_interface_history_csv(std::ostream& os, const TrainerState& state) {
  write_interface_history_header(os);
  for (const auto& snap : state.interface_history) write_interface_history(os, snap.epoch, snap.state);
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<SweepRow> parse_sweep_rows(std::istream& is) {
  std::vector<SweepRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    for (char& c : line)
      if (c == ',' || c == '\t' || c == ';') c = ' ';
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string w; ss >> w;) f.push_back(w);
    if (f.empty()) continue;
    if (f.size() != 4) throw ConfigError("sweep line " + std::to_string(lineno) + ": expected 4 dimension fields");
    SweepRow r;
    try {
      r.interior = parse_dims(f[0]);
      r.boundary = parse_dims(f[1]);
      r.interface = parse_dims(f[2]);
      r.initial = parse_dims(f[3]);
    } catch (const SamplingError& e) {
      throw ConfigError("sweep line " + std::to_string(lineno) + ": " + e.what());
    }
    if (r.interior.size() != 3 || r.boundary.size() != 3 || r.interface.size() != 2 || r.initial.size() != 2)
      throw ConfigError("sweep line " + std::to_string(lineno) + ": expected 3, 3, 2 and 2 factors");
    if (r.boundary[1] != 4) throw ConfigError("sweep line " + std::to_string(lineno) + ": boundary sides must be 4");
    rows.push_back(std::move(r));
  }
  return rows;
}

SamplingSpec apply_row(SamplingSpec s, const SweepRow& r) {
  s.interior = {r.interior[0], r.interior[1], r.interior[2]};
  s.boundary = {r.boundary[0], r.boundary[1], r.boundary[2]};
  s.interface = {r.interface[0], r.interface[1]};
  s.initial = {r.initial[0], r.initial[1]};
  return s;
}

std::vector<SweepResult> sweep(const std::vector<SweepRow>& rows, const RunConfig& base, std::ostream* progress) {
  std::vector<SweepResult> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RunConfig cfg = base;
    cfg.sampling = apply_row(base.sampling, rows[i]);
    cfg.output_dir = (std::filesystem::path(base.output_dir) / ("row" + std::to_string(i))).string();
    cfg.train.checkpoint_path.clear();
    if (progress)
      *progress << "row " << i << ": " << format_dims(rows[i].interior) << ' ' << format_dims(rows[i].boundary) << ' '
                << format_dims(rows[i].interface) << ' ' << format_dims(rows[i].initial) << '\n';
    out.push_back({rows[i], run_example(cfg, progress).metrics});
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "M_L,M_B,M_Gamma,M_I,gen_error,loss_error,gen_error_pressure\n";
  char buf[128];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.metrics.gen_error_velocity, r.metrics.loss_error,
                  r.metrics.gen_error_pressure);
    os << format_dims(r.row.interior) << ',' << format_dims(r.row.boundary) << ',' << format_dims(r.row.interface)
       << ',' << format_dims(r.row.initial) << ',' << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Quadrature rate

double fit_convergence_rate(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) throw DegenerateFit("need at least two (M, error) pairs");
  double sx = 0, sy = 0;
  for (const auto& [m, e] : samples) {
    if (!(m > 0) || !(e > 0)) throw DegenerateFit("sample counts and errors must be positive");
    sx += std::log(m);
    sy += std::log(e);
  }
  const double n = static_cast<double>(samples.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [m, e] : samples) {
    const double dx = std::log(m) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (sxx == 0.0) throw DegenerateFit("all sample counts are equal");
  return -sxy / sxx;
}

std::vector<std::pair<double, double>> mc_quadrature_errors(std::span<const int> counts, int repetitions,
                                                            std::uint64_t seed) {
  // f = exp(x) sin(pi y) (1 + t) on [0,1]^3.
  const double pi = std::numbers::pi;
  const double exact = (std::exp(1.0) - 1.0) * (2.0 / pi) * 1.5;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::pair<double, double>> out;
  for (int m : counts) {
    double sq = 0.0;
    for (int r = 0; r < repetitions; ++r) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        const double x = U(rng), y = U(rng), t = U(rng);
        s += std::exp(x) * std::sin(pi * y) * (1.0 + t);
      }
      const double e = s / m - exact;
      sq += e * e;
    }
    out.emplace_back(m, std::sqrt(sq / repetitions));
  }
  return out;
}

}  // namespace twophase
