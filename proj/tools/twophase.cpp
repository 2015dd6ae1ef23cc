// twophase: train, sweep, evaluate and export the two-phase flow solver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "twophase/harness.hpp"

using namespace twophase;

namespace {

RunConfig load(const std::string& path, const std::string& out_dir) {
  RunConfig cfg = load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  for (const auto& w : check_config(cfg)) std::cerr << "warning: " << w << '\n';
  return cfg;
}

// Writes to the named file, or stdout when the name is empty or "-".
void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  body(os);
}

// Analytic laws sampled on the interface grid, so track works for every example.
InterfaceState sampled_law(const RunConfig& cfg) {
  const MotionLaw law = make_law(cfg);
  if (const auto* sd = std::get_if<SolutionDriven>(&law)) return *sd->state;
  const auto& s = cfg.sampling.interface;
  const auto times = closed_time_grid(std::max(s.nt, 2), cfg.T);
  std::vector<std::vector<Vec2>> slices;
  for (double t : times) {
    std::vector<Vec2> ring(s.ntheta);
    for (int j = 0; j < s.ntheta; ++j) ring[j] = interface_point(law, 2.0 * std::numbers::pi * j / s.ntheta, t);
    slices.push_back(std::move(ring));
  }
  return InterfaceState::create(times, std::move(slices));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree two-phase Navier-Stokes solver"};
  app.require_subcommand(1);

  std::string config, checkpoint, rows_file, out_dir, output;
  double time = -1.0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Sample, train, evaluate and write artifacts");
  run->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", out_dir, "Override output_dir");
  run->add_flag("-q,--quiet", quiet, "No progress lines");

  auto* sw = app.add_subcommand("sweep", "One run per sampling row");
  sw->add_option("config", config, "Base config file")->required()->check(CLI::ExistingFile);
  sw->add_option("rows", rows_file, "Rows file: interior boundary interface initial")
      ->required()
      ->check(CLI::ExistingFile);
  sw->add_option("-o,--output-dir", out_dir, "Override output_dir");
  sw->add_flag("-q,--quiet", quiet, "No progress lines");

  auto* ev = app.add_subcommand("eval", "Metrics of a trainer checkpoint");
  ev->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ev->add_option("config", config)->required()->check(CLI::ExistingFile);

  auto* tr = app.add_subcommand("track", "Interface history of a trainer checkpoint as CSV");
  tr->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  tr->add_option("config", config)->required()->check(CLI::ExistingFile);
  tr->add_option("--out", output, "Output file (default stdout)");

  auto* ex = app.add_subcommand("export-fields", "Field CSV of a trainer checkpoint at one time");
  ex->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ex->add_option("config", config)->required()->check(CLI::ExistingFile);
  ex->add_option("-t,--time", time, "Time of the plane (default terminal time)");
  ex->add_option("--out", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      RunConfig cfg = load(config, out_dir);
      if (quiet) cfg.train.progress_every = 0;
      else if (cfg.train.progress_every == 0) cfg.train.progress_every = 1000;
      const RunResult r = run_example(cfg, quiet ? nullptr : &std::cerr);
      write_metrics_json(std::cout, r.metrics);
    } else if (*sw) {
      RunConfig cfg = load(config, out_dir);
      if (quiet) cfg.train.progress_every = 0;
      std::ifstream is(rows_file);
      const auto rows = parse_sweep_rows(is);
      const auto results = sweep(rows, cfg, quiet ? nullptr : &std::cerr);
      std::filesystem::create_directories(cfg.output_dir);
      std::ofstream os(std::filesystem::path(cfg.output_dir) / "sweep.csv");
      write_sweep_csv(os, results);
      write_sweep_csv(std::cout, results);
    } else if (*ev) {
      const RunConfig cfg = load(config, "");
      const Problem problem = make_problem(cfg);
      const TrainerState st = load_trainer(checkpoint);
      write_metrics_json(std::cout, evaluate_state(cfg, problem, st));
    } else if (*tr) {
      const RunConfig cfg = load(config, "");
      TrainerState st = load_trainer(checkpoint);
      if (st.interface_history.empty()) st.interface_history.push_back({st.epoch, st.interface ? *st.interface : sampled_law(cfg)});
      with_output(output, [&](std::ostream& os) { write_interface_history_csv(os, st); });
    } else if (*ex) {
      const RunConfig cfg = load(config, "");
      const TrainerState st = load_trainer(checkpoint);
      const double t = time < 0 ? cfg.T : time;
      if (t > cfg.T) throw ConfigError("--time beyond the terminal time");
      with_output(output, [&](std::ostream& os) { write_fields_csv(os, cfg, st.p1.net, st.p2.net, t); });
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
