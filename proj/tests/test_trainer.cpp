#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "twophase/trainer.hpp"

using namespace twophase;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Problem tiny_problem(int example = 1) {
  SamplingSpec sp;
  sp.interior = {4, 4, 2};
  sp.boundary = {2, 4, 2};
  sp.interface = {6, 3};
  sp.initial = {3, 3};
  Problem p;
  if (example == 3) {
    p.data = manufacture_data(ExactSolution::Example3, {1, 1}, {1000, 1000});
    p.law = SolutionDriven{
        std::make_shared<const InterfaceState>(cylinder_state(Circle{}, 6, closed_time_grid(3, 1.0)))};
  } else {
    p.data = manufacture_data(ExactSolution::Example1And2, {1, 1}, {1, 1});
    p.law = HelicoidEllipse{};
  }
  p.samples = gen_samples(sp, p.law, Box{}, 1.0);
  return p;
}

TrainConfig tiny_config(std::int64_t pre, std::int64_t main) {
  TrainConfig c;
  c.pretrain_epochs = pre;
  c.main_epochs = main;
  c.shape = {3, 8, 8, 3};
  c.shard_size = 7;
  return c;
}

VelocityField constant(Vec2 v) {
  return [v](std::span<const Point3> pts) { return std::vector<Vec2>(pts.size(), v); };
}

InterfaceState circle_table(int slices, double T = 1.0) { return cylinder_state(Circle{}, 16, closed_time_grid(slices, T)); }

// Net whose u output is the constant c: zero weights, output bias (c, 0, 0).
Mlp constant_net(double c) {
  Mlp net({3, 4, 3});
  net.params()[net.bias_offset(1)] = c;
  return net;
}

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
  TrainConfig c = tiny_config(1, 1);
  CHECK_NOTHROW(validate(c));
  c.interface_update_cadence = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config(0, 0);
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config(-1, 5);
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("trapezoidal positions are exact for constant and linear velocity") {
  for (int K : {2, 5, 11}) {
    const auto table = circle_table(K);
    const auto x = interface_position(0.5, table, constant({1, 0}));
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].x - table.origin(i).x == Approx(0.5).epsilon(1e-14));
      CHECK(x[i].y == table.origin(i).y);
    }
  }
  const auto table = circle_table(11);
  const VelocityField lin = [](std::span<const Point3> pts) {
    std::vector<Vec2> v;
    for (const auto& p : pts) v.push_back({2 * p.t, 0});
    return v;
  };
  const auto x = interface_position(1.0, table, lin);
  CHECK(x[0].x - table.origin(0).x == Approx(1.0).epsilon(1e-14));
  CHECK(interface_position(0.0, table, lin) == table.slice(0));
  CHECK_THROWS_AS(interface_position(1.5, table, lin), std::out_of_range);
  CHECK_THROWS_AS(interface_position(-0.1, table, lin), std::out_of_range);
}

TEST_CASE("tracking error against RK4 is second order") {
  const auto d = manufacture_data(ExactSolution::Example3, {1, 1}, {1, 1});
  const VelocityField exact = [&](std::span<const Point3> pts) {
    std::vector<Vec2> v;
    for (const auto& p : pts) v.push_back(d.velocity(Phase::Two, p));
    return v;
  };
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    const int K = static_cast<int>(std::lround(1.0 / dt)) + 1;
    const auto times = closed_time_grid(K, 1.0);
    std::vector<std::vector<Vec2>> slices;
    const int N = 8;
    for (double t : times) {
      std::vector<Vec2> ring;
      for (int j = 0; j < N; ++j)
        ring.push_back(advect_exact(d, interface_point(Circle{}, 2 * kPi * j / N, 0.0), t, 1e-4));
      slices.push_back(ring);
    }
    const auto table = InterfaceState::create(times, slices);
    const auto x = interface_position(1.0, table, exact);
    double e = 0;
    for (int i = 0; i < N; ++i) e = std::max(e, norm(x[i] - table.slice(K - 1)[i]));
    err.push_back(e);
  }
  CHECK(std::log2(err[0] / err[1]) == Approx(2.0).epsilon(0.1));
  CHECK(std::log2(err[1] / err[2]) == Approx(2.0).epsilon(0.1));
}

TEST_CASE("interface update with simple networks") {
  const auto st = circle_table(5);
  CHECK(update_interface(st, Mlp({3, 4, 3})) == st);
  const auto moved = update_interface(st, constant_net(0.3));
  for (std::size_t k = 0; k < moved.num_slices(); ++k)
    for (std::size_t i = 0; i < moved.num_vertices(); ++i) {
      CHECK(moved.slice(k)[i].x == Approx(st.origin(i).x + 0.3 * st.times()[k]).epsilon(1e-14));
      CHECK(moved.slice(k)[i].y == st.origin(i).y);
    }
  const Mlp net = init_mlp(3, {3, 6, 3});
  CHECK(update_interface(st, net) == update_interface(st, net));
}

TEST_CASE("reclassification against a circular state") {
  const auto st = cylinder_state(Circle{}, 64, closed_time_grid(3, 1.0));
  SampleSet s;
  s.interior1 = {{1.5, 2.0, 0.5}, {3.0, 1.5, 0.2}};
  s.interior2 = {{1.5, 3.0 - 0.01, 0.5}};
  const auto r = reclassify(s, st);
  REQUIRE(r.interior2.size() == 1);
  CHECK(r.interior2[0].y == 2.0);
  CHECK(r.interior1.size() == 2);
  CHECK(r.interface.size() == 3 * 64);
  CHECK(reclassify(r, st) == r);

  // Against the analytic circle: disagreements only within the sagitta band.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  const int n = 16;
  const auto coarse = cylinder_state(Circle{}, n, closed_time_grid(2, 1.0));
  const MotionLaw poly = SolutionDriven{std::make_shared<const InterfaceState>(coarse)};
  const double band = 2 * kPi * kPi * 1.0 / (n * n);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 p{U(rng), U(rng)};
    if (classify(poly, p, 0.3) != classify(Circle{}, p, 0.3)) {
      ++mismatches;
      CHECK(std::abs(norm(p - Vec2{1.5, 1.5}) - 1.0) <= band);
    }
  }
  CHECK(mismatches > 0);
}

TEST_CASE("batched sharded gradients match the single-tape reference") {
  for (int ex : {1, 3}) {
    Problem p = tiny_problem(ex);
    if (ex == 3) {
      const auto d = manufacture_data(ExactSolution::Example3, {1, 1}, {1000, 1000});
      p.samples.observation = gen_observation(3, d);
    }
    const TrainingData data = prepare(p.data, p.samples);
    const Mlp n1 = init_mlp(1, {3, 8, 8, 3}), n2 = init_mlp(2, {3, 8, 8, 3});
    Weights w;
    w[Term::Gamma] = 10;
    w[Term::B1] = 3;
    w[Term::D] = 2;
    const LossGradient ref = reference_loss_gradient(n1, n2, data, w);
    for (std::size_t shard : {std::size_t{5}, std::size_t{256}}) {
      const LossGradient got = loss_gradient(n1, n2, data, w, shard, 2);
      CHECK(got.total == Approx(ref.total).epsilon(1e-12));
      double s1 = 0, s2 = 0;
      for (double g : ref.grad1) s1 = std::max(s1, std::abs(g));
      for (double g : ref.grad2) s2 = std::max(s2, std::abs(g));
      for (std::size_t k = 0; k < ref.grad1.size(); ++k) CHECK(std::abs(got.grad1[k] - ref.grad1[k]) <= 1e-10 * s1);
      for (std::size_t k = 0; k < ref.grad2.size(); ++k) CHECK(std::abs(got.grad2[k] - ref.grad2[k]) <= 1e-10 * s2);
    }
  }
}

TEST_CASE("the outer boundary of phase 2 is empty") {
  const TrainingData d = prepare(tiny_problem().data, tiny_problem().samples);
  CHECK(d.counts()[static_cast<int>(Term::B2)] == 0);
  CHECK_FALSE(d.active()[static_cast<int>(Term::B2)]);
  CHECK_FALSE(d.active()[static_cast<int>(Term::D)]);
  CHECK(d.active()[static_cast<int>(Term::L1)]);
}

TEST_CASE("short training run") {
  const Problem p = tiny_problem();
  const TrainConfig c = tiny_config(11, 0);
  const TrainerState st = train(p, c);
  REQUIRE(st.history.size() == 11);
  for (const auto& r : st.history) CHECK(std::isfinite(r.total));
  CHECK(st.history[10].total < st.history[0].total);
  CHECK_FALSE(st.interface.has_value());
  CHECK(st.interface_history.empty());
}

TEST_CASE("schedule and weights of the two phases") {
  const Problem p = tiny_problem();
  TrainConfig c = tiny_config(3, 4);
  const TrainerState st = train(p, c);
  REQUIRE(st.history.size() == 7);
  CHECK(st.history[2].lr == 1e-3);
  CHECK(st.history[2].weights[Term::Gamma] == 1.0);
  CHECK(st.history[3].weights[Term::Gamma] == 10.0);
  CHECK(st.history[3].weights[Term::B1] == 10.0);
  CHECK(st.history[3].lr == Approx(1e-3));
  CHECK(st.history[5].lr == Approx(cosine_lr(2, 4)));

  c.weight_mode = WeightMode::Adaptive;
  const TrainerState ad = train(p, c);
  double mean = 0;
  for (int j = 0; j < kNumAdaptive; ++j) mean += ad.history[6].weights.w[j];
  CHECK(mean / kNumAdaptive == Approx(1.0));
  CHECK(ad.history[2].weights[Term::L1] == 1.0);
}

TEST_CASE("determinism, thread independence and resume") {
  const Problem p = tiny_problem(3);
  TrainConfig c = tiny_config(4, 4);
  c.history_every = 2;
  const TrainerState a = train(p, c);
  const TrainerState b = train(p, c);
  CHECK(a == b);
  c.threads = 3;
  CHECK(train(p, c) == a);
  c.threads = 1;

  const std::string path = temp_path("twophase_resume.bin");
  TrainerState part = initial_state(p, c);
  train_epochs(part, p, c, 5);
  save_trainer(path, part);
  TrainerState resumed = load_trainer(path);
  CHECK(resumed == part);
  train_epochs(resumed, p, c, c.total_epochs());
  CHECK(resumed == a);
  std::filesystem::remove(path);
}

TEST_CASE("solution-driven tracking") {
  const Problem p = tiny_problem(3);
  TrainConfig c = tiny_config(3, 3);
  const TrainerState st = train(p, c);
  REQUIRE(st.interface.has_value());
  CHECK_FALSE(*st.interface == *std::get<SolutionDriven>(p.law).state);
  REQUIRE(st.interface_history.size() == 2);
  CHECK(st.interface_history.front().epoch == 0);
  CHECK(st.interface_history.back().epoch == 5);
  CHECK(current_samples(p, st).interface.size() == 18);

  // Without updates the state stays the initial cylinder.
  c.interface_update_cadence = 1000000;
  const TrainerState frozen = train(p, c);
  CHECK(*frozen.interface == *std::get<SolutionDriven>(p.law).state);
  CHECK(current_samples(p, frozen) == reclassify(p.samples, *frozen.interface));
}

TEST_CASE("non-finite loss aborts with a checkpoint") {
  const Problem p = tiny_problem();
  TrainConfig c = tiny_config(3, 0);
  c.checkpoint_path = temp_path("twophase_nan.bin");
  TrainerState st = initial_state(p, c);
  st.p1.net.params()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train_epochs(st, p, c, 3);
    FAIL("expected NonFiniteLoss");
  } catch (const NonFiniteLoss& e) {
    CHECK(e.epoch == 0);
  }
  CHECK(std::filesystem::exists(c.checkpoint_path));
  CHECK(load_trainer(c.checkpoint_path).epoch == 0);
  std::filesystem::remove(c.checkpoint_path);
}

}
