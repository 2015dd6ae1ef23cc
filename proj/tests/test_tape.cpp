#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "twophase/tape.hpp"

using namespace twophase;
using doctest::Approx;

TEST_SUITE("tape") {

TEST_CASE("leaf echoes its value and has unit self-derivative") {
  Tape t;
  const Var x = t.var(2.0);
  CHECK(x.value == 2.0);
  CHECK(t.backward(x)[x] == 1.0);
}

TEST_CASE("unused variable has zero gradient") {
  Tape t;
  const Var x = t.var(1.5), y = t.var(-2.0), unused = t.var(7.0);
  const Var r = x * y + x;
  const Gradient g = t.backward(r);
  CHECK(g[unused] == 0.0);
  CHECK(g[x] == Approx(-1.0));
}

TEST_CASE("binary operations") {
  Tape t;
  const Var a = t.var(3), b = t.var(4);
  const Var m = a * b;
  CHECK(m.value == 12.0);
  auto g = t.backward(m);
  CHECK(g[a] == 4.0);
  CHECK(g[b] == 3.0);

  const Var one = t.var(1), two = t.var(2);
  const Var q = one / two;
  CHECK(q.value == 0.5);
  CHECK(t.backward(q)[two] == -0.25);

  const Var x = t.var(1.7);
  const Var z = x - x;
  CHECK(z.value == 0.0);
  CHECK(t.backward(z)[x] == 0.0);

  CHECK_THROWS_AS(one / t.var(0.0), DivisionByZero);
  CHECK_THROWS_AS(one / 0.0, DivisionByZero);
}

TEST_CASE("unary operations at special points") {
  Tape t;
  const Var z = t.var(0.0);
  const Var th = tanh(z);
  CHECK(th.value == 0.0);
  CHECK(t.backward(th)[z] == 1.0);
  const Var e = exp(z);
  CHECK(e.value == 1.0);
  CHECK(t.backward(e)[z] == 1.0);
  const Var h = t.var(std::numbers::pi / 2);
  const Var s = sin(h);
  CHECK(s.value == 1.0);
  CHECK(std::abs(t.backward(s)[h]) < 1e-16);
  CHECK_THROWS_AS(sqrt(t.var(-1.0)), DomainError);
  const Var four = t.var(4.0);
  CHECK(t.backward(sqrt(four))[four] == 0.25);
  CHECK(t.backward(-four)[four] == -1.0);
  CHECK(t.backward(sq(four))[four] == 8.0);
  CHECK(t.backward(cos(h))[h] == Approx(-1.0));
}

TEST_CASE("single neuron chain rule") {
  Tape t;
  const Var w = t.var(0), b = t.var(0);
  const double x = 5;
  const Var r = tanh(w * x + b);
  const auto g = t.backward(r);
  CHECK(g[w] == 5.0);
  CHECK(g[b] == 1.0);
}

TEST_CASE("node ids increase and constants stay off the tape in mixed ops") {
  Tape t;
  const Var a = t.var(1.0);
  const std::size_t before = t.size();
  const Var b = 2.0 * a + 3.0;
  CHECK(t.size() == before + 2);
  CHECK(b.id > a.id);
  CHECK(b.value == 5.0);
}

TEST_CASE("random expressions against finite differences") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 9);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x0 = {U(rng), U(rng), U(rng), U(rng)};
    std::vector<int> ops(20);
    std::vector<std::pair<int, int>> args(20);
    for (int k = 0; k < 20; ++k) {
      ops[k] = pick(rng);
      std::uniform_int_distribution<int> parent(0, 3 + k);
      args[k] = {parent(rng), parent(rng)};
    }
    // Builds the same expression on a tape or on doubles.
    auto build = [&](auto& vals, auto&& unary, auto&& binary) {
      for (int k = 0; k < 20; ++k) {
        const auto& a = vals[args[k].first];
        const auto& b = vals[args[k].second];
        switch (ops[k]) {
          case 0: vals.push_back(binary(a, b, 0)); break;
          case 1: vals.push_back(binary(a, b, 1)); break;
          case 2: vals.push_back(binary(a, b, 2)); break;
          case 3: vals.push_back(binary(a, b, 3)); break;
          default: vals.push_back(unary(a, ops[k])); break;
        }
      }
    };
    auto eval_d = [&](const std::vector<double>& x) {
      std::vector<double> v = x;
      build(
          v,
          [](double a, int op) {
            switch (op) {
              case 4: return std::tanh(a);
              case 5: return std::exp(0.3 * a);
              case 6: return std::sin(a);
              case 7: return std::cos(a);
              case 8: return a * a;
              default: return -a;
            }
          },
          [](double a, double b, int op) {
            switch (op) {
              case 0: return a + b;
              case 1: return a - b;
              case 2: return a * b;
              default: return a / (2.0 + b * b);
            }
          });
      return v.back();
    };
    Tape t;
    std::vector<Var> v;
    for (double xi : x0) v.push_back(t.var(xi));
    const std::vector<Var> leaves = v;
    build(
        v,
        [](Var a, int op) {
          switch (op) {
            case 4: return tanh(a);
            case 5: return exp(0.3 * a);
            case 6: return sin(a);
            case 7: return cos(a);
            case 8: return sq(a);
            default: return -a;
          }
        },
        [](Var a, Var b, int op) {
          switch (op) {
            case 0: return a + b;
            case 1: return a - b;
            case 2: return a * b;
            default: return a / (sq(b) + 2.0);
          }
        });
    REQUIRE(v.back().value == Approx(eval_d(x0)).epsilon(1e-14));
    const Gradient g = t.backward(v.back());
    for (int i = 0; i < 4; ++i) {
      const double h = 1e-6;
      auto xp = x0, xm = x0;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (eval_d(xp) - eval_d(xm)) / (2 * h);
      CHECK(std::abs(g[leaves[i]] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("backward rejects foreign variables") {
  Tape a, b;
  const Var x = a.var(1.0);
  CHECK_THROWS_AS(b.backward(x), std::invalid_argument);
}

}
