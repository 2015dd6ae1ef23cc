#pragma once

// Scalar reverse-mode differentiation tape.
//
// Every operation appends one node holding at most two parent ids and the
// local partials with respect to them, computed at creation time. The
// backward sweep is therefore a single linear pass in decreasing node order.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace twophase {

struct DivisionByZero : std::domain_error {
  using std::domain_error::domain_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

class Tape;

/// Handle to a tape node. Cheap to copy; only valid while its tape lives and
/// has not been cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;
  double value = 0.0;
};

/// Adjoints produced by Tape::backward, indexed by node id.
class Gradient {
 public:
  Gradient() = default;
  explicit Gradient(std::vector<double> adjoints) : adj_(std::move(adjoints)) {}

  double operator[](const Var& v) const { return v.id < adj_.size() ? adj_[v.id] : 0.0; }
  double at(std::uint32_t id) const { return id < adj_.size() ? adj_[id] : 0.0; }
  std::size_t size() const { return adj_.size(); }

 private:
  std::vector<double> adj_;
};

class Tape {
 public:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  enum class Op : std::uint8_t { Leaf, Add, Sub, Mul, Div, Tanh, Exp, Sin, Cos, Sq, Sqrt, Neg, Scale, Shift };

  struct Node {
    Op op;
    std::uint32_t lhs;
    std::uint32_t rhs;
    double dlhs;
    double drhs;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var var(double value);
  /// Untracked constant; recorded as a leaf so it can be inspected like any Var.
  Var constant(double value) { return var(value); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);

  Var tanh(Var a);
  Var exp(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var sq(Var a);
  Var sqrt(Var a);
  Var neg(Var a);

  // Affine ops against plain doubles keep constants off the tape.
  Var scale(Var a, double c);
  Var shift(Var a, double c);

  /// Reverse sweep seeded with d(root)/d(root) = 1.
  Gradient backward(Var root) const;

  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }

 private:
  Var push(Op op, std::uint32_t lhs, double dlhs, std::uint32_t rhs, double drhs, double value);
  void check_owner(const Var& v) const;

  std::vector<Node> nodes_;
};

// Operator sugar. Mixed Var/double forms never create constant nodes.

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }

inline Var operator+(Var a, double c) { return a.tape->shift(a, c); }
inline Var operator+(double c, Var a) { return a.tape->shift(a, c); }
inline Var operator-(Var a, double c) { return a.tape->shift(a, -c); }
inline Var operator-(double c, Var a) { return a.tape->shift(a.tape->neg(a), c); }
inline Var operator*(Var a, double c) { return a.tape->scale(a, c); }
inline Var operator*(double c, Var a) { return a.tape->scale(a, c); }
inline Var operator/(Var a, double c) {
  if (c == 0.0) throw DivisionByZero("division of tape variable by zero constant");
  return a.tape->scale(a, 1.0 / c);
}

inline Var& operator+=(Var& a, Var b) { return a = a + b; }
inline Var& operator-=(Var& a, Var b) { return a = a - b; }
inline Var& operator*=(Var& a, Var b) { return a = a * b; }

inline Var tanh(Var a) { return a.tape->tanh(a); }
inline Var exp(Var a) { return a.tape->exp(a); }
inline Var sin(Var a) { return a.tape->sin(a); }
inline Var cos(Var a) { return a.tape->cos(a); }
inline Var sq(Var a) { return a.tape->sq(a); }
inline Var sqrt(Var a) { return a.tape->sqrt(a); }

inline double sq(double a) { return a * a; }

inline double value_of(double x) { return x; }
inline double value_of(const Var& v) { return v.value; }

}  // namespace twophase
