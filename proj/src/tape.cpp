#include "twophase/tape.hpp"

#include <string>

namespace twophase {

Var Tape::push(Op op, std::uint32_t lhs, double dlhs, std::uint32_t rhs, double drhs, double value) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{op, lhs, rhs, dlhs, drhs});
  return Var{this, id, value};
}

void Tape::check_owner(const Var& v) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw std::invalid_argument("variable does not belong to this tape");
}

Var Tape::var(double value) { return push(Op::Leaf, kNone, 0.0, kNone, 0.0, value); }

Var Tape::add(Var a, Var b) { return push(Op::Add, a.id, 1.0, b.id, 1.0, a.value + b.value); }

Var Tape::sub(Var a, Var b) { return push(Op::Sub, a.id, 1.0, b.id, -1.0, a.value - b.value); }

Var Tape::mul(Var a, Var b) { return push(Op::Mul, a.id, b.value, b.id, a.value, a.value * b.value); }

Var Tape::div(Var a, Var b) {
  if (b.value == 0.0) throw DivisionByZero("tape division by zero");
  const double inv = 1.0 / b.value;
  const double q = a.value * inv;
  return push(Op::Div, a.id, inv, b.id, -q * inv, q);
}

Var Tape::tanh(Var a) {
  const double s = std::tanh(a.value);
  return push(Op::Tanh, a.id, 1.0 - s * s, kNone, 0.0, s);
}

Var Tape::exp(Var a) {
  const double e = std::exp(a.value);
  return push(Op::Exp, a.id, e, kNone, 0.0, e);
}

Var Tape::sin(Var a) { return push(Op::Sin, a.id, std::cos(a.value), kNone, 0.0, std::sin(a.value)); }

Var Tape::cos(Var a) { return push(Op::Cos, a.id, -std::sin(a.value), kNone, 0.0, std::cos(a.value)); }

Var Tape::sq(Var a) { return push(Op::Sq, a.id, 2.0 * a.value, kNone, 0.0, a.value * a.value); }

Var Tape::sqrt(Var a) {
  if (a.value < 0.0) throw DomainError("sqrt of negative value " + std::to_string(a.value));
  const double r = std::sqrt(a.value);
  // d sqrt at 0 is unbounded; the partial is left at 0 there so backward stays finite.
  return push(Op::Sqrt, a.id, r > 0.0 ? 0.5 / r : 0.0, kNone, 0.0, r);
}

Var Tape::neg(Var a) { return push(Op::Neg, a.id, -1.0, kNone, 0.0, -a.value); }

Var Tape::scale(Var a, double c) { return push(Op::Scale, a.id, c, kNone, 0.0, a.value * c); }

Var Tape::shift(Var a, double c) { return push(Op::Shift, a.id, 1.0, kNone, 0.0, a.value + c); }

Gradient Tape::backward(Var root) const {
  check_owner(root);
  std::vector<double> adj(root.id + 1, 0.0);
  adj[root.id] = 1.0;
  for (std::uint32_t i = root.id + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.lhs != kNone) adj[n.lhs] += a * n.dlhs;
    if (n.rhs != kNone) adj[n.rhs] += a * n.drhs;
  }
  return Gradient(std::move(adj));
}

}  // namespace twophase
