#pragma once

// Fully connected tanh networks evaluated in jet mode.
//
// Two evaluation routes share one parameter layout:
//  * forward_jet: every weight, bias and intermediate is a tape Var. Slow but
//    obviously correct; used as the reference route in tests.
//  * forward_batch / backward_batch: dense batched propagation of the jet
//    slots with a hand-written adjoint. The output slots are bound to a tape
//    as leaves so the loss is still assembled and differentiated on the tape.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "twophase/jet.hpp"
#include "twophase/tape.hpp"

namespace twophase {

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<int> kDefaultShape = {3, 50, 50, 50, 3};

/// Flat parameter layout: for each layer, W (out x in, row-major) then b (out).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1] * sizes_[layer]);
  }

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  /// Derivative-free pass; accumulation order matches forward_jet's value slot.
  std::array<double, 3> forward(const Point3& p) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Number of parameters of a fully connected net with the given layer sizes.
std::size_t param_count(std::span<const int> sizes);

/// Glorot-uniform weights, zero biases.
Mlp init_mlp(std::uint64_t seed, const std::vector<int>& sizes = kDefaultShape);

// ---- reference route: everything on the tape ------------------------------

std::vector<Var> bind_params(Tape& tape, const Mlp& net);

FieldJets<Var> forward_jet(const Mlp& net, Tape& tape, std::span<const Var> params, const Point3& p);

// ---- batched route ---------------------------------------------------------

enum class JetOrder : int { Value = 0, First = 1, Second = 2 };

/// Column blocks of a slot-major batch: val, dx, dy, dt, dxx, dxy, dyy.
constexpr int slot_count(JetOrder order) {
  return order == JetOrder::Value ? 1 : order == JetOrder::First ? 4 : 7;
}

struct BatchForward {
  JetOrder order = JetOrder::Value;
  Eigen::Index n = 0;
  std::vector<Eigen::MatrixXd> inputs;  // per layer: width x (slots * n)
  std::vector<Eigen::MatrixXd> pre;     // per hidden layer: pre-activation slots
  Eigen::MatrixXd out;                  // 3 x (slots * n)

  double slot(int output, int s, Eigen::Index i) const { return out(output, s * n + i); }
};

BatchForward forward_batch(const Mlp& net, std::span<const Point3> points, JetOrder order);

/// Accumulates d(loss)/d(params) into grad given d(loss)/d(out).
void backward_batch(const Mlp& net, const BatchForward& fwd, const Eigen::MatrixXd& out_adjoint,
                    std::span<double> grad);

/// Binds every output slot of the batch as a tape leaf. Slots beyond the
/// batch order are a shared zero leaf.
std::vector<FieldJets<Var>> bind_outputs(Tape& tape, const BatchForward& fwd);

/// Reads the adjoints of leaves created by bind_outputs back into slot layout.
Eigen::MatrixXd gather_adjoints(const BatchForward& fwd, const std::vector<FieldJets<Var>>& jets,
                                const Gradient& grad);

/// Output values (u, v, p) without derivatives.
std::vector<std::array<double, 3>> evaluate(const Mlp& net, std::span<const Point3> points);

// ---- optimisation ----------------------------------------------------------

struct ParamSet {
  Mlp net;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  ParamSet() = default;
  explicit ParamSet(Mlp n)
      : net(std::move(n)), m(net.num_params(), 0.0), v(net.num_params(), 0.0) {}

  friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(ParamSet& params, std::span<const double> grads, double lr, const AdamOptions& opt = {});

double cosine_lr(std::int64_t epoch, std::int64_t total, double lr_max = 1e-3, double lr_min = 1e-6);

}  // namespace twophase
