#include "twophase/net.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace twophase {

namespace {

enum Slot : int { kVal = 0, kX = 1, kY = 2, kT = 3, kXX = 4, kXY = 5, kYY = 6 };

void check_shape(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
  if (sizes.front() != 3 || sizes.back() != 3)
    throw std::invalid_argument("network input and output widths must both be 3");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("layer widths must be positive");
}

}  // namespace

std::size_t param_count(std::span<const int> sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::size_t>(sizes[l + 1]) * static_cast<std::size_t>(sizes[l] + 1);
  return n;
}

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  check_shape(sizes_);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(off, 0.0);
}

Eigen::Map<const Mlp::RowMat> Mlp::weight(std::size_t layer) const {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

std::array<double, 3> Mlp::forward(const Point3& p) const {
  std::vector<double> a = {p.x, p.y, p.t};
  std::vector<double> z;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    z.assign(out, 0.0);
    for (int j = 0; j < out; ++j) {
      double acc = w[j * in] * a[0];
      for (int k = 1; k < in; ++k) acc = acc + w[j * in + k] * a[k];
      acc = acc + b[j];
      z[j] = l + 1 < num_layers() ? std::tanh(acc) : acc;
    }
    a.swap(z);
  }
  return {a[0], a[1], a[2]};
}

Mlp init_mlp(std::uint64_t seed, const std::vector<int>& sizes) {
  Mlp net(sizes);
  std::mt19937_64 rng(seed);
  auto params = net.params();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t w0 = net.weight_offset(l);
    for (std::size_t k = 0; k < static_cast<std::size_t>(in * out); ++k) params[w0 + k] = dist(rng);
  }
  return net;
}

// ---------------------------------------------------------------------------
// Reference route

std::vector<Var> bind_params(Tape& tape, const Mlp& net) {
  std::vector<Var> vars;
  vars.reserve(net.num_params());
  for (double p : net.params()) vars.push_back(tape.var(p));
  return vars;
}

FieldJets<Var> forward_jet(const Mlp& net, Tape& tape, std::span<const Var> params, const Point3& p) {
  if (params.size() != net.num_params()) throw LengthMismatch("parameter vector length mismatch");
  const auto& sizes = net.sizes();
  const Var zero = tape.constant(0.0);
  const std::size_t layers = net.num_layers();

  std::vector<Jet<Var>> a;
  std::vector<Jet<Var>> z;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const Var* w = params.data() + net.weight_offset(l);
    const Var* b = params.data() + net.bias_offset(l);
    z.assign(out, Jet<Var>{});
    for (int j = 0; j < out; ++j) {
      Jet<Var>& zj = z[j];
      const Var* wj = w + j * in;
      if (l == 0) {
        // Input jets: x, y, t carry unit first derivatives and no curvature.
        zj.val = ((wj[0] * p.x + wj[1] * p.y) + wj[2] * p.t) + b[j];
        zj.dx = wj[0];
        zj.dy = wj[1];
        zj.dt = wj[2];
        zj.dxx = zero;
        zj.dxy = zero;
        zj.dyy = zero;
      } else {
        zj.val = wj[0] * a[0].val;
        zj.dx = wj[0] * a[0].dx;
        zj.dy = wj[0] * a[0].dy;
        zj.dt = wj[0] * a[0].dt;
        zj.dxx = wj[0] * a[0].dxx;
        zj.dxy = wj[0] * a[0].dxy;
        zj.dyy = wj[0] * a[0].dyy;
        for (int k = 1; k < in; ++k) {
          zj.val = zj.val + wj[k] * a[k].val;
          zj.dx = zj.dx + wj[k] * a[k].dx;
          zj.dy = zj.dy + wj[k] * a[k].dy;
          zj.dt = zj.dt + wj[k] * a[k].dt;
          zj.dxx = zj.dxx + wj[k] * a[k].dxx;
          zj.dxy = zj.dxy + wj[k] * a[k].dxy;
          zj.dyy = zj.dyy + wj[k] * a[k].dyy;
        }
        zj.val = zj.val + b[j];
      }
      if (l + 1 < layers) {
        const Var s = tanh(zj.val);
        const Var sp = 1.0 - sq(s);
        const Var spp = (s * sp) * -2.0;
        Jet<Var> aj;
        aj.val = s;
        aj.dx = sp * zj.dx;
        aj.dy = sp * zj.dy;
        aj.dt = sp * zj.dt;
        aj.dxx = spp * zj.dx * zj.dx + sp * zj.dxx;
        aj.dxy = spp * zj.dx * zj.dy + sp * zj.dxy;
        aj.dyy = spp * zj.dy * zj.dy + sp * zj.dyy;
        zj = aj;
      }
    }
    a.swap(z);
  }
  return {a[0], a[1], a[2]};
}

// ---------------------------------------------------------------------------
// Batched route

namespace {

// tanh through the vectorised exp; std::tanh is evaluated one lane at a time.
Eigen::ArrayXXd fast_tanh(const Eigen::ArrayXXd& z) {
  const Eigen::ArrayXXd e = (-2.0 * z.abs()).exp();
  return ((1.0 - e) / (1.0 + e)) * z.sign();
}

}  // namespace

BatchForward forward_batch(const Mlp& net, std::span<const Point3> points, JetOrder order) {
  BatchForward f;
  f.order = order;
  f.n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index n = f.n;
  const int slots = slot_count(order);
  const std::size_t layers = net.num_layers();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, slots * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(0, i) = points[i].x;
    a(1, i) = points[i].y;
    a(2, i) = points[i].t;
    if (slots > 1) {
      a(0, kX * n + i) = 1.0;
      a(1, kY * n + i) = 1.0;
      a(2, kT * n + i) = 1.0;
    }
  }

  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = net.weight(l) * a;
    z.leftCols(n).colwise() += net.bias(l);
    f.inputs.push_back(std::move(a));
    if (l + 1 == layers) {
      f.out = std::move(z);
      break;
    }
    const Eigen::Index w = z.rows();
    Eigen::MatrixXd next(w, slots * n);
    const Eigen::ArrayXXd s = fast_tanh(z.leftCols(n).array());
    const Eigen::ArrayXXd sp = 1.0 - s.square();
    next.leftCols(n) = s.matrix();
    if (slots > 1) {
      auto blk = [&](const Eigen::MatrixXd& m, int k) { return m.middleCols(k * n, n).array(); };
      for (int k : {kX, kY, kT}) next.middleCols(k * n, n) = (sp * blk(z, k)).matrix();
      if (slots > 4) {
        const Eigen::ArrayXXd spp = -2.0 * s * sp;
        next.middleCols(kXX * n, n) = (spp * blk(z, kX) * blk(z, kX) + sp * blk(z, kXX)).matrix();
        next.middleCols(kXY * n, n) = (spp * blk(z, kX) * blk(z, kY) + sp * blk(z, kXY)).matrix();
        next.middleCols(kYY * n, n) = (spp * blk(z, kY) * blk(z, kY) + sp * blk(z, kYY)).matrix();
      }
    }
    f.pre.push_back(std::move(z));
    a = std::move(next);
  }
  return f;
}

void backward_batch(const Mlp& net, const BatchForward& f, const Eigen::MatrixXd& out_adjoint,
                    std::span<double> grad) {
  if (grad.size() != net.num_params()) throw LengthMismatch("gradient length mismatch");
  const Eigen::Index n = f.n;
  const int slots = slot_count(f.order);
  if (out_adjoint.rows() != 3 || out_adjoint.cols() != slots * n)
    throw LengthMismatch("output adjoint shape mismatch");

  const std::size_t layers = net.num_layers();
  Eigen::MatrixXd zbar = out_adjoint;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& a = f.inputs[l];
    const int in = net.sizes()[l];
    const int out = net.sizes()[l + 1];
    Eigen::Map<Mlp::RowMat> gw(grad.data() + net.weight_offset(l), out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + net.bias_offset(l), out);
    // Products land in owned (aligned) storage first: Eigen's small-product
    // and partial-reduction kernels peel by destination address, which would
    // make the summation order depend on where grad happens to live.
    const Mlp::RowMat dw = zbar * a.transpose();
    const Eigen::VectorXd db = zbar.leftCols(n).rowwise().sum();
    gw += dw;
    gb += db;
    if (l == 0) break;

    const Eigen::MatrixXd abar = net.weight(l).transpose() * zbar;
    const Eigen::MatrixXd& z = f.pre[l - 1];
    auto blk = [&](const Eigen::MatrixXd& m, int k) { return m.middleCols(k * n, n).array(); };

    // The activation values are the value block of this layer's input.
    const Eigen::ArrayXXd s = a.leftCols(n).array();
    const Eigen::ArrayXXd sp = 1.0 - s.square();
    Eigen::MatrixXd next(abar.rows(), slots * n);
    Eigen::ArrayXXd z0bar = blk(abar, kVal) * sp;
    if (slots > 1) {
      const Eigen::ArrayXXd spp = -2.0 * s * sp;
      for (int k : {kX, kY, kT}) {
        z0bar += blk(abar, k) * spp * blk(z, k);
        next.middleCols(k * n, n) = (blk(abar, k) * sp).matrix();
      }
      if (slots > 4) {
        const Eigen::ArrayXXd sppp = -2.0 * (sp.square() + s * spp);
        const auto zx = blk(z, kX);
        const auto zy = blk(z, kY);
        const auto bxx = blk(abar, kXX);
        const auto bxy = blk(abar, kXY);
        const auto byy = blk(abar, kYY);
        z0bar += bxx * (sppp * zx * zx + spp * blk(z, kXX));
        z0bar += bxy * (sppp * zx * zy + spp * blk(z, kXY));
        z0bar += byy * (sppp * zy * zy + spp * blk(z, kYY));
        next.middleCols(kX * n, n).array() += spp * (2.0 * bxx * zx + bxy * zy);
        next.middleCols(kY * n, n).array() += spp * (bxy * zx + 2.0 * byy * zy);
        next.middleCols(kXX * n, n) = (bxx * sp).matrix();
        next.middleCols(kXY * n, n) = (bxy * sp).matrix();
        next.middleCols(kYY * n, n) = (byy * sp).matrix();
      }
    }
    next.leftCols(n) = z0bar.matrix();
    zbar = std::move(next);
  }
}

std::vector<FieldJets<Var>> bind_outputs(Tape& tape, const BatchForward& f) {
  const int slots = slot_count(f.order);
  const Var zero = tape.constant(0.0);
  std::vector<FieldJets<Var>> jets(static_cast<std::size_t>(f.n));
  for (Eigen::Index i = 0; i < f.n; ++i) {
    Jet<Var>* outs[3] = {&jets[i].u, &jets[i].v, &jets[i].p};
    for (int k = 0; k < 3; ++k) {
      Var* slot_ptr[7] = {&outs[k]->val, &outs[k]->dx, &outs[k]->dy, &outs[k]->dt,
                          &outs[k]->dxx, &outs[k]->dxy, &outs[k]->dyy};
      for (int s = 0; s < 7; ++s) *slot_ptr[s] = s < slots ? tape.var(f.slot(k, s, i)) : zero;
    }
  }
  return jets;
}

Eigen::MatrixXd gather_adjoints(const BatchForward& f, const std::vector<FieldJets<Var>>& jets,
                                const Gradient& grad) {
  const int slots = slot_count(f.order);
  Eigen::MatrixXd adj(3, slots * f.n);
  for (Eigen::Index i = 0; i < f.n; ++i) {
    const Jet<Var>* outs[3] = {&jets[i].u, &jets[i].v, &jets[i].p};
    for (int k = 0; k < 3; ++k) {
      const Var* slot_ptr[7] = {&outs[k]->val, &outs[k]->dx, &outs[k]->dy, &outs[k]->dt,
                                &outs[k]->dxx, &outs[k]->dxy, &outs[k]->dyy};
      for (int s = 0; s < slots; ++s) adj(k, s * f.n + i) = grad[*slot_ptr[s]];
    }
  }
  return adj;
}

std::vector<std::array<double, 3>> evaluate(const Mlp& net, std::span<const Point3> points) {
  const BatchForward f = forward_batch(net, points, JetOrder::Value);
  std::vector<std::array<double, 3>> out(points.size());
  for (Eigen::Index i = 0; i < f.n; ++i) out[i] = {f.out(0, i), f.out(1, i), f.out(2, i)};
  return out;
}

// ---------------------------------------------------------------------------
// Optimisation

void adam_step(ParamSet& ps, std::span<const double> grads, double lr, const AdamOptions& opt) {
  auto theta = ps.net.params();
  if (grads.size() != theta.size() || ps.m.size() != theta.size() || ps.v.size() != theta.size())
    throw LengthMismatch("adam: gradient length " + std::to_string(grads.size()) + " vs " +
                         std::to_string(theta.size()) + " parameters");
  ps.step += 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(ps.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(ps.step));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double g = grads[k];
    ps.m[k] = opt.beta1 * ps.m[k] + (1.0 - opt.beta1) * g;
    ps.v[k] = opt.beta2 * ps.v[k] + (1.0 - opt.beta2) * g * g;
    const double mhat = ps.m[k] / bc1;
    const double vhat = ps.v[k] / bc2;
    theta[k] -= lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

double cosine_lr(std::int64_t epoch, std::int64_t total, double lr_max, double lr_min) {
  if (total <= 0 || epoch < 0 || epoch > total) throw std::out_of_range("cosine_lr: epoch outside [0, total]");
  const double frac = static_cast<double>(epoch) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace twophase
