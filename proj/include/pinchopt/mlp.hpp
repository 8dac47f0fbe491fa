#pragma once

// Small dense perceptron with manual backpropagation and SGD/Adam steps.

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pinchopt/error.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

enum class Activation { relu, tanh };

inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw InvalidArgument("unknown activation '" + s + "'");
}

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

struct MlpGradient {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& m : dw) s += m.squaredNorm();
    for (const auto& v : db) s += v.squaredNorm();
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }
  bool all_finite() const {
    for (const auto& m : dw)
      if (!m.allFinite()) return false;
    for (const auto& v : db)
      if (!v.allFinite()) return false;
    return true;
  }
  MlpGradient& operator+=(const MlpGradient& o) {
    for (std::size_t l = 0; l < dw.size(); ++l) {
      dw[l] += o.dw[l];
      db[l] += o.db[l];
    }
    return *this;
  }
  MlpGradient& operator*=(double s) {
    for (auto& m : dw) m *= s;
    for (auto& v : db) v *= s;
    return *this;
  }
  Eigen::VectorXd flatten() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < dw.size(); ++l) n += dw[l].size() + db[l].size();
    Eigen::VectorXd out(n);
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < dw.size(); ++l) {
      out.segment(at, dw[l].size()) = dw[l].reshaped();
      at += dw[l].size();
      out.segment(at, db[l].size()) = db[l];
      at += db[l].size();
    }
    return out;
  }
};

class Mlp {
 public:
  struct Tape {
    std::vector<Eigen::VectorXd> inputs;  // input to each layer
    std::vector<Eigen::VectorXd> pre;     // pre-activation of each layer
  };

  Mlp() = default;

  // Hidden layers: He (relu) or Glorot (tanh) normal init. The linear output
  // layer starts uniform in +-output_scale so initial outputs sit near zero.
  Mlp(std::vector<int> sizes, Activation act, Rng& rng, double output_scale = 3e-3)
      : sizes_(std::move(sizes)), act_(act) {
    if (sizes_.size() < 2) throw InvalidArgument("Mlp: need input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      if (in < 1 || out < 1) throw InvalidArgument("Mlp: layer sizes must be positive");
      DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
      const bool last = l + 2 == sizes_.size();
      const double std_dev = act_ == Activation::relu ? std::sqrt(2.0 / in) : std::sqrt(2.0 / (in + out));
      for (Eigen::Index i = 0; i < layer.w.size(); ++i)
        layer.w.data()[i] = last ? rng.uniform(-output_scale, output_scale) : rng.normal() * std_dev;
      layers_.push_back(std::move(layer));
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    check_input(x);
    Eigen::VectorXd h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd z = layers_[l].w * h + layers_[l].b;
      h = l + 1 < layers_.size() ? activate(z) : z;
    }
    return h;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Tape& tape) const {
    check_input(x);
    tape.inputs.clear();
    tape.pre.clear();
    Eigen::VectorXd h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      tape.inputs.push_back(h);
      Eigen::VectorXd z = layers_[l].w * h + layers_[l].b;
      tape.pre.push_back(z);
      h = l + 1 < layers_.size() ? activate(z) : z;
    }
    return h;
  }

  /// Backpropagates dL/d(output); accumulates into `grad` when given and
  /// returns dL/d(input).
  Eigen::VectorXd backward(const Tape& tape, const Eigen::VectorXd& dout, MlpGradient* grad) const {
    Eigen::VectorXd delta = dout;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      if (i + 1 < layers_.size()) delta = delta.cwiseProduct(activation_slope(tape.pre[i]));
      if (grad) {
        grad->dw[i].noalias() += delta * tape.inputs[i].transpose();
        grad->db[i] += delta;
      }
      delta = layers_[i].w.transpose() * delta;
    }
    return delta;
  }

  MlpGradient zero_gradient() const {
    MlpGradient g;
    for (const DenseLayer& l : layers_) {
      g.dw.push_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
      g.db.push_back(Eigen::VectorXd::Zero(l.b.size()));
    }
    return g;
  }

  Eigen::Index num_parameters() const {
    Eigen::Index n = 0;
    for (const DenseLayer& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  // Layer by layer: weights (column-major), then biases. Matches MlpGradient::flatten.
  Eigen::VectorXd parameters() const {
    Eigen::VectorXd out(num_parameters());
    Eigen::Index at = 0;
    for (const DenseLayer& l : layers_) {
      out.segment(at, l.w.size()) = l.w.reshaped();
      at += l.w.size();
      out.segment(at, l.b.size()) = l.b;
      at += l.b.size();
    }
    return out;
  }

  void set_parameters(const Eigen::VectorXd& p) {
    if (p.size() != num_parameters()) throw DimensionMismatch("Mlp::set_parameters: wrong length");
    Eigen::Index at = 0;
    for (DenseLayer& l : layers_) {
      l.w.reshaped() = p.segment(at, l.w.size());
      at += l.w.size();
      l.b = p.segment(at, l.b.size());
      at += l.b.size();
    }
  }

  bool all_finite() const {
    for (const DenseLayer& l : layers_)
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    return true;
  }

  // Text dump: "mlp <activation> <L+1> <sizes...>", then per layer the
  // weights row by row followed by the biases, one value per line.
  void write(std::ostream& os) const {
    os.precision(17);
    os << "mlp " << to_string(act_) << ' ' << sizes_.size();
    for (int s : sizes_) os << ' ' << s;
    os << '\n';
    for (const DenseLayer& l : layers_) {
      for (Eigen::Index r = 0; r < l.w.rows(); ++r)
        for (Eigen::Index c = 0; c < l.w.cols(); ++c) os << l.w(r, c) << '\n';
      for (Eigen::Index r = 0; r < l.b.size(); ++r) os << l.b(r) << '\n';
    }
  }

  static Mlp read(std::istream& is) {
    std::string tag, act;
    std::size_t count = 0;
    if (!(is >> tag >> act >> count) || tag != "mlp") throw Error("Mlp::read: bad header");
    Mlp net;
    net.act_ = parse_activation(act);
    net.sizes_.resize(count);
    for (int& s : net.sizes_)
      if (!(is >> s)) throw Error("Mlp::read: bad layer sizes");
    for (std::size_t l = 0; l + 1 < count; ++l) {
      DenseLayer layer{Eigen::MatrixXd(net.sizes_[l + 1], net.sizes_[l]), Eigen::VectorXd(net.sizes_[l + 1])};
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
          if (!(is >> layer.w(r, c))) throw Error("Mlp::read: truncated weights");
      for (Eigen::Index r = 0; r < layer.b.size(); ++r)
        if (!(is >> layer.b(r))) throw Error("Mlp::read: truncated biases");
      net.layers_.push_back(std::move(layer));
    }
    return net;
  }

 private:
  void check_input(const Eigen::VectorXd& x) const {
    if (x.size() != input_size()) throw DimensionMismatch("Mlp: input has wrong length");
  }

  Eigen::VectorXd activate(const Eigen::VectorXd& z) const {
    return act_ == Activation::relu ? Eigen::VectorXd(z.cwiseMax(0.0)) : Eigen::VectorXd(z.array().tanh());
  }

  Eigen::VectorXd activation_slope(const Eigen::VectorXd& z) const {
    if (act_ == Activation::relu) return (z.array() > 0.0).cast<double>();
    return 1.0 - z.array().tanh().square();
  }

  std::vector<int> sizes_;
  Activation act_ = Activation::relu;
  std::vector<DenseLayer> layers_;
};

enum class OptimizerKind { sgd, adam };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

// Descent step on a gradient of a loss; negate the gradient to ascend.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double lr, const Mlp& net) : kind_(kind), lr_(lr) {
    if (!(lr > 0.0)) throw InvalidArgument("Optimizer: learning rate must be positive");
    if (kind_ == OptimizerKind::adam) {
      m_ = net.zero_gradient();
      v_ = net.zero_gradient();
    }
  }

  double learning_rate() const { return lr_; }

  void step(Mlp& net, const MlpGradient& g) {
    auto& layers = net.layers();
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].w -= lr_ * g.dw[l];
        layers[l].b -= lr_ * g.db[l];
      }
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_), c2 = 1.0 - std::pow(kBeta2, t_);
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = kBeta1 * m + (1.0 - kBeta1) * grad;
      v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].w, m_.dw[l], v_.dw[l], g.dw[l]);
      update(layers[l].b, m_.db[l], v_.db[l], g.db[l]);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  OptimizerKind kind_ = OptimizerKind::sgd;
  double lr_ = 1e-4;
  long t_ = 0;
  MlpGradient m_, v_;
};

}  // namespace pinchopt
