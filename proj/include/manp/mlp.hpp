#ifndef MANP_MLP_HPP
#define MANP_MLP_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "manp/errors.hpp"

namespace manp {

/// Dense tanh network with a scalar identity output. Parameters live in one
/// flat vector, layer by layer: W (out x in, column-major) then b.
template <typename Scalar = double>
class Mlp {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network needs at least an input and output layer");
    if (sizes_.back() != 1) throw ConfigError("network output must be scalar");
    Eigen::Index n = 0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      if (sizes_[k] < 1 || sizes_[k + 1] < 1) throw ConfigError("layer sizes must be positive");
      offsets_.push_back(n);
      n += static_cast<Eigen::Index>(sizes_[k + 1]) * (sizes_[k] + 1);
    }
    params_ = Vector::Zero(n);
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_parameters() const { return params_.size(); }
  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_uniform(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int k = 0; k < num_layers(); ++k) {
      const double r = 1.0 / std::sqrt(static_cast<double>(sizes_[k]));
      std::uniform_real_distribution<double> u(-r, r);
      const Eigen::Index len = static_cast<Eigen::Index>(sizes_[k + 1]) * (sizes_[k] + 1);
      for (Eigen::Index i = 0; i < len; ++i) params_[offsets_[k] + i] = Scalar(u(rng));
    }
  }

  ConstMatrixMap weight(int k) const {
    return ConstMatrixMap(params_.data() + offsets_[k], sizes_[k + 1], sizes_[k]);
  }
  Eigen::Map<const Vector> bias(int k) const {
    return Eigen::Map<const Vector>(params_.data() + offsets_[k] + sizes_[k + 1] * sizes_[k],
                                    sizes_[k + 1]);
  }

  Scalar forward(const Vector& x) const {
    if (x.size() != input_size()) throw ConfigError("feature length does not match the network");
    return forward_batch(Matrix(x))[0];
  }

  /// Activations kept by forward_batch for a later backward pass.
  struct Tape {
    std::vector<Matrix> acts;
  };

  /// Columns of X are samples.
  Vector forward_batch(const Matrix& x, Tape* tape = nullptr) const {
    Tape local;
    Tape& t = tape != nullptr ? *tape : local;
    run(x, t.acts);
    return t.acts.back().row(0).transpose();
  }

  /// Gradient of Σ_s dy_s · out_s with respect to the flat parameters.
  Vector backward(const Tape& tape, const Vector& dy) const {
    const std::vector<Matrix>& acts = tape.acts;
    Vector grad = Vector::Zero(params_.size());
    Matrix gmat = dy.transpose();
    for (int k = num_layers() - 1; k >= 0; --k) {
      MatrixMap dw(grad.data() + offsets_[k], sizes_[k + 1], sizes_[k]);
      dw.noalias() = gmat * acts[k].transpose();
      grad.segment(offsets_[k] + sizes_[k + 1] * sizes_[k], sizes_[k + 1]) = gmat.rowwise().sum();
      if (k > 0) {
        Matrix back = weight(k).transpose() * gmat;
        gmat = back.cwiseProduct((Scalar(1) - acts[k].array().square()).matrix());
      }
    }
    return grad;
  }

  Vector backward_batch(const Matrix& x, const Vector& dy) const {
    Tape t;
    forward_batch(x, &t);
    return backward(t, dy);
  }

 private:
  void run(const Matrix& x, std::vector<Matrix>& acts) const {
    if (x.rows() != input_size()) throw ConfigError("feature length does not match the network");
    acts.clear();
    acts.reserve(sizes_.size());
    acts.push_back(x);
    for (int k = 0; k < num_layers(); ++k) {
      Matrix z = weight(k) * acts.back();
      z.colwise() += bias(k);
      if (k + 1 < num_layers()) z = z.array().tanh().matrix();
      acts.push_back(std::move(z));
    }
  }

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Vector params_;
};

/// Adaptive-moment optimizer state.
template <typename Scalar = double>
struct Adam {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Scalar lr = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);
  Vector m, v;
  long t = 0;

  void step(Vector& params, const Vector& grad) {
    if (m.size() != params.size()) {
      m = Vector::Zero(params.size());
      v = Vector::Zero(params.size());
      t = 0;
    }
    ++t;
    m = beta1 * m + (Scalar(1) - beta1) * grad;
    v = beta2 * v + (Scalar(1) - beta2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(beta1, Scalar(t));
    const Scalar c2 = Scalar(1) - std::pow(beta2, Scalar(t));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace manp

#endif  // MANP_MLP_HPP
