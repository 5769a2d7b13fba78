#ifndef MANP_THETA_NET_HPP
#define MANP_THETA_NET_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "manp/mlp.hpp"
#include "manp/poisson.hpp"
#include "manp/state.hpp"

namespace manp {

enum class LossVariant { Energy, Curl };

struct LossWeights {
  double lambda_bc = 1.0;
  double lambda_reg = 1e-4;
  LossVariant variant = LossVariant::Energy;
};

struct TrainConfig {
  double loss_tol = 1e-8;
  int max_iters = 5000;
  // Stop early when the best loss improved by less than stall_rtol (relative)
  // over the last stall_window iterations; window 0 disables the rule.
  int stall_window = 0;
  double stall_rtol = 0.0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainReport {
  int iterations = 0;
  double final_loss = 0.0;
  bool converged = false;
};

/// Network plus optimizer state; both persist across time steps.
struct ThetaNet {
  Mlp<double> net;
  Adam<double> opt;

  ThetaNet() = default;
  ThetaNet(std::vector<int> sizes, std::uint64_t seed);
};

/// Default layer sizes: features -> 32 -> 32 -> 32 -> 1.
std::vector<int> default_layers(int inputs);

inline constexpr int kFeatures2d = 7;
inline constexpr int kFeatures1d = 5;

// ---- 2D ------------------------------------------------------------------

/// Per-node features (x̂, ŷ, t/T, D^n at the node, Θ^{n-1} at the node);
/// columns are nodes.
Eigen::MatrixXd node_features(const SimulationState& s, double horizon);
Eigen::VectorXd node_features(const SimulationState& s, int node, double horizon);

/// Θ.x(i,j) = (u(i,j+1) - u(i,j))/dy, Θ.y(i,j) = -(u(i+1,j) - u(i,j))/dx.
FaceField theta_from_stream(const NodeField& u);
/// Transpose of theta_from_stream.
NodeField theta_from_stream_adjoint(const FaceField& g);

/// Everything the 2D loss needs besides Θ: D* = base + dt·Θ.
struct LossContext2d {
  FaceField base;
  PermittivityField eps;
  double dt = 0.0;
  LossWeights weights;
  Eigen::VectorXd bc_data;  // outward ∂φ/∂n per boundary face; empty means zero
};

/// base = D^n + dt·(-Σ q J + source).
LossContext2d make_loss_context_2d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                                   double dt, const LossWeights& w,
                                   const Eigen::VectorXd& bc_data = {},
                                   const FaceField* source = nullptr);

double loss_2d(const FaceField& theta, const LossContext2d& ctx);
/// Loss and its gradient with respect to Θ.
double loss_2d_grad(const FaceField& theta, const LossContext2d& ctx, FaceField& dtheta);
double loss_2d(const FaceField& theta, const SimulationState& s,
               const std::vector<FaceField>& fluxes, double dt, const LossWeights& w,
               const Eigen::VectorXd& bc_data = {});

/// Loss and parameter gradient for given node features (the full chain
/// network -> stream function -> Θ -> D* -> loss).
double loss_2d_params(const Mlp<double>& net, const Eigen::MatrixXd& features,
                      const LossContext2d& ctx, Eigen::VectorXd* grad);

std::pair<FaceField, TrainReport> train_and_emit_2d(ThetaNet& tn, const SimulationState& s,
                                                    const LossContext2d& ctx, double horizon,
                                                    const TrainConfig& cfg,
                                                    std::vector<double>* loss_trace = nullptr);

// ---- 1D ------------------------------------------------------------------

/// (∂φ/∂x)^{n+1} = base + coef·Θ on every face.
struct LossContext1d {
  Eigen::VectorXd base;
  double coef = 0.0;
  double dx = 0.0;
  RobinBc robin;
};

LossContext1d make_loss_context_1d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                                   double dt, const RobinBc& robin);

double loss_1d(double theta, const LossContext1d& ctx);
double loss_1d(double theta, const SimulationState& s, const std::vector<FaceField>& fluxes,
               double dt, const RobinBc& robin);

/// Exact minimizer of loss_1d. Throws DegenerateQuadratic when the
/// quadratic coefficient vanishes.
double analytic_theta_1d(const LossContext1d& ctx);
double analytic_theta_1d(const SimulationState& s, const std::vector<FaceField>& fluxes, double dt,
                         const RobinBc& robin);

/// (t/T, mean ∂φ/∂x, ∂φ/∂x at both ends, mean Σ q J).
Eigen::VectorXd features_1d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                            double horizon);

double loss_1d_params(const Mlp<double>& net, const Eigen::VectorXd& features,
                      const LossContext1d& ctx, Eigen::VectorXd* grad);

std::pair<double, TrainReport> train_and_emit_1d(ThetaNet& tn, const Eigen::VectorXd& features,
                                                 const LossContext1d& ctx, const TrainConfig& cfg);

// ---- checkpoints ---------------------------------------------------------

/// Text format: "manp-mlp v1", then a line with the layer sizes, then one
/// parameter per line in the flat layout of Mlp (%.17g).
void save_checkpoint(const Mlp<double>& net, std::ostream& out);
Mlp<double> load_checkpoint(std::istream& in);
void save_checkpoint(const Mlp<double>& net, const std::string& path);
Mlp<double> load_checkpoint(const std::string& path);

}  // namespace manp

#endif  // MANP_THETA_NET_HPP
