#ifndef MANP_STEPPER_HPP
#define MANP_STEPPER_HPP

#include <memory>
#include <string>
#include <vector>

#include "manp/relaxation.hpp"
#include "manp/state.hpp"
#include "manp/theta_net.hpp"
#include "manp/transport.hpp"

namespace manp {

enum class ThetaKind { Zero, Lagged, ImplicitLagged, Network, Analytic };
enum class RelaxKind { Auto, Local, Vectorized };

std::string to_string(ThetaKind k);
ThetaKind parse_theta_kind(const std::string& s);

struct ThetaStrategy {
  ThetaKind kind = ThetaKind::Zero;
  std::shared_ptr<ThetaNet> network;  // required for Network
};

struct StepperConfig {
  double dt = 0.0;
  double horizon = 0.0;  // T, for feature normalization
  RelaxKind relax_kind = RelaxKind::Auto;
  RelaxOptions relax;
  bool relax_enabled = true;
  TrainConfig train;
  LossWeights weights;
  RobinBc robin;  // 1D only
};

struct StepReport {
  int train_iterations = 0;
  double train_loss = 0.0;
  bool train_converged = false;
  int relax_sweeps = 0;
  double theta_1d = 0.0;  // scalar Θ of a 1D step (first face for non-constant Θ)
  double gauss_residual = 0.0;
};

/// Semi-implicit SG transport for every species with B-coefficients frozen
/// at D^n. Returns the fluxes realized by the solve, SG(c^{n+1}, D^n).
std::vector<FaceField> advance_concentrations(SimulationState& s, double dt,
                                              const ExternalData* ext = nullptr);

/// Θ for a 2D step in the face convention of the displacement update.
/// `source` is the displacement source of the current step, if any.
FaceField compute_theta(const ThetaStrategy& strategy, const SimulationState& s,
                        const std::vector<FaceField>& fluxes, const StepperConfig& cfg,
                        const ExternalData* ext, const FaceField* source, StepReport* report);

/// 1D baseline Θ in the ε0²-scaled convention of the slope update, one value
/// per face (constant except for the implicit-lagged variant).
Eigen::VectorXd compute_theta_1d(const ThetaStrategy& strategy, const SimulationState& s,
                                 const std::vector<FaceField>& fluxes, const StepperConfig& cfg,
                                 StepReport* report);

/// D* = D^n + dt·(-Σ q J + Θ).
FaceField maxwell_ampere_update(const SimulationState& s, const FaceField& theta,
                                const std::vector<FaceField>& fluxes, double dt);

/// One full 2D step. Errors are rethrown as StepFailure with the step index.
StepReport advance(SimulationState& s, const ThetaStrategy& strategy, const StepperConfig& cfg,
                   const ExternalData* ext = nullptr);

/// One full 1D step: transport, scalar Θ, slope update; no relaxation.
StepReport advance_1d(SimulationState& s, const ThetaStrategy& strategy, const StepperConfig& cfg);

/// φ from face slopes: φ_0 = φ0(-1) + (η + dx/2) s_0, then φ_i = φ_{i-1} + dx s_i.
CellField reconstruct_potential_1d(const StaggeredGrid& g, const Eigen::VectorXd& dphidx,
                                   const RobinBc& bc);

/// ∂φ/∂x on faces of a 1D state.
Eigen::VectorXd slopes_1d(const SimulationState& s);

}  // namespace manp

#endif  // MANP_STEPPER_HPP
