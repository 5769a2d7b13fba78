#ifndef MANP_STATE_HPP
#define MANP_STATE_HPP

#include <functional>
#include <vector>

#include "manp/operators.hpp"

namespace manp {

struct Species {
  int q = 0;
  CellField c;
};

/// Everything a step reads and writes. In 1D the displacement is stored as
/// D = -ε0² ∂φ/∂x with ε ≡ ε0², so flux and divergence code is shared.
struct SimulationState {
  double time = 0.0;
  long step_index = 0;
  std::vector<Species> species;
  FaceField displacement;
  PermittivityField eps;
  CellField fixed_charge;

  // history of the previous step, valid once has_history is set
  bool has_history = false;
  FaceField displacement_prev;
  std::vector<FaceField> flux_prev;        // realized fluxes SG(c^n, D^{n-1})
  std::vector<FaceField> level_flux_prev;  // SG(c^{n-1}, D^{n-1})
  FaceField theta_prev;
  FaceField source_prev;                   // external displacement source, if any

  const StaggeredGrid& grid() const { return displacement.grid; }
  /// Σ_l q^l c^l + ρ^f per cell.
  Eigen::VectorXd charge() const;
};

/// Optional time-dependent forcing and boundary data (manufactured runs).
struct ExternalData {
  /// per-cell source added to species l's transport equation
  std::function<Eigen::VectorXd(int species, double t)> concentration_source;
  /// face source added to the Maxwell-Ampère update
  std::function<FaceField(double t)> displacement_source;
  /// Dirichlet ghost concentrations
  std::function<GhostCells(int species, double t)> ghosts;
  /// outward normal derivative of φ on boundary faces (boundary_faces order)
  std::function<Eigen::VectorXd(double t)> neumann;
};

}  // namespace manp

#endif  // MANP_STATE_HPP
