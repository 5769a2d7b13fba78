#ifndef MANP_OPERATORS_HPP
#define MANP_OPERATORS_HPP

#include <cmath>
#include <optional>

#include "manp/grid.hpp"

namespace manp {

/// Seam between the Taylor branch and the closed form of the Bernoulli function.
inline constexpr double kBernoulliSeam = 1e-4;

/// B(x) = x / (e^x - 1), with the removable singularity at 0.
template <typename Scalar>
Scalar bernoulli(Scalar x) {
  using std::abs;
  using std::expm1;
  if (abs(x) < Scalar(kBernoulliSeam)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x / Scalar(2) + x2 / Scalar(12) - x2 * x2 / Scalar(720);
  }
  return x / expm1(x);
}

/// Scharfetter-Gummel flux from the lo cell to the hi cell, for the drift
/// velocity q * d_over_eps and spacing h. Positive flux points from lo to hi.
template <typename Scalar>
Scalar sg_flux(Scalar c_lo, Scalar c_hi, int q, Scalar d_over_eps, Scalar h) {
  const Scalar a = h * Scalar(q) * d_over_eps;
  return -(bernoulli(a) * c_hi - bernoulli(-a) * c_lo) / h;
}

/// Cell permittivity and its harmonic face averages.
struct PermittivityField {
  Eigen::VectorXd cell_values;
  FaceField face_values;
};

/// Builds face values by harmonic averaging; boundary faces of a
/// non-periodic layout copy their single neighbor. Throws on ε <= 0.
PermittivityField make_permittivity(const CellField& eps);
PermittivityField uniform_permittivity(const StaggeredGrid& g, double eps);

/// Exterior concentrations for Dirichlet boundaries, ordered along each side.
struct GhostCells {
  Eigen::VectorXd left, right, bottom, top;
};

/// SG flux on every face. No-flux boundaries give exactly zero, periodic
/// boundaries wrap, Dirichlet boundaries read `ghosts`.
FaceField flux_field(const CellField& c, int q, const FaceField& d, const PermittivityField& eps,
                     const GhostCells* ghosts = nullptr);

/// Cell-wise (f.x_{i+1/2} - f.x_{i-1/2})/dx + (f.y_{j+1/2} - f.y_{j-1/2})/dy.
CellField divergence(const FaceField& f);

/// Circulation of f/ε around each interior node divided by the dual-cell
/// area; boundary nodes of non-periodic layouts read 0. 2D only.
NodeField discrete_curl(const FaceField& f, const PermittivityField& eps);

/// ε_f (φ_hi - φ_lo)/h on every face (central difference of the potential,
/// no sign flip). The physical displacement is the negative of this.
/// Boundary faces of non-periodic layouts take ε ∂φ/∂x (resp. ∂φ/∂y) from
/// `boundary_normal_derivative` (ordered like boundary_faces(), outward
/// normal derivative), or zero when absent.
FaceField potential_gradient_to_faces(const CellField& phi, const PermittivityField& eps,
                                      const Eigen::VectorXd* boundary_normal_derivative = nullptr);

}  // namespace manp

#endif  // MANP_OPERATORS_HPP
