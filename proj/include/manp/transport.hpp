#ifndef MANP_TRANSPORT_HPP
#define MANP_TRANSPORT_HPP

#include <Eigen/SparseCore>

#include "manp/operators.hpp"

namespace manp {

/// M = I + dt·L with L c = div J(c) for SG fluxes frozen at a given field,
/// so that M c^{n+1} = c^n + inflow. Diagonal > 0, off-diagonals <= 0, and
/// columns sum to 1 + (dt times boundary outflow), which makes M strictly
/// diagonally dominant by columns.
struct TransportMatrix {
  Eigen::SparseMatrix<double> matrix;
  /// dt times the Dirichlet ghost contributions (zero for periodic/no-flux).
  Eigen::VectorXd inflow;
};

TransportMatrix assemble_transport(const CellField& c, int q, const FaceField& d,
                                   const PermittivityField& eps, double dt,
                                   const GhostCells* ghosts = nullptr);

/// Solves M c^{n+1} = c^n + inflow + rhs_extra with a sparse LU.
/// Throws LinearSolveFailure when the residual check fails.
CellField solve_transport(const TransportMatrix& m, const CellField& c_old,
                          const Eigen::VectorXd* rhs_extra = nullptr);

}  // namespace manp

#endif  // MANP_TRANSPORT_HPP
