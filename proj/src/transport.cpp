#include "manp/transport.hpp"

#include <Eigen/SparseLU>
#include <vector>

#include "manp/errors.hpp"

namespace manp {

TransportMatrix assemble_transport(const CellField& c, int q, const FaceField& d,
                                   const PermittivityField& eps, double dt,
                                   const GhostCells* ghosts) {
  check_shape(c);
  check_shape(d);
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const StaggeredGrid& g = c.grid;
  const bool dirichlet = g.bc_concentration == ConcentrationBc::Dirichlet;
  if (dirichlet && ghosts == nullptr) throw ConfigError("Dirichlet concentration needs ghost cells");
  const int n = g.num_cells();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 1.0);
  TransportMatrix out;
  out.inflow = Eigen::VectorXd::Zero(n);

  for_each_face(g, [&](const FaceRef& f) {
    const double dv = (f.component == 0 ? d.x : d.y)[f.index];
    const double ev = (f.component == 0 ? eps.face_values.x : eps.face_values.y)[f.index];
    const double a = f.h * q * dv / ev;
    const double s = dt / (f.h * f.h);
    const double bp = bernoulli(a) * s;   // weight of c_hi
    const double bm = bernoulli(-a) * s;  // weight of c_lo
    // J = -(bp c_hi - bm c_lo)/dt·h; lo cell gains +J/h, hi cell gains -J/h
    if (f.lo >= 0 && f.hi >= 0) {
      trip.emplace_back(f.lo, f.lo, bm);
      trip.emplace_back(f.lo, f.hi, -bp);
      trip.emplace_back(f.hi, f.hi, bp);
      trip.emplace_back(f.hi, f.lo, -bm);
    } else if (dirichlet) {
      const double cg = f.component == 0 ? (f.lo < 0 ? ghosts->left[f.j] : ghosts->right[f.j])
                                          : (f.lo < 0 ? ghosts->bottom[f.i] : ghosts->top[f.i]);
      if (f.lo < 0) {
        trip.emplace_back(f.hi, f.hi, bp);
        out.inflow[f.hi] += bm * cg;
      } else {
        trip.emplace_back(f.lo, f.lo, bm);
        out.inflow[f.lo] += bp * cg;
      }
    }
  });
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

CellField solve_transport(const TransportMatrix& m, const CellField& c_old,
                          const Eigen::VectorXd* rhs_extra) {
  Eigen::VectorXd rhs = c_old.values + m.inflow;
  if (rhs_extra != nullptr) rhs += *rhs_extra;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m.matrix);
  if (lu.info() != Eigen::Success) throw LinearSolveFailure("transport factorization failed");
  CellField out(c_old.grid);
  out.values = lu.solve(rhs);
  const double res = (m.matrix * out.values - rhs).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (lu.info() != Eigen::Success || !out.values.allFinite() || res > 1e-11 * scale) {
    throw LinearSolveFailure("transport solve residual " + std::to_string(res));
  }
  return out;
}

}  // namespace manp
