#include "manp/poisson.hpp"

#include <Eigen/Dense>

namespace manp {

CellField poisson_operator(const CellField& phi, const PermittivityField& eps) {
  CellField out = divergence(potential_gradient_to_faces(phi, eps));
  out.values = -out.values;
  return out;
}

std::pair<CellField, PoissonSolveReport> solve_poisson(const CellField& rho,
                                                       const PermittivityField& eps,
                                                       const Eigen::VectorXd* neumann,
                                                       const PoissonOptions& opt) {
  check_shape(rho);
  const StaggeredGrid& g = rho.grid;
  if (g.dim != 2 && !g.periodic()) {
    throw ConfigError("1D Robin problems go through solve_robin_poisson_1d");
  }
  Eigen::VectorXd b = rho.values;
  if (neumann != nullptr) {
    if (g.periodic()) throw ConfigError("Neumann data given for a periodic grid");
    CellField zero(g);
    b += divergence(potential_gradient_to_faces(zero, eps, neumann)).values;
  }
  const double mean = b.mean();
  if (std::abs(mean) > opt.tol) {
    throw IncompatibleSource("Poisson source has nonzero mean " + std::to_string(mean));
  }
  b.array() -= mean;

  CellField x(g);
  CellField tmp(g);
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    tmp.values = v;
    out = poisson_operator(tmp, eps).values;
  };
  auto project = [](Eigen::VectorXd& v) { v.array() -= v.mean(); };
  const int cap = opt.max_iter > 0 ? opt.max_iter : 10 * g.num_cells();
  PoissonSolveReport rep = conjugate_gradient(apply, project, b, x.values, opt.tol, cap);
  x.values.array() -= x.values.mean();
  if (rep.residual_inf > opt.tol) throw NonConvergence("Poisson CG hit its iteration cap", rep);
  return {x, rep};
}

Eigen::VectorXd slopes_from_potential(const Eigen::VectorXd& phi, double dx, double s_left,
                                      double s_right) {
  const Eigen::Index n = phi.size();
  Eigen::VectorXd s(n + 1);
  s[0] = s_left;
  s[n] = s_right;
  for (Eigen::Index i = 1; i < n; ++i) s[i] = (phi[i] - phi[i - 1]) / dx;
  return s;
}

double robin_defect(const Eigen::VectorXd& dphidx, double dx, const RobinBc& bc) {
  const Eigen::Index n = dphidx.size() - 1;
  return dx * dphidx.head(n).sum() + bc.eta * (dphidx[0] + dphidx[n]) -
         (bc.phi_right - bc.phi_left);
}

Potential1d solve_robin_poisson_1d(const CellField& rho, double eps0_sq, const RobinBc& bc) {
  check_shape(rho);
  const StaggeredGrid& g = rho.grid;
  if (g.dim != 1) throw ConfigError("solve_robin_poisson_1d needs a 1D grid");
  const int n = g.nx;
  const double dx = g.dx;
  // unknowns: phi_0..phi_{n-1}, s_L (n), s_R (n+1)
  const int sl = n, sr = n + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 2, n + 2);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 2);
  // slope of face f as a row of coefficients
  auto add_slope = [&](int row, int f, double w) {
    if (f == 0) {
      a(row, sl) += w;
    } else if (f == n) {
      a(row, sr) += w;
    } else {
      a(row, f) += w / dx;
      a(row, f - 1) -= w / dx;
    }
  };
  const double k = eps0_sq / dx;
  for (int i = 0; i < n; ++i) {
    add_slope(i, i + 1, -k);
    add_slope(i, i, k);
    b[i] = rho.values[i];
  }
  a(n, 0) = 1.0;
  a(n, sl) = -(bc.eta + 0.5 * dx);
  b[n] = bc.phi_left;
  for (int f = 0; f < n; ++f) add_slope(n + 1, f, dx);
  add_slope(n + 1, 0, bc.eta);
  add_slope(n + 1, n, bc.eta);
  b[n + 1] = bc.phi_right - bc.phi_left;

  Eigen::VectorXd sol = a.fullPivLu().solve(b);
  if (!sol.allFinite() || (a * sol - b).lpNorm<Eigen::Infinity>() > 1e-9) {
    throw LinearSolveFailure("1D Robin Poisson system is singular");
  }
  Potential1d out;
  out.phi = CellField(g);
  out.phi.values = sol.head(n);
  out.dphidx = slopes_from_potential(out.phi.values, dx, sol[sl], sol[sr]);
  return out;
}

}  // namespace manp
