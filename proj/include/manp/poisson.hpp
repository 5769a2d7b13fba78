#ifndef MANP_POISSON_HPP
#define MANP_POISSON_HPP

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "manp/errors.hpp"
#include "manp/operators.hpp"

namespace manp {

struct PoissonSolveReport {
  int iterations = 0;
  double residual_inf = 0.0;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, PoissonSolveReport r) : NumericalError(what), report(r) {}
  PoissonSolveReport report;
};

struct PoissonOptions {
  double tol = 1e-10;
  int max_iter = -1;  // -1: 10 * number of cells
};

/// Plain conjugate gradient on a symmetric positive (semi)definite operator.
/// `apply(x, out)` writes A x. `project(v)` removes null-space components
/// (identity for definite systems). Stops on the infinity norm of b - A x.
template <typename Apply, typename Project>
PoissonSolveReport conjugate_gradient(Apply&& apply, Project&& project, const Eigen::VectorXd& b,
                                      Eigen::VectorXd& x, double tol, int max_iter) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd r(n), p(n), ap(n);
  apply(x, ap);
  r = b - ap;
  project(r);
  p = r;
  double rr = r.squaredNorm();
  PoissonSolveReport rep;
  rep.residual_inf = r.lpNorm<Eigen::Infinity>();
  while (rep.residual_inf > tol && rep.iterations < max_iter) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++rep.iterations;
    // recompute the true residual now and then to keep drift out of the test
    if (rep.iterations % 50 == 0) {
      apply(x, ap);
      r = b - ap;
    }
    project(r);
    const double rr_new = r.squaredNorm();
    rep.residual_inf = r.lpNorm<Eigen::Infinity>();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return rep;
}

/// Applies -div(ε grad φ) with homogeneous boundary data.
CellField poisson_operator(const CellField& phi, const PermittivityField& eps);

/// Solves -div(ε grad φ) = ρ on a periodic or Neumann grid. Neumann data is
/// the outward normal derivative of φ per boundary face (boundary_faces()
/// order); absent means homogeneous. The solution has zero mean. Throws
/// IncompatibleSource when the mean of the source (including boundary data)
/// exceeds the tolerance, NonConvergence at the iteration cap.
std::pair<CellField, PoissonSolveReport> solve_poisson(const CellField& rho,
                                                       const PermittivityField& eps,
                                                       const Eigen::VectorXd* neumann = nullptr,
                                                       const PoissonOptions& opt = {});

/// Robin data for the 1D problem: φ(-1) - η φ'(-1) = phi_left and
/// φ(1) + η φ'(1) = phi_right.
struct RobinBc {
  double eta = 1.0;
  double phi_left = -1.0;
  double phi_right = 1.0;
};

/// Cell potential plus face slopes of a 1D problem.
struct Potential1d {
  CellField phi;
  Eigen::VectorXd dphidx;  // nx + 1 faces
};

/// Slopes on faces from cell potentials: interior central differences, end
/// faces taken from `s_left`, `s_right`.
Eigen::VectorXd slopes_from_potential(const Eigen::VectorXd& phi, double dx, double s_left,
                                      double s_right);

/// Robin compatibility defect of a slope field on nx+1 faces:
/// dx·Σ_{i<nx} s_i + η (s_0 + s_nx) - (phi_right - phi_left).
double robin_defect(const Eigen::VectorXd& dphidx, double dx, const RobinBc& bc);

/// Solves -ε0² φ'' = ρ on a 1D grid with the discrete Robin closure shared by
/// the potential reconstruction and the compatibility loss.
Potential1d solve_robin_poisson_1d(const CellField& rho, double eps0_sq, const RobinBc& bc);

}  // namespace manp

#endif  // MANP_POISSON_HPP
