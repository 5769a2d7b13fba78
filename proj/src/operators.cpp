#include "manp/operators.hpp"

#include "manp/errors.hpp"

namespace manp {

PermittivityField make_permittivity(const CellField& eps) {
  check_shape(eps);
  if ((eps.values.array() <= 0.0).any()) throw ConfigError("permittivity must be positive");
  PermittivityField p;
  p.cell_values = eps.values;
  p.face_values = FaceField(eps.grid);
  for_each_face(eps.grid, [&](const FaceRef& f) {
    double v;
    if (f.lo < 0) {
      v = eps.values[f.hi];
    } else if (f.hi < 0) {
      v = eps.values[f.lo];
    } else {
      const double a = eps.values[f.lo];
      const double b = eps.values[f.hi];
      v = 2.0 * a * b / (a + b);
    }
    (f.component == 0 ? p.face_values.x : p.face_values.y)[f.index] = v;
  });
  return p;
}

PermittivityField uniform_permittivity(const StaggeredGrid& g, double eps) {
  return make_permittivity(CellField(g, eps));
}

namespace {

double ghost_value(const StaggeredGrid& g, const GhostCells& gh, const FaceRef& f) {
  if (f.component == 0) return f.lo < 0 ? gh.left[f.j] : gh.right[f.j];
  (void)g;
  return f.lo < 0 ? gh.bottom[f.i] : gh.top[f.i];
}

}  // namespace

FaceField flux_field(const CellField& c, int q, const FaceField& d, const PermittivityField& eps,
                     const GhostCells* ghosts) {
  check_shape(c);
  check_shape(d);
  const StaggeredGrid& g = c.grid;
  const bool dirichlet = g.bc_concentration == ConcentrationBc::Dirichlet;
  if (dirichlet && ghosts == nullptr) throw ConfigError("Dirichlet concentration needs ghost cells");
  FaceField j(g);
  for_each_face(g, [&](const FaceRef& f) {
    const Eigen::VectorXd& dv = f.component == 0 ? d.x : d.y;
    const Eigen::VectorXd& ev = f.component == 0 ? eps.face_values.x : eps.face_values.y;
    double value = 0.0;
    if (f.lo >= 0 && f.hi >= 0) {
      value = sg_flux(c.values[f.lo], c.values[f.hi], q, dv[f.index] / ev[f.index], f.h);
    } else if (dirichlet) {
      const double cg = ghost_value(g, *ghosts, f);
      const double clo = f.lo < 0 ? cg : c.values[f.lo];
      const double chi = f.hi < 0 ? cg : c.values[f.hi];
      value = sg_flux(clo, chi, q, dv[f.index] / ev[f.index], f.h);
    }
    (f.component == 0 ? j.x : j.y)[f.index] = value;
  });
  return j;
}

CellField divergence(const FaceField& f) {
  check_shape(f);
  const StaggeredGrid& g = f.grid;
  CellField out(g);
  for_each_face(g, [&](const FaceRef& r) {
    const double v = (r.component == 0 ? f.x : f.y)[r.index] / r.h;
    if (r.lo >= 0) out.values[r.lo] += v;
    if (r.hi >= 0) out.values[r.hi] -= v;
  });
  return out;
}

NodeField discrete_curl(const FaceField& f, const PermittivityField& eps) {
  check_shape(f);
  const StaggeredGrid& g = f.grid;
  if (g.dim != 2) throw ConfigError("discrete curl is defined in 2D only");
  NodeField out(g);
  const Eigen::VectorXd& ex = eps.face_values.x;
  const Eigen::VectorXd& ey = eps.face_values.y;
  for (const NodeLoop& l : node_loops(g)) {
    const double dfy_dx = (f.y[l.yr] / ey[l.yr] - f.y[l.yl] / ey[l.yl]) / g.dx;
    const double dfx_dy = (f.x[l.xt] / ex[l.xt] - f.x[l.xb] / ex[l.xb]) / g.dy;
    out.values[l.node] = dfy_dx - dfx_dy;
  }
  return out;
}

FaceField potential_gradient_to_faces(const CellField& phi, const PermittivityField& eps,
                                      const Eigen::VectorXd* boundary_normal_derivative) {
  check_shape(phi);
  const StaggeredGrid& g = phi.grid;
  FaceField out(g);
  for_each_face(g, [&](const FaceRef& f) {
    if (f.lo < 0 || f.hi < 0) return;
    const double e = (f.component == 0 ? eps.face_values.x : eps.face_values.y)[f.index];
    (f.component == 0 ? out.x : out.y)[f.index] =
        e * (phi.values[f.hi] - phi.values[f.lo]) / f.h;
  });
  if (boundary_normal_derivative != nullptr) {
    const auto bf = boundary_faces(g);
    if (boundary_normal_derivative->size() != static_cast<Eigen::Index>(bf.size())) {
      throw ConfigError("boundary data length mismatch");
    }
    for (std::size_t k = 0; k < bf.size(); ++k) {
      const auto& b = bf[k];
      const double e = (b.component == 0 ? eps.face_values.x : eps.face_values.y)[b.index];
      // outward derivative times the normal sign gives the axis derivative.
      (b.component == 0 ? out.x : out.y)[b.index] = e * b.normal * (*boundary_normal_derivative)[k];
    }
  }
  return out;
}

}  // namespace manp
