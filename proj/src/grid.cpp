#include "manp/grid.hpp"

#include <cmath>
#include <string>

#include "manp/errors.hpp"

namespace manp {

bool StaggeredGrid::is_interior_node(int i, int j) const {
  if (dim != 2) return false;
  if (periodic()) return true;
  return i > 0 && i < nx && j > 0 && j < ny;
}

StaggeredGrid make_grid(int dim, int nx, int ny, double x_lo, double x_hi, double y_lo,
                        double y_hi, ConcentrationBc cbc, DisplacementBc dbc) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (nx < 2) throw ConfigError("nx must be >= 2, got " + std::to_string(nx));
  if (dim == 2 && ny < 2) throw ConfigError("ny must be >= 2, got " + std::to_string(ny));
  if (!(x_hi > x_lo)) throw ConfigError("domain x-extent must be positive");
  if (dim == 2 && !(y_hi > y_lo)) throw ConfigError("domain y-extent must be positive");
  const bool per_c = cbc == ConcentrationBc::Periodic;
  const bool per_d = dbc == DisplacementBc::Periodic;
  if (per_c != per_d) {
    throw ConfigError("periodic concentration and periodic displacement must be used together");
  }

  StaggeredGrid g;
  g.dim = dim;
  g.nx = nx;
  g.ny = dim == 1 ? 1 : ny;
  g.x0 = x_lo;
  g.dx = (x_hi - x_lo) / nx;
  g.y0 = dim == 1 ? 0.0 : y_lo;
  g.dy = dim == 1 ? 1.0 : (y_hi - y_lo) / ny;
  g.bc_concentration = cbc;
  g.bc_displacement = dbc;
  if (!(g.dx > 0.0) || !(g.dy > 0.0)) throw ConfigError("cell spacing must be positive");
  return g;
}

double FaceField::max_abs() const {
  double m = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  if (y.size()) m = std::max(m, y.cwiseAbs().maxCoeff());
  return m;
}

void check_shape(const CellField& f) {
  if (f.values.size() != f.grid.num_cells()) throw ConfigError("cell field length mismatch");
}

void check_shape(const FaceField& f) {
  if (f.x.size() != f.grid.num_x_faces() || f.y.size() != f.grid.num_y_faces()) {
    throw ConfigError("face field length mismatch");
  }
}

void check_shape(const NodeField& f) {
  if (f.values.size() != f.grid.num_nodes()) throw ConfigError("node field length mismatch");
}

std::vector<BoundaryFace> boundary_faces(const StaggeredGrid& g) {
  std::vector<BoundaryFace> out;
  if (g.periodic()) return out;
  const double yc0 = g.dim == 1 ? 0.0 : 0.5 * g.dy;
  for (int j = 0; j < g.ny; ++j) {
    out.push_back({0, g.x_face(0, j), -1, g.node_x(0), g.y0 + yc0 + j * g.dy});
  }
  for (int j = 0; j < g.ny; ++j) {
    out.push_back({0, g.x_face(g.nx, j), +1, g.node_x(g.nx), g.y0 + yc0 + j * g.dy});
  }
  if (g.dim == 2) {
    for (int i = 0; i < g.nx; ++i) {
      out.push_back({1, g.y_face(i, 0), -1, g.cell_center_x(i), g.node_y(0)});
    }
    for (int i = 0; i < g.nx; ++i) {
      out.push_back({1, g.y_face(i, g.ny), +1, g.cell_center_x(i), g.node_y(g.ny)});
    }
  }
  return out;
}

std::array<Eigen::VectorXd, 2> interpolate_face_to_node(const FaceField& f) {
  check_shape(f);
  const StaggeredGrid& g = f.grid;
  Eigen::VectorXd nxv(g.num_nodes());
  Eigen::VectorXd nyv = Eigen::VectorXd::Zero(g.num_nodes());
  if (g.dim == 1) {
    nxv = f.x;
    return {nxv, nyv};
  }
  const bool per = g.periodic();
  for (int j = 0; j < g.ny_nodes(); ++j) {
    for (int i = 0; i < g.nx_nodes(); ++i) {
      const int n = g.node(i, j);
      // x-faces at column i, rows j-1 and j.
      if (per) {
        nxv[n] = 0.5 * (f.x[g.x_face(i, (j + g.ny - 1) % g.ny)] + f.x[g.x_face(i, j)]);
        nyv[n] = 0.5 * (f.y[g.y_face((i + g.nx - 1) % g.nx, j)] + f.y[g.y_face(i, j)]);
      } else {
        if (j == 0) {
          nxv[n] = f.x[g.x_face(i, 0)];
        } else if (j == g.ny) {
          nxv[n] = f.x[g.x_face(i, g.ny - 1)];
        } else {
          nxv[n] = 0.5 * (f.x[g.x_face(i, j - 1)] + f.x[g.x_face(i, j)]);
        }
        if (i == 0) {
          nyv[n] = f.y[g.y_face(0, j)];
        } else if (i == g.nx) {
          nyv[n] = f.y[g.y_face(g.nx - 1, j)];
        } else {
          nyv[n] = 0.5 * (f.y[g.y_face(i - 1, j)] + f.y[g.y_face(i, j)]);
        }
      }
    }
  }
  return {nxv, nyv};
}

std::array<Eigen::VectorXd, 2> interpolate_face_to_cell(const FaceField& f) {
  check_shape(f);
  const StaggeredGrid& g = f.grid;
  Eigen::VectorXd cx(g.num_cells());
  Eigen::VectorXd cy = Eigen::VectorXd::Zero(g.num_cells());
  const bool per = g.periodic();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int ir = per ? (i + 1) % g.nx : i + 1;
      cx[g.cell(i, j)] = 0.5 * (f.x[g.x_face(i, j)] + f.x[g.x_face(ir, j)]);
      if (g.dim == 2) {
        const int jt = per ? (j + 1) % g.ny : j + 1;
        cy[g.cell(i, j)] = 0.5 * (f.y[g.y_face(i, j)] + f.y[g.y_face(i, jt)]);
      }
    }
  }
  return {cx, cy};
}

std::vector<NodeLoop> node_loops(const StaggeredGrid& g) {
  if (g.dim != 2) throw ConfigError("node loops exist in 2D only");
  std::vector<NodeLoop> loops;
  const bool per = g.periodic();
  for (int j = 0; j < g.ny_nodes(); ++j) {
    for (int i = 0; i < g.nx_nodes(); ++i) {
      if (!g.is_interior_node(i, j)) continue;
      const int jm = per ? (j + g.ny - 1) % g.ny : j - 1;
      const int im = per ? (i + g.nx - 1) % g.nx : i - 1;
      loops.push_back({g.node(i, j), g.x_face(i, jm), g.x_face(i, j), g.y_face(im, j),
                       g.y_face(i, j)});
    }
  }
  return loops;
}

}  // namespace manp
