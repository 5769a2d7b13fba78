#ifndef MANP_GRID_HPP
#define MANP_GRID_HPP

#include <Eigen/Core>
#include <array>
#include <vector>

namespace manp {

enum class ConcentrationBc { Periodic, NoFlux, Dirichlet };
enum class DisplacementBc { Periodic, Neumann };

/// Uniform MAC grid. Concentrations live at cell centers, the displacement
/// and fluxes on faces, stream functions on nodes. Storage is row-major with
/// x fastest. A 1D grid is stored as a single row (ny == 1) without y-faces.
///
/// Periodic layouts keep one face (and one node) per cell per axis; the seam
/// face is the left/bottom face of cell 0.
struct StaggeredGrid {
  int dim = 2;
  int nx = 0;
  int ny = 1;
  double dx = 0.0;
  double dy = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  ConcentrationBc bc_concentration = ConcentrationBc::Periodic;
  DisplacementBc bc_displacement = DisplacementBc::Periodic;

  bool periodic() const { return bc_displacement == DisplacementBc::Periodic; }

  int num_cells() const { return nx * ny; }
  /// x-faces per row.
  int nx_faces_per_row() const { return periodic() ? nx : nx + 1; }
  int num_x_faces() const { return nx_faces_per_row() * ny; }
  /// y-face rows (zero in 1D).
  int ny_face_rows() const { return dim == 1 ? 0 : (periodic() ? ny : ny + 1); }
  int num_y_faces() const { return nx * ny_face_rows(); }
  int nx_nodes() const { return periodic() ? nx : nx + 1; }
  int ny_nodes() const { return dim == 1 ? 1 : (periodic() ? ny : ny + 1); }
  int num_nodes() const { return nx_nodes() * ny_nodes(); }

  int cell(int i, int j) const { return j * nx + i; }
  std::array<int, 2> cell_ij(int c) const { return {c % nx, c / nx}; }
  int x_face(int i, int j) const { return j * nx_faces_per_row() + i; }
  int y_face(int i, int j) const { return j * nx + i; }
  int node(int i, int j) const { return j * nx_nodes() + i; }
  std::array<int, 2> node_ij(int n) const { return {n % nx_nodes(), n / nx_nodes()}; }

  double length_x() const { return nx * dx; }
  double length_y() const { return dim == 1 ? 0.0 : ny * dy; }
  double cell_volume() const { return dim == 1 ? dx : dx * dy; }
  double cell_center_x(int i) const { return x0 + (i + 0.5) * dx; }
  double cell_center_y(int j) const { return y0 + (j + 0.5) * dy; }
  double node_x(int i) const { return x0 + i * dx; }
  double node_y(int j) const { return y0 + j * dy; }

  /// Nodes surrounded by four faces, where a dual loop exists.
  bool is_interior_node(int i, int j) const;

  bool operator==(const StaggeredGrid&) const = default;
};

/// Validates and returns a grid; throws ConfigError on bad input.
StaggeredGrid make_grid(int dim, int nx, int ny, double x_lo, double x_hi, double y_lo,
                        double y_hi, ConcentrationBc cbc, DisplacementBc dbc);

struct CellField {
  StaggeredGrid grid;
  Eigen::VectorXd values;

  CellField() = default;
  explicit CellField(const StaggeredGrid& g, double fill = 0.0)
      : grid(g), values(Eigen::VectorXd::Constant(g.num_cells(), fill)) {}
};

struct FaceField {
  StaggeredGrid grid;
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  FaceField() = default;
  explicit FaceField(const StaggeredGrid& g, double fill_x = 0.0, double fill_y = 0.0)
      : grid(g),
        x(Eigen::VectorXd::Constant(g.num_x_faces(), fill_x)),
        y(Eigen::VectorXd::Constant(g.num_y_faces(), fill_y)) {}

  FaceField& operator+=(const FaceField& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  FaceField& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  double max_abs() const;
};

struct NodeField {
  StaggeredGrid grid;
  Eigen::VectorXd values;

  NodeField() = default;
  explicit NodeField(const StaggeredGrid& g, double fill = 0.0)
      : grid(g), values(Eigen::VectorXd::Constant(g.num_nodes(), fill)) {}
};

/// Throws ConfigError when array lengths disagree with the grid layout.
void check_shape(const CellField& f);
void check_shape(const FaceField& f);
void check_shape(const NodeField& f);

/// One face seen from the cells it separates. lo/hi are -1 on a domain
/// boundary of a non-periodic layout.
struct FaceRef {
  int component;  // 0: x-face, 1: y-face
  int index;      // into FaceField::x or ::y
  int lo;
  int hi;
  double h;       // distance between the adjacent cell centers
  int i, j;       // face indices in its own layout
};

/// Calls fn(FaceRef) for every x-face then every y-face.
template <typename Fn>
void for_each_face(const StaggeredGrid& g, Fn&& fn) {
  const bool per = g.periodic();
  const int nxf = g.nx_faces_per_row();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < nxf; ++i) {
      int lo = i - 1;
      int hi = i;
      if (per) {
        lo = (i + g.nx - 1) % g.nx;
      } else if (i == g.nx) {
        hi = -1;
      }
      fn(FaceRef{0, g.x_face(i, j), lo < 0 ? -1 : g.cell(lo, j), hi < 0 ? -1 : g.cell(hi, j),
                 g.dx, i, j});
    }
  }
  const int nyr = g.ny_face_rows();
  for (int j = 0; j < nyr; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int lo = j - 1;
      int hi = j;
      if (per) {
        lo = (j + g.ny - 1) % g.ny;
      } else if (j == g.ny) {
        hi = -1;
      }
      fn(FaceRef{1, g.y_face(i, j), lo < 0 ? -1 : g.cell(i, lo), hi < 0 ? -1 : g.cell(i, hi),
                 g.dy, i, j});
    }
  }
}

/// Boundary faces of a non-periodic layout, with outward normal sign.
struct BoundaryFace {
  int component;
  int index;
  int normal;  // +1 right/top, -1 left/bottom
  double x, y; // face center
};
std::vector<BoundaryFace> boundary_faces(const StaggeredGrid& g);

/// The four faces around an interior node: x-faces below/above, y-faces
/// left/right. The loop integral of f is (f.x[xb] - f.x[xt])/dy + (f.y[yr] - f.y[yl])/dx.
struct NodeLoop {
  int node;
  int xb, xt, yl, yr;
};
/// Loops of all interior nodes in row-major node order (2D only).
std::vector<NodeLoop> node_loops(const StaggeredGrid& g);

/// Per-node samples of a face field: average of the two faces meeting the
/// node along each component, one-sided on the boundary. Returns (x, y)
/// arrays of length num_nodes(). In 1D nodes coincide with x-faces.
std::array<Eigen::VectorXd, 2> interpolate_face_to_node(const FaceField& f);

/// Face-to-cell-center averages of each component.
std::array<Eigen::VectorXd, 2> interpolate_face_to_cell(const FaceField& f);

}  // namespace manp

#endif  // MANP_GRID_HPP
