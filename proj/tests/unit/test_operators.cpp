#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "manp/errors.hpp"

using namespace manp;

namespace {

std::vector<double> log_sweep() {
  std::vector<double> xs;
  for (int k = 0; k <= 400; ++k) {
    const double x = std::pow(10.0, -8.0 + k * (std::log10(50.0) + 8.0) / 400.0);
    xs.push_back(x);
    xs.push_back(-x);
  }
  return xs;
}

// Circulation of f/eps around node (i, j) divided by the dual area, read
// straight off the index layout.
double curl_oracle(const FaceField& f, const PermittivityField& e, int i, int j) {
  const StaggeredGrid& g = f.grid;
  auto wrap = [](int k, int n) { return (k + n) % n; };
  const bool per = g.periodic();
  const int il = per ? wrap(i - 1, g.nx) : i - 1;
  const int jb = per ? wrap(j - 1, g.ny) : j - 1;
  const int ir = per ? wrap(i, g.nx) : i;
  const int jt = per ? wrap(j, g.ny) : j;
  const int xb = g.x_face(ir, jb), xt = g.x_face(ir, jt);
  const int yl = g.y_face(il, jt), yr = g.y_face(ir, jt);
  const double bottom = f.x[xb] / e.face_values.x[xb] * g.dx;
  const double right = f.y[yr] / e.face_values.y[yr] * g.dy;
  const double top = f.x[xt] / e.face_values.x[xt] * g.dx;
  const double left = f.y[yl] / e.face_values.y[yl] * g.dy;
  return (bottom + right - top - left) / (g.dx * g.dy);
}

}  // namespace

TEST_CASE("bernoulli values") {
  CHECK(bernoulli(0.0) == 1.0);
  CHECK(bernoulli(1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-15));
  CHECK(bernoulli(1.0) == doctest::Approx(0.58197671).epsilon(1e-8));
  CHECK(bernoulli(2.0) - bernoulli(-2.0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(bernoulli(800.0) == doctest::Approx(0.0));
  CHECK(bernoulli(-800.0) == doctest::Approx(800.0));
}

TEST_CASE("bernoulli identity and monotonicity over a log sweep") {
  double worst = 0.0;
  for (double x : log_sweep()) worst = std::max(worst, std::abs(bernoulli(x) - bernoulli(-x) + x));
  CHECK(worst <= 1e-12);

  std::vector<double> xs = log_sweep();
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    CHECK(bernoulli(xs[k]) > 0.0);
    CHECK(bernoulli(xs[k]) >= bernoulli(xs[k + 1]));
  }
}

TEST_CASE("bernoulli branches meet at the seam") {
  for (double s : {kBernoulliSeam, -kBernoulliSeam}) {
    const double closed = s / std::expm1(s);
    const double below = std::nextafter(s, 0.0);
    CHECK(std::abs(bernoulli(below) - closed) <= 1e-14);
    // long double reference for the series side
    const long double xl = below;
    const long double ref = xl / std::expm1(xl);
    CHECK(std::abs(static_cast<long double>(bernoulli(below)) - ref) <= 1e-15L);
  }
}

TEST_CASE("sg flux examples") {
  CHECK(sg_flux(1.0, 1.0, 1, 0.0, 0.5) == 0.0);
  CHECK(std::abs(sg_flux(1.0, std::exp(0.5), 1, 1.0, 0.5)) <= 1e-15);
  CHECK(sg_flux(2.0, 0.0, 0, 0.7, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("sg flux relabeling antisymmetry") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5), pos(0.01, 3);
  for (int k = 0; k < 1000; ++k) {
    const double a = pos(rng), b = pos(rng), d = u(rng), h = pos(rng);
    const int q = k % 2 ? 1 : -1;
    CHECK(sg_flux(a, b, q, d, h) == doctest::Approx(-sg_flux(b, a, q, -d, h)).epsilon(1e-13));
  }
}

TEST_CASE("permittivity") {
  const StaggeredGrid g = testutil::square(3, false);
  CellField e(g, 1.0);
  e.values[g.cell(1, 0)] = 3.0;
  const auto p = make_permittivity(e);
  CHECK(p.face_values.x[g.x_face(1, 0)] == doctest::Approx(1.5));
  CHECK(p.face_values.x[g.x_face(0, 0)] == 1.0);
  CHECK(p.face_values.y[g.y_face(1, 0)] == 3.0);
  e.values[0] = 0.0;
  CHECK_THROWS_AS(make_permittivity(e), ConfigError);
}

TEST_CASE("equilibrium pair gives zero flux") {
  std::mt19937_64 rng(11);
  for (bool per : {false, true}) {
    const StaggeredGrid g = testutil::square(4, per);
    const auto eps = testutil::random_eps(g, rng);
    CellField phi(g);
    phi.values = testutil::uniform(rng, g.num_cells(), -1, 1);
    FaceField d = potential_gradient_to_faces(phi, eps);
    d *= -1.0;
    for (int q : {1, -1}) {
      CellField c(g);
      c.values = (-q * phi.values.array()).exp();
      CHECK(flux_field(c, q, d, eps).max_abs() <= 1e-13);
    }
  }
}

TEST_CASE("uniform state carries no flux; no-flux ends vanish") {
  const StaggeredGrid g = testutil::square(5);
  const auto eps = uniform_permittivity(g, 1.0);
  CHECK(flux_field(CellField(g, 2.0), 1, FaceField(g), eps).max_abs() == 0.0);

  std::mt19937_64 rng(5);
  const StaggeredGrid l = testutil::line(8);
  CellField c(l);
  c.values = testutil::uniform(rng, l.num_cells(), 0.1, 2);
  FaceField d(l);
  d.x = testutil::uniform(rng, d.x.size(), -3, 3);
  const FaceField j = flux_field(c, -1, d, uniform_permittivity(l, 0.0625));
  CHECK(j.x[0] == 0.0);
  CHECK(j.x[8] == 0.0);
  CHECK(j.x.segment(1, 7).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("dirichlet faces read ghosts") {
  const StaggeredGrid g = make_grid(2, 3, 3, -1, 1, -1, 1, ConcentrationBc::Dirichlet,
                                    DisplacementBc::Neumann);
  const auto eps = uniform_permittivity(g, 1.0);
  GhostCells gh;
  gh.left = gh.right = gh.bottom = gh.top = Eigen::VectorXd::Constant(3, 1.0);
  CHECK(flux_field(CellField(g, 1.0), 1, FaceField(g), eps, &gh).max_abs() == 0.0);
  gh.left.setConstant(2.0);
  const FaceField j = flux_field(CellField(g, 1.0), 1, FaceField(g), eps, &gh);
  // diffusion from the ghost into cell 0: -(1 - 2)/dx
  CHECK(j.x[g.x_face(0, 1)] == doctest::Approx(1.0 / g.dx));
}

TEST_CASE("divergence") {
  const StaggeredGrid g = testutil::square(6, false);
  CHECK(divergence(FaceField(g, 3.0, -2.0)).values.cwiseAbs().maxCoeff() == 0.0);
  FaceField f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) f.x[g.x_face(i, j)] = 2.5 * g.node_x(i);
  const CellField d = divergence(f);
  for (int c = 0; c < g.num_cells(); ++c) CHECK(d.values[c] == doctest::Approx(2.5));
}

TEST_CASE("curl of a y-ramp") {
  const StaggeredGrid g = testutil::square(6, false);
  FaceField f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) f.x[g.x_face(i, j)] = g.cell_center_y(j);
  const NodeField c = discrete_curl(f, uniform_permittivity(g, 1.0));
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) CHECK(c.values[g.node(i, j)] == doctest::Approx(-1.0));
  CHECK(c.values[g.node(0, 0)] == 0.0);
  CHECK_THROWS_AS(discrete_curl(FaceField(testutil::line(4)), uniform_permittivity(testutil::line(4), 1.0)),
                  ConfigError);
}

TEST_CASE("curl matches a brute-force loop sum") {
  std::mt19937_64 rng(17);
  for (bool per : {false, true}) {
    const StaggeredGrid g = make_grid(2, 7, 5, 0, 1.4, 0, 2,
                                      per ? ConcentrationBc::Periodic : ConcentrationBc::NoFlux,
                                      per ? DisplacementBc::Periodic : DisplacementBc::Neumann);
    const auto eps = testutil::random_eps(g, rng);
    const FaceField f = testutil::random_faces(g, rng);
    const NodeField c = discrete_curl(f, eps);
    for (int j = 0; j < g.ny_nodes(); ++j) {
      for (int i = 0; i < g.nx_nodes(); ++i) {
        const bool interior = per || (i > 0 && i < g.nx && j > 0 && j < g.ny);
        const double want = interior ? curl_oracle(f, eps, i, j) : 0.0;
        CHECK(c.values[g.node(i, j)] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gradient fields are curl-free") {
  std::mt19937_64 rng(23);
  for (bool per : {false, true}) {
    const StaggeredGrid g = testutil::square(12, per);
    const auto eps = testutil::random_eps(g, rng);
    CellField phi(g);
    phi.values = testutil::uniform(rng, g.num_cells(), -1, 1);
    const NodeField c = discrete_curl(potential_gradient_to_faces(phi, eps), eps);
    CHECK(c.values.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("potential gradient to faces") {
  const StaggeredGrid g = testutil::square(5, false);
  const auto eps = uniform_permittivity(g, 1.0);
  CHECK(potential_gradient_to_faces(CellField(g, 4.0), eps).max_abs() == 0.0);
  CellField phi(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) phi.values[g.cell(i, j)] = 1.7 * g.cell_center_x(i);
  // outward normal derivative of phi on every boundary face
  const auto bf = boundary_faces(g);
  Eigen::VectorXd dn(bf.size());
  for (std::size_t k = 0; k < bf.size(); ++k) dn[k] = bf[k].component == 0 ? 1.7 * bf[k].normal : 0.0;
  const FaceField d = potential_gradient_to_faces(phi, eps, &dn);
  for (Eigen::Index k = 0; k < d.x.size(); ++k) CHECK(d.x[k] == doctest::Approx(1.7));
  CHECK(d.y.cwiseAbs().maxCoeff() <= 1e-14);
}
