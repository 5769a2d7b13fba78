#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "manp/errors.hpp"
#include "manp/poisson.hpp"
#include "manp/stepper.hpp"

using namespace manp;

TEST_CASE("zero source gives zero potential") {
  const StaggeredGrid g = testutil::square(8);
  const auto [phi, rep] = solve_poisson(CellField(g), uniform_permittivity(g, 1.0));
  CHECK(phi.values.isZero(0));
  CHECK(rep.iterations == 0);
}

TEST_CASE("1D periodic sine against a dense solve") {
  const StaggeredGrid g = testutil::line(64, true);
  CellField rho(g);
  for (int i = 0; i < g.nx; ++i) rho.values[i] = std::sin(M_PI * g.cell_center_x(i));
  rho.values.array() -= rho.values.mean();
  const auto [phi, rep] = solve_poisson(rho, uniform_permittivity(g, 1.0));

  // Dense oracle: periodic second difference bordered with a mean constraint.
  const int n = g.nx;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  const double w = 1.0 / (g.dx * g.dx);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 2 * w;
    a(i, (i + 1) % n) -= w;
    a(i, (i + n - 1) % n) -= w;
    a(i, n) = 1.0;
    a(n, i) = 1.0;
    b[i] = rho.values[i];
  }
  const Eigen::VectorXd want = a.partialPivLu().solve(b).head(n);
  CHECK((phi.values - want).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(rep.residual_inf <= 1e-10);
}

TEST_CASE("residual contract and Gauss consistency on a random periodic problem") {
  std::mt19937_64 rng(7);
  const StaggeredGrid g = testutil::square(16);
  const auto eps = testutil::random_eps(g, rng);
  CellField rho(g);
  rho.values = testutil::uniform(rng, g.num_cells(), -1, 1);
  rho.values.array() -= rho.values.mean();
  const auto [phi, rep] = solve_poisson(rho, eps);
  const CellField r = poisson_operator(phi, eps);
  CHECK((r.values - rho.values).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(std::abs(phi.values.mean()) <= 1e-14);

  // D = -pg2f(phi) satisfies div D = rho
  FaceField d = potential_gradient_to_faces(phi, eps);
  d *= -1.0;
  CHECK((divergence(d).values - rho.values).lpNorm<Eigen::Infinity>() <= 1e-10);
  // and the verbatim no-minus field gives -rho
  CHECK((divergence(potential_gradient_to_faces(phi, eps)).values + rho.values)
            .lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("Neumann problem recovers a quadratic up to O(dx^2)") {
  double prev = 0.0;
  for (int n : {16, 32}) {
    const StaggeredGrid g = testutil::square(n, false);
    const auto eps = uniform_permittivity(g, 1.0);
    CellField rho(g, -2.0);  // -lap(|x|^2 / 2)
    const auto bf = boundary_faces(g);
    Eigen::VectorXd dn(bf.size());
    dn.setOnes();  // d/dn of |x|^2/2 on the square's sides
    const auto [phi, rep] = solve_poisson(rho, eps, &dn);
    Eigen::VectorXd exact(g.num_cells());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.cell_center_x(i), y = g.cell_center_y(j);
        exact[g.cell(i, j)] = 0.5 * (x * x + y * y);
      }
    exact.array() -= exact.mean();
    const double err = (phi.values - exact).lpNorm<Eigen::Infinity>();
    CHECK(err <= 2.0 * g.dx * g.dx);
    if (prev > 0.0) CHECK(err < 0.3 * prev);
    prev = err;
  }
}

TEST_CASE("incompatible periodic source is rejected") {
  const StaggeredGrid g = testutil::square(6);
  CHECK_THROWS_AS(solve_poisson(CellField(g, 1e-3), uniform_permittivity(g, 1.0)),
                  IncompatibleSource);
}

TEST_CASE("iteration cap raises NonConvergence with a report") {
  std::mt19937_64 rng(1);
  const StaggeredGrid g = testutil::square(16);
  CellField rho(g);
  rho.values = testutil::uniform(rng, g.num_cells(), -1, 1);
  rho.values.array() -= rho.values.mean();
  PoissonOptions opt;
  opt.max_iter = 2;
  try {
    solve_poisson(rho, uniform_permittivity(g, 1.0), nullptr, opt);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.report.iterations == 2);
    CHECK(e.report.residual_inf > opt.tol);
  }
}

TEST_CASE("Robin 1D Poisson") {
  const StaggeredGrid g = testutil::line(40);
  const RobinBc bc{1.0, -1.0, 1.0};
  std::mt19937_64 rng(4);
  CellField rho(g);
  rho.values = testutil::uniform(rng, g.num_cells(), -2, 2);
  const double e2 = 0.0625;
  const Potential1d p = solve_robin_poisson_1d(rho, e2, bc);
  CHECK(p.dphidx.size() == 41);
  // discrete Gauss law: -e2 (s_{i+1} - s_i)/dx = rho_i
  for (int i = 0; i < g.nx; ++i) {
    CHECK(-e2 * (p.dphidx[i + 1] - p.dphidx[i]) / g.dx == doctest::Approx(rho.values[i]).epsilon(1e-9));
  }
  CHECK(std::abs(robin_defect(p.dphidx, g.dx, bc)) <= 1e-12);
  // the reconstruction reproduces the solved potential
  const CellField back = reconstruct_potential_1d(g, p.dphidx, bc);
  CHECK((back.values - p.phi.values).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("Robin 1D symmetric data gives a flat potential") {
  const StaggeredGrid g = testutil::line(10);
  const Potential1d p = solve_robin_poisson_1d(CellField(g), 0.0625, RobinBc{1.0, 0.5, 0.5});
  CHECK(p.dphidx.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((p.phi.values.array() - 0.5).abs().maxCoeff() <= 1e-14);
  // neutral data with the default constants: linear potential, constant slope
  const Potential1d q = solve_robin_poisson_1d(CellField(g), 0.0625, RobinBc{});
  CHECK((q.dphidx.array() - q.dphidx[0]).abs().maxCoeff() <= 1e-13);
  CHECK(q.dphidx[0] == doctest::Approx(0.5));
}

TEST_CASE("robin defect") {
  Eigen::VectorXd s = Eigen::VectorXd::Constant(5, 0.5);
  CHECK(robin_defect(s, 0.5, RobinBc{}) == doctest::Approx(0.0));
  s.array() += 1.0;
  CHECK(robin_defect(s, 0.5, RobinBc{}) == doctest::Approx(2.0 + 2.0));
}
