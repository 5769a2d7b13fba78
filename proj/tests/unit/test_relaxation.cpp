#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "manp/errors.hpp"
#include "manp/relaxation.hpp"

using namespace manp;

namespace {

// One sweep at a time, so the objective can be watched between sweeps.
FaceField one_sweep(const FaceField& d, const PermittivityField& eps, bool local) {
  RelaxOptions o;
  o.max_sweeps = 1;
  o.stop_tol = 0.0;
  try {
    return local ? curl_free_relax_local(d, eps, o).d : curl_free_relax_vectorized(d, eps, o).d;
  } catch (const MaxSweepsExceeded& e) {
    return e.result.d;
  }
}

RelaxOptions tight() {
  RelaxOptions o;
  o.stop_tol = 0.0;
  o.curl_tol = 1e-10;
  o.max_sweeps = 200000;
  return o;
}

}  // namespace

TEST_CASE("single loop by hand") {
  const StaggeredGrid g = make_grid(2, 2, 2, 0, 2, 0, 2, ConcentrationBc::NoFlux,
                                    DisplacementBc::Neumann);
  const auto eps = uniform_permittivity(g, 1.0);
  const auto loops = node_loops(g);
  REQUIRE(loops.size() == 1u);
  FaceField d(g);
  d.x[loops[0].xb] = 1.0;
  const FaceField out = one_sweep(d, eps, true);
  CHECK(out.x[loops[0].xb] == doctest::Approx(0.75));
  CHECK(out.x[loops[0].xt] == doctest::Approx(0.25));
  CHECK(out.y[loops[0].yl] == doctest::Approx(0.25));
  CHECK(out.y[loops[0].yr] == doctest::Approx(-0.25));
  CHECK(std::abs(discrete_curl(out, eps).values[loops[0].node]) <= 1e-15);
}

TEST_CASE("curl-free input is a fixed point") {
  std::mt19937_64 rng(2);
  const StaggeredGrid g = testutil::square(8, false);
  const auto eps = testutil::random_eps(g, rng);
  CellField phi(g);
  phi.values = testutil::uniform(rng, g.num_cells(), -1, 1);
  const FaceField d = potential_gradient_to_faces(phi, eps);
  for (bool local : {true, false}) {
    const RelaxResult r = local ? curl_free_relax_local(d, eps) : curl_free_relax_vectorized(d, eps);
    CHECK(r.sweeps == 1);
    CHECK((r.d.x - d.x).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((r.d.y - d.y).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("zero damping changes nothing") {
  std::mt19937_64 rng(3);
  const StaggeredGrid g = testutil::square(6, false);
  const auto eps = uniform_permittivity(g, 1.0);
  const FaceField d = testutil::random_faces(g, rng);
  RelaxOptions o;
  o.damping = 0.0;
  const RelaxResult r = curl_free_relax_vectorized(d, eps, o);
  CHECK(r.d.x == d.x);
  CHECK(r.d.y == d.y);
  o.damping = 1.5;
  CHECK_THROWS_AS(curl_free_relax_vectorized(d, eps, o), ConfigError);
  CHECK_THROWS_AS(curl_free_relax_local(FaceField(testutil::line(4)),
                                        uniform_permittivity(testutil::line(4), 1.0)),
                  ConfigError);
}

TEST_CASE("random fields: curl, divergence, monotone objective, agreement") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const StaggeredGrid g = testutil::square(16, trial % 2 == 0);
    const auto eps = testutil::random_eps(g, rng);
    const FaceField d = testutil::random_faces(g, rng);
    const Eigen::VectorXd div0 = divergence(d).values;

    for (bool local : {true, false}) {
      FaceField f = d;
      double obj = relaxation_objective(f, eps);
      for (int s = 0; s < 20; ++s) {
        f = one_sweep(f, eps, local);
        const double next = relaxation_objective(f, eps);
        CHECK(next <= obj * (1 + 1e-14));
        obj = next;
      }
    }

    const RelaxResult a = curl_free_relax_local(d, eps, tight());
    const RelaxResult b = curl_free_relax_vectorized(d, eps, tight());
    CHECK(discrete_curl(a.d, eps).values.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(discrete_curl(b.d, eps).values.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((divergence(a.d).values - div0).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((divergence(b.d).values - div0).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.d.x - b.d.x).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((a.d.y - b.d.y).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("sweep cap raises with the partial result") {
  std::mt19937_64 rng(9);
  const StaggeredGrid g = testutil::square(12, false);
  const FaceField d = testutil::random_faces(g, rng);
  RelaxOptions o;
  o.max_sweeps = 3;
  o.stop_tol = 0.0;
  try {
    curl_free_relax_local(d, uniform_permittivity(g, 1.0), o);
    FAIL("expected MaxSweepsExceeded");
  } catch (const MaxSweepsExceeded& e) {
    CHECK(e.result.sweeps == 3);
    CHECK(e.result.d.x.size() == d.x.size());
  }
}
