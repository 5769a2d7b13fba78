#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "manp/diagnostics.hpp"
#include "manp/errors.hpp"
#include "manp/scenarios.hpp"

using namespace manp;
using ES = ExactSolution;

TEST_CASE("defaults per scenario") {
  const ScenarioConfig e = default_config("electro2d");
  CHECK(e.nx == 50);
  CHECK(e.ny == 50);
  CHECK(e.dt == 5e-4);
  CHECK(e.T == 0.5);
  CHECK(e.num_steps() == 1000);
  CHECK(e.theta == "network");

  const ScenarioConfig a = default_config("analytic2d");
  CHECK(a.dt == 0.005);
  CHECK(a.num_steps() == 100);
  CHECK(a.weights.variant == LossVariant::Curl);

  const ScenarioConfig r = default_config("robin1d");
  CHECK(r.nx == 100);
  CHECK(r.dt == 0.01);
  CHECK(r.num_steps() == 500);
  CHECK(r.eps0 == 0.25);
  CHECK(r.robin.eta == 1.0);
  CHECK(r.robin.phi_left == -1.0);
  CHECK(r.robin.phi_right == 1.0);

  CHECK_THROWS_AS(default_config("electro3d"), ConfigError);
  for (const char* s : {"electro2d", "analytic2d", "robin1d"}) CHECK_NOTHROW(validate(default_config(s)));
}

TEST_CASE("settings and config files") {
  ScenarioConfig c = default_config("electro2d");
  apply_setting(c, "theta", "lagged");
  apply_setting(c, "nx", "12");
  apply_setting(c, "snapshot_steps", "1,5");
  apply_setting(c, "loss_variant", "curl");
  CHECK(c.theta == "lagged");
  CHECK(c.nx == 12);
  CHECK(c.snapshot_steps == std::vector<long>{1, 5});
  CHECK(c.weights.variant == LossVariant::Curl);
  CHECK_THROWS_AS(apply_setting(c, "bogus", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "nx", "twelve"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "theta", "oracle"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "eta", "1"), ConfigError);  // robin1d only
  CHECK_THROWS_AS(apply_setting(c, "relaxation", "gs"), ConfigError);

  std::istringstream in("# comment\nscenario = robin1d\nnx = 40  # trailing\n\neta=0.5\n");
  const ScenarioConfig p = parse_config(in);
  CHECK(p.scenario == "robin1d");
  CHECK(p.nx == 40);
  CHECK(p.robin.eta == 0.5);

  std::istringstream clash("scenario = robin1d\n");
  CHECK_THROWS_AS(parse_config(clash, "electro2d"), ConfigError);
  std::istringstream none("nx = 4\n");
  CHECK_THROWS_AS(parse_config(none), ConfigError);
  std::istringstream junk("scenario = electro2d\nnx\n");
  CHECK_THROWS_AS(parse_config(junk), ConfigError);

  // printed config parses back to the same items
  std::ostringstream out;
  print_config(p, out);
  std::istringstream back(out.str());
  CHECK(config_items(parse_config(back)) == config_items(p));
}

TEST_CASE("validation") {
  auto bad = [](const char* sc, const char* k, const char* v) {
    ScenarioConfig c = default_config(sc);
    apply_setting(c, k, v);
    return c;
  };
  CHECK_THROWS_AS(validate(bad("electro2d", "dt", "0")), ConfigError);
  CHECK_THROWS_AS(validate(bad("electro2d", "nx", "1")), ConfigError);
  CHECK_THROWS_AS(validate(bad("electro2d", "damping", "1.5")), ConfigError);
  CHECK_THROWS_AS(validate(bad("electro2d", "theta", "implicit-lagged")), ConfigError);
  CHECK_THROWS_AS(validate(bad("analytic2d", "theta", "analytic")), ConfigError);
  CHECK_THROWS_AS(validate(bad("robin1d", "eps0", "-1")), ConfigError);
  CHECK_THROWS_AS(validate(bad("robin1d", "hidden", "0")), ConfigError);
  CHECK_NOTHROW(validate(bad("robin1d", "theta", "implicit-lagged")));
}

TEST_CASE("manufactured solution values") {
  CHECK(ES::phi(0, 0, 0.3) == 0.0);
  CHECK(ES::phi(1, 1, 0) == doctest::Approx(1.0));
  CHECK(ES::concentration(0, 1, 1, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK(ES::concentration(1, 1, 1, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(ES::source(0, 0, 0, 0) == 0.0);
  const auto h = ES::h(1, 0, 0);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == -1.0);

  for (double x : {-0.7, 0.2, 0.9}) {
    for (double y : {-0.4, 0.6}) {
      for (double t : {0.0, 0.37}) {
        CHECK(ES::concentration(0, x, y, t) * ES::concentration(1, x, y, t) ==
              doctest::Approx(1.0).epsilon(1e-15));
        // source equals ∂c/∂t (the exact flux vanishes)
        const double k = 1e-6;
        for (int l : {0, 1}) {
          const double fd =
              (ES::concentration(l, x, y, t + k) - ES::concentration(l, x, y, t - k)) / (2 * k);
          CHECK(ES::source(l, x, y, t) == doctest::Approx(fd).epsilon(1e-8));
        }
        // D = -grad φ
        const auto d = ES::displacement(x, y, t);
        CHECK(d[0] == doctest::Approx(-(ES::phi(x + k, y, t) - ES::phi(x - k, y, t)) / (2 * k)).epsilon(1e-8));
        CHECK(d[1] == doctest::Approx(-(ES::phi(x, y + k, t) - ES::phi(x, y - k, t)) / (2 * k)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("manufactured sampling on the grid") {
  const StaggeredGrid g = testutil::square(8, false);
  const Eigen::VectorXd n = ES::neumann(g, 0.0);
  // outward dφ/dn = x·n = 1 on every side of [-1,1]²
  CHECK((n.array() - 1.0).abs().maxCoeff() <= 1e-14);
  const FaceField d = ES::sample_displacement(g, 0.0);
  CHECK(d.x[g.x_face(0, 3)] == doctest::Approx(1.0));
  CHECK(d.x[g.x_face(8, 3)] == doctest::Approx(-1.0));
  const CellField c = ES::sample_concentration(g, 1, 0.0);
  CHECK(c.values[g.cell(0, 0)] == doctest::Approx(std::exp(ES::phi(g.cell_center_x(0), g.cell_center_y(0), 0))));
}

TEST_CASE("disk charges") {
  CHECK(disk_charge(0.5, 0.0) == 1.0);
  CHECK(disk_charge(-0.5, 0.0) == -1.0);
  CHECK(disk_charge(0.0, 0.9) == 0.0);
  CHECK(disk_charge(0.79, 0.0) == 1.0);
  CHECK(disk_charge(0.81, 0.0) == 0.0);

  const SimulationState s = build_electro2d(default_config("electro2d"));
  CHECK(std::abs(s.fixed_charge.values.sum()) <= 1e-12);  // symmetric disks
  for (const Species& sp : s.species) CHECK(total_mass(sp.c) == doctest::Approx(4.0));
  CHECK(gauss_residual(s) <= 1e-9);
  CHECK(curl_residual(s) <= 1e-9);
}

TEST_CASE("scenario assembly") {
  ScenarioConfig cfg = default_config("analytic2d");
  cfg.nx = cfg.ny = 10;
  Scenario a = build_scenario(cfg);
  CHECK(a.has_external);
  CHECK(a.strategy.network != nullptr);
  CHECK(gauss_residual(a.state) <= 1e-12);

  cfg.theta = "zero";
  CHECK(build_scenario(cfg).strategy.network == nullptr);

  ScenarioConfig r = default_config("robin1d");
  r.theta = "lagged";
  const Scenario rs = build_scenario(r);
  CHECK_FALSE(rs.has_external);
  CHECK(rs.state.grid().dim == 1);
  CHECK(std::abs(robin_defect(slopes_1d(rs.state), rs.state.grid().dx, r.robin)) <= 1e-12);
}

TEST_CASE("robin1d initial field") {
  ScenarioConfig cfg = default_config("robin1d");
  const SimulationState s = build_robin1d(cfg);
  // neutral start: uniform slope (φR - φL) / (2 + 2η)
  const double want = -cfg.eps0 * cfg.eps0 * 2.0 / (2.0 + 2.0 * cfg.robin.eta);
  CHECK((s.displacement.x.array() - want).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("Poisson-Boltzmann oracle") {
  ScenarioConfig cfg = default_config("robin1d");
  cfg.nx = 60;
  cfg.robin = RobinBc{1.0, 0.0, 0.0};
  const SteadyState1d flat = pb_steady_state_1d(cfg);
  CHECK(flat.phi.values.cwiseAbs().maxCoeff() <= 1e-12);

  for (double eta : {0.0, 1.0}) {
    cfg.robin = RobinBc{eta, -1.0, 1.0};
    const SimulationState init = build_robin1d(cfg);
    const SteadyState1d pb = pb_steady_state_1d(cfg, &init);
    CHECK(pb.residual <= 1e-10);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(std::abs(total_mass(pb.concentrations[l]) - total_mass(init.species[l].c)) <= 1e-12);
      CHECK(pb.concentrations[l].values.minCoeff() > 0.0);
    }
    // Boltzmann: c¹c² is uniform
    const Eigen::ArrayXd prod =
        pb.concentrations[0].values.array() * pb.concentrations[1].values.array();
    CHECK((prod - prod[0]).abs().maxCoeff() <= 1e-10 * prod[0]);
    // odd symmetry for antisymmetric data
    const int n = cfg.nx;
    for (int i = 0; i < n; ++i) CHECK(std::abs(pb.phi.values[i] + pb.phi.values[n - 1 - i]) <= 1e-9);
    // closure consistent with the scheme's Robin defect
    CHECK(std::abs(robin_defect(pb.dphidx, init.grid().dx, cfg.robin)) <= 1e-10);
  }
  ScenarioConfig e = default_config("electro2d");
  CHECK_THROWS_AS(pb_steady_state_1d(e), ConfigError);
}
