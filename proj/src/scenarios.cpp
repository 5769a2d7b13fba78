#include "manp/scenarios.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "manp/poisson.hpp"

namespace manp {

long ScenarioConfig::num_steps() const {
  if (steps > 0) return steps;
  return std::lround(T / dt);
}

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  c.train.stall_window = 20;
  c.train.stall_rtol = 1e-3;
  if (scenario == "electro2d") {
    c.nx = c.ny = 50;
    c.dt = 5e-4;
    c.T = 0.5;
    c.train.max_iters = 20;
  } else if (scenario == "analytic2d") {
    c.nx = c.ny = 50;
    c.dt = 0.005;
    c.T = 0.5;
    c.train.max_iters = 200;
    // The energy term pulls boundary normals toward a zero-potential wall and
    // fights the Neumann data; the curl loss with a stiff penalty does not.
    c.weights.variant = LossVariant::Curl;
    c.weights.lambda_bc = 100.0;
  } else if (scenario == "robin1d") {
    c.nx = 100;
    c.ny = 1;
    c.dt = 0.01;
    c.T = 5.0;
    c.train.max_iters = 5000;
    c.train.stall_window = 0;
    c.train.stall_rtol = 0.0;
  } else {
    throw ConfigError("unknown scenario '" + scenario + "'");
  }
  return c;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

std::vector<long> to_list(const std::string& key, const std::string& v) {
  std::vector<long> out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(to_long(key, tok));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool is_robin_key(const std::string& k) {
  return k == "eta" || k == "phi_left" || k == "phi_right" || k == "eps0";
}

}  // namespace

void apply_setting(ScenarioConfig& c, const std::string& key, const std::string& v) {
  if (is_robin_key(key) && c.scenario != "robin1d") {
    throw ConfigError("'" + key + "' applies to robin1d only");
  }
  if (key == "theta") {
    parse_theta_kind(v);
    c.theta = v;
  } else if (key == "nx") {
    c.nx = static_cast<int>(to_long(key, v));
  } else if (key == "ny") {
    c.ny = static_cast<int>(to_long(key, v));
  } else if (key == "dt") {
    c.dt = to_double(key, v);
  } else if (key == "T") {
    c.T = to_double(key, v);
  } else if (key == "steps") {
    c.steps = to_long(key, v);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_long(key, v));
  } else if (key == "out") {
    c.out = v;
  } else if (key == "snapshot_steps") {
    c.snapshot_steps = to_list(key, v);
  } else if (key == "loss_variant") {
    if (v == "energy") {
      c.weights.variant = LossVariant::Energy;
    } else if (v == "curl") {
      c.weights.variant = LossVariant::Curl;
    } else {
      throw ConfigError("loss_variant must be energy or curl");
    }
  } else if (key == "lambda_bc") {
    c.weights.lambda_bc = to_double(key, v);
  } else if (key == "lambda_reg") {
    c.weights.lambda_reg = to_double(key, v);
  } else if (key == "loss_tol") {
    c.train.loss_tol = to_double(key, v);
  } else if (key == "max_iters") {
    c.train.max_iters = static_cast<int>(to_long(key, v));
  } else if (key == "stall_window") {
    c.train.stall_window = static_cast<int>(to_long(key, v));
  } else if (key == "stall_rtol") {
    c.train.stall_rtol = to_double(key, v);
  } else if (key == "lr") {
    c.train.lr = to_double(key, v);
  } else if (key == "beta1") {
    c.train.beta1 = to_double(key, v);
  } else if (key == "beta2") {
    c.train.beta2 = to_double(key, v);
  } else if (key == "adam_eps") {
    c.train.adam_eps = to_double(key, v);
  } else if (key == "hidden") {
    std::vector<int> h;
    for (long x : to_list(key, v)) h.push_back(static_cast<int>(x));
    c.hidden = h;
  } else if (key == "relaxation") {
    if (v != "auto" && v != "local" && v != "vectorized") {
      throw ConfigError("relaxation must be auto, local or vectorized");
    }
    c.relaxation = v;
  } else if (key == "relax_tol") {
    c.relax_tol = to_double(key, v);
  } else if (key == "max_sweeps") {
    c.max_sweeps = static_cast<int>(to_long(key, v));
  } else if (key == "damping") {
    c.damping = to_double(key, v);
  } else if (key == "eta") {
    c.robin.eta = to_double(key, v);
  } else if (key == "phi_left") {
    c.robin.phi_left = to_double(key, v);
  } else if (key == "phi_right") {
    c.robin.phi_right = to_double(key, v);
  } else if (key == "eps0") {
    c.eps0 = to_double(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> config_items(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::string>> it{
      {"scenario", c.scenario},
      {"theta", c.theta},
      {"nx", std::to_string(c.nx)},
      {"ny", std::to_string(c.ny)},
      {"dt", fmt(c.dt)},
      {"T", fmt(c.T)},
      {"steps", std::to_string(c.steps)},
      {"seed", std::to_string(c.seed)},
      {"out", c.out},
      {"snapshot_steps", join(c.snapshot_steps)},
      {"loss_variant", c.weights.variant == LossVariant::Energy ? "energy" : "curl"},
      {"lambda_bc", fmt(c.weights.lambda_bc)},
      {"lambda_reg", fmt(c.weights.lambda_reg)},
      {"loss_tol", fmt(c.train.loss_tol)},
      {"max_iters", std::to_string(c.train.max_iters)},
      {"stall_window", std::to_string(c.train.stall_window)},
      {"stall_rtol", fmt(c.train.stall_rtol)},
      {"lr", fmt(c.train.lr)},
      {"beta1", fmt(c.train.beta1)},
      {"beta2", fmt(c.train.beta2)},
      {"adam_eps", fmt(c.train.adam_eps)},
      {"hidden", join(c.hidden)},
      {"relaxation", c.relaxation},
      {"relax_tol", fmt(c.relax_tol)},
      {"max_sweeps", std::to_string(c.max_sweeps)},
      {"damping", fmt(c.damping)},
  };
  if (c.scenario == "robin1d") {
    it.push_back({"eps0", fmt(c.eps0)});
    it.push_back({"eta", fmt(c.robin.eta)});
    it.push_back({"phi_left", fmt(c.robin.phi_left)});
    it.push_back({"phi_right", fmt(c.robin.phi_right)});
  }
  return it;
}

void print_config(const ScenarioConfig& c, std::ostream& out) {
  for (const auto& [k, v] : config_items(c)) out << k << " = " << v << '\n';
}

ScenarioConfig parse_config(std::istream& in, const std::string& scenario) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  std::string named;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
    }
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (k == "scenario") {
      named = v;
    } else {
      kv.emplace_back(k, v);
    }
  }
  if (!scenario.empty() && !named.empty() && scenario != named) {
    throw ConfigError("config file is for scenario '" + named + "', not '" + scenario + "'");
  }
  const std::string sc = scenario.empty() ? named : scenario;
  if (sc.empty()) throw ConfigError("no scenario given");
  ScenarioConfig c = default_config(sc);
  for (const auto& [k, v] : kv) apply_setting(c, k, v);
  return c;
}

ScenarioConfig parse_config_file(const std::string& path, const std::string& scenario) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  return parse_config(f, scenario);
}

void validate(const ScenarioConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (c.steps < 0) throw ConfigError("steps must be >= 0");
  if (c.steps == 0 && !(c.T >= c.dt)) throw ConfigError("T must be at least dt");
  if (c.nx < 2) throw ConfigError("nx must be >= 2");
  if (c.scenario != "robin1d" && c.ny < 2) throw ConfigError("ny must be >= 2");
  if (c.weights.lambda_bc < 0.0 || c.weights.lambda_reg < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (c.train.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(c.train.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.damping > 0.0 && c.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(c.relax_tol >= 0.0)) throw ConfigError("relax_tol must be >= 0");
  if (c.hidden.empty()) throw ConfigError("hidden must list at least one layer");
  for (int h : c.hidden) {
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  }
  if (c.scenario == "robin1d") {
    if (!(c.eps0 > 0.0)) throw ConfigError("eps0 must be positive");
    if (c.robin.eta < 0.0) throw ConfigError("eta must be >= 0");
  } else {
    const ThetaKind k = parse_theta_kind(c.theta);
    if (k == ThetaKind::ImplicitLagged || k == ThetaKind::Analytic) {
      throw ConfigError("theta '" + c.theta + "' is only defined for robin1d");
    }
  }
}

// ---- manufactured solution -----------------------------------------------

double ExactSolution::phi(double x, double y, double t) {
  return 0.5 * (x * x + y * y) * std::exp(-t);
}

double ExactSolution::concentration(int species, double x, double y, double t) {
  return std::exp(-valence(species) * phi(x, y, t));
}

std::array<double, 2> ExactSolution::displacement(double x, double y, double t) {
  const double e = std::exp(-t);
  return {-x * e, -y * e};
}

double ExactSolution::source(int species, double x, double y, double t) {
  // ∂φ/∂t = -φ
  return valence(species) * concentration(species, x, y, t) * phi(x, y, t);
}

std::array<double, 2> ExactSolution::h(double x, double y, double t) {
  const double e = std::exp(-t);
  return {(x - y) * e, (y - x) * e};
}

CellField ExactSolution::sample_concentration(const StaggeredGrid& g, int species, double t) {
  CellField c(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      c.values[g.cell(i, j)] = concentration(species, g.cell_center_x(i), g.cell_center_y(j), t);
    }
  }
  return c;
}

FaceField ExactSolution::sample_displacement(const StaggeredGrid& g, double t) {
  FaceField d(g);
  for_each_face(g, [&](const FaceRef& f) {
    if (f.component == 0) {
      d.x[f.index] = displacement(g.node_x(f.i), g.cell_center_y(f.j), t)[0];
    } else {
      d.y[f.index] = displacement(g.cell_center_x(f.i), g.node_y(f.j), t)[1];
    }
  });
  return d;
}

FaceField ExactSolution::sample_h(const StaggeredGrid& g, double t) {
  FaceField d(g);
  for_each_face(g, [&](const FaceRef& f) {
    if (f.component == 0) {
      d.x[f.index] = h(g.node_x(f.i), g.cell_center_y(f.j), t)[0];
    } else {
      d.y[f.index] = h(g.cell_center_x(f.i), g.node_y(f.j), t)[1];
    }
  });
  return d;
}

Eigen::VectorXd ExactSolution::sample_source(const StaggeredGrid& g, int species, double t) {
  Eigen::VectorXd s(g.num_cells());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      s[g.cell(i, j)] = source(species, g.cell_center_x(i), g.cell_center_y(j), t);
    }
  }
  return s;
}

GhostCells ExactSolution::ghosts(const StaggeredGrid& g, int species, double t) {
  GhostCells gh;
  gh.left.resize(g.ny);
  gh.right.resize(g.ny);
  gh.bottom.resize(g.nx);
  gh.top.resize(g.nx);
  const double xl = g.x0 - 0.5 * g.dx;
  const double xr = g.x0 + g.length_x() + 0.5 * g.dx;
  const double yb = g.y0 - 0.5 * g.dy;
  const double yt = g.y0 + g.length_y() + 0.5 * g.dy;
  for (int j = 0; j < g.ny; ++j) {
    gh.left[j] = concentration(species, xl, g.cell_center_y(j), t);
    gh.right[j] = concentration(species, xr, g.cell_center_y(j), t);
  }
  for (int i = 0; i < g.nx; ++i) {
    gh.bottom[i] = concentration(species, g.cell_center_x(i), yb, t);
    gh.top[i] = concentration(species, g.cell_center_x(i), yt, t);
  }
  return gh;
}

Eigen::VectorXd ExactSolution::neumann(const StaggeredGrid& g, double t) {
  const auto bf = boundary_faces(g);
  Eigen::VectorXd out(static_cast<Eigen::Index>(bf.size()));
  for (std::size_t k = 0; k < bf.size(); ++k) {
    const auto d = displacement(bf[k].x, bf[k].y, t);
    // ∂φ/∂n = -D·n with ε = 1
    out[static_cast<Eigen::Index>(k)] = -bf[k].normal * d[bf[k].component];
  }
  return out;
}

// ---- builders --------------------------------------------------------------

std::pair<SimulationState, ExactSolution> build_analytic2d(const ScenarioConfig& cfg) {
  if (cfg.scenario != "analytic2d") throw ConfigError("build_analytic2d needs an analytic2d config");
  validate(cfg);
  const StaggeredGrid g = make_grid(2, cfg.nx, cfg.ny, -1, 1, -1, 1, ConcentrationBc::Dirichlet,
                                    DisplacementBc::Neumann);
  SimulationState s;
  s.eps = uniform_permittivity(g, 1.0);
  for (int l = 0; l < 2; ++l) {
    s.species.push_back({ExactSolution::valence(l), ExactSolution::sample_concentration(g, l, 0.0)});
  }
  s.displacement = ExactSolution::sample_displacement(g, 0.0);
  // The manufactured pair does not satisfy Gauss's law; the mismatch is kept
  // as a background charge that the sources then update each step.
  s.fixed_charge = CellField(g);
  s.fixed_charge.values = divergence(s.displacement).values - s.charge();
  return {s, ExactSolution{}};
}

double disk_charge(double x, double y) {
  const double r2 = 0.3 * 0.3;
  if ((x - 0.5) * (x - 0.5) + y * y <= r2) return 1.0;
  if ((x + 0.5) * (x + 0.5) + y * y <= r2) return -1.0;
  return 0.0;
}

SimulationState build_electro2d(const ScenarioConfig& cfg) {
  if (cfg.scenario != "electro2d") throw ConfigError("build_electro2d needs an electro2d config");
  validate(cfg);
  const StaggeredGrid g = make_grid(2, cfg.nx, cfg.ny, -1, 1, -1, 1, ConcentrationBc::Periodic,
                                    DisplacementBc::Periodic);
  SimulationState s;
  s.eps = uniform_permittivity(g, 1.0);
  s.species.push_back({1, CellField(g, 1.0)});
  s.species.push_back({-1, CellField(g, 1.0)});
  s.fixed_charge = CellField(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      s.fixed_charge.values[g.cell(i, j)] = disk_charge(g.cell_center_x(i), g.cell_center_y(j));
    }
  }
  CellField rho(g);
  rho.values = s.charge();
  const auto [phi, rep] = solve_poisson(rho, s.eps);
  s.displacement = potential_gradient_to_faces(phi, s.eps);
  s.displacement *= -1.0;
  return s;
}

SimulationState build_robin1d(const ScenarioConfig& cfg) {
  if (cfg.scenario != "robin1d") throw ConfigError("build_robin1d needs a robin1d config");
  validate(cfg);
  const StaggeredGrid g =
      make_grid(1, cfg.nx, 1, -1, 1, 0, 0, ConcentrationBc::NoFlux, DisplacementBc::Neumann);
  SimulationState s;
  const double eps0_sq = cfg.eps0 * cfg.eps0;
  s.eps = uniform_permittivity(g, eps0_sq);
  s.species.push_back({1, CellField(g, 1.0)});
  s.species.push_back({-1, CellField(g, 1.0)});
  s.fixed_charge = CellField(g);
  CellField rho(g);
  rho.values = s.charge();
  const Potential1d p = solve_robin_poisson_1d(rho, eps0_sq, cfg.robin);
  s.displacement = FaceField(g);
  s.displacement.x = -eps0_sq * p.dphidx;
  return s;
}

StepperConfig make_stepper_config(const ScenarioConfig& cfg) {
  StepperConfig sc;
  sc.dt = cfg.dt;
  sc.horizon = cfg.steps > 0 ? cfg.steps * cfg.dt : cfg.T;
  sc.relax_kind = cfg.relaxation == "local"        ? RelaxKind::Local
                  : cfg.relaxation == "vectorized" ? RelaxKind::Vectorized
                                                   : RelaxKind::Auto;
  sc.relax.stop_tol = cfg.relax_tol;
  sc.relax.max_sweeps = cfg.max_sweeps;
  sc.relax.damping = cfg.damping;
  sc.train = cfg.train;
  sc.weights = cfg.weights;
  sc.robin = cfg.robin;
  return sc;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  Scenario sc;
  sc.config = cfg;
  sc.stepper = make_stepper_config(cfg);
  sc.strategy.kind = parse_theta_kind(cfg.theta);
  int inputs = kFeatures2d;
  if (cfg.scenario == "analytic2d") {
    sc.state = build_analytic2d(cfg).first;
    const StaggeredGrid g = sc.state.grid();
    sc.has_external = true;
    sc.external.concentration_source = [g](int l, double t) {
      return ExactSolution::sample_source(g, l, t);
    };
    sc.external.displacement_source = [g](double t) { return ExactSolution::sample_h(g, t); };
    sc.external.ghosts = [g](int l, double t) { return ExactSolution::ghosts(g, l, t); };
    sc.external.neumann = [g](double t) { return ExactSolution::neumann(g, t); };
  } else if (cfg.scenario == "electro2d") {
    sc.state = build_electro2d(cfg);
  } else {
    sc.state = build_robin1d(cfg);
    sc.stepper.relax_enabled = false;
    inputs = kFeatures1d;
  }
  if (sc.strategy.kind == ThetaKind::Network) {
    std::vector<int> layers{inputs};
    layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
    layers.push_back(1);
    sc.strategy.network = std::make_shared<ThetaNet>(layers, cfg.seed);
  }
  return sc;
}

// ---- Poisson-Boltzmann oracle ----------------------------------------------

SteadyState1d pb_steady_state_1d(const ScenarioConfig& cfg, const SimulationState* initial) {
  if (cfg.scenario != "robin1d") throw ConfigError("pb_steady_state_1d needs a robin1d config");
  SimulationState init;
  if (initial == nullptr) {
    init = build_robin1d(cfg);
    initial = &init;
  }
  const StaggeredGrid& g = initial->grid();
  const int n = g.nx;
  const double dx = g.dx;
  const double e2 = cfg.eps0 * cfg.eps0;
  const RobinBc& bc = cfg.robin;
  const int nl = static_cast<int>(initial->species.size());
  std::vector<double> mass(nl);
  std::vector<int> q(nl);
  for (int l = 0; l < nl; ++l) {
    mass[l] = initial->species[l].c.values.sum() * dx;
    q[l] = initial->species[l].q;
  }
  const Eigen::VectorXd rho_f = initial->fixed_charge.values;

  // unknowns: phi (n), s_L, s_R
  const int sl = n, sr = n + 1;
  Eigen::VectorXd u(n + 2);
  {
    CellField rho(g);
    rho.values = initial->charge();
    const Potential1d p = solve_robin_poisson_1d(rho, e2, bc);
    u.head(n) = p.phi.values;
    u[sl] = p.dphidx[0];
    u[sr] = p.dphidx[n];
  }

  auto closure = [&](const Eigen::VectorXd& phi, std::vector<Eigen::VectorXd>& c) {
    c.assign(nl, Eigen::VectorXd());
    for (int l = 0; l < nl; ++l) {
      Eigen::ArrayXd w = (-q[l] * phi.array()).exp();
      c[l] = (mass[l] / (dx * w.sum()) * w).matrix();
    }
  };
  auto slope = [&](const Eigen::VectorXd& x, int f) {
    if (f == 0) return x[sl];
    if (f == n) return x[sr];
    return (x[f] - x[f - 1]) / dx;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    std::vector<Eigen::VectorXd> c;
    closure(x.head(n), c);
    Eigen::VectorXd r(n + 2);
    for (int i = 0; i < n; ++i) {
      double rho = rho_f[i];
      for (int l = 0; l < nl; ++l) rho += q[l] * c[l][i];
      r[i] = e2 * (slope(x, i + 1) - slope(x, i)) / dx + rho;
    }
    r[n] = x[0] - (bc.eta + 0.5 * dx) * x[sl] - bc.phi_left;
    double sum = 0.0;
    for (int f = 0; f < n; ++f) sum += slope(x, f);
    r[n + 1] = dx * sum + bc.eta * (x[sl] + x[sr]) - (bc.phi_right - bc.phi_left);
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n + 2, n + 2);
    auto add_slope = [&](int row, int f, double w) {
      if (f == 0) {
        jm(row, sl) += w;
      } else if (f == n) {
        jm(row, sr) += w;
      } else {
        jm(row, f) += w / dx;
        jm(row, f - 1) -= w / dx;
      }
    };
    for (int i = 0; i < n; ++i) {
      add_slope(i, i + 1, e2 / dx);
      add_slope(i, i, -e2 / dx);
    }
    std::vector<Eigen::VectorXd> c;
    closure(x.head(n), c);
    // ∂c_i/∂φ_j = -q c_i δ_ij + q c_i c_j dx / m
    for (int l = 0; l < nl; ++l) {
      const double ql = q[l];
      for (int i = 0; i < n; ++i) {
        jm(i, i) += ql * (-ql * c[l][i]);
        for (int j = 0; j < n; ++j) jm(i, j) += ql * ql * c[l][i] * c[l][j] * dx / mass[l];
      }
    }
    jm(n, 0) = 1.0;
    jm(n, sl) = -(bc.eta + 0.5 * dx);
    for (int f = 0; f < n; ++f) add_slope(n + 1, f, dx);
    add_slope(n + 1, 0, bc.eta);
    add_slope(n + 1, n, bc.eta);
    return jm;
  };

  SteadyState1d out;
  Eigen::VectorXd r = residual(u);
  double rn = r.lpNorm<Eigen::Infinity>();
  std::ostringstream log;
  const int max_newton = 100;
  while (rn > 1e-10) {
    if (out.newton_iterations >= max_newton) {
      throw NewtonDivergence("Poisson-Boltzmann Newton did not converge:" + log.str());
    }
    const Eigen::VectorXd du = jacobian(u).partialPivLu().solve(-r);
    double lam = 1.0;
    Eigen::VectorXd trial;
    double tn = 0.0;
    for (int k = 0; k < 30; ++k) {
      trial = u + lam * du;
      tn = residual(trial).lpNorm<Eigen::Infinity>();
      if (std::isfinite(tn) && tn < rn) break;
      lam *= 0.5;
    }
    if (!(std::isfinite(tn) && tn < rn)) {
      throw NewtonDivergence("Poisson-Boltzmann line search failed:" + log.str());
    }
    u = trial;
    r = residual(u);
    rn = r.lpNorm<Eigen::Infinity>();
    ++out.newton_iterations;
    log << " [" << out.newton_iterations << ": " << rn << ", step " << lam << "]";
  }
  out.residual = rn;
  out.phi = CellField(g);
  out.phi.values = u.head(n);
  std::vector<Eigen::VectorXd> c;
  closure(u.head(n), c);
  for (int l = 0; l < nl; ++l) {
    CellField cf(g);
    cf.values = c[l];
    out.concentrations.push_back(cf);
  }
  out.dphidx = slopes_from_potential(out.phi.values, dx, u[sl], u[sr]);
  return out;
}

}  // namespace manp
