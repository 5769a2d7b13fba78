#include "manp/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace manp {

namespace fs = std::filesystem;
using nlohmann::json;

void write_snapshot(std::ostream& out, const std::string& name, double t,
                    const Eigen::VectorXd& values, int nx, int ny) {
  if (values.size() != static_cast<Eigen::Index>(nx) * ny) {
    throw ConfigError("snapshot shape mismatch for " + name);
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  out << "# field=" << name << " t=" << buf << " nx=" << nx << " ny=" << ny << '\n';
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[static_cast<Eigen::Index>(j) * nx + i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_snapshot(const std::string& path, const std::string& name, double t,
                    const Eigen::VectorXd& values, int nx, int ny) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_snapshot(f, name, t, values, nx, ny);
}

std::string resolve_output_dir(const ScenarioConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  const char* root = std::getenv("MANP_OUTPUT_ROOT");
  const std::string base = (root != nullptr && *root) ? root : "runs";
  return (fs::path(base) / (cfg.scenario + "-" + cfg.theta)).string();
}

namespace {

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

std::vector<std::string> channel_names(const ScenarioConfig& cfg) {
  std::vector<std::string> ch{"mass_1",      "mass_2",         "min_c_1",          "min_c_2",
                              "free_energy", "gauss_residual", "train_iterations", "train_loss"};
  if (cfg.scenario == "robin1d") {
    ch.insert(ch.end(), {"theta", "max_abs_dphidx", "robin_defect"});
  } else {
    ch.insert(ch.end(), {"curl_residual", "relax_sweeps"});
  }
  if (cfg.scenario == "analytic2d") ch.insert(ch.end(), {"E_c1", "E_c2", "E_D"});
  return ch;
}

std::vector<double> sample(const Scenario& sc, const StepReport* rep) {
  const SimulationState& s = sc.state;
  std::vector<double> v{total_mass(s.species[0].c),
                        total_mass(s.species[1].c),
                        min_concentration(s.species[0].c),
                        min_concentration(s.species[1].c),
                        free_energy(s),
                        gauss_residual(s),
                        rep ? static_cast<double>(rep->train_iterations) : 0.0,
                        rep ? rep->train_loss : 0.0};
  if (sc.config.scenario == "robin1d") {
    const Eigen::VectorXd dphi = slopes_1d(s);
    v.push_back(rep ? rep->theta_1d : 0.0);
    v.push_back(dphi.lpNorm<Eigen::Infinity>());
    v.push_back(robin_defect(dphi, s.grid().dx, sc.config.robin));
  } else {
    v.push_back(curl_residual(s));
    v.push_back(rep ? static_cast<double>(rep->relax_sweeps) : 0.0);
  }
  if (sc.config.scenario == "analytic2d") {
    const StaggeredGrid& g = s.grid();
    v.push_back(error_concentration(s.species[0].c, ExactSolution::sample_concentration(g, 0, s.time)));
    v.push_back(error_concentration(s.species[1].c, ExactSolution::sample_concentration(g, 1, s.time)));
    v.push_back(error_displacement(s.displacement, ExactSolution::sample_displacement(g, s.time)));
  }
  return v;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                       std::ostream* progress, const StepObserver& observer) {
  const auto wall0 = std::chrono::steady_clock::now();
  const std::string started = iso_now();
  Scenario sc = build_scenario(cfg);
  RunResult res;
  res.config = cfg;
  res.log = TimeSeriesLog(channel_names(cfg));
  res.log.header_comments = {
      "scenario=" + cfg.scenario + " theta=" + cfg.theta + " seed=" + std::to_string(cfg.seed),
      std::string("version=") + kVersion,
      "free_energy = sum c(ln c - 1) + |D|^2/(2 eps); fixed-charge interaction excluded"};
  if (cfg.scenario == "robin1d") {
    char buf[160];
    std::snprintf(buf, sizeof buf, "robin eta=%.17g phi_left=%.17g phi_right=%.17g eps0=%.17g",
                  cfg.robin.eta, cfg.robin.phi_left, cfg.robin.phi_right, cfg.eps0);
    res.log.header_comments.emplace_back(buf);
  }

  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);
  const StaggeredGrid g = sc.state.grid();
  const bool one_d = g.dim == 1;

  TimeSeriesLog phi_log;
  if (one_d) {
    std::vector<std::string> names;
    for (int i = 0; i < g.nx; ++i) names.push_back("phi_" + std::to_string(i));
    phi_log = TimeSeriesLog(names);
    phi_log.header_comments = res.log.header_comments;
  }
  auto record_phi = [&]() {
    if (!one_d) return;
    const CellField phi = reconstruct_potential_1d(g, slopes_1d(sc.state), cfg.robin);
    phi_log.append(sc.state.time,
                   std::vector<double>(phi.values.data(), phi.values.data() + phi.values.size()));
  };
  auto snapshot = [&](long step) {
    if (!write) return;
    const SimulationState& s = sc.state;
    const std::string suffix = "_step" + std::to_string(step) + ".csv";
    auto put = [&](const std::string& name, const Eigen::VectorXd& v, int nx, int ny) {
      const std::string path = (fs::path(out_dir) / ("snapshot_" + name + suffix)).string();
      write_snapshot(path, name, s.time, v, nx, ny);
      res.files.push_back(path);
    };
    put("c_1", s.species[0].c.values, g.nx, g.ny);
    put("c_2", s.species[1].c.values, g.nx, g.ny);
    put("D_x", s.displacement.x, g.nx_faces_per_row(), g.ny);
    if (one_d) {
      put("phi", reconstruct_potential_1d(g, slopes_1d(s), cfg.robin).values, g.nx, 1);
    } else {
      put("D_y", s.displacement.y, g.nx, g.ny_face_rows());
    }
  };

  res.log.append(sc.state.time, sample(sc, nullptr));
  record_phi();
  if (observer) observer(sc, nullptr);
  const long n = cfg.num_steps();
  for (long k = 1; k <= n; ++k) {
    const StepReport rep = advance(sc.state, sc.strategy, sc.stepper, sc.ext());
    res.records.push_back({k, sc.state.time, rep.train_iterations, rep.train_loss,
                           rep.train_converged, rep.relax_sweeps, rep.theta_1d});
    res.log.append(sc.state.time, sample(sc, &rep));
    record_phi();
    if (observer) observer(sc, &rep);
    for (long s : cfg.snapshot_steps) {
      if (s == k) snapshot(k);
    }
    if (progress != nullptr && (k % 50 == 0 || k == n)) {
      *progress << cfg.scenario << " step " << k << "/" << n << " t=" << sc.state.time
                << " iters=" << rep.train_iterations << " sweeps=" << rep.relax_sweeps << '\n';
    }
  }
  res.final_state = sc.state;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  if (write) {
    const std::string ts = (fs::path(out_dir) / "timeseries.csv").string();
    res.log.write_csv(ts);
    res.files.push_back(ts);
    if (one_d) {
      const std::string p = (fs::path(out_dir) / "phi_timeseries.csv").string();
      phi_log.write_csv(p);
      res.files.push_back(p);
    }
    if (sc.strategy.network) {
      const std::string p = (fs::path(out_dir) / "network.ckpt").string();
      save_checkpoint(sc.strategy.network->net, p);
      res.files.push_back(p);
    }
    json m;
    json c = json::object();
    for (const auto& [k, v] : config_items(cfg)) c[k] = v;
    m["version"] = kVersion;
    m["config"] = c;
    m["seed"] = cfg.seed;
    m["started"] = started;
    m["finished"] = iso_now();
    m["wall_seconds"] = res.wall_seconds;
    json it = json::array(), sw = json::array(), lv = json::array(), cv = json::array();
    for (const auto& r : res.records) {
      it.push_back(r.train_iterations);
      sw.push_back(r.relax_sweeps);
      lv.push_back(r.train_loss);
      cv.push_back(r.train_converged);
    }
    m["steps"] = {{"train_iterations", it},
                  {"relax_sweeps", sw},
                  {"train_loss", lv},
                  {"train_converged", cv}};
    const std::string mp = (fs::path(out_dir) / "manifest.json").string();
    m["files"] = res.files;
    std::ofstream f(mp);
    if (!f) throw Error("cannot write " + mp);
    f << m.dump(2) << '\n';
    res.files.push_back(mp);
  }
  return res;
}

namespace {

json read_manifest(const std::string& dir) {
  const std::string p = (fs::path(dir) / "manifest.json").string();
  std::ifstream f(p);
  if (!f) throw ParseError("cannot read " + p);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(p + ": " + e.what());
  }
}

std::string cfg_value(const json& m, const std::string& key) {
  try {
    return m.at("config").at(key).get<std::string>();
  } catch (const json::exception&) {
    throw ParseError("manifest lacks config." + key);
  }
}

}  // namespace

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b) {
  const json ma = read_manifest(dir_a);
  const json mb = read_manifest(dir_b);
  for (const char* key : {"scenario", "nx", "ny", "dt"}) {
    if (cfg_value(ma, key) != cfg_value(mb, key)) {
      throw MetadataMismatch(std::string("runs differ in ") + key + ": " + cfg_value(ma, key) +
                             " vs " + cfg_value(mb, key));
    }
  }
  const TimeSeriesLog a = TimeSeriesLog::read_csv((fs::path(dir_a) / "timeseries.csv").string());
  const TimeSeriesLog b = TimeSeriesLog::read_csv((fs::path(dir_b) / "timeseries.csv").string());
  if (a.size() == 0 || b.size() == 0) throw ParseError("empty time series");
  CompareReport r;
  r.scenario = cfg_value(ma, "scenario");
  const std::size_t rows = std::min(a.size(), b.size());
  for (const auto& name : a.channels()) {
    bool in_b = false;
    for (const auto& nb : b.channels()) in_b = in_b || nb == name;
    if (!in_b) continue;
    const auto& ca = a.column(name);
    const auto& cb = b.column(name);
    ChannelDiff d{name, 0.0, ca.back(), cb.back()};
    for (std::size_t k = 0; k < rows; ++k) d.max_abs_diff = std::max(d.max_abs_diff, std::abs(ca[k] - cb[k]));
    r.channels.push_back(d);
    if (name == "E_D") r.final_error_order = d.final_a < d.final_b ? -1 : (d.final_a > d.final_b ? 1 : 0);
  }
  return r;
}

void print_compare(const CompareReport& r, std::ostream& out) {
  out << "scenario " << r.scenario << '\n';
  out << "channel,max_abs_diff,final_a,final_b\n";
  char buf[200];
  for (const auto& c : r.channels) {
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.10g,%.10g", c.name.c_str(), c.max_abs_diff,
                  c.final_a, c.final_b);
    out << buf << '\n';
  }
  out << "final_error_order "
      << (r.final_error_order < 0 ? "a<b" : r.final_error_order > 0 ? "a>b" : "tie") << '\n';
}

}  // namespace manp
