// manp: run a scenario or compare two run directories.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "manp/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunFlags {
  std::string scenario = "electro2d";
  std::string config;
  bool print_config = false;
  bool quiet = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-Ampere Nernst-Planck solver"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("--scenario", rf.scenario, "analytic2d | electro2d | robin1d");
  run->add_option("--config", rf.config, "flat key = value config file");
  run->add_flag("--print-config", rf.print_config, "print the resolved config and exit");
  run->add_flag("-q,--quiet", rf.quiet, "no progress output");
  // Each override flag maps onto a config key.
  const std::vector<std::pair<std::string, std::string>> passthrough{
      {"--theta", "theta"},   {"--nx", "nx"},     {"--ny", "ny"},
      {"--dt", "dt"},         {"--T", "T"},       {"--seed", "seed"},
      {"--out", "out"},       {"--steps", "steps"}, {"--loss-variant", "loss_variant"},
      {"--snapshot-steps", "snapshot_steps"}, {"--relaxation", "relaxation"},
      {"--max-iters", "max_iters"}};
  std::vector<std::string> values(passthrough.size());
  std::vector<std::string> sets;
  for (std::size_t k = 0; k < passthrough.size(); ++k) {
    run->add_option(passthrough[k].first, values[k], "config key " + passthrough[k].second);
  }
  run->add_option("--set", sets, "extra key=value config override (repeatable)");

  std::string dir_a, dir_b;
  auto* cmp = app.add_subcommand("compare", "compare two run directories");
  cmp->add_option("run_a", dir_a)->required();
  cmp->add_option("run_b", dir_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*cmp) {
      const manp::CompareReport r = manp::compare_runs(dir_a, dir_b);
      manp::print_compare(r, std::cout);
      return 0;
    }

    manp::ScenarioConfig cfg = rf.config.empty()
                                   ? manp::default_config(rf.scenario)
                                   : manp::parse_config_file(
                                         rf.config, run->count("--scenario") ? rf.scenario : "");
    for (std::size_t k = 0; k < passthrough.size(); ++k) {
      if (run->count(passthrough[k].first)) {
        manp::apply_setting(cfg, passthrough[k].second, values[k]);
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw manp::ConfigError("--set expects key=value: " + s);
      manp::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    manp::validate(cfg);
    if (rf.print_config) {
      manp::print_config(cfg, std::cout);
      return 0;
    }
    const std::string out = manp::resolve_output_dir(cfg);
    const manp::RunResult r = manp::run_scenario(cfg, out, rf.quiet ? nullptr : &std::cerr);
    std::cout << "wrote " << r.files.size() << " files to " << out << " in " << r.wall_seconds
              << " s\n";
    return 0;
  } catch (const manp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const manp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const manp::MetadataMismatch& e) {
    std::cerr << "metadata mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const manp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
