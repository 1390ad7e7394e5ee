// wmass — weighted-mass toolkit CLI.
//
// Usage:
//   wmass <task> --config <file> [--out <file>] [--csv <file>] [--seed N]
//                [--radii r0:K] [--bracket a:b] [--grid annulus:rmin:rmax:count]
//                [--potential <id>] [--rho R] [--quiet]
//
// Tasks: mass, check-conformal, static-check, penrose, hawking, michel,
// convergence, probe.
//
// Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 numerical
// non-convergence.

#include "wmass/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_path;
  std::string csv_path;
  std::optional<std::uint64_t> seed;
  std::string radii;
  std::string bracket;
  std::string grid;
  std::string potential;
  std::optional<double> rho;
  bool quiet = false;
};

void apply_overrides(wmass::ExperimentConfig& cfg, const CliArgs& args) {
  using wmass::ConfigError;
  if (args.seed) cfg.numerics.seed = *args.seed;
  if (!args.radii.empty()) {
    const auto sep = args.radii.find(':');
    if (sep == std::string::npos) throw ConfigError("--radii expects r0:K");
    cfg.numerics.schedule.rho0 = std::stod(args.radii.substr(0, sep));
    cfg.numerics.schedule.count = std::stoi(args.radii.substr(sep + 1)) + 1;
  }
  if (!args.bracket.empty()) {
    const auto sep = args.bracket.find(':');
    if (sep == std::string::npos) throw ConfigError("--bracket expects a:b");
    cfg.numerics.bracket_lo = std::stod(args.bracket.substr(0, sep));
    cfg.numerics.bracket_hi = std::stod(args.bracket.substr(sep + 1));
  }
  if (!args.grid.empty()) {
    // annulus:rmin:rmax:count
    std::vector<std::string> parts;
    std::string rest = args.grid;
    for (std::size_t pos = rest.find(':'); pos != std::string::npos; pos = rest.find(':')) {
      parts.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 4 || parts[0] != "annulus")
      throw ConfigError("--grid expects annulus:rmin:rmax:count");
    cfg.numerics.grid_rmin = std::stod(parts[1]);
    cfg.numerics.grid_rmax = std::stod(parts[2]);
    cfg.numerics.grid_count = std::stoi(parts[3]);
  }
  if (!args.potential.empty()) cfg.options["potential"] = args.potential;
  if (args.rho) cfg.options["rho"] = *args.rho;
}

int run_task(const std::string& task, const CliArgs& args) {
  using namespace wmass;
  std::ifstream in(args.config_path);
  if (!in) {
    std::cerr << "error: cannot open config file " << args.config_path << "\n";
    return 2;
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
    return 2;
  }

  RunReport report;
  try {
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    cfg.task = task;
    apply_overrides(cfg, args);
    std::optional<std::ofstream> csv;
    if (!args.csv_path.empty()) {
      csv.emplace(args.csv_path);
      if (!*csv) throw ConfigError("cannot open csv output path " + args.csv_path);
    }
    report = run(cfg, csv ? &*csv : nullptr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NonConverged& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string text = report.to_json().dump(2);
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) {
      std::cerr << "error: cannot open output path " << args.out_path << "\n";
      return 2;
    }
    out << text << "\n";
  }
  if (!args.quiet) std::cout << text << "\n";
  for (const auto& a : report.assertions)
    std::cerr << (a.pass ? "PASS " : "FAIL ") << a.name << " (value " << a.value
              << ", tolerance " << a.tolerance << ")\n";
  if (!report.converged) return 3;
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-mass toolkit: masses, conformal identities, staticity "
               "certificates and Penrose/Hawking inequality checks for "
               "asymptotically flat weighted manifolds"};
  app.require_subcommand(1);

  CliArgs args;
  std::vector<CLI::App*> subs;
  for (const std::string& task : wmass::known_tasks()) {
    CLI::App* sub = app.add_subcommand(task);
    sub->add_option("--config", args.config_path, "experiment config JSON")->required();
    sub->add_option("--out", args.out_path, "report JSON output path");
    sub->add_option("--csv", args.csv_path, "CSV table output path");
    sub->add_option("--seed", args.seed, "seed override");
    sub->add_option("--radii", args.radii, "radius schedule r0:K");
    sub->add_option("--bracket", args.bracket, "root bracket a:b");
    sub->add_option("--grid", args.grid, "probe grid annulus:rmin:rmax:count");
    sub->add_option("--potential", args.potential, "potential catalogue id");
    sub->add_option("--rho", args.rho, "surface radius (hawking)");
    sub->add_flag("--quiet", args.quiet, "suppress report on stdout");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : subs)
    if (sub->parsed()) return run_task(sub->get_name(), args);
  return 2;
}
