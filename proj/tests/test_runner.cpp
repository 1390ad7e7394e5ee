#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>

using namespace wmass;
using Catch::Matchers::WithinAbs;

namespace {

json base_config(const std::string& family, json params = json::object()) {
  return json{{"schema", 1}, {"family", family}, {"n", params.value("n", 3)},
              {"params", params}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WMASS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_temp(const json& doc, const std::string& name) {
  const std::string path = "/tmp/wmass_test_" + name + ".json";
  std::ofstream out(path);
  out << doc.dump(2);
  return path;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  SECTION("unknown task") {
    ExperimentConfig cfg = ExperimentConfig::from_json(base_config("flat"));
    cfg.task = "no-such-task";
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
  }
  SECTION("hawking requires n = 3") {
    json doc = base_config("schwarzschild", {{"n", 5}, {"m", 1.0}});
    doc["n"] = 5;
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    cfg.task = "hawking";
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
  }
  SECTION("penrose requires 3 <= n <= 7") {
    json doc = base_config("schwarzschild", {{"n", 8}, {"m", 1.0}});
    doc["n"] = 8;
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    cfg.task = "penrose";
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
  }
  SECTION("static-check requires a potential") {
    ExperimentConfig cfg = ExperimentConfig::from_json(base_config("flat"));
    cfg.task = "static-check";
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);
  }
  SECTION("missing family key") {
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(json{{"schema", 1}}), ConfigError);
  }
}

TEST_CASE("mass task produces a convergent passing report") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(base_config("schwarzschild", {{"m", 1.0}}));
  cfg.task = "mass";
  cfg.expect = json{{"adm", 1.0}, {"weighted", 1.0}, {"tol", 1e-4}};
  const RunReport rep = run(cfg);
  REQUIRE(rep.pass);
  REQUIRE(rep.converged);
  REQUIRE_THAT(rep.results.at("adm").at("value").get<double>(), WithinAbs(1.0, 1e-4));
  REQUIRE(rep.results.at("adm").at("samples").size() == 5);
}

TEST_CASE("reports are deterministic modulo wall time") {
  ExperimentConfig cfg = ExperimentConfig::from_json(base_config("flat"));
  cfg.task = "michel";
  cfg.options["count"] = 3;
  const RunReport a = run(cfg);
  const RunReport b = run(cfg);
  REQUIRE(a.to_json(false).dump() == b.to_json(false).dump());
}

TEST_CASE("convergence studies") {
  SECTION("quadrature order study plateaus") {
    ExperimentConfig cfg =
        ExperimentConfig::from_json(base_config("schwarzschild", {{"m", 1.0}}));
    cfg.task = "convergence";
    cfg.options["parameter"] = "q";
    cfg.options["values"] = {8, 12, 16, 24, 32};
    const RunReport rep = run(cfg);
    REQUIRE(rep.pass);
    const auto& table = rep.results.at("table");
    REQUIRE(table.size() == 5);
    // plateau below 1e-8 by q = 24
    REQUIRE(table.at(3).at("error").get<double>() < 1e-8);
  }
  SECTION("finite-difference order sits near two") {
    ExperimentConfig cfg =
        ExperimentConfig::from_json(base_config("schwarzschild", {{"m", 1.0}}));
    cfg.task = "convergence";
    cfg.options["parameter"] = "h_fd";
    const RunReport rep = run(cfg);
    REQUIRE(rep.pass);
    const double order = rep.results.at("observed_order").get<double>();
    REQUIRE(order >= 1.8);
    REQUIRE(order <= 2.2);
  }
  SECTION("extrapolation drift stays below the fit residual") {
    ExperimentConfig cfg =
        ExperimentConfig::from_json(base_config("schwarzschild", {{"m", 1.0}}));
    cfg.task = "convergence";
    cfg.options["parameter"] = "rho0";
    const RunReport rep = run(cfg);
    REQUIRE(rep.pass);
  }
}

TEST_CASE("probe task emits geometry and decay data") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(base_config("schwarzschild", {{"m", 1.0}}));
  cfg.task = "probe";
  cfg.options["points"] = {{3.0, 0.0, 0.0}};
  const RunReport rep = run(cfg);
  REQUIRE(rep.results.at("points").size() == 1);
  REQUIRE(std::abs(rep.results.at("points").at(0).at("scal").get<double>()) < 1e-11);
  REQUIRE(rep.results.at("decay").at("applicable").get<bool>());
}

TEST_CASE("static-check task certifies f-Schwarzschild") {
  json doc = base_config(
      "f_schwarzschild",
      {{"m", 1.0}, {"weight", {{"type", "inverse_r"}, {"a", 0.5}, {"k", 1.0}}}});
  doc["numerics"] = {{"grid", {{"rmin", 1.0}, {"rmax", 20.0}, {"count", 256}}}};
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  cfg.task = "static-check";
  cfg.options["potential"] = "schwarzschild";
  cfg.expect["certified"] = true;
  const RunReport rep = run(cfg);
  REQUIRE(rep.pass);
  REQUIRE(rep.results.at("certified").get<bool>());
}

TEST_CASE("CLI exit-code contract") {
  SECTION("passing run exits 0 and writes the report") {
    const std::string cfg = write_temp(base_config("schwarzschild", {{"m", 1.0}}), "ok");
    const std::string out = "/tmp/wmass_test_report.json";
    REQUIRE(run_cli("mass --config " + cfg + " --out " + out + " --quiet") == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    json rep;
    in >> rep;
    REQUIRE(rep.at("pass").get<bool>());
    REQUIRE_THAT(rep.at("results").at("adm").at("value").get<double>(),
                 WithinAbs(1.0, 1e-4));
  }
  SECTION("config errors exit 2") {
    const std::string cfg = write_temp(json{{"schema", 1}}, "bad");
    REQUIRE(run_cli("mass --config " + cfg + " --quiet") == 2);
    REQUIRE(run_cli("mass --config /nonexistent.json --quiet") == 2);
  }
  SECTION("module errors surface as exit 1") {
    const std::string cfg = write_temp(base_config("flat"), "flat");
    // no f-minimal sphere in flat space
    REQUIRE(run_cli("penrose --config " + cfg + " --quiet") == 1);
  }
  SECTION("assertion failures exit 1") {
    json doc = base_config("schwarzschild", {{"m", 1.0}});
    doc["expect"] = {{"adm", 2.0}, {"tol", 1e-4}};  // wrong on purpose
    const std::string cfg = write_temp(doc, "expect");
    REQUIRE(run_cli("mass --config " + cfg + " --quiet") == 1);
  }
  SECTION("non-convergence exits 3") {
    json doc = base_config("schwarzschild", {{"m", 1.0}});
    // strong-field radii where no clean power law fits
    doc["numerics"] = {{"rho0", 0.7}, {"K", 3}, {"extrap_tol", 1e-6}};
    const std::string cfg = write_temp(doc, "nonconv");
    REQUIRE(run_cli("mass --config " + cfg + " --quiet") == 3);
  }
  SECTION("CSV table is written") {
    const std::string cfg = write_temp(base_config("schwarzschild", {{"m", 1.0}}), "csv");
    const std::string csv = "/tmp/wmass_test_table.csv";
    REQUIRE(run_cli("mass --config " + cfg + " --csv " + csv + " --quiet") == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "kind,rho,value");
  }
}

TEST_CASE("michel task passes through the library entry point") {
  ExperimentConfig cfg = ExperimentConfig::from_json(base_config("flat"));
  cfg.task = "michel";
  cfg.options["count"] = 5;
  const RunReport rep = run(cfg);
  REQUIRE(rep.pass);
  REQUIRE(rep.results.at("max_pointwise_residual").get<double>() < 1e-8);
  REQUIRE(rep.results.at("max_integral_residual").get<double>() < 1e-6);
}

TEST_CASE("check-conformal task emits residual tables") {
  json doc = base_config(
      "f_schwarzschild",
      {{"m", 1.0}, {"weight", {{"type", "bump"}, {"center", 2.5}, {"radius", 1.0}, {"amplitude", 0.5}}}});
  doc["numerics"] = {{"grid", {{"rmin", 1.2}, {"rmax", 8.0}, {"count", 16}}}};
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  cfg.task = "check-conformal";
  cfg.options["count"] = 16;
  std::ostringstream csv;
  const RunReport rep = run(cfg, &csv);
  REQUIRE(rep.pass);
  REQUIRE(csv.str().find("residual_scalar") != std::string::npos);
  // header + 16 rows
  int lines = 0;
  std::istringstream is(csv.str());
  for (std::string line; std::getline(is, line);) ++lines;
  REQUIRE(lines == 17);
}
