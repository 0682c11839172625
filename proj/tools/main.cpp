#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cartan/errors.hpp"
#include "cartan/scenario.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cartan::ConfigError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void print_checks(const cartan::scenario::RunReport& rep) {
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": measured "
              << c.measured;
    if (c.mode == "lt")
      std::cout << " < " << c.tolerance;
    else if (c.mode == "eq")
      std::cout << " == " << c.expected;
    else if (c.mode == "abs")
      std::cout << " ~= " << c.expected << " (tol " << c.tolerance << ")";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curved-orbit decompositions of holonomy-reduced geometries"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario config JSON")->required();
  run->add_option("--out", out_dir, "output directory for reports/CSV");
  run->add_option("--threads", threads, "worker pool cap");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      run->add_option("--seed", seed_value, "override the config seed");

  auto* list = app.add_subcommand("list", "list builtin scenarios");

  std::string desc_path;
  auto* verify =
      app.add_subcommand("verify-stabilizer", "stabilizer dimension check");
  verify->add_option("descriptor", desc_path, "descriptor JSON")->required();
  verify->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& s : cartan::scenario::list_scenarios())
        std::cout << s.name << " - " << s.description << "\n";
      return 0;
    }
    cartan::scenario::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    if (seed_opt->count() > 0) opts.seed_override = seed_value;

    cartan::scenario::RunReport rep;
    if (run->parsed()) {
      rep = cartan::scenario::run_scenario(load_json(config_path), opts);
    } else {
      rep = cartan::scenario::verify_stabilizer(load_json(desc_path), opts);
    }
    print_checks(rep);
    std::cout << (rep.all_pass() ? "PASS" : "FAIL") << " (" << rep.scenario
              << ", " << rep.wall_seconds << " s)\n";
    return rep.all_pass() ? 0 : 1;
  } catch (const cartan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
