#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cpflow/experiments.hpp"

namespace fs = std::filesystem;
namespace ex = cpflow::experiments;

int main(int argc, char** argv) {
  CLI::App app{"cpflow: experiments on boundary weights, flows and gauge actions"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int refine = 0;
  for (const auto& name : ex::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config (defaults if omitted)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "overrides seeds.rng");
    sub->add_option("--refine", refine, "extra grid refinements")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ex::json user = ex::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config " << config_path << "\n";
        return 2;
      }
      user = ex::json::parse(in);
    }
    const auto rep = ex::run(command, user, seed, refine);
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "report.json") << rep.document.dump(2) << "\n";
    for (const auto& c : rep.curves) {
      std::ofstream(fs::path(out_dir) / (c.name + ".csv")) << ex::csv_text(c);
    }
    for (const auto& r : rep.document["records"]) {
      std::cout << (r["pass"].get<bool>() ? "ok   " : "FAIL ") << r["name"].get<std::string>()
                << "\n";
    }
    std::cout << command << ": " << (rep.passed ? "pass" : "fail") << "\n";
    return rep.passed ? 0 : 1;
  } catch (const ex::ConfigError& e) {
    for (const auto& p : e.problems) std::cerr << "config: " << p << "\n";
    return 2;
  } catch (const ex::json::exception& e) {
    std::cerr << "config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
