// Scenario runner: wires spaces, operators and pipelines from a config file
// and emits certificates, tables and plot data.

#include "bmol/config.hpp"
#include "bmol/dyadic.hpp"
#include "bmol/runner.hpp"
#include "bmol/serialize.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (key=value or JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "artifact directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
}

bmol::RunConfig load(const CommonArgs& args) {
  bmol::RunConfig config = bmol::load_config_file(args.config_path);
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  return config;
}

int run_pipeline(const CommonArgs& args, const std::string& pipeline) {
  bmol::RunConfig config = load(args);
  if (!pipeline.empty()) config.pipelines = {pipeline};
  return bmol::run_scenarios(config, args.out_dir);
}

int run_space(const CommonArgs& args) {
  bmol::RunConfig config = load(args);
  config.pipelines.clear();  // space summary only
  const int status = bmol::run_scenarios(config, args.out_dir);
  if (status != 0) return status;
  const bmol::Space space = bmol::build_grid_space(
      config.space_dim, config.space_side, config.space_boundary);
  std::ofstream out(args.out_dir + "/space.json");
  out << bmol::space_to_json(space).dump(2) << "\n";
  return 0;
}

int run_bench(const CommonArgs& args) {
  bmol::RunConfig config = load(args);
  const bmol::BenchTable table = bmol::bench_distance_bracket(config);
  std::filesystem::create_directories(args.out_dir);
  bmol::write_text_file(args.out_dir + "/bench.csv", bmol::bench_csv(table));
  std::cout << bmol::bench_csv(table);
  if (table.included > 0)
    std::cout << "bracket: [" << table.kappa_min << ", " << table.kappa_max
              << "] spread "
              << (table.kappa_min > 0.0 ? table.kappa_max / table.kappa_min
                                        : 0.0)
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-space semigroup BMO toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string chosen;
  for (const auto& [name, help] :
       std::vector<std::pair<std::string, std::string>>{
           {"space", "build the space, doubling fit and a sample lattice"},
           {"jn", "BMO norm, tail curve and tail-rate estimates"},
           {"gj", "distance vs tail-rate bracket with scaling checks"},
           {"decompose", "stopping time and global decomposition certificates"},
           {"carleson", "balayage measure, sweep and iteration"},
           {"hardy", "atoms, square function and pairing tests"},
           {"bench", "bracket table over a function suite"}}) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, args);
    cmd->callback([&chosen, name = name]() { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (chosen == "space") return run_space(args);
    if (chosen == "bench") return run_bench(args);
    return run_pipeline(args, chosen);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
