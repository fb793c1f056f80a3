#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "warpmass/cli.hpp"
#include "warpmass/error.hpp"

int main(int argc, char** argv) {
  namespace wc = warpmass::cli;
  CLI::App app{"warpmass: Green functions, mass and Yamabe quotients on product-hyperbolic model spaces"};
  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  bool emit_plot = false;
  std::vector<std::string> overrides;
  app.add_option("command", command, "conditions | decay | green | mass | yamabe | flatness")
      ->required()
      ->check(CLI::IsMember(wc::command_names()));
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks (overrides conditions.seed)");
  app.add_flag("--emit-plot-data", emit_plot, "write gnuplot-ready two-column files");
  app.add_option("--set", overrides, "override a config key, e.g. --set green.L=128");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? wc::kSuccess : wc::kInputError;
  }

  wc::json config;
  try {
    wc::json user = wc::load_config_file(config_path);
    if (!out_dir.empty()) overrides.push_back("output.directory=" + wc::json(out_dir).dump());
    if (*seed_opt) overrides.push_back("conditions.seed=" + std::to_string(seed));
    if (emit_plot) overrides.push_back("output.emit_plot_data=true");
    config = wc::resolve_config(user, overrides);
  } catch (const warpmass::Error& e) {
    std::cerr << "warpmass: " << e.what() << '\n';
    return wc::kInputError;
  }
  return wc::run_command(command, config, std::cerr);
}
