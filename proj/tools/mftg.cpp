#include <CLI11.hpp>

#include <iostream>

#include "mftg/cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mean-field-type game scenario runner"};
  mftg::cli::RunOptions opt;
  bool list = false;
  std::uint64_t seed = 0;
  std::string out, format;
  app.add_option("--config", opt.config_path, "Scenario config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the config)");
  auto* fmt_opt = app.add_option("--format", format, "csv or json (overrides the config)");
  app.add_flag("--list", list, "List scenarios with their default configs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mftg::cli::kConfigError;
  }

  if (list) {
    std::cout << mftg::cli::list_scenarios();
    return 0;
  }
  if (opt.config_path.empty()) {
    std::cerr << "mftg: ConfigInvalid: --config is required (or use --list)\n";
    return mftg::cli::kConfigError;
  }
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out_dir = out;
  if (*fmt_opt) opt.format = format;

  const auto res = mftg::cli::run(opt);
  for (const auto& f : res.files) std::cout << f << '\n';
  return res.code;
}
