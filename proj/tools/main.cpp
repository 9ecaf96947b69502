// qswitch --config run.cfg --out results/ [--workers N] [--verbose]
#include <iostream>

#include "CLI11.hpp"
#include "qswitch/config.hpp"
#include "qswitch/error.hpp"
#include "qswitch/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coupled atom-cavity Q-switch simulator"};
  std::string config_path;
  qswitch::RunOptions options;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", options.workers, "threads for scan grids")
      ->check(CLI::Range(1u, 4096u));
  app.add_flag("--verbose", options.verbose, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  options.out_dir = out_dir;

  try {
    const auto config = qswitch::load_config(config_path);
    const auto outcome = qswitch::run(config, options);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    if (options.verbose) {
      for (const auto& f : outcome.files) std::cerr << "wrote " << f.string() << '\n';
      std::cerr << "done in " << outcome.seconds << " s\n";
    }
    return 0;
  } catch (const qswitch::Error& e) {
    std::cerr << "qswitch: " << e.what() << '\n';
    return qswitch::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "qswitch: " << e.what() << '\n';
    return 3;
  }
}
