// Command-line driver: fhn_lab <simulate|verify|tails|pullback|sweep|resume> --config PATH

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fhn/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"FitzHugh-Nagumo pullback attractor laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> checkpoint;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (overrides output_dir and FHN_OUTPUT_ROOT)");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
  };
  for (const char* name : {"simulate", "verify", "tails", "pullback", "sweep"}) {
    add_common(app.add_subcommand(name, std::string("run the ") + name + " experiment"));
  }
  auto* resume = app.add_subcommand("resume", "continue a simulate run from a checkpoint");
  add_common(resume);
  resume->add_option("--checkpoint", checkpoint, "checkpoint file written by simulate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fhn::exit_config;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  return fhn::guarded(
      [&] {
        const fhn::RunConfig rc = fhn::load_config(config_path);
        const std::string kind = fhn::experiment_name(rc.experiment);
        if (sub == "resume") {
          if (kind != "simulate") throw fhn::ConfigError("resume needs a config whose experiment is simulate");
        } else if (sub != kind) {
          throw fhn::ConfigError("subcommand '" + sub + "' does not match the config experiment '" + kind + "'");
        }
        fhn::RunOverrides ov{out, seed, threads, checkpoint};
        const fhn::RunResult res = fhn::run(rc, ov);
        std::cout << fhn::json{{"experiment", kind},
                               {"out_dir", res.out_dir.string()},
                               {"exit_code", res.exit_code},
                               {"summary", res.summary}}
                         .dump(2)
                  << '\n';
        return res.exit_code;
      },
      std::cerr);
}
