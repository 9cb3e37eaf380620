#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

using namespace phi4lab;

int main(int argc, char** argv) {
  CLI::App app{"Paracontrolled calculus toolkit and Phi^4 simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  struct Bound {
    CLI::App* sub;
    const cli::Command* cmd;
    std::map<std::string, std::string> flags;
    std::string config_path;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& cmd : cli::commands()) {
    auto b = std::make_unique<Bound>();
    b->cmd = &cmd;
    b->sub = app.add_subcommand(cmd.name, cmd.summary);
    b->sub->add_option("--config", b->config_path, "flat key=value file; flags override it");
    for (const auto& k : cmd.schema) {
      std::string help = k.help;
      if (!k.fallback.empty()) help += " [" + k.fallback + "]";
      // the option writes straight into the override map so unset flags stay absent
      b->sub->add_option_function<std::string>(
          "--" + k.name, [flags = &b->flags, name = k.name](const std::string& v) { (*flags)[name] = v; }, help);
    }
    bound.push_back(std::move(b));
  }

  std::string grid_spec = "d=2,N=32,M=6.283185307179586", manifest;
  std::uint64_t verify_seed = 1;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite, or re-run and check a manifest");
  verify->add_option("--grid", grid_spec, "grid as d=..,N=..,M=..");
  verify->add_option("--manifest", manifest, "manifest to re-run and compare bitwise");
  verify->add_option("--seed", verify_seed, "seed of the random test fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      if (!manifest.empty()) return cli::verify_manifest(manifest, std::cout) == 0 ? 0 : 1;
      return cli::run_invariant_suite(cli::parse_grid_spec(grid_spec), verify_seed, std::cout) == 0 ? 0 : 1;
    }
    for (const auto& b : bound) {
      if (!b->sub->parsed()) continue;
      io::Config file;
      if (!b->config_path.empty()) file = io::read_config_file(b->config_path, b->cmd->schema);
      const io::Config cfg = io::resolve_config(file, b->flags, b->cmd->schema);
      return cli::run_recorded(*b->cmd, cfg, std::cout);
    }
  } catch (const io::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
