// lab: runs one experiment from a JSON config and writes events.jsonl,
// summary.csv, manifest.json and any experiment artifacts to --out.
//
//   lab <experiment> [--config FILE] [--seed S] [--trials N] [--horizon H] [--out DIR]
//   lab verify --manifest DIR/manifest.json
//   lab defaults <experiment>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "srslab/experiments.hpp"

namespace {

int run(const std::string& kind, const std::string& config_path, std::optional<std::uint64_t> seed,
        std::optional<std::size_t> trials, std::optional<std::size_t> horizon, const std::string& out) {
  srs::json user = config_path.empty() ? srs::json::object() : srs::load_config_file(config_path);
  if (seed) user["seed"] = *seed;
  if (trials) user["trials"] = *trials;
  if (horizon) user["horizon"] = *horizon;
  srs::json cfg = srs::resolve_config(user, kind);
  auto result = srs::run_experiment(cfg);
  srs::write_run(result, out);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : result.checks) {
    std::cout << (c.ok ? "ok   " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  }
  std::cout << "wrote " << out << "/manifest.json\n";
  return 0;
}

int verify(const std::string& manifest) {
  auto checks = srs::verify_run(manifest);
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.ok;
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary random subgroup experiments"};
  app.require_subcommand(1);

  std::string config, out = "out", manifest, defaults_kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, horizon;
  std::string chosen;

  for (const auto& kind : srs::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config, "JSON config file (missing keys take defaults)");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--trials", trials, "number of trajectories");
    sub->add_option("--horizon", horizon, "walk length");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  auto* ver = app.add_subcommand("verify", "re-check a run from its manifest and artifacts");
  ver->add_option("--manifest", manifest, "path to manifest.json")->required();
  auto* def = app.add_subcommand("defaults", "print the default config of an experiment");
  def->add_option("experiment", defaults_kind)->required()->check(CLI::IsMember(srs::experiment_kinds()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (ver->parsed()) return verify(manifest);
    if (def->parsed()) {
      std::cout << srs::default_config(defaults_kind).dump(2) << '\n';
      return 0;
    }
    return run(chosen, config, seed, trials, horizon, out);
  } catch (const srs::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
