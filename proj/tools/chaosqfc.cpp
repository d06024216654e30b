// chaosqfc <preset> [--set key=value]... [--seed N] [--out DIR] [--trials N]
// chaosqfc validate <config>
// chaosqfc rerun <manifest>
// chaosqfc defaults

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chaosqfc/config.hpp"
#include "chaosqfc/defaults.hpp"
#include "chaosqfc/errors.hpp"
#include "chaosqfc/parallel.hpp"
#include "chaosqfc/presets.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kConvergence = 3, kIo = 4 };

using namespace chaosqfc;

int report(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    for (const auto& i : e.issues()) std::fprintf(stderr, "config error: %s\n", i.c_str());
    return kUsage;
  } catch (const StageError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.convergence() ? kConvergence : kUsage;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s (drift %g)\n", e.what(), e.drift());
    return kConvergence;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}

void print_metrics(const RunManifest& m, const std::filesystem::path& dir) {
  std::printf("%s: %zu outputs in %s (%.1f s)\n", m.preset.c_str(), m.outputs.size(), dir.string().c_str(),
              m.wall_clock_s);
  for (const auto& [k, v] : m.metrics) std::printf("  %s = %.6g\n", k.c_str(), v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaotic-QFC lidar simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::vector<std::string> sets;
  std::string out_dir;
  std::string config_file;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned threads = 0;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--set", sets, "override key=value (repeatable)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--trials", trials, "trial count for the preset's main loop");
    sub->add_option("--config", config_file, "INI file applied before --set");
  };
  app.add_option("--threads", threads, "worker threads, 0 = all cores");

  std::map<std::string, CLI::App*> preset_cmds;
  for (const auto& name : preset_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " preset");
    add_run_options(sub);
    preset_cmds[name] = sub;
  }
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("config", validate_path, "INI file")->required();
  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "re-run a manifest and compare output digests");
  rerun->add_option("manifest", manifest_path, "manifest.json")->required();
  rerun->add_option("--out", out_dir, "output directory (default: <manifest dir>/rerun)");
  auto* defaults = app.add_subcommand("defaults", "print the default config as INI");
  auto* keys = app.add_subcommand("keys", "list config keys with units");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s\nvalid presets:", app.help().c_str());
    for (const auto& n : preset_names()) std::fprintf(stderr, " %s", n.c_str());
    std::fprintf(stderr, "\n");
    return kUsage;
  }
  set_thread_count(threads);

  try {
    if (*defaults) {
      std::fputs(format_config(default_config()).c_str(), stdout);
      return kOk;
    }
    if (*keys) {
      for (const auto& k : config_schema())
        std::printf("%-32s %-22s %s\n", k.key.c_str(), k.unit.empty() ? "-" : k.unit.c_str(), k.doc.c_str());
      return kOk;
    }
    if (*validate) {
      const RunConfig cfg = load_config(validate_path, default_config());
      const auto issues = check_config(cfg);
      if (!issues.empty()) throw ConfigError(issues);
      std::printf("%s: valid\n", validate_path.c_str());
      std::fputs(format_config(cfg).c_str(), stdout);
      return kOk;
    }
    if (*rerun) {
      const std::filesystem::path mp(manifest_path);
      const auto dir = out_dir.empty() ? mp.parent_path() / "rerun" : std::filesystem::path(out_dir);
      const auto rep = rerun_manifest(mp, dir);
      print_metrics(rep.rerun, dir);
      if (rep.identical()) {
        std::printf("rerun identical: %zu outputs match\n", rep.original.outputs.size());
        return kOk;
      }
      for (const auto& f : rep.mismatches) std::fprintf(stderr, "digest mismatch: %s\n", f.c_str());
      return 1;
    }
    for (const auto& [name, sub] : preset_cmds) {
      if (!*sub) continue;
      RunConfig cfg = default_config();
      if (!config_file.empty()) cfg = load_config(config_file, cfg);
      std::map<std::string, std::string> overrides;
      std::vector<std::string> bad;
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
          bad.push_back("--set " + s + ": expected key=value");
        else
          overrides[s.substr(0, eq)] = s.substr(eq + 1);
      }
      if (!bad.empty()) throw ConfigError(bad);
      apply_overrides(cfg, overrides);
      if (sub->count("--seed")) apply_override(cfg, "run.seed", std::to_string(seed));
      if (sub->count("--trials")) {
        const auto key = trials_key(name);
        if (key.empty()) throw ConfigError({"--trials: preset " + name + " has no trial loop"});
        apply_override(cfg, key, std::to_string(trials));
      }
      const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("runs") / name : std::filesystem::path(out_dir);
      const auto m = run_preset(name, cfg, dir);
      print_metrics(m, dir);
      return kOk;
    }
  } catch (...) {
    return report(std::current_exception());
  }
  return kUsage;
}
