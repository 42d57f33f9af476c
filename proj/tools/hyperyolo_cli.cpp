#include <cstdint>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperyolo/harness/commands.hpp"
#include "hyperyolo/harness/settings.hpp"
#include "hyperyolo/harness/verify.hpp"

namespace {

using hyperyolo::harness::Settings;

// Options shared by every subcommand. Flag overrides are appended after the
// config file entries so they win.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> set;
  std::deque<std::string> slots;
  std::vector<std::pair<std::string, std::string*>> named;

  void attach(CLI::App* app, bool with_out = true) {
    app->add_option("--config", config, "key=value settings file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "random seed");
    if (with_out) app->add_option("--out", out, "output path or directory");
    app->add_option("--set", set, "extra key=value override (repeatable)");
  }

  void flag(CLI::App* app, const std::string& key, const std::string& help) {
    std::string& slot = slots.emplace_back();
    named.emplace_back(key, &slot);
    app->add_option("--" + key, slot, help);
  }

  Settings settings() const {
    Settings s;
    if (!config.empty()) s = hyperyolo::harness::read_settings_file(config);
    for (const auto& [key, value] : named)
      if (!value->empty()) s.emplace_back(key, *value);
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        hyperyolo::detail::fail(hyperyolo::ErrorKind::invalid_argument,
                                "--set expects key=value, got '" + kv + "'");
      s.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) s.emplace_back("seed", std::to_string(*seed));
    if (!out.empty()) s.emplace_back("out", out);
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperyolo: hypergraph neck toolkit"};
  app.require_subcommand(1);

  Common verify_opts, demo_opts, bench_opts, ablate_opts, fit_opts, graph_opts;
  bool fault = false;

  auto* verify = app.add_subcommand("verify", "run the property suite");
  verify->add_option("--seed", verify_opts.seed, "suite seed");
  verify->add_option("--out", verify_opts.out, "also write the report to this file");
  verify->add_flag("--fault", fault, "perturb hyperedge degrees (negative control)");

  auto* demo = app.add_subcommand("demo", "backbone + neck on one image, with heatmaps");
  demo_opts.attach(demo);
  for (const char* k : {"scale", "mode", "epsilon", "pooling", "collecting_set", "target_stride",
                        "input", "size", "weights"})
    demo_opts.flag(demo, k, std::string("override ") + k);

  auto* bench = app.add_subcommand("bench", "distance / construction / hyperconv timings (CSV)");
  bench_opts.attach(bench, false);
  for (const char* k : {"vertices", "channels", "repetitions", "epsilon"})
    bench_opts.flag(bench, k, std::string("override ") + k);

  auto* ablate = app.add_subcommand("ablate", "none / low / high order variance ablation (CSV)");
  ablate_opts.attach(ablate, false);
  for (const char* k : {"epsilon", "k_clusters", "points_per_cluster", "dim", "center_separation",
                        "intra_spread"})
    ablate_opts.flag(ablate, k, std::string("override ") + k);

  auto* fit = app.add_subcommand("fit", "gradient descent on Theta, loss trace (CSV)");
  fit_opts.attach(fit, false);
  for (const char* k : {"epsilon", "step", "iterations", "k_clusters", "points_per_cluster", "dim",
                        "center_separation", "intra_spread"})
    fit_opts.flag(fit, k, std::string("override ") + k);

  auto* graph = app.add_subcommand("hypergraph", "build from an HYT1 matrix, print degree stats");
  graph_opts.attach(graph);
  for (const char* k : {"input", "epsilon"}) graph_opts.flag(graph, k, std::string("override ") + k);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  namespace h = hyperyolo::harness;
  try {
    if (verify->parsed()) {
      h::VerifyOptions o;
      if (verify_opts.seed) o.seed = *verify_opts.seed;
      o.inject_degree_fault = fault;
      const auto report = h::run_verify(o);
      const std::string text = report.render();
      std::cout << text;
      if (!verify_opts.out.empty()) {
        std::ofstream f(verify_opts.out, std::ios::binary);
        f << text;
        hyperyolo::detail::require(static_cast<bool>(f), hyperyolo::ErrorKind::io,
                                   "cannot write " + verify_opts.out);
      }
      return report.passed() ? 0 : 1;
    }
    if (demo->parsed()) return h::run_demo(h::demo_options(demo_opts.settings()), std::cout);
    if (bench->parsed())
      return h::run_bench(h::bench_options(bench_opts.settings()), std::cout, std::cerr);
    if (ablate->parsed())
      return h::run_ablate(h::ablate_options(ablate_opts.settings()), std::cout, std::cerr);
    if (fit->parsed()) return h::run_fit(h::fit_options(fit_opts.settings()), std::cout, std::cerr);
    if (graph->parsed())
      return h::run_hypergraph(h::hypergraph_options(graph_opts.settings()), std::cout);
  } catch (const hyperyolo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
