#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "loctime/chain.hpp"
#include "loctime/error.hpp"
#include "loctime/exact_law.hpp"
#include "loctime/harness.hpp"
#include "loctime/io.hpp"
#include "loctime/local_time.hpp"
#include "loctime/parallel.hpp"
#include "loctime/spectral.hpp"

namespace fs = std::filesystem;
using namespace loctime;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  unsigned threads = 1;
  std::string format = "json";
};

MarkovShift chain_from(const Globals& g, const std::string& chain) {
  if (!chain.empty()) return load_chain_file(chain);
  if (g.config.empty()) throw Error(ErrorKind::InvalidArgument, "pass --chain or --config");
  return load_chain_file(load_config(g.config).chain_file);
}

// Writes to <output>/<name> when --output is set, else to stdout.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
  } else {
    write_text_file(fs::path(g.output) / name, text);
    std::cerr << "wrote " << (fs::path(g.output) / name).string() << "\n";
  }
}

int run_campaign(const Globals& g, const std::optional<std::string>& only) {
  if (g.config.empty()) throw Error(ErrorKind::ConfigInvalid, "--config is required");
  auto config = load_config(g.config);
  if (g.seed) config.seed = *g.seed;
  if (!g.output.empty()) config.output_dir = g.output;
  if (only) config.checks = {*only};
  const auto report = run_experiment(config, {.threads = g.threads});
  std::cout << report_to_json(report);
  return report.all_selected_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-time invariance toolkit for finite-state Markov shifts"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--output", g.output, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores; results do not depend on it");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string chain;
  std::size_t points = 257;
  auto* spectral = app.add_subcommand("spectral", "Leading eigenvalue branch, variance and aperiodicity");
  spectral->add_option("--chain", chain, "Chain file (JSON)");
  spectral->add_option("--points", points, "Frequency grid size on [-pi, pi]")->check(CLI::Range(3, 1 << 20));

  std::size_t n = 0;
  auto* law = app.add_subcommand("exact-law", "Exact law of S_n by dynamic programming");
  law->add_option("--chain", chain, "Chain file (JSON)");
  law->add_option("-n,--steps", n, "Step count")->required()->check(CLI::PositiveNumber);

  std::size_t count = 1;
  auto* sim = app.add_subcommand("simulate", "Simulate trajectories and emit their local-time fields");
  sim->add_option("--chain", chain, "Chain file (JSON)");
  sim->add_option("-n,--steps", n, "Step count")->required()->check(CLI::PositiveNumber);
  sim->add_option("--count", count, "Trajectories")->check(CLI::PositiveNumber);

  std::string check;
  auto* verify = app.add_subcommand("verify", "Run one check of the config");
  verify->add_option("check", check, "Check name")->required()->check(CLI::IsMember(kCheckNames));

  auto* report = app.add_subcommand("report", "Run every check selected in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version are reported as parse "errors" with code 0
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*spectral) {
      const auto shift = chain_from(g, chain);
      const auto grid = uniform_frequency_grid(points);
      BranchOptions opts;
      opts.compute_sigma2 = false;
      const auto branch = eigen_branch(shift, grid, opts);
      const auto aper = check_aperiodicity(shift, 1024, resolve_threads(g.threads));
      if (g.format == "csv") {
        emit(g, "spectral_branch.csv", branch_to_csv(branch));
      } else {
        nlohmann::ordered_json doc;
        doc["sigma2_green_kubo"] = green_kubo_variance(shift);
        doc["sigma2_curvature"] = curvature_variance(shift);
        doc["aperiodicity"] = nlohmann::json::parse(aperiodicity_to_json(aper));
        emit(g, "spectral.json", doc.dump(2) + "\n");
      }
    } else if (*law) {
      const auto shift = chain_from(g, chain);
      const auto result = exact_law(shift, n, {.threads = resolve_threads(g.threads)});
      const auto name = "exact_law_n" + std::to_string(n);
      if (g.format == "csv") {
        emit(g, name + ".csv", law_to_csv(result));
      } else {
        nlohmann::ordered_json doc;
        doc["n"] = n;
        doc["support_min"] = result.support_min;
        doc["support_max"] = result.support_max;
        doc["marginals"] = result.marginals();
        emit(g, name + ".json", doc.dump(2) + "\n");
      }
    } else if (*sim) {
      const auto shift = chain_from(g, chain);
      std::uint64_t seed = g.seed.value_or(0);
      if (!g.seed && !g.config.empty()) seed = load_config(g.config).seed;
      const auto batch = sample_paths(shift, n, count, seed, resolve_threads(g.threads));
      if (g.format == "csv") {
        for (std::size_t i = 0; i < count; ++i) {
          emit(g, "field_" + std::to_string(i) + ".csv", field_to_csv(local_time_field(batch.path(i))));
        }
      } else {
        nlohmann::ordered_json doc;
        doc["n"] = n;
        doc["seed"] = seed;
        auto fields = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < count; ++i) {
          const auto f = local_time_field(batch.path(i));
          nlohmann::ordered_json e;
          e["min_level"] = f.min_level;
          e["counts"] = f.counts;
          e["final_position"] = f.final_position;
          fields.push_back(e);
        }
        doc["fields"] = fields;
        emit(g, "fields.json", doc.dump(2) + "\n");
      }
    } else if (*verify) {
      return run_campaign(g, check);
    } else if (*report) {
      return run_campaign(g, std::nullopt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
