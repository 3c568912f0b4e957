// Experiment runner for the synthetic benchmark.
//
//   bench run --config cfg.json --out results/ [--algorithm bfs --k 64 ...]
//   bench metrics --graph g.jsonl [--config cfg.json]
//   bench scaling --in results/
//   bench plot-data --in results/ --csv curves.csv
//
// RFB_LOG=quiet|info|debug sets stderr verbosity (default info).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rfb/bench.hpp"
#include "rfb/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Verbosity { quiet, info, debug };

Verbosity verbosity() {
  const char* v = std::getenv("RFB_LOG");
  if (!v) return Verbosity::info;
  const std::string s(v);
  if (s == "quiet") return Verbosity::quiet;
  if (s == "debug") return Verbosity::debug;
  return Verbosity::info;
}

rfb::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw rfb::Error(rfb::ErrorKind::io, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rfb::Error(rfb::ErrorKind::invalid_config, path + ": " + e.what());
  }
  return j.get<rfb::ExperimentConfig>();
}

std::string record_name(const rfb::ExperimentConfig& c) {
  std::string algo(rfb::to_string(c.algorithm));
  if (algo == "retro*") algo = "retro-star";
  return algo + "_" + std::string(rfb::to_string(c.model.feasibility)) + "_" + c.heuristic + "_k" +
         std::to_string(c.model.k) + ".json";
}

std::vector<rfb::ExperimentRecord> load_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<rfb::ExperimentRecord> out;
  for (const auto& f : files) out.push_back(rfb::load_results(f.string()));
  if (out.empty()) throw rfb::Error(rfb::ErrorKind::not_found, "no result files in " + dir);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retro-fallback synthetic benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_dir, algorithm, heuristic;
  std::uint64_t seed = 0;
  std::size_t jobs = 0, k = 0, budget = 0;
  auto* run = app.add_subcommand("run", "run an experiment campaign");
  run->add_option("--config", config_path, "experiment config (JSON)");
  run->add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "master seed");
  run->add_option("--jobs", jobs, "worker threads");
  run->add_option("--algorithm", algorithm, "retro-fallback, bfs, retro* or mcts");
  run->add_option("--heuristic", heuristic, "optimistic or difficulty");
  run->add_option("--k", k, "search samples");
  run->add_option("--budget", budget, "backward-model calls per run");

  std::string graph_path, metrics_config;
  std::size_t analysis_k = 0;
  auto* metrics = app.add_subcommand("metrics", "metrics of a saved search graph");
  metrics->add_option("--graph", graph_path, "graph (JSON lines)")->required();
  metrics->add_option("--config", metrics_config, "experiment config for the models and seeds");
  metrics->add_option("--analysis-k", analysis_k, "analysis samples");

  std::string in_dir;
  auto* scaling = app.add_subcommand("scaling", "log-log runtime fits per (model, heuristic)");
  scaling->add_option("--in", in_dir, "directory of result files")->required();

  std::string csv_path;
  auto* plot = app.add_subcommand("plot-data", "SSP-vs-budget curves as CSV");
  plot->add_option("--in", in_dir, "directory of result files")->required();
  plot->add_option("--csv", csv_path, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);
  const Verbosity level = verbosity();

  try {
    if (*run) {
      auto config = load_config(config_path);
      if (*seed_opt) config.seed = seed;
      if (jobs) config.jobs = jobs;
      if (!algorithm.empty()) config.algorithm = rfb::parse_algorithm(algorithm);
      if (!heuristic.empty()) config.heuristic = heuristic;
      if (k) config.model.k = k;
      if (budget) config.budget = budget;
      config.validate();
      fs::create_directories(out_dir);
      const auto path = (fs::path(out_dir) / record_name(config)).string();
      config.output = path;
      const auto record = rfb::run_experiment(config, [&](std::size_t done, std::size_t total) {
        if (level == Verbosity::debug || (level == Verbosity::info && (done == total || done % 10 == 0))) {
          std::cerr << "[" << rfb::to_string(config.algorithm) << "] " << done << "/" << total << " runs\n";
        }
      });
      rfb::emit_results(record, path);
      if (level != Verbosity::quiet) {
        double ssp = 0.0;
        for (const auto& r : record.runs) ssp += r.metrics.ssp;
        std::cerr << "wrote " << path << " (mean SSP " << ssp / static_cast<double>(record.runs.size()) << ")\n";
      }
    } else if (*metrics) {
      auto config = load_config(metrics_config);
      if (analysis_k) config.analysis_k = analysis_k;
      std::ifstream in(graph_path);
      if (!in) throw rfb::Error(rfb::ErrorKind::io, "cannot read " + graph_path);
      const auto graph = rfb::read_jsonl(in);
      const auto feasibility = rfb::make_feasibility(config.model);
      const auto buyability = rfb::make_buyability(config.model);
      rfb::ScenarioMatrix matrix(config.analysis_k, rfb::analysis_seed(config, config.world_seeds.front()));
      rfb::cover(matrix, graph, *feasibility, *buyability);
      std::cout << json(rfb::compute_metrics(graph, matrix)).dump(2) << '\n';
    } else if (*scaling) {
      const auto cells = rfb::scaling_report(load_dir(in_dir));
      std::cout << "feasibility\theuristic\truns\texponent\tintercept\n";
      for (const auto& c : cells) {
        std::cout << c.feasibility << '\t' << c.heuristic << '\t' << c.points << '\t' << c.exponent << '\t'
                  << c.intercept << '\n';
      }
    } else if (*plot) {
      std::ofstream out(csv_path);
      if (!out) throw rfb::Error(rfb::ErrorKind::io, "cannot write " + csv_path);
      rfb::write_curve_csv(load_dir(in_dir), out);
    }
  } catch (const rfb::Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
