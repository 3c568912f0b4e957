#include "rfb/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "rfb/error.hpp"
#include "rfb/heuristics.hpp"
#include "rfb/propagation.hpp"
#include "rfb/random.hpp"
#include "rfb/success.hpp"

#ifndef RFB_VERSION
#define RFB_VERSION "0.0.0"
#endif

namespace rfb {

using nlohmann::json;

std::string_view software_version() noexcept { return RFB_VERSION; }

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::retro_fallback: return "retro-fallback";
    case Algorithm::bfs: return "bfs";
    case Algorithm::retro_star: return "retro*";
    case Algorithm::mcts: return "mcts";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (auto a : {Algorithm::retro_fallback, Algorithm::bfs, Algorithm::retro_star, Algorithm::mcts}) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorKind::invalid_config, "algorithm: unknown value '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- config

namespace {

void bad(const std::string& path, const std::string& what) { throw Error(ErrorKind::invalid_config, path + ": " + what); }

json world_json(const WorldParams& w) {
  return json{{"max_children", w.max_children},     {"max_reactants", w.max_reactants},
              {"alphabet_size", w.alphabet_size},   {"buyable_length", w.buyable_length},
              {"dead_end_short", w.dead_end_short}, {"dead_end_long", w.dead_end_long},
              {"rewrite_rate", w.rewrite_rate},     {"tiered_medium", w.tiered_medium}};
}

json mcts_json(const MctsConfig& m) {
  return json{{"exploration", m.exploration},
              {"expand_after", m.expand_after},
              {"reward_visits", m.reward_visits},
              {"max_depth", m.max_depth},
              {"max_simulations", m.max_simulations}};
}

// Reads `key` into `out` when present, reporting type errors with the field path.
template <class T>
void read(const json& j, const std::string& prefix, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(prefix + key, "wrong type");
  }
}

void reject_unknown(const json& j, const std::string& prefix, std::initializer_list<const char*> known) {
  if (!j.is_object()) bad(prefix.empty() ? "config" : prefix.substr(0, prefix.size() - 1), "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad(prefix + key, "unknown field");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (world_seeds.empty()) bad("world_seeds", "must not be empty");
  if (targets.empty() && target_count < 1) bad("target_count", "must be >= 1 when no targets are listed");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].empty()) bad("targets[" + std::to_string(i) + "]", "must not be empty");
  }
  if (target_min_length < 2) bad("target_length.min", "must be >= 2");
  if (target_max_length < target_min_length) bad("target_length.max", "must be >= target_length.min");
  if (world.max_children < 1) bad("world.max_children", "must be >= 1");
  if (world.max_reactants < 1) bad("world.max_reactants", "must be >= 1");
  if (world.alphabet_size < 2 || world.alphabet_size > 26) bad("world.alphabet_size", "must be in [2, 26]");
  if (world.buyable_length < 1) bad("world.buyable_length", "must be >= 1");
  for (auto [name, v] : {std::pair{"world.dead_end_short", world.dead_end_short},
                         std::pair{"world.dead_end_long", world.dead_end_long},
                         std::pair{"world.rewrite_rate", world.rewrite_rate},
                         std::pair{"world.tiered_medium", world.tiered_medium}}) {
    if (!(v >= 0.0 && v <= 1.0)) bad(name, "must be in [0, 1]");
  }
  if (heuristic != "optimistic" && heuristic != "difficulty") {
    bad("heuristic", "must be 'optimistic' or 'difficulty'");
  }
  if (!(model.p >= 0.0 && model.p <= 1.0)) bad("model.feasibility.p", "must be in [0, 1]");
  if (model.k < 1) bad("model.k", "must be >= 1");
  if (budget < 1) bad("budget", "must be >= 1");
  if (analysis_k < model.k) bad("analysis_k", "must be >= model.k");
  if (trials < 1) bad("trials", "must be >= 1");
  if (jobs < 1) bad("jobs", "must be >= 1");
  if (!(mcts.exploration >= 0.0)) bad("mcts.exploration", "must be >= 0");
  if (mcts.expand_after < 1) bad("mcts.expand_after", "must be >= 1");
  if (mcts.max_depth < 1) bad("mcts.max_depth", "must be >= 1");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"world_seeds", c.world_seeds},
           {"world", world_json(c.world)},
           {"targets", c.targets},
           {"target_count", c.target_count},
           {"target_length", {{"min", c.target_min_length}, {"max", c.target_max_length}}},
           {"algorithm", to_string(c.algorithm)},
           {"heuristic", c.heuristic},
           {"search_graph", to_string(c.search_graph)},
           {"model", c.model},
           {"budget", c.budget},
           {"analysis_k", c.analysis_k},
           {"trials", c.trials},
           {"seed", c.seed},
           {"jobs", c.jobs},
           {"output", c.output},
           {"mcts", mcts_json(c.mcts)}};
}

void from_json(const json& j, ExperimentConfig& c) {
  ExperimentConfig out;
  reject_unknown(j, "", {"world_seeds", "world", "targets", "target_count", "target_length", "algorithm", "heuristic",
                         "search_graph", "model", "budget", "analysis_k", "trials", "seed", "jobs", "output", "mcts"});
  read(j, "", "world_seeds", out.world_seeds);
  if (j.contains("world")) {
    const auto& w = j.at("world");
    reject_unknown(w, "world.", {"max_children", "max_reactants", "alphabet_size", "buyable_length", "dead_end_short",
                                 "dead_end_long", "rewrite_rate", "tiered_medium"});
    read(w, "world.", "max_children", out.world.max_children);
    read(w, "world.", "max_reactants", out.world.max_reactants);
    read(w, "world.", "alphabet_size", out.world.alphabet_size);
    read(w, "world.", "buyable_length", out.world.buyable_length);
    read(w, "world.", "dead_end_short", out.world.dead_end_short);
    read(w, "world.", "dead_end_long", out.world.dead_end_long);
    read(w, "world.", "rewrite_rate", out.world.rewrite_rate);
    read(w, "world.", "tiered_medium", out.world.tiered_medium);
  }
  read(j, "", "targets", out.targets);
  read(j, "", "target_count", out.target_count);
  if (j.contains("target_length")) {
    const auto& t = j.at("target_length");
    reject_unknown(t, "target_length.", {"min", "max"});
    read(t, "target_length.", "min", out.target_min_length);
    read(t, "target_length.", "max", out.target_max_length);
  }
  if (j.contains("algorithm")) {
    std::string a;
    read(j, "", "algorithm", a);
    out.algorithm = parse_algorithm(a);
  }
  read(j, "", "heuristic", out.heuristic);
  if (j.contains("search_graph")) {
    std::string mode;
    read(j, "", "search_graph", mode);
    try {
      out.search_graph = parse_graph_mode(mode);
    } catch (const Error&) {
      bad("search_graph", "must be 'graph' or 'tree'");
    }
  }
  if (j.contains("model")) {
    try {
      out.model = j.at("model").get<ModelConfig>();
    } catch (const Error& e) {
      bad("model", e.message());
    } catch (const json::exception& e) {
      bad("model", e.what());
    }
  }
  read(j, "", "budget", out.budget);
  read(j, "", "analysis_k", out.analysis_k);
  read(j, "", "trials", out.trials);
  read(j, "", "seed", out.seed);
  read(j, "", "jobs", out.jobs);
  read(j, "", "output", out.output);
  if (j.contains("mcts")) {
    const auto& m = j.at("mcts");
    reject_unknown(m, "mcts.", {"exploration", "expand_after", "reward_visits", "max_depth", "max_simulations"});
    read(m, "mcts.", "exploration", out.mcts.exploration);
    read(m, "mcts.", "expand_after", out.mcts.expand_after);
    read(m, "mcts.", "reward_visits", out.mcts.reward_visits);
    read(m, "mcts.", "max_depth", out.mcts.max_depth);
    read(m, "mcts.", "max_simulations", out.mcts.max_simulations);
  }
  out.validate();
  c = std::move(out);
}

// ---------------------------------------------------------------- records

void to_json(json& j, const Metrics& m) {
  j = json{{"ssp", m.ssp}, {"best_plan", m.best_plan}, {"solved", m.solved}, {"nodes", m.nodes}};
  j["shortest"] = m.shortest ? json(*m.shortest) : json(nullptr);
}

void from_json(const json& j, Metrics& m) {
  m.ssp = j.at("ssp").get<double>();
  m.best_plan = j.at("best_plan").get<double>();
  m.solved = j.at("solved").get<bool>();
  m.nodes = j.at("nodes").get<std::size_t>();
  m.shortest.reset();
  if (!j.at("shortest").is_null()) m.shortest = j.at("shortest").get<std::size_t>();
}

void to_json(json& j, const RunRecord& r) {
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back({p.iteration, p.model_calls, p.ssp, p.search_ssp});
  j = json{{"world_seed", r.world_seed}, {"target", r.target},     {"trial", r.trial},
           {"search_seed", r.search_seed}, {"termination", to_string(r.termination)}, {"error", r.error},
           {"expansions", r.expansions},   {"curve", curve},       {"search_nodes", r.search_nodes},       {"metrics", r.metrics},
           {"wall_ms", r.wall_ms}};
}

void from_json(const json& j, RunRecord& r) {
  r.world_seed = j.at("world_seed").get<std::uint64_t>();
  r.target = j.at("target").get<std::string>();
  r.trial = j.at("trial").get<std::size_t>();
  r.search_seed = j.at("search_seed").get<std::uint64_t>();
  r.termination = parse_termination(j.at("termination").get<std::string>());
  r.error = j.at("error").get<std::string>();
  r.expansions = j.at("expansions").get<std::vector<std::string>>();
  r.curve.clear();
  for (const auto& p : j.at("curve")) {
    r.curve.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>(), p.at(2).get<double>(),
                       p.at(3).get<double>()});
  }
  r.search_nodes = j.at("search_nodes").get<std::size_t>();
  r.metrics = j.at("metrics").get<Metrics>();
  r.wall_ms = j.at("wall_ms").get<double>();
}

void to_json(json& j, const ExperimentRecord& r) {
  j = json{{"schema_version", r.schema_version}, {"software", r.software}, {"config", r.config},
           {"runs", r.runs},                     {"wall_ms", r.wall_ms}};
}

void from_json(const json& j, ExperimentRecord& r) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw Error(ErrorKind::migration, "record schema version " + std::to_string(version) + " cannot be read (expected " +
                                          std::to_string(kSchemaVersion) + ")");
  }
  r.schema_version = version;
  r.software = j.at("software").get<std::string>();
  r.config = j.at("config").get<ExperimentConfig>();
  r.runs = j.at("runs").get<std::vector<RunRecord>>();
  r.wall_ms = j.at("wall_ms").get<double>();
}

// ---------------------------------------------------------------- seeds

namespace {
constexpr std::uint64_t kSearchSalt = 0x7365617263680001ULL;
constexpr std::uint64_t kAnalysisSalt = 0x616e616c79736902ULL;
}  // namespace

std::uint64_t search_seed(const ExperimentConfig& config, std::uint64_t world_seed, std::size_t trial) {
  return rng::combine(rng::combine(rng::combine(config.seed, kSearchSalt), world_seed), trial);
}

std::uint64_t analysis_seed(const ExperimentConfig& config, std::uint64_t world_seed) {
  return rng::combine(rng::combine(config.seed, kAnalysisSalt), world_seed);
}

std::vector<std::string> experiment_targets(const ExperimentConfig& config, std::uint64_t world_seed) {
  if (!config.targets.empty()) return config.targets;
  WorldParams params = config.world;
  params.seed = world_seed;
  return SyntheticWorld(params).generate_targets(config.target_count, config.target_min_length,
                                                 config.target_max_length);
}

// ---------------------------------------------------------------- metrics

namespace {

// Most feasible plan under the empirical marginals, following the max-product
// values and never re-entering a molecule on the current path.
std::vector<NodeId> extract_plan(const AndOrGraph& graph, std::span<const double> marginal,
                                 std::span<const double> value) {
  std::vector<NodeId> plan;
  std::vector<int> state(graph.size(), 0);  // 0 unseen, 1 on path, 2 done
  auto visit = [&](auto&& self, NodeId m) -> void {
    state[m] = 1;
    plan.push_back(m);
    std::optional<NodeId> choice;
    double best = marginal[m];
    for (NodeId r : graph.children(m)) {
      bool cyclic = false;
      for (NodeId c : graph.children(r)) cyclic = cyclic || state[c] == 1;
      if (!cyclic && value[r] > best) {
        best = value[r];
        choice = r;
      }
    }
    if (choice) {
      plan.push_back(*choice);
      for (NodeId c : graph.children(*choice)) {
        if (state[c] == 0) self(self, c);
      }
    }
    state[m] = 2;
  };
  visit(visit, graph.root());
  std::sort(plan.begin(), plan.end());
  return plan;
}

double plan_frequency(const AndOrGraph& graph, const ScenarioMatrix& matrix, const std::vector<NodeId>& plan) {
  SynthesisPlan p{graph.root(), plan};
  const auto reactions = p.reactions(graph);
  const auto leaves = p.frontier(graph);
  std::size_t hits = 0;
  const std::size_t words = matrix.words();
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t bits = ~std::uint64_t{0};
    for (NodeId r : reactions) bits &= matrix.bits(r)[w];
    for (NodeId m : leaves) bits &= matrix.bits(m)[w];
    if (w + 1 == words && matrix.k() % 64) bits &= (std::uint64_t{1} << (matrix.k() % 64)) - 1;
    hits += static_cast<std::size_t>(std::popcount(bits));
  }
  return static_cast<double>(hits) / static_cast<double>(matrix.k());
}

// Fewest reactions (counted per tree path) in a plan whose every outcome has a
// nonzero marginal.
std::optional<std::size_t> shortest_plan(const AndOrGraph& graph, std::span<const double> marginal) {
  constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> len(graph.size(), inf);
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId id = 0; id < graph.size(); ++id) {
      const Node& node = graph.node(id);
      if (!node.is_molecule()) continue;
      std::size_t best = marginal[id] > 0.0 ? 0 : inf;
      for (NodeId r : node.children) {
        if (!(marginal[r] > 0.0)) continue;
        std::size_t total = 1;
        for (NodeId c : graph.children(r)) {
          if (len[c] == inf) {
            total = inf;
            break;
          }
          total += len[c];
        }
        best = std::min(best, total);
      }
      if (best < len[id]) {
        len[id] = best;
        changed = true;
      }
    }
  }
  if (len[graph.root()] == inf) return std::nullopt;
  return len[graph.root()];
}

}  // namespace

Metrics compute_metrics(const AndOrGraph& graph, const ScenarioMatrix& matrix) {
  if (!matrix.covers(graph)) throw Error(ErrorKind::invalid_input, "analysis matrix does not cover the graph");
  Metrics m;
  m.nodes = graph.size();
  m.ssp = estimate_ssp(graph, matrix);
  std::vector<double> marginal(graph.size());
  for (NodeId id = 0; id < graph.size(); ++id) marginal[id] = matrix.mean(id);
  const std::vector<double> no_heuristic(graph.size(), 0.0);
  const auto value = compute_psi(graph, marginal, no_heuristic);
  m.best_plan = plan_frequency(graph, matrix, extract_plan(graph, marginal, value));
  m.shortest = shortest_plan(graph, marginal);
  m.solved = m.shortest.has_value();
  return m;
}

// ---------------------------------------------------------------- runs

RunRecord run_single(const ExperimentConfig& config, std::uint64_t world_seed, const std::string& target,
                     std::size_t trial) {
  WorldParams params = config.world;
  params.seed = world_seed;
  SyntheticWorld world(params);
  const auto feasibility = make_feasibility(config.model);
  const auto buyability = make_buyability(config.model);
  const auto heuristic = make_heuristic(config.heuristic, static_cast<std::size_t>(config.target_max_length));

  RunRecord record;
  record.world_seed = world_seed;
  record.target = target;
  record.trial = trial;
  record.search_seed = search_seed(config, world_seed, trial);

  PlannerConfig planner;
  planner.k = config.model.k;
  planner.budget = config.budget;
  planner.seed = record.search_seed;
  planner.mode = config.search_graph;
  planner.propagation.parallel = config.jobs == 1;

  const auto start = std::chrono::steady_clock::now();
  SearchResult result = [&]() {
    switch (config.algorithm) {
      case Algorithm::retro_fallback:
        return run_retro_fallback(target, world, *feasibility, *buyability, *heuristic, planner, world.tier_lookup());
      case Algorithm::bfs: return run_bfs(target, world, *feasibility, *buyability, planner, world.tier_lookup());
      case Algorithm::retro_star:
        return run_retro_star(target, world, *feasibility, *buyability, *heuristic, planner, world.tier_lookup());
      case Algorithm::mcts:
        return run_mcts(target, world, *feasibility, *buyability, *heuristic, planner, config.mcts,
                        world.tier_lookup());
    }
    throw Error(ErrorKind::internal, "unhandled algorithm");
  }();
  record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  record.termination = result.trace.termination;
  record.error = result.trace.error;
  record.search_nodes = result.graph.size();

  // Replay the expansions into a graph-mode graph under the analysis matrix.
  AndOrGraph replay(target, GraphMode::graph, world.tier_lookup());
  ScenarioMatrix analysis(config.analysis_k, analysis_seed(config, world_seed));
  cover(analysis, replay, *feasibility, *buyability);
  SuccessTracker success(config.analysis_k);
  success.update(replay, analysis);
  record.curve.push_back({0, 0, success.ssp(), result.trace.initial_ssp});
  for (std::size_t i = 0; i < result.trace.steps.size(); ++i) {
    const auto& step = result.trace.steps[i];
    const std::string& molecule = result.graph.node(result.expansions[i]).molecule;
    record.expansions.push_back(molecule);
    const auto id = replay.find_molecule(molecule);
    if (id && replay.is_frontier(*id)) {
      const auto added = replay.expand(*id, world.propose(molecule));
      extend(analysis, replay, added, *feasibility, *buyability);
      success.update(replay, analysis);
    }
    record.curve.push_back({step.iteration, step.model_calls, success.ssp(), step.ssp});
  }
  record.metrics = compute_metrics(replay, analysis);
  return record;
}

ExperimentRecord run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  struct Job {
    std::uint64_t world_seed;
    std::string target;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::uint64_t world_seed : config.world_seeds) {
    for (const auto& target : experiment_targets(config, world_seed)) {
      for (std::size_t trial = 0; trial < config.trials; ++trial) jobs.push_back({world_seed, target, trial});
    }
  }

  ExperimentRecord record;
  record.software = std::string(software_version());
  record.config = config;
  record.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        record.runs[i] = run_single(config, jobs[i].world_seed, jobs[i].target, jobs[i].trial);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
      std::lock_guard lock(mutex);
      ++done;
      if (progress) progress(done, jobs.size());
    }
  };
  const std::size_t workers = std::min(config.jobs, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

// ---------------------------------------------------------------- files

namespace {

void require_finite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw Error(ErrorKind::invalid_input, "non-finite number at " + (path.empty() ? std::string("/") : path));
  }
  if (j.is_structured()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      require_finite(*it, path + "/" + (j.is_object() ? it.key() : std::to_string(std::distance(j.begin(), it))));
    }
  }
}

std::string csv_path(const std::string& path) {
  return std::filesystem::path(path).replace_extension(".csv").string();
}

}  // namespace

void emit_results(const ExperimentRecord& record, const std::string& path) {
  const json j = record;
  require_finite(j, "");
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
  }
  std::ofstream csv(csv_path(path));
  if (!csv) throw Error(ErrorKind::io, "cannot write " + csv_path(path));
  write_curve_csv({record}, csv);
}

ExperimentRecord load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  json j;
  try {
    in >> j;
    return j.get<ExperimentRecord>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, path + ": " + e.what());
  }
}

void write_curve_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  out << "run,algorithm,target,trial,iteration,budget_used,ssp\n";
  out.precision(17);
  std::size_t run = 0;
  for (const auto& record : records) {
    for (const auto& r : record.runs) {
      for (const auto& p : r.curve) {
        if (p.iteration == 0) continue;
        out << run << ',' << to_string(record.config.algorithm) << ',' << r.target << ',' << r.trial << ','
            << p.iteration << ',' << p.model_calls << ',' << p.ssp << '\n';
      }
      ++run;
    }
  }
}

// ---------------------------------------------------------------- scaling

ScalingCell fit_scaling(const std::vector<std::pair<double, double>>& nodes_and_ms) {
  std::vector<std::pair<double, double>> logs;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (auto [n, t] : nodes_and_ms) {
    if (!(n > 0.0) || !(t > 0.0)) continue;
    logs.emplace_back(std::log(n), std::log(t));
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  if (logs.size() < 5 || hi < 10.0 * lo) {
    throw Error(ErrorKind::capacity, "scaling fit needs at least 5 points spanning a decade of node counts");
  }
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  ScalingCell cell;
  cell.points = logs.size();
  cell.exponent = sxy / sxx;
  cell.intercept = my - cell.exponent * mx;
  return cell;
}

std::vector<ScalingCell> scaling_report(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> cells;
  for (const auto& record : records) {
    auto& points = cells[{std::string(to_string(record.config.model.feasibility)), record.config.heuristic}];
    for (const auto& r : record.runs) points.emplace_back(static_cast<double>(r.search_nodes), r.wall_ms);
  }
  std::vector<ScalingCell> out;
  for (const auto& [key, points] : cells) {
    try {
      ScalingCell cell = fit_scaling(points);
      cell.feasibility = key.first;
      cell.heuristic = key.second;
      out.push_back(std::move(cell));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::capacity) throw;
    }
  }
  if (out.empty()) throw Error(ErrorKind::capacity, "no (model, heuristic) cell has enough runs for a scaling fit");
  return out;
}

}  // namespace rfb
