#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "flowreach/analysis.hpp"
#include "flowreach/config.hpp"
#include "flowreach/dynamics.hpp"
#include "flowreach/extract.hpp"
#include "flowreach/gridio.hpp"
#include "flowreach/harness.hpp"
#include "flowreach/levelset.hpp"
#include "flowreach/oracle.hpp"
#include "flowreach/parallel.hpp"

namespace {

using flowreach::ArrivalStats;
using flowreach::ConfigError;
using flowreach::RunConfig;
using flowreach::VecN;
using nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

VecN parse_point(const std::string& text, int dim) {
  VecN p(dim);
  std::size_t pos = 0;
  for (int a = 0; a < dim; ++a) {
    std::size_t used = 0;
    p[a] = std::stod(text.substr(pos), &used);
    pos += used;
    if (a + 1 < dim) {
      if (pos >= text.size() || text[pos] != ',')
        throw ConfigError("point", "expected " + std::to_string(dim) + " comma-separated numbers: " + text);
      ++pos;
    }
  }
  return p;
}

ordered_json stats_json(const ArrivalStats& s) {
  ordered_json j;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["stop_time"] = s.stop_time;
  j["finite_nodes"] = s.finite_nodes;
  j["all_reached"] = s.all_reached;
  j["stationary"] = s.stationary;
  return j;
}

void emit(const ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    out << text;
  }
}

int cmd_field_info(const RunConfig& cfg, const std::string& out_path) {
  const auto& info = cfg.raw.contains("field_info") ? cfg.raw.at("field_info") : nlohmann::json::object();
  const double fd_step = info.value("fd_step", 1e-4);
  const auto sup_samples = info.value("sup_samples", static_cast<std::int64_t>(10000));
  std::vector<double> edges = info.value("drift_edges", std::vector<double>{2.0, 4.0, 8.0});
  const int quad_res = info.value("quad_res", 8);

  flowreach::CenterLattice lattice;
  lattice.lo = cfg.grid.min();
  lattice.hi = cfg.grid.max();
  double min_extent = flowreach::kInf;
  for (int a = 0; a < cfg.grid.dim(); ++a)
    min_extent = std::min(min_extent, cfg.grid.box().extent(a));
  lattice.step = info.value("lattice_step", min_extent / 4.0);

  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["field"] = cfg.field.descriptor().to_json();
  j["divergence_residual"] = flowreach::divergence_residual(cfg.field, cfg.grid, fd_step);
  j["fd_step"] = fd_step;
  j["sup_norm"] = flowreach::sup_norm_estimate(cfg.field, cfg.grid.box(), sup_samples);
  j["sup_samples"] = sup_samples;
  j["drift_profile"] = flowreach::mean_drift_profile(cfg.field, edges, lattice, quad_res).to_json();
  emit(j, out_path);
  return kExitPass;
}

int cmd_solve(const RunConfig& cfg, const std::string& out_path) {
  ArrivalStats stats;
  const auto arrival = flowreach::solve_arrival(cfg.field, cfg.grid, cfg.source, cfg.solver, &stats);
  flowreach::write_grid(arrival, out_path);
  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["out"] = out_path;
  j["stats"] = stats_json(stats);
  emit(j, "");
  return kExitPass;
}

int cmd_oracle(const RunConfig& cfg, const std::string& out_path) {
  const auto times = flowreach::dijkstra_times(cfg.field, cfg.grid, cfg.source, cfg.oracle_k);
  flowreach::write_grid(times, out_path);
  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["out"] = out_path;
  j["k"] = cfg.oracle_k;
  emit(j, "");
  return kExitPass;
}

int cmd_travel_time(const RunConfig& cfg, const std::string& from, const std::string& to) {
  const VecN a = parse_point(from, cfg.grid.dim());
  const VecN b = parse_point(to, cfg.grid.dim());
  ArrivalStats stats;
  const auto arrival = flowreach::solve_arrival(cfg.field, cfg.grid, a, cfg.solver, &stats);
  const auto dij = flowreach::dijkstra_times(cfg.field, cfg.grid,
                                             cfg.grid.position(cfg.grid.nearest_node(a)),
                                             cfg.oracle_k);
  const auto node = cfg.grid.nearest_node(b);
  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["levelset"] = arrival[node];
  j["dijkstra"] = dij[node];
  j["k"] = cfg.oracle_k;
  emit(j, "");
  return kExitPass;
}

int cmd_trajectory(const RunConfig& cfg, const std::string& to, const std::string& out_path) {
  const VecN target = parse_point(to, cfg.grid.dim());
  ArrivalStats stats;
  const auto arrival = flowreach::solve_arrival(cfg.field, cfg.grid, cfg.source, cfg.solver, &stats);
  const double replay_dt = cfg.grid.spacing() / (4.0 * (stats.speed_bound + 1.0));
  const auto loop = flowreach::closed_loop(cfg.field, arrival, cfg.source, target, replay_dt);

  if (!out_path.empty()) {
    std::ofstream csv(out_path, std::ios::trunc);
    flowreach::write_trajectory_csv(loop.extraction.path, csv);
  }
  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["duration"] = loop.extraction.duration;
  j["replay_error"] = loop.replay.terminal_distance;
  j["clip_fraction"] = loop.extraction.clip_fraction;
  j["arrival_at_target"] = loop.arrival_at_target;
  if (!out_path.empty()) j["csv"] = out_path;
  emit(j, "");
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& mode) {
  ordered_json j;
  j["config_hash"] = cfg.config_hash;
  j["check"] = mode;

  if (mode == "theorem1") {
    const auto res = flowreach::verify_theorem1(cfg.field, cfg.grid, cfg.source, cfg.solver);
    j["stats"] = stats_json(res.stats);
    j["trusted_total"] = res.trusted_total;
    j["trusted_infinite"] = res.trusted_infinite;
    j["pass"] = res.pass;
    emit(j, "");
    return res.pass ? kExitPass : kExitVerifyFail;
  }

  if (mode == "theorem2") {
    try {
      const auto res = flowreach::verify_theorem2(cfg.field, cfg.grid, cfg.solver, cfg.seed,
                                                  cfg.pair_sources, cfg.pairs_per_source);
      j["fit"] = res.fit.to_json();
      j["pass"] = true;
      emit(j, "");
      return kExitPass;
    } catch (const flowreach::UnreachablePairError& e) {
      j["pass"] = false;
      j["error"] = e.what();
      ordered_json pj = ordered_json::array();
      for (int a = 0; a < e.pair.x.dim(); ++a) pj.push_back(e.pair.x[a]);
      j["pair_source"] = pj;
      pj = ordered_json::array();
      for (int a = 0; a < e.pair.y.dim(); ++a) pj.push_back(e.pair.y[a]);
      j["pair_target"] = pj;
      emit(j, "");
      return kExitVerifyFail;
    }
  }

  if (mode == "trap") {
    if (!cfg.region) throw ConfigError("region", "required for verify trap");
    ArrivalStats stats;
    const auto arrival = flowreach::solve_arrival(cfg.field, cfg.grid, cfg.source, cfg.solver, &stats);
    const auto res = flowreach::trapping_check(arrival, *cfg.region);
    j["stats"] = stats_json(stats);
    j["trap"] = res.to_json(cfg.grid);
    j["pass"] = res.pass;
    emit(j, "");
    return res.pass ? kExitPass : kExitVerifyFail;
  }

  if (mode == "flux") {
    if (cfg.flux_edge_lengths.empty()) throw ConfigError("flux.edge_lengths", "required for verify flux");
    const auto res =
        flowreach::lemma31_check(cfg.field, cfg.flux_edge_lengths, cfg.seed, cfg.flux_quad_res);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < res.edge_lengths.size(); ++i)
      rows.push_back(ordered_json{{"A", res.edge_lengths[i]}, {"density", res.densities[i]}});
    j["densities"] = rows;
    j["pass"] = res.monotone;
    emit(j, "");
    return res.monotone ? kExitPass : kExitVerifyFail;
  }

  if (mode == "lemma24") {
    if (!cfg.tau) throw ConfigError("tau", "required for verify lemma24");
    ArrivalStats stats;
    const auto arrival = flowreach::solve_arrival(cfg.field, cfg.grid, cfg.source, cfg.solver, &stats);
    const auto res = flowreach::lemma24_check(cfg.field, arrival, *cfg.tau,
                                              cfg.min_density.value_or(0.7));
    j["stats"] = stats_json(stats);
    j["report"] = res.report.to_json();
    j["pass"] = res.pass;
    emit(j, "");
    return res.pass ? kExitPass : kExitVerifyFail;
  }

  throw ConfigError("verify", "unknown check: " + mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"travel times and reachable sets for a unit-speed swimmer in a flow"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = auto); never changes results");

  std::string config_path, out_path, from_str, to_str, verify_mode;

  auto* info = app.add_subcommand("field-info", "field hypothesis measurements -> JSON report");
  info->add_option("config", config_path)->required();
  info->add_option("--out", out_path, "also write the report to this file");

  auto* solve = app.add_subcommand("solve", "arrival-time field -> grid file");
  solve->add_option("config", config_path)->required();
  solve->add_option("--out", out_path)->required();

  auto* oracle = app.add_subcommand("oracle", "shortest-path travel times -> grid file");
  oracle->add_option("config", config_path)->required();
  oracle->add_option("--out", out_path)->required();

  auto* tt = app.add_subcommand("travel-time", "travel time from both solvers");
  tt->add_option("config", config_path)->required();
  tt->add_option("--from", from_str)->required();
  tt->add_option("--to", to_str)->required();

  auto* traj = app.add_subcommand("trajectory", "extract and replay a near-optimal trajectory");
  traj->add_option("config", config_path)->required();
  traj->add_option("--to", to_str)->required();
  traj->add_option("--out", out_path, "trajectory CSV path");

  auto* verify = app.add_subcommand("verify", "run a named check; exit 0 pass / 1 fail");
  verify->add_option("mode", verify_mode, "theorem1|theorem2|trap|flux|lemma24")->required();
  verify->add_option("config", config_path)->required();

  CLI11_PARSE(app, argc, argv);
  flowreach::set_thread_count(threads);

  try {
    const RunConfig cfg = flowreach::load_config(config_path);
    if (info->parsed()) return cmd_field_info(cfg, out_path);
    if (solve->parsed()) return cmd_solve(cfg, out_path);
    if (oracle->parsed()) return cmd_oracle(cfg, out_path);
    if (tt->parsed()) return cmd_travel_time(cfg, from_str, to_str);
    if (traj->parsed()) return cmd_trajectory(cfg, to_str, out_path);
    if (verify->parsed()) return cmd_verify(cfg, verify_mode);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
