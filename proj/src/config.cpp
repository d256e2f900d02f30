#include "flowreach/config.hpp"

#include <fstream>
#include <sstream>

namespace flowreach {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

VecN vec_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 2 || j.size() > kMaxDim)
    throw ConfigError(path, "expected an array of 2..8 numbers");
  VecN v(static_cast<int>(j.size()));
  for (int i = 0; i < v.dim(); ++i) {
    if (!j.at(i).is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    v[i] = j.at(i).get<double>();
  }
  return v;
}

const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path, "missing");
  return j.at(key);
}

double number_at(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, fnv1a_hex(bytes));
}

RunConfig parse_config(const json& j, const std::string& hash) {
  // field
  const json& jf = member(j, "field", "field");
  VectorField field = [&] {
    try {
      return field_from_descriptor(jf);
    } catch (const std::exception& e) {
      throw ConfigError("field", e.what());
    }
  }();

  // grid
  const json& jg = member(j, "grid", "grid");
  const VecN gmin = vec_at(member(jg, "min", "grid.min"), "grid.min");
  const VecN gmax = vec_at(member(jg, "max", "grid.max"), "grid.max");
  const json& jres = member(jg, "resolution", "grid.resolution");
  if (!jres.is_array() || jres.size() != static_cast<std::size_t>(gmin.dim()))
    throw ConfigError("grid.resolution", "expected one cell count per axis");
  std::vector<std::int64_t> cells;
  for (std::size_t i = 0; i < jres.size(); ++i) {
    if (!jres.at(i).is_number_integer() || jres.at(i).get<std::int64_t>() < 1)
      throw ConfigError("grid.resolution[" + std::to_string(i) + "]", "expected a positive integer");
    cells.push_back(jres.at(i).get<std::int64_t>());
  }
  Grid grid = [&] {
    try {
      return Grid(gmin, gmax, cells);
    } catch (const std::exception& e) {
      throw ConfigError("grid", e.what());
    }
  }();
  if (grid.dim() != field.dim()) throw ConfigError("grid", "dimension does not match field");

  // solver
  ArrivalParams solver;
  const json& js = member(j, "solver", "solver");
  solver.horizon = number_at(js, "horizon", "solver.horizon");
  if (!(solver.horizon > 0.0)) throw ConfigError("solver.horizon", "must be positive");
  if (js.contains("cfl")) {
    solver.cfl = number_at(js, "cfl", "solver.cfl");
    if (!(solver.cfl > 0.0) || solver.cfl > 0.5) throw ConfigError("solver.cfl", "must be in (0, 0.5]");
  }

  const VecN source = vec_at(member(j, "source", "source"), "source");
  if (source.dim() != grid.dim()) throw ConfigError("source", "dimension does not match grid");

  RunConfig cfg(std::move(field), std::move(grid), solver, source, hash);
  cfg.raw = j;

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ConfigError("seed", "expected an unsigned integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("oracle")) {
    const json& jo = j.at("oracle");
    if (jo.contains("k")) {
      cfg.oracle_k = jo.at("k").get<int>();
      if (cfg.oracle_k < 1 || cfg.oracle_k > 4) throw ConfigError("oracle.k", "must be in [1, 4]");
    }
  }

  if (j.contains("region")) {
    const json& jr = j.at("region");
    if (!jr.is_array() || jr.empty()) throw ConfigError("region", "expected an array of axis bounds");
    TrapRegion region;
    for (std::size_t i = 0; i < jr.size(); ++i) {
      const std::string p = "region[" + std::to_string(i) + "]";
      const json& b = jr.at(i);
      const int axis = static_cast<int>(number_at(b, "axis", p + ".axis"));
      if (axis < 0 || axis >= cfg.grid.dim()) throw ConfigError(p + ".axis", "axis out of range");
      region.bounds.push_back({axis, number_at(b, "min", p + ".min")});
    }
    cfg.region = region;
  }

  if (j.contains("tau")) {
    if (!j.at("tau").is_number()) throw ConfigError("tau", "expected a number");
    cfg.tau = j.at("tau").get<double>();
  }
  if (j.contains("min_density")) cfg.min_density = j.at("min_density").get<double>();

  if (j.contains("flux")) {
    const json& jx = j.at("flux");
    const json& lens = member(jx, "edge_lengths", "flux.edge_lengths");
    if (!lens.is_array() || lens.empty()) throw ConfigError("flux.edge_lengths", "expected an array");
    for (const auto& v : lens) cfg.flux_edge_lengths.push_back(v.get<double>());
    if (jx.contains("quad_res")) cfg.flux_quad_res = jx.at("quad_res").get<int>();
  }

  if (j.contains("pairs")) {
    const json& jp = j.at("pairs");
    if (jp.contains("sources")) cfg.pair_sources = jp.at("sources").get<int>();
    if (jp.contains("per_source")) cfg.pairs_per_source = jp.at("per_source").get<int>();
    if (cfg.pair_sources < 1) throw ConfigError("pairs.sources", "must be >= 1");
    if (cfg.pairs_per_source < 2) throw ConfigError("pairs.per_source", "must be >= 2");
  }

  return cfg;
}

}  // namespace flowreach
