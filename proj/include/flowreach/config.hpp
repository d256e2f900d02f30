#ifndef FLOWREACH_CONFIG_HPP
#define FLOWREACH_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowreach/analysis.hpp"
#include "flowreach/flowfield.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/levelset.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

/// Config file problem; `path` names the offending field (dot notation).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error("config field '" + path + "': " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parsed run configuration:
/// {
///   "field":  {"name": ..., "params": {...}, "dimension": d},
///   "grid":   {"min": [...], "max": [...], "resolution": [...]},
///   "solver": {"horizon": f, "cfl": f},
///   "source": [...],
///   "seed":   u64,
///   ... command-specific optional sections (oracle, region, tau, flux, pairs)
/// }
struct RunConfig {
  RunConfig(VectorField f, Grid g, ArrivalParams s, VecN src, std::string hash)
      : field(std::move(f)), grid(std::move(g)), solver(s), source(src),
        config_hash(std::move(hash)) {}

  VectorField field;
  Grid grid;
  ArrivalParams solver;
  VecN source;
  std::uint64_t seed = 0;
  std::string config_hash;  // FNV-1a over the file bytes, hex

  // Optional sections.
  int oracle_k = 3;
  std::optional<TrapRegion> region;
  std::optional<double> tau;
  std::optional<double> min_density;
  std::vector<double> flux_edge_lengths;
  int flux_quad_res = 256;
  int pair_sources = 2;
  int pairs_per_source = 60;

  nlohmann::json raw;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& j, const std::string& hash);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace flowreach

#endif  // FLOWREACH_CONFIG_HPP
