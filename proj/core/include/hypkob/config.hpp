#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypkob/dynamics.hpp"
#include "hypkob/gromov.hpp"
#include "hypkob/kobayashi.hpp"

namespace hypkob {

const char* version();

struct DynamicsSpec {
  std::string family = "contraction";  ///< contraction | rotation
  double s = 0.9;
  double theta = 0.7;
  std::vector<double> angles{0.3, 1.1};
  int n_starts = 20;
  std::uint64_t seed = 11;
};

/// Everything a run needs; all defaults are fixed values.
struct RunConfig {
  std::string path;          ///< resolved config path, empty for inline text
  std::string text;          ///< raw config bytes, hashed into the manifest
  std::string domain_spec;   ///< JSON text of the domain spec
  std::string structure_spec;
  GraphParams graph;
  ProjectionOptions projection;
  LayerOptions layers;
  PathLengthOptions path_length;
  KobayashiOptions kobayashi;
  SamplerSpec sampler;
  long n_quadruples = 10000;
  int n_pairs = 1000;
  std::uint64_t pair_seed = 5;
  QiOptions qi;
  IterateOptions iterate;
  ClassifyOptions classify;
  DynamicsSpec dynamics;
  std::string output_dir = "hypkob-out";
  std::string graph_cache;
};

/// Throws Error(ConfigError) on malformed input and Error(IoError) on missing files.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");

std::shared_ptr<Domain> build_domain(const std::string& spec);
std::shared_ptr<Structure> build_structure(const std::string& spec, int dimension);

/// 64-bit FNV-1a of the bytes, lower-case hex.
std::string content_hash(const std::string& bytes);

struct PairRow {
  std::size_t line = 0;
  std::optional<std::pair<Vec, Vec>> pair;
  std::string error;
};

/// Rows of 2 * dimension comma-separated numbers; '#' starts a comment.
std::vector<PairRow> read_pairs(const std::string& path, int dimension);

void write_polyline_csv(const std::string& path, const Polyline& polyline, const HeightProjection& projection);
void write_orbit_csv(const std::string& path, const std::vector<OrbitRecord>& orbits);

struct Manifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> arguments;
};

/// manifest.json in `dir`; the timestamp sits in its own field.
void write_manifest(const std::string& dir, const Manifest& manifest);

}  // namespace hypkob
