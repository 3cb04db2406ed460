#include "hypkob/config.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hypkob/error.hpp"

#ifndef HYPKOB_VERSION_STRING
#define HYPKOB_VERSION_STRING "0.0.0"
#endif

namespace hypkob {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* version() { return HYPKOB_VERSION_STRING; }

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    config_error(what + ": " + e.what());
  }
}

Vec vec_of(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) config_error(what + " must be a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_error(what + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat mat_of(const json& j, int dim, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) config_error(what + " must have " + std::to_string(dim) + " rows");
  Mat m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const Vec row = vec_of(j[static_cast<std::size_t>(r)], what);
    if (row.size() != dim) config_error(what + " rows must have " + std::to_string(dim) + " entries");
    m.row(r) = row.transpose();
  }
  return m;
}

std::vector<int> ints_of(const json& j, int dim, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) config_error(what + " must have " + std::to_string(dim) + " entries");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<int>() < 0) config_error(what + " must be nonnegative integers");
    out.push_back(e.get<int>());
  }
  return out;
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

/// Inline object or a path relative to base_dir.
std::string resolve_spec(const json& j, const std::string& base_dir, const std::string& what) {
  if (j.is_object()) return j.dump();
  if (j.is_string()) {
    fs::path p(j.get<std::string>());
    if (p.is_relative()) p = fs::path(base_dir) / p;
    const std::string text = read_file(p.string());
    parse_json(text, what);
    return text;
  }
  config_error(what + " must be an object or a path");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) config_error(std::string(name) + " must be positive");
}

}  // namespace

std::shared_ptr<Domain> build_domain(const std::string& spec) {
  const json j = parse_json(spec, "domain");
  if (!j.is_object() || !j.contains("type")) config_error("domain needs a 'type'");
  const std::string type = j["type"].get<std::string>();
  DomainOptions opt;
  if (j.contains("fd_step")) opt.fd_step = j["fd_step"].get<double>();
  if (j.contains("reach")) opt.reach_override = j["reach"].get<double>();
  take(j, "analytic", opt.use_analytic);

  std::shared_ptr<const DefiningFunction> f;
  Box box;
  if (type == "ball") {
    int dim = 4;
    double r = 1.0;
    take(j, "dimension", dim);
    take(j, "radius", r);
    Vec c = j.contains("center") ? vec_of(j["center"], "center") : Vec::Zero(dim);
    dim = static_cast<int>(c.size());
    require_positive(r, "radius");
    f = std::make_shared<BallFunction>(c, r);
    box = {c.array() - 1.05 * r, c.array() + 1.05 * r};
  } else if (type == "ellipsoid" || type == "superellipsoid") {
    const Vec axes = vec_of(j.value("semi_axes", json()), "semi_axes");
    for (Eigen::Index i = 0; i < axes.size(); ++i) require_positive(axes(i), "semi_axes");
    if (type == "ellipsoid") {
      f = std::make_shared<EllipsoidFunction>(axes);
    } else {
      double p = 4.0;
      take(j, "exponent", p);
      if (p < 2.0) config_error("exponent must be at least 2");
      f = std::make_shared<SuperellipsoidFunction>(axes, p);
    }
    box = {-1.05 * axes, 1.05 * axes};
  } else if (type == "polynomial") {
    int dim = 0;
    take(j, "dimension", dim);
    if (dim < 2) config_error("polynomial needs 'dimension' >= 2");
    std::vector<Monomial> terms;
    for (const auto& t : j.value("terms", json::array())) {
      Monomial m;
      m.coefficient = t.value("coefficient", 0.0);
      m.exponents = ints_of(t.value("exponents", json()), dim, "exponents");
      terms.push_back(std::move(m));
    }
    if (terms.empty()) config_error("polynomial needs terms");
    if (!j.contains("box")) config_error("polynomial needs a 'box'");
    box = {vec_of(j["box"].value("lo", json()), "box.lo"), vec_of(j["box"].value("hi", json()), "box.hi")};
    f = std::make_shared<PolynomialFunction>(dim, std::move(terms));
  } else {
    config_error("unknown domain type '" + type + "'");
  }
  if (box.lo.size() != f->dimension() || box.hi.size() != f->dimension()) config_error("box dimension mismatch");
  return std::make_shared<Domain>(f, box, opt);
}

std::shared_ptr<Structure> build_structure(const std::string& spec, int dimension) {
  const json j = spec.empty() ? json::object() : parse_json(spec, "structure");
  const std::string type = j.value("type", std::string("standard"));
  const double fd = j.value("fd_step", 1e-5);
  if (type == "standard") return std::make_shared<StandardStructure>(dimension);
  if (type == "conjugated") {
    Mat P0 = j.contains("P0") ? mat_of(j["P0"], dimension, "P0") : Mat::Identity(dimension, dimension);
    std::vector<Mat> B;
    for (const auto& b : j.value("B", json::array())) B.push_back(mat_of(b, dimension, "B"));
    if (!B.empty() && static_cast<int>(B.size()) != dimension) config_error("B needs one matrix per coordinate");
    return std::make_shared<ConjugatedStructure>(P0, B, fd);
  }
  if (type == "polynomial") {
    std::vector<PolynomialStructure::Term> terms;
    for (const auto& t : j.value("terms", json::array()))
      terms.push_back({mat_of(t.value("coefficient", json()), dimension, "coefficient"),
                       ints_of(t.value("exponents", json()), dimension, "exponents")});
    if (terms.empty()) config_error("polynomial structure needs terms");
    return std::make_shared<PolynomialStructure>(dimension, std::move(terms), fd);
  }
  if (type == "grid") {
    Box box{vec_of(j["box"].value("lo", json()), "box.lo"), vec_of(j["box"].value("hi", json()), "box.hi")};
    std::vector<int> shape = ints_of(j.value("shape", json()), dimension, "shape");
    std::vector<Mat> values;
    for (const auto& v : j.value("values", json::array())) values.push_back(mat_of(v, dimension, "values"));
    return std::make_shared<GridStructure>(box, shape, values, fd);
  }
  config_error("unknown structure type '" + type + "'");
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text, "config");
  if (!j.is_object()) config_error("config must be an object");
  RunConfig c;
  c.text = text;
  if (!j.contains("domain")) config_error("config needs 'domain'");
  c.domain_spec = resolve_spec(j["domain"], base_dir, "domain");
  if (j.contains("structure")) c.structure_spec = resolve_spec(j["structure"], base_dir, "structure");

  if (j.contains("graph")) {
    const json& g = j["graph"];
    take(g, "n_nodes", c.graph.n_nodes);
    take(g, "k", c.graph.k_neighbors);
    take(g, "lambda", c.graph.anisotropy);
    take(g, "seed", c.graph.seed);
    take(g, "refinement", c.graph.refinement);
    take(g, "max_k", c.graph.max_k);
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    take(p, "tolerance", c.projection.tolerance);
    take(p, "max_iterations", c.projection.max_iterations);
    take(p, "safety", c.projection.safety_factor);
    take(p, "reach_samples", c.projection.reach_samples);
    take(p, "dense_samples", c.projection.dense_samples);
    take(p, "seed", c.projection.seed);
    if (p.contains("epsilon")) c.projection.epsilon = p["epsilon"].get<double>();
  }
  if (j.contains("layers")) take(j["layers"], "level_ratio", c.layers.level_ratio);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    take(s, "rel_tol", c.path_length.rel_tol);
    take(s, "max_depth", c.path_length.max_depth);
    take(s, "quadrature_tol", c.kobayashi.rel_tol);
  }
  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    const std::string kind = s.value("kind", std::string("boundary"));
    if (kind == "uniform")
      c.sampler.kind = SamplerKind::Uniform;
    else if (kind == "boundary")
      c.sampler.kind = SamplerKind::BoundaryBiased;
    else
      config_error("sampler kind must be 'uniform' or 'boundary'");
    take(s, "seed", c.sampler.seed);
  }
  take(j, "n_quadruples", c.n_quadruples);
  take(j, "n_pairs", c.n_pairs);
  take(j, "pair_seed", c.pair_seed);
  if (j.contains("qi")) take(j["qi"], "budget", c.qi.budget);
  if (j.contains("dynamics")) {
    const json& d = j["dynamics"];
    take(d, "family", c.dynamics.family);
    take(d, "s", c.dynamics.s);
    take(d, "theta", c.dynamics.theta);
    take(d, "angles", c.dynamics.angles);
    take(d, "n_starts", c.dynamics.n_starts);
    take(d, "seed", c.dynamics.seed);
    take(d, "n_max", c.iterate.n_max);
    if (c.dynamics.family != "contraction" && c.dynamics.family != "rotation")
      config_error("dynamics family must be 'contraction' or 'rotation'");
  }
  take(j, "output_dir", c.output_dir);
  take(j, "graph_cache", c.graph_cache);

  require_positive(c.projection.tolerance, "projection.tolerance");
  require_positive(c.path_length.rel_tol, "solver.rel_tol");
  require_positive(c.kobayashi.rel_tol, "solver.quadrature_tol");
  require_positive(c.qi.budget, "qi.budget");
  require_positive(c.graph.anisotropy, "graph.lambda");
  if (c.layers.level_ratio <= 1.0) config_error("layers.level_ratio must exceed 1");
  if (c.graph.n_nodes < 16) config_error("graph.n_nodes must be at least 16");
  if (c.graph.k_neighbors < 2) config_error("graph.k must be at least 2");
  if (c.n_quadruples < 1 || c.n_pairs < 1) config_error("sample counts must be positive");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path p = fs::absolute(path);
  RunConfig c = parse_run_config(text, p.parent_path().string());
  c.path = p.string();
  return c;
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::vector<PairRow> read_pairs(const std::string& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<PairRow> rows;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PairRow row;
    row.line = no;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool bad = false;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) bad = true;
      } catch (const std::exception&) {
        bad = true;
      }
    }
    if (bad) {
      row.error = "unparsable number";
    } else if (static_cast<int>(vals.size()) != 2 * dimension) {
      row.error = "expected " + std::to_string(2 * dimension) + " values";
    } else {
      Vec x(dimension), y(dimension);
      for (int i = 0; i < dimension; ++i) {
        x(i) = vals[static_cast<std::size_t>(i)];
        y(i) = vals[static_cast<std::size_t>(dimension + i)];
      }
      row.pair = std::make_pair(x, y);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_polyline_csv(const std::string& path, const Polyline& polyline, const HeightProjection& projection) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  const int dim = polyline.points.empty() ? 0 : static_cast<int>(polyline.points.front().size());
  out << "index,s";
  for (int i = 0; i < dim; ++i) out << ",x" << i;
  out << ",height\n";
  for (std::size_t k = 0; k < polyline.points.size(); ++k) {
    out << k << ',' << polyline.params[k];
    for (int i = 0; i < dim; ++i) out << ',' << polyline.points[k](i);
    out << ',' << std::sqrt(projection.project(polyline.points[k]).distance) << '\n';
  }
}

void write_orbit_csv(const std::string& path, const std::vector<OrbitRecord>& orbits) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  const int dim = orbits.empty() || orbits.front().iterates.empty() ? 0 : static_cast<int>(orbits.front().start.size());
  out << "orbit,k";
  for (int i = 0; i < dim; ++i) out << ",x" << i;
  out << ",height";
  for (int i = 0; i < dim; ++i) out << ",p" << i;
  out << '\n';
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    const auto& r = orbits[o];
    for (std::size_t k = 0; k < r.iterates.size(); ++k) {
      out << o << ',' << k;
      for (int i = 0; i < dim; ++i) out << ',' << r.iterates[k](i);
      out << ',' << r.heights[k];
      for (int i = 0; i < dim; ++i) out << ',' << r.projections[k](i);
      out << '\n';
    }
  }
}

void write_manifest(const std::string& dir, const Manifest& m) {
  fs::create_directories(dir);
  json j;
  j["tool"] = "hypkob";
  j["version"] = version();
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["arguments"] = m.arguments;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  j["timestamp"] = ts.str();
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
}

}  // namespace hypkob
