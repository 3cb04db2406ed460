// hypkob: batch front end for the hyperbolic-metric library.
//
// Exit codes: 0 pass, 1 analysis failure, 2 usage or config error, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypkob/config.hpp"
#include "hypkob/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hypkob;

namespace {

enum Exit { kPass = 0, kAnalysisFailure = 1, kUsage = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string metric = "g";
  std::string metric_b = "d";
  std::string pairs;
  std::optional<long> n_quadruples;
  std::string graph_cache;
  std::optional<int> refine;
  std::vector<double> from, to;
  std::string map = "rotation";
  int n_points = 24;
};

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Everything built from a config, created on first use.
class Session {
 public:
  Session(RunConfig cfg, Options opt) : cfg_(std::move(cfg)), opt_(std::move(opt)) {
    if (opt_.seed) {
      cfg_.sampler.seed = *opt_.seed;
      cfg_.pair_seed = *opt_.seed;
      cfg_.dynamics.seed = *opt_.seed;
    }
    if (opt_.refine) cfg_.graph.refinement = *opt_.refine;
    if (opt_.n_quadruples) cfg_.n_quadruples = *opt_.n_quadruples;
    if (!opt_.graph_cache.empty()) cfg_.graph_cache = opt_.graph_cache;
    if (!opt_.out.empty()) cfg_.output_dir = opt_.out;
  }

  const RunConfig& cfg() const { return cfg_; }
  const Options& opt() const { return opt_; }
  const std::string& out_dir() const { return cfg_.output_dir; }

  std::shared_ptr<const Domain> domain() {
    if (!domain_) domain_ = build_domain(cfg_.domain_spec);
    return domain_;
  }
  std::shared_ptr<const Structure> structure() {
    if (!structure_) structure_ = build_structure(cfg_.structure_spec, domain()->dimension());
    return structure_;
  }
  std::shared_ptr<const HeightProjection> projection() {
    if (!projection_) projection_ = std::make_shared<const HeightProjection>(domain(), cfg_.projection);
    return projection_;
  }
  std::shared_ptr<const BoundaryGraph> graph() {
    if (graph_) return graph_;
    const std::string& cache = cfg_.graph_cache;
    if (!cache.empty() && fs::exists(cache)) {
      graph_ = BoundaryGraph::load(cache, projection(), structure());
    } else {
      graph_ = BoundaryGraph::build(projection(), structure(), cfg_.graph);
      if (!cache.empty()) graph_->save(cache);
    }
    return graph_;
  }
  std::shared_ptr<const HyperbolicModel> model() {
    if (!model_) model_ = std::make_shared<const HyperbolicModel>(graph(), cfg_.layers);
    return model_;
  }

  std::unique_ptr<MetricFunctional> functional(const std::string& kind) {
    if (kind == "g") return std::make_unique<GFunctional>(model());
    if (kind == "d") return std::make_unique<DFunctional>(model());
    if (kind == "kob") return std::make_unique<KobayashiFunctional>(model(), cfg_.kobayashi);
    if (kind == "euclid") return std::make_unique<EuclideanFunctional>();
    throw Error(ErrorCode::ConfigError, "unknown metric '" + kind + "'");
  }

  /// Pairs from --pairs, or n_pairs sampled pairs.
  std::vector<std::pair<Vec, Vec>> pairs(long* bad_rows = nullptr) {
    std::vector<std::pair<Vec, Vec>> out;
    if (!opt_.pairs.empty()) {
      for (const auto& row : read_pairs(opt_.pairs, domain()->dimension())) {
        if (row.pair)
          out.push_back(*row.pair);
        else if (bad_rows)
          ++*bad_rows;
      }
      return out;
    }
    const auto pts = sample_points(*projection(), 2 * cfg_.n_pairs, {cfg_.sampler.kind, cfg_.pair_seed});
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) out.emplace_back(pts[i], pts[i + 1]);
    return out;
  }

  void manifest(const std::string& command, const std::vector<std::string>& args) {
    Manifest m;
    m.command = command;
    m.config_hash = content_hash(cfg_.text);
    m.seeds = {{"graph", cfg_.graph.seed},
               {"sampler", cfg_.sampler.seed},
               {"pairs", cfg_.pair_seed},
               {"dynamics", cfg_.dynamics.seed},
               {"projection", cfg_.projection.seed}};
    m.arguments = args;
    write_manifest(out_dir(), m);
  }

  void write_report(const std::string& name, const json& report) {
    fs::create_directories(out_dir());
    std::ofstream f(fs::path(out_dir()) / name);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + name);
    f << report.dump(2) << '\n';
  }

  json graph_json() {
    const auto& G = *graph();
    return {{"nodes", G.size()},
            {"lambda", G.params().anisotropy},
            {"refinement", G.params().refinement},
            {"k_used", G.k_used()},
            {"epsilon", projection()->epsilon()},
            {"diameter", G.diameter()},
            {"max_edge_weight", G.max_edge_weight()}};
  }

 private:
  RunConfig cfg_;
  Options opt_;
  std::shared_ptr<const Domain> domain_;
  std::shared_ptr<const Structure> structure_;
  std::shared_ptr<const HeightProjection> projection_;
  std::shared_ptr<const BoundaryGraph> graph_;
  std::shared_ptr<const HyperbolicModel> model_;
};

int cmd_check(Session& s) {
  const auto& dom = *s.domain();
  const auto& J = *s.structure();
  const auto boundary = sample_boundary(dom, 200, s.cfg().sampler.seed);
  auto pts = sample_interior(dom, 200, s.cfg().sampler.seed);
  pts.insert(pts.end(), boundary.begin(), boundary.end());

  json report;
  bool pass = true;
  const auto sr = check_structure(J, pts);
  report["structure"] = {{"pass", sr.pass}, {"max_deviation", sr.max_deviation}, {"worst_point", vec_json(sr.worst_point)}};
  pass = pass && sr.pass;

  const auto cr = check_strict_convexity(dom, J, 200, s.cfg().sampler.seed);
  report["levi"] = {{"pass", cr.pass}, {"margin", cr.margin}, {"samples", cr.samples}, {"worst_point", vec_json(cr.worst_point)}};
  pass = pass && cr.pass;

  json failures = json::array();
  double worst_identity = 0.0, min_sigma = INFINITY;
  for (const auto& p : boundary) {
    try {
      const auto c = contact_at(dom, J, p);
      worst_identity = std::max(worst_identity, c.identity_error);
      min_sigma = std::min(min_sigma, c.sigma_min);
    } catch (const Error& e) {
      failures.push_back({{"point", vec_json(p)}, {"error", to_string(e.code())}, {"detail", e.what()}});
    }
  }
  const bool contact_ok = failures.empty() && worst_identity <= 1e-6;
  report["contact"] = {{"pass", contact_ok},
                       {"samples", boundary.size()},
                       {"max_identity_error", worst_identity},
                       {"min_sigma", std::isfinite(min_sigma) ? json(min_sigma) : json(nullptr)},
                       {"failures", failures}};
  pass = pass && contact_ok;
  report["pass"] = pass;
  s.write_report("check.json", report);
  std::cout << "check: " << (pass ? "pass" : "FAIL") << " (levi margin " << cr.margin << ", contact failures "
            << failures.size() << ")\n";
  return pass ? kPass : kAnalysisFailure;
}

/// Long-format distance matrix over sampled points.
int dist_matrix(Session& s) {
  auto f = s.functional(s.opt().metric);
  const auto pts = sample_points(*s.projection(), s.opt().n_points, s.cfg().sampler);
  fs::create_directories(s.out_dir());
  std::ofstream out(fs::path(s.out_dir()) / "dist_matrix.csv");
  if (!out) throw Error(ErrorCode::IoError, "cannot write dist_matrix.csv");
  out << std::setprecision(17) << "i,j,metric,value\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::vector<Vec> rest(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1, pts.end());
    const auto row = f->distances_from(pts[i], rest);
    for (std::size_t k = 0; k < row.size(); ++k) out << i << ',' << i + 1 + k << ',' << s.opt().metric << ',' << row[k] << '\n';
  }
  json points = json::array();
  for (const auto& p : pts) points.push_back(vec_json(p));
  s.write_report("dist.json", {{"metric", s.opt().metric}, {"points", points}, {"seed", s.cfg().sampler.seed}});
  std::cout << "dist: " << pts.size() << " x " << pts.size() << " matrix -> " << s.out_dir() << "/dist_matrix.csv\n";
  return kPass;
}

int cmd_dist(Session& s) {
  if (s.opt().pairs.empty()) return dist_matrix(s);
  const auto rows = read_pairs(s.opt().pairs, s.domain()->dimension());
  const bool bracket = s.opt().metric == "d";
  auto f = s.functional(s.opt().metric);
  fs::create_directories(s.out_dir());
  const fs::path path = fs::path(s.out_dir()) / "dist.csv";
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(17) << "line,metric,value,lower,upper,error\n";
  long ok = 0, bad = 0;
  for (const auto& row : rows) {
    out << row.line << ',' << s.opt().metric << ',';
    if (!row.pair) {
      out << ",,,MalformedRow: " << row.error << '\n';
      ++bad;
      continue;
    }
    try {
      if (bracket) {
        const DValue v = s.model()->d_value(row.pair->first, row.pair->second);
        out << v.value << ',' << v.lower << ',' << v.upper << ",\n";
      } else {
        out << f->distance(row.pair->first, row.pair->second) << ",,,\n";
      }
      ++ok;
    } catch (const Error& e) {
      out << ",,," << to_string(e.code()) << '\n';
      ++bad;
    }
  }
  s.write_report("dist.json", {{"metric", s.opt().metric}, {"rows", rows.size()}, {"ok", ok}, {"errors", bad}});
  std::cout << "dist: " << ok << " rows, " << bad << " row errors -> " << path.string() << '\n';
  return kPass;
}

int cmd_delta(Session& s) {
  auto f = s.functional(s.opt().metric);
  const bool is_g = s.opt().metric == "g";
  const double threshold = is_g ? std::log(4.0) + 1e-9 : 0.0;
  HyperbolicityReport r;
  if (s.opt().metric == "euclid")
    r = four_point_delta(*f, sample_interior(*s.domain(), 400, s.cfg().sampler.seed), s.cfg().n_quadruples,
                         s.cfg().sampler.seed, threshold);
  else
    r = four_point_delta(*f, *s.projection(), s.cfg().sampler, s.cfg().n_quadruples, threshold);
  json worst = json::array();
  for (const auto& p : r.worst.points) worst.push_back(vec_json(p));
  json report{{"metric", r.functional},
              {"delta", r.delta},
              {"quadruples", r.quadruples},
              {"errors", r.errors},
              {"seed", r.seed},
              {"worst", {{"defect", r.worst.defect}, {"points", worst}}}};
  if (is_g) report["ln4_exceedances"] = r.exceed_count;
  if (s.opt().metric != "euclid") report["graph"] = s.graph_json();
  const bool pass = r.errors == 0 && (!is_g || r.exceed_count == 0);
  report["pass"] = pass;
  s.write_report("delta.json", report);
  std::cout << "delta(" << r.functional << ") = " << r.delta << " over " << r.quadruples << " quadruples\n";
  if (r.quadruples == 0) return kNumerical;
  return pass ? kPass : kAnalysisFailure;
}

int cmd_qi(Session& s) {
  auto a = s.functional(s.opt().metric);
  auto b = s.functional(s.opt().metric_b);
  long bad_rows = 0;
  const auto pairs = s.pairs(&bad_rows);
  QiOptions qo = s.cfg().qi;
  json report{{"a", a->name()}, {"b", b->name()}, {"pairs", pairs.size()}, {"bad_rows", bad_rows}};
  const bool gd = (s.opt().metric == "g" && s.opt().metric_b == "d") || (s.opt().metric == "d" && s.opt().metric_b == "g");
  std::optional<double> c_est;
  if (gd) {
    const auto c = estimate_C(*s.model(), pairs);
    c_est = c.C;
    qo.budget = c.C;
    report["estimate_C"] = {{"C", c.C},           {"vertical", c.vertical}, {"case1", c.case1},
                            {"case2", c.case2},   {"case3", c.case3},       {"outside", c.outside},
                            {"mixed", c.mixed},   {"min_margin", c.min_margin}};
  }
  const auto fit = qi_check(*a, *b, pairs, qo, s.model().get());
  json regimes = json::array();
  for (const auto& r : fit.regimes)
    regimes.push_back({{"regime", r.regime}, {"count", r.count}, {"q50", r.q50}, {"q90", r.q90}, {"q99", r.q99}, {"max", r.max}});
  json violations = json::array();
  for (const auto& v : fit.violations)
    violations.push_back({{"index", v.index}, {"a", v.a}, {"b", v.b}, {"reason", v.reason}});
  report["fit"] = {{"C", fit.C},
                   {"C_prime", fit.C_prime},
                   {"budget", qo.budget},
                   {"within_budget", fit.within_budget},
                   {"samples", fit.samples},
                   {"regimes", regimes},
                   {"violations", violations}};
  report["graph"] = s.graph_json();
  bool pass = fit.within_budget && fit.violations.empty();
  if (c_est) {
    const bool bracket = fit.C_prime <= *c_est + 1e-12;
    report["bracket_holds"] = bracket;
    pass = pass && bracket;
  }
  report["pass"] = pass;
  s.write_report("qi.json", report);
  std::cout << "qi(" << a->name() << ", " << b->name() << "): C = " << fit.C << ", C' = " << fit.C_prime;
  if (c_est) std::cout << ", estimate_C = " << *c_est;
  std::cout << '\n';
  return pass ? kPass : kAnalysisFailure;
}

int cmd_orbit(Session& s) {
  const auto& dyn = s.cfg().dynamics;
  const int dim = s.domain()->dimension();
  SelfMap F;
  if (dyn.family == "contraction")
    F = contraction_to_boundary(dim, dyn.s, dyn.theta);
  else if (dyn.family == "rotation")
    F = rotation_map(dyn.angles);
  else
    throw Error(ErrorCode::ConfigError, "unknown dynamics family '" + dyn.family + "'");
  const auto starts = sample_points(*s.projection(), dyn.n_starts, {SamplerKind::Uniform, dyn.seed});
  std::vector<OrbitRecord> orbits;
  for (const auto& x0 : starts) orbits.push_back(iterate(F, *s.projection(), x0, s.cfg().iterate));
  const auto c = classify_orbit(orbits, *s.graph(), s.cfg().classify);
  fs::create_directories(s.out_dir());
  write_orbit_csv((fs::path(s.out_dir()) / "orbit.csv").string(), orbits);
  json report{{"map", F.name},
              {"family", dyn.family},
              {"starts", starts.size()},
              {"verdict", to_string(c.verdict)},
              {"min_tail_height", c.min_tail_height},
              {"limit_spread", c.limit_spread},
              {"max_tail_motion", c.max_tail_motion},
              {"converging", c.converging},
              {"bounded", c.bounded},
              {"evidence", c.evidence},
              {"graph", s.graph_json()}};
  report["limit"] = c.limit ? vec_json(*c.limit) : json(nullptr);
  s.write_report("orbit.json", report);
  std::cout << "orbit(" << F.name << "): " << to_string(c.verdict) << '\n';
  return c.verdict == OrbitVerdict::Inconclusive ? kAnalysisFailure : kPass;
}

int cmd_geodesic(Session& s) {
  const int dim = s.domain()->dimension();
  Vec x, y;
  if (!s.opt().from.empty() || !s.opt().to.empty()) {
    if (static_cast<int>(s.opt().from.size()) != dim || static_cast<int>(s.opt().to.size()) != dim)
      throw Error(ErrorCode::ConfigError, "--from and --to need " + std::to_string(dim) + " coordinates");
    x = Eigen::Map<const Vec>(s.opt().from.data(), dim);
    y = Eigen::Map<const Vec>(s.opt().to.data(), dim);
  } else {
    const auto pairs = s.pairs();
    if (pairs.empty()) throw Error(ErrorCode::ConfigError, "geodesic needs --from/--to or a pairs file");
    x = pairs.front().first;
    y = pairs.front().second;
  }
  const std::string kind = s.opt().metric == "g" ? "d" : s.opt().metric;
  auto f = s.functional(kind);
  auto path = f->geodesic(x, y);
  if (!path) throw Error(ErrorCode::ConfigError, "metric '" + kind + "' has no geodesic solver");
  PathLength len;
  if (kind == "kob")
    len.value = len.lower = len.upper = k_length(static_cast<const KobayashiFunctional&>(*f), *path);
  else
    len = path_length(*path, *f, s.cfg().path_length);
  const double dist = f->distance(x, y);
  json segments = json::array();
  for (std::size_t i = 0; i + 1 < path->points.size(); ++i) {
    const Polyline piece = Polyline::from_points({path->points[i], path->points[i + 1]});
    segments.push_back(kind == "kob" ? k_length(static_cast<const KobayashiFunctional&>(*f), piece)
                                     : path_length(piece, *f, s.cfg().path_length).value);
  }
  json points = json::array();
  for (const auto& p : path->points) points.push_back(vec_json(p));
  fs::create_directories(s.out_dir());
  write_polyline_csv((fs::path(s.out_dir()) / "geodesic.csv").string(), *path, *s.projection());
  json report{{"metric", f->name()},
              {"from", vec_json(x)},
              {"to", vec_json(y)},
              {"polyline", {{"points", points}, {"segment_lengths", segments}}},
              {"distance", dist},
              {"length", {{"value", len.value}, {"lower", len.lower}, {"upper", len.upper}, {"depth", len.depth}}}};
  if (kind != "euclid") report["graph"] = s.graph_json();
  s.write_report("geodesic.json", report);
  std::cout << "geodesic(" << f->name() << "): distance " << dist << ", polyline length " << len.value << ", "
            << path->points.size() << " points\n";
  return kPass;
}

int cmd_lipschitz(Session& s) {
  BoundaryMap map;
  if (s.opt().map == "identity") {
    map.f = [](const Vec& p) { return p; };
  } else if (s.opt().map == "rotation") {
    const Mat R = complex_rotation(s.cfg().dynamics.angles);
    map.f = [R](const Vec& p) -> Vec { return R * p; };
  } else {
    throw Error(ErrorCode::ConfigError, "unknown boundary map '" + s.opt().map + "'");
  }
  const auto& G = *s.graph();
  const auto r = lipschitz_estimate(G, G, map, s.cfg().n_pairs, s.cfg().pair_seed);
  const bool pass = r.pairs_used > 0 && std::isfinite(r.ratio);
  s.write_report("lipschitz.json", {{"map", s.opt().map},
                                    {"ratio", r.ratio},
                                    {"pairs_used", r.pairs_used},
                                    {"floor", r.floor},
                                    {"graph", s.graph_json()},
                                    {"pass", pass}});
  std::cout << "lipschitz(" << s.opt().map << "): ratio " << r.ratio << " over " << r.pairs_used << " pairs\n";
  return pass ? kPass : kAnalysisFailure;
}

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return kUsage;
    default:
      return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypkob: hyperbolic metrics and Kobayashi estimates near strictly J-convex boundaries"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1, 1);
  Options opt;
  app.add_option("--config", opt.config, "run config (JSON)")->required();
  app.add_option("--seed", opt.seed, "override sampler, pair and dynamics seeds");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--metric", opt.metric, "metric")->check(CLI::IsMember({"g", "d", "kob", "euclid"}));
  app.add_option("--pairs", opt.pairs, "point pairs CSV")->check(CLI::ExistingFile);
  app.add_option("--n-quadruples", opt.n_quadruples, "quadruples for delta")->check(CLI::PositiveNumber);
  app.add_option("--graph-cache", opt.graph_cache, "boundary graph file, loaded when present and written otherwise");
  app.add_option("--refine", opt.refine, "graph refinement level")->check(CLI::NonNegativeNumber);

  auto* check = app.add_subcommand("check", "structure, Levi form and contact checks");
  auto* dist = app.add_subcommand("dist", "distances for a pairs file, or a matrix over sampled points");
  dist->add_option("--points", opt.n_points, "sampled points when no pairs file is given")->check(CLI::Range(2, 4096));
  auto* delta = app.add_subcommand("delta", "four-point hyperbolicity constant");
  auto* qi = app.add_subcommand("qi", "quasi-isometry fit between two metrics");
  qi->add_option("--against", opt.metric_b, "second metric")->check(CLI::IsMember({"g", "d", "kob", "euclid"}));
  auto* orbit = app.add_subcommand("orbit", "orbit iteration and classification");
  auto* geodesic = app.add_subcommand("geodesic", "geodesic polyline");
  geodesic->add_option("--from", opt.from, "start point")->delimiter(',');
  geodesic->add_option("--to", opt.to, "end point")->delimiter(',');
  auto* lipschitz = app.add_subcommand("lipschitz", "boundary map Lipschitz ratio");
  lipschitz->add_option("--map", opt.map, "boundary map")->check(CLI::IsMember({"identity", "rotation"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    Session s(load_run_config(opt.config), opt);
    std::string name;
    int rc = kPass;
    if (check->parsed()) {
      name = "check";
      rc = cmd_check(s);
    } else if (dist->parsed()) {
      name = "dist";
      rc = cmd_dist(s);
    } else if (delta->parsed()) {
      name = "delta";
      rc = cmd_delta(s);
    } else if (qi->parsed()) {
      name = "qi";
      rc = cmd_qi(s);
    } else if (orbit->parsed()) {
      name = "orbit";
      rc = cmd_orbit(s);
    } else if (geodesic->parsed()) {
      name = "geodesic";
      rc = cmd_geodesic(s);
    } else if (lipschitz->parsed()) {
      name = "lipschitz";
      rc = cmd_lipschitz(s);
    }
    s.manifest(name, args);
    return rc;
  } catch (const Error& e) {
    std::cerr << "hypkob: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "hypkob: " << e.what() << '\n';
    return kNumerical;
  }
}
