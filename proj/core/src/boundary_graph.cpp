#include "hypkob/boundary_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <queue>
#include <random>

#include "hypkob/error.hpp"
#include "hypkob/parallel.hpp"

namespace hypkob {

namespace {

constexpr std::size_t kMaxApspNodes = 8192;

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  int comps = n;
  for (const auto& [u, v] : edges) {
    const int a = find_root(parent, u), b = find_root(parent, v);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --comps;
    }
  }
  return comps == 1;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace

Mat BoundaryGraph::vertical_frame(const Vec& p) const {
  const Vec n = projection_->domain().normal(p);
  Vec m = structure_->J(p).transpose() * n;
  m -= m.dot(n) * n;
  const double mn = m.norm();
  if (!(mn > 1e-8)) throw Error(ErrorCode::ContactUnavailable, "J^T n is parallel to the normal");
  Mat Q(n.size(), 2);
  Q.col(0) = n;
  Q.col(1) = m / mn;
  return Q;
}

double BoundaryGraph::aux_factor(const Vec& mid) const { return 1.0 + params_.aux_conformal * mid(0) * mid(0); }

std::shared_ptr<const BoundaryGraph> BoundaryGraph::build(std::shared_ptr<const HeightProjection> projection,
                                                          std::shared_ptr<const Structure> structure,
                                                          GraphParams params) {
  if (!projection || !structure) throw Error(ErrorCode::ConfigError, "graph needs a projection and a structure");
  const Domain& dom = projection->domain();
  if (dom.dimension() != structure->dimension()) throw Error(ErrorCode::ConfigError, "dimension mismatch");
  if (dom.dimension() < 4) throw Error(ErrorCode::DimensionTooSmall, "contact distribution needs 2n >= 4");
  if (!(params.anisotropy >= 1.0)) throw Error(ErrorCode::ConfigError, "anisotropy must be >= 1");
  if (params.n_nodes < 2 || params.k_neighbors < 1) throw Error(ErrorCode::ConfigError, "bad graph size");

  std::shared_ptr<BoundaryGraph> g(new BoundaryGraph());
  g->projection_ = std::move(projection);
  g->structure_ = std::move(structure);
  g->params_ = params;
  const int n = params.n_nodes << params.refinement;
  if (static_cast<std::size_t>(n) > kMaxApspNodes) throw Error(ErrorCode::ConfigError, "too many graph nodes");
  g->nodes_ = sample_boundary(dom, n, params.seed);
  g->tree_ = KdTree(g->nodes_);

  std::vector<std::pair<int, int>> pairs;
  int k = params.k_neighbors;
  for (;;) {
    pairs.clear();
    for (int u = 0; u < n; ++u) {
      for (const auto& [d2, v] : g->tree_.knn(g->nodes_[static_cast<std::size_t>(u)], std::min(k + 1, n))) {
        (void)d2;
        if (v != u) pairs.emplace_back(std::min(u, v), std::max(u, v));
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    if (connected(n, pairs)) break;
    if (k >= params.max_k) throw Error(ErrorCode::GraphDisconnected, "graph disconnected at the neighbour cap");
    k = std::min(2 * k, params.max_k);
  }
  g->k_used_ = k;

  g->edges_.resize(pairs.size());
  const BoundaryGraph& cg = *g;
  parallel_for(pairs.size(), [&](std::size_t i) {
    GraphEdge e;
    e.u = pairs[i].first;
    e.v = pairs[i].second;
    const Vec& a = cg.nodes_[static_cast<std::size_t>(e.u)];
    const Vec& b = cg.nodes_[static_cast<std::size_t>(e.v)];
    const Vec mid = 0.5 * (a + b);
    const BoundaryFoot foot = cg.projection_->nearest_boundary_point(mid);
    e.vertical = cg.vertical_frame(foot.point);
    e.sagitta = foot.distance;
    const Vec c = b - a;
    const Vec cv = e.vertical * (e.vertical.transpose() * c);
    const Vec ch = c - cv;
    const double lam = params.anisotropy;
    e.weight = std::sqrt(ch.squaredNorm() + lam * lam * cv.squaredNorm()) * cg.aux_factor(mid);
    g->edges_[i] = std::move(e);
  });
  g->finalize();
  return g;
}

void BoundaryGraph::finalize() {
  const std::size_t n = nodes_.size();
  if (tree_.size() != n) tree_ = KdTree(nodes_);
  normals_.resize(n);
  for (std::size_t i = 0; i < n; ++i) normals_[i] = projection_->domain().normal(nodes_[i]);

  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges_) {
    if (!(e.weight > 0.0)) throw Error(ErrorCode::ConfigError, "non-positive edge weight");
    ++deg[static_cast<std::size_t>(e.u)];
    ++deg[static_cast<std::size_t>(e.v)];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    adj_[fill[static_cast<std::size_t>(e.u)]++] = {e.v, e.weight, static_cast<int>(i)};
    adj_[fill[static_cast<std::size_t>(e.v)]++] = {e.u, e.weight, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
              [](const Adj& a, const Adj& b) { return a.node < b.node; });
  }

  apsp_.assign(n * n, 0.0);
  parallel_for(n, [&](std::size_t s) {
    std::vector<double> dist;
    dijkstra(static_cast<int>(s), dist, nullptr);
    for (std::size_t t = s; t < n; ++t) {
      if (!std::isfinite(dist[t])) throw Error(ErrorCode::GraphDisconnected, "unreachable node");
      apsp_[s * n + t] = dist[t];
    }
  });
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < s; ++t) apsp_[s * n + t] = apsp_[t * n + s];
  }

  std::vector<double> w;
  w.reserve(edges_.size());
  max_edge_ = 0.0;
  for (const auto& e : edges_) {
    w.push_back(e.weight);
    max_edge_ = std::max(max_edge_, e.weight);
  }
  median_edge_ = median_of(w);
  std::vector<double> sp(n);
  max_spacing_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = tree_.knn(nodes_[i], 2);
    sp[i] = std::sqrt(r.back().first);
    max_spacing_ = std::max(max_spacing_, sp[i]);
  }
  median_spacing_ = median_of(sp);
  diameter_ = *std::max_element(apsp_.begin(), apsp_.end());
}

void BoundaryGraph::dijkstra(int src, std::vector<double>& dist, std::vector<int>* pred) const {
  const std::size_t n = nodes_.size();
  dist.assign(n, std::numeric_limits<double>::infinity());
  if (pred) pred->assign(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<std::size_t>(src)] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const Adj* a = adj_begin(u); a != adj_end(u); ++a) {
      const double nd = d + a->weight;
      if (nd < dist[static_cast<std::size_t>(a->node)]) {
        dist[static_cast<std::size_t>(a->node)] = nd;
        if (pred) (*pred)[static_cast<std::size_t>(a->node)] = u;
        pq.emplace(nd, a->node);
      }
    }
  }
}

int BoundaryGraph::snap(const Vec& p) const { return tree_.nearest(p); }

std::vector<int> BoundaryGraph::node_path(int a, int b) const {
  const int s = std::min(a, b), t = std::max(a, b);
  std::vector<double> dist;
  std::vector<int> pred;
  dijkstra(s, dist, &pred);
  std::vector<int> path;
  for (int v = t; v != -1; v = pred[static_cast<std::size_t>(v)]) {
    path.push_back(v);
    if (v == s) break;
  }
  std::reverse(path.begin(), path.end());  // s ... t
  if (path.front() != s) throw Error(ErrorCode::GraphDisconnected, "no path between nodes");
  if (a > b) std::reverse(path.begin(), path.end());
  return path;
}

BoundaryPath BoundaryGraph::boundary_geodesic(const Vec& p, const Vec& q) const {
  const int a = snap(p), b = snap(q);
  BoundaryPath out;
  out.nodes = node_path(a, b);
  for (int v : out.nodes) out.points.push_back(node(v));
  out.length = node_distance(a, b);
  return out;
}

double BoundaryGraph::chord_weight(const Vec& p, const Vec& q) const {
  const Vec c = q - p;
  if (c.squaredNorm() == 0.0) return 0.0;
  const Vec mid = 0.5 * (p + q);
  const BoundaryFoot foot = projection_->nearest_boundary_point(mid);
  const Mat Q = vertical_frame(foot.point);
  const Vec cv = Q * (Q.transpose() * c);
  const Vec ch = c - cv;
  const double lam = params_.anisotropy;
  return std::sqrt(ch.squaredNorm() + lam * lam * cv.squaredNorm()) * aux_factor(mid);
}

std::vector<std::pair<double, int>> BoundaryGraph::near_nodes(const Vec& p, int k) const {
  return tree_.knn(p, std::min(k, size()));
}

namespace {
constexpr int kResolveNeighbours = 4;
}

double BoundaryGraph::resolved_distance(const Vec& p, const Vec& q) const {
  const double e = (p - q).norm();
  if (e <= 1e-12) return 0.0;
  if (e <= resolution_radius()) return chord_weight(p, q);
  const auto np = near_nodes(p, kResolveNeighbours);
  const auto nq = near_nodes(q, kResolveNeighbours);
  std::vector<double> cp, cq;
  for (const auto& [d2, a] : np) cp.push_back(chord_weight(p, node(a)));
  for (const auto& [d2, b] : nq) cq.push_back(chord_weight(node(b), q));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < np.size(); ++i) {
    for (std::size_t j = 0; j < nq.size(); ++j) {
      best = std::min(best, cp[i] + node_distance(np[i].second, nq[j].second) + cq[j]);
    }
  }
  return best;
}

BoundaryPath BoundaryGraph::resolved_geodesic(const Vec& p, const Vec& q) const {
  BoundaryPath out;
  const double e = (p - q).norm();
  if (e <= 1e-12) {
    out.points = {p};
    return out;
  }
  if (e <= resolution_radius()) {
    out.points = {p, q};
    out.length = chord_weight(p, q);
    return out;
  }
  const auto np = near_nodes(p, kResolveNeighbours);
  const auto nq = near_nodes(q, kResolveNeighbours);
  double best = std::numeric_limits<double>::infinity();
  int ba = -1, bb = -1;
  std::vector<double> cp, cq;
  for (const auto& [d2, a] : np) cp.push_back(chord_weight(p, node(a)));
  for (const auto& [d2, b] : nq) cq.push_back(chord_weight(node(b), q));
  for (std::size_t i = 0; i < np.size(); ++i) {
    for (std::size_t j = 0; j < nq.size(); ++j) {
      const double v = cp[i] + node_distance(np[i].second, nq[j].second) + cq[j];
      if (v < best) {
        best = v;
        ba = np[i].second;
        bb = nq[j].second;
      }
    }
  }
  out.nodes = node_path(ba, bb);
  out.points.push_back(p);
  for (int v : out.nodes) {
    if ((node(v) - out.points.back()).norm() > 1e-12) out.points.push_back(node(v));
  }
  if ((q - out.points.back()).norm() > 1e-12) out.points.push_back(q);
  out.length = best;
  return out;
}

void BoundaryGraph::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "hypkob-boundary-graph";
  j["version"] = 1;
  j["params"] = {{"n_nodes", params_.n_nodes},       {"k_neighbors", params_.k_neighbors},
                 {"anisotropy", params_.anisotropy}, {"seed", params_.seed},
                 {"max_k", params_.max_k},           {"refinement", params_.refinement},
                 {"aux_conformal", params_.aux_conformal}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& p : nodes_) nodes.push_back(to_std(p));
  j["nodes"] = std::move(nodes);
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) edges.push_back({e.u, e.v, e.weight});
  j["edges"] = std::move(edges);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write graph file " + path);
  out << j.dump();
}

std::shared_ptr<const BoundaryGraph> BoundaryGraph::load(const std::string& path,
                                                         std::shared_ptr<const HeightProjection> projection,
                                                         std::shared_ptr<const Structure> structure) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read graph file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed graph file: ") + e.what());
  }
  if (j.value("format", "") != "hypkob-boundary-graph") throw Error(ErrorCode::ConfigError, "not a graph file");
  std::shared_ptr<BoundaryGraph> g(new BoundaryGraph());
  g->projection_ = std::move(projection);
  g->structure_ = std::move(structure);
  const auto& p = j.at("params");
  g->params_.n_nodes = p.at("n_nodes").get<int>();
  g->params_.k_neighbors = p.at("k_neighbors").get<int>();
  g->params_.anisotropy = p.at("anisotropy").get<double>();
  g->params_.seed = p.at("seed").get<std::uint64_t>();
  g->params_.max_k = p.at("max_k").get<int>();
  g->params_.refinement = p.at("refinement").get<int>();
  g->params_.aux_conformal = p.at("aux_conformal").get<double>();
  const int dim = g->projection_->domain().dimension();
  for (const auto& row : j.at("nodes")) {
    Vec v = from_std(row.get<std::vector<double>>());
    if (v.size() != dim) throw Error(ErrorCode::ConfigError, "graph node dimension mismatch");
    g->nodes_.push_back(std::move(v));
  }
  g->tree_ = KdTree(g->nodes_);
  for (const auto& row : j.at("edges")) {
    GraphEdge e;
    e.u = row.at(0).get<int>();
    e.v = row.at(1).get<int>();
    e.weight = row.at(2).get<double>();
    if (e.u < 0 || e.v < 0 || e.u >= g->size() || e.v >= g->size()) {
      throw Error(ErrorCode::ConfigError, "edge references a missing node");
    }
    const Vec& a = g->nodes_[static_cast<std::size_t>(e.u)];
    const Vec& b = g->nodes_[static_cast<std::size_t>(e.v)];
    const BoundaryFoot foot = g->projection_->nearest_boundary_point(0.5 * (a + b));
    e.vertical = g->vertical_frame(foot.point);
    e.sagitta = foot.distance;
    g->edges_.push_back(std::move(e));
  }
  g->k_used_ = g->params_.k_neighbors;
  g->finalize();
  return g;
}

LipschitzReport lipschitz_estimate(const BoundaryGraph& graph, const BoundaryGraph& target, const BoundaryMap& map,
                                   int n_pairs, std::uint64_t seed) {
  LipschitzReport r;
  r.floor = 5.0 * graph.median_edge_weight();
  std::mt19937_64 rng(seed);
  const Domain& tdom = target.projection().domain();
  const auto n = static_cast<std::uint64_t>(graph.size());
  int attempts = 0;
  while (r.pairs_used < n_pairs && attempts < 50 * n_pairs + 100) {
    ++attempts;
    const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    const Vec fa = map.f(graph.node(a)), fb = map.f(graph.node(b));
    for (const Vec* img : {&fa, &fb}) {
      const Vec gr = tdom.gradient(*img);
      if (!img->allFinite() || std::abs(tdom.rho(*img)) > map.tolerance * std::max(gr.norm(), 1.0)) {
        throw Error(ErrorCode::ImageOffBoundary, "mapped point is not on the target boundary");
      }
    }
    const double d = graph.node_distance(a, b);
    if (!(d >= r.floor)) continue;
    const double dt = target.node_distance(target.snap(fa), target.snap(fb));
    r.ratio = std::max(r.ratio, dt / d);
    ++r.pairs_used;
  }
  return r;
}

}  // namespace hypkob
