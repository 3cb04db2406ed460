#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "hypkob/error.hpp"
#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob {

LayeredGraph::LayeredGraph(const HyperbolicModel& model, double level_ratio)
    : model_(model), ratio_(level_ratio), log_ratio_(std::log(level_ratio)), eps_(model.epsilon()) {
  if (!(level_ratio > 1.0)) throw Error(ErrorCode::ConfigError, "level ratio must exceed 1");
}

double LayeredGraph::level_t(int k) const { return eps_ * std::exp(-k * log_ratio_); }

int LayeredGraph::level_above(double t) const {
  if (t >= eps_) return 0;
  int k = static_cast<int>(std::floor(std::log(eps_ / t) / log_ratio_));
  while (k > 0 && level_t(k) < t) --k;
  while (level_t(k + 1) >= t) ++k;
  return k;
}

int LayeredGraph::levels_for(double t_min) const { return level_above(t_min); }

double LayeredGraph::vertical_weight(double t1, double t2, LayerWeights w) const {
  const double l = std::abs(std::log(t1 / t2));
  return w == LayerWeights::D ? 0.5 * l : l;
}

double LayeredGraph::horizontal_weight(int edge, int level, LayerWeights w) const {
  const BoundaryGraph& g = model_.graph();
  const GraphEdge& e = g.edges()[static_cast<std::size_t>(edge)];
  const double t = level_t(level);
  if (w == LayerWeights::D) return 2.0 * e.weight / std::sqrt(t);
  // one-point midpoint rule for the Kobayashi estimate along the shell chord
  const Vec& nu = g.node_normal(e.u);
  const Vec& nv = g.node_normal(e.v);
  const Vec c = (g.node(e.v) - g.node(e.u)) - t * (nv - nu);
  const Vec cv = e.vertical * (e.vertical.transpose() * c);
  const double cvn = cv.norm();
  const double chn = (c - cv).norm();
  const double tm = e.sagitta + t * 0.5 * (nu + nv).norm();
  return chn / std::sqrt(tm) + cvn / tm;
}

namespace {

struct Attachment {
  int layer_id;
  int inserted;
  double weight;
};

struct Space {
  int n = 0;  // boundary nodes
  int L = 0;  // levels 0..L-1
  std::vector<std::vector<Attachment>> by_inserted;
  std::vector<std::vector<std::pair<int, double>>> inserted_links;  // inserted-inserted
  std::unordered_map<int, std::vector<std::pair<int, double>>> by_layer;
  int layer_count() const { return n * L; }
};

}  // namespace

namespace {

Space make_space(const LayeredGraph& lg, const HyperbolicModel& model, const std::vector<const Site*>& sites,
                 LayerWeights w) {
  Space s;
  s.n = model.graph().size();
  double tmin = std::numeric_limits<double>::infinity();
  for (const Site* p : sites) tmin = std::min(tmin, p->t);
  s.L = lg.levels_for(tmin) + 1;
  s.by_inserted.resize(sites.size());
  s.inserted_links.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Site& p = *sites[i];
    const int ka = std::min(lg.level_above(p.t), s.L - 1);
    auto attach = [&](int k) {
      const int id = p.node * s.L + k;
      const double wt = lg.vertical_weight(lg.level_t(k), p.t, w);
      s.by_inserted[i].push_back({id, static_cast<int>(i), wt});
      s.by_layer[id].push_back({static_cast<int>(i), wt});
    };
    attach(ka);
    if (ka + 1 < s.L) attach(ka + 1);
  }
  // direct vertical links between inserted points sharing a column
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      if (sites[i]->node != sites[j]->node) continue;
      const double wt = lg.vertical_weight(sites[i]->t, sites[j]->t, w);
      s.inserted_links[i].push_back({static_cast<int>(j), wt});
      s.inserted_links[j].push_back({static_cast<int>(i), wt});
    }
  }
  return s;
}

}  // namespace

LayeredGraph::Result LayeredGraph::shortest(const Site& x, const Site& y, LayerWeights w, bool want_path) const {
  const BoundaryGraph& g = model_.graph();
  std::vector<const Site*> sites{&x, &y};
  Space sp = make_space(*this, model_, sites, w);
  const int nl = sp.layer_count();
  const int total = nl + 2;
  const int src = nl, dst = nl + 1;

  std::vector<double> sqrt_t(static_cast<std::size_t>(sp.L)), tl(static_cast<std::size_t>(sp.L));
  for (int k = 0; k < sp.L; ++k) {
    tl[static_cast<std::size_t>(k)] = level_t(k);
    sqrt_t[static_cast<std::size_t>(k)] = std::sqrt(tl[static_cast<std::size_t>(k)]);
  }
  auto heuristic = [&](int id) -> double {
    if (id == dst) return 0.0;
    double t, hh;
    int col;
    if (id >= nl) {
      t = sites[static_cast<std::size_t>(id - nl)]->t;
      hh = sites[static_cast<std::size_t>(id - nl)]->h;
      col = sites[static_cast<std::size_t>(id - nl)]->node;
    } else {
      const int k = id % sp.L;
      t = tl[static_cast<std::size_t>(k)];
      hh = sqrt_t[static_cast<std::size_t>(k)];
      col = id / sp.L;
    }
    if (w == LayerWeights::K) return std::abs(std::log(t / y.t));
    const double D = g.node_distance(col, y.node);
    const double hmax = std::max(hh, y.h), hmin = std::min(hh, y.h);
    return 2.0 * std::log1p(D / hmax) + std::log(hmax / hmin);
  };

  std::vector<double> dist(static_cast<std::size_t>(total), std::numeric_limits<double>::infinity());
  std::vector<int> pred(want_path ? static_cast<std::size_t>(total) : 0, -1);
  std::vector<char> closed(static_cast<std::size_t>(total), 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<std::size_t>(src)] = 0.0;
  pq.emplace(heuristic(src), src);

  auto relax = [&](int from, int to, double wt) {
    const double nd = dist[static_cast<std::size_t>(from)] + wt;
    if (nd < dist[static_cast<std::size_t>(to)]) {
      dist[static_cast<std::size_t>(to)] = nd;
      if (want_path) pred[static_cast<std::size_t>(to)] = from;
      pq.emplace(nd + heuristic(to), to);
    }
  };

  while (!pq.empty()) {
    const int u = pq.top().second;
    pq.pop();
    if (closed[static_cast<std::size_t>(u)]) continue;
    closed[static_cast<std::size_t>(u)] = 1;
    if (u == dst) break;
    if (u >= nl) {
      const int i = u - nl;
      for (const auto& a : sp.by_inserted[static_cast<std::size_t>(i)]) relax(u, a.layer_id, a.weight);
      for (const auto& [j, wt] : sp.inserted_links[static_cast<std::size_t>(i)]) relax(u, nl + j, wt);
      continue;
    }
    const int col = u / sp.L, k = u % sp.L;
    if (k > 0) relax(u, u - 1, vertical_weight(tl[static_cast<std::size_t>(k - 1)], tl[static_cast<std::size_t>(k)], w));
    if (k + 1 < sp.L) relax(u, u + 1, vertical_weight(tl[static_cast<std::size_t>(k)], tl[static_cast<std::size_t>(k + 1)], w));
    for (const auto* a = g.adj_begin(col); a != g.adj_end(col); ++a) {
      relax(u, a->node * sp.L + k, horizontal_weight(a->edge, k, w));
    }
    if (auto it = sp.by_layer.find(u); it != sp.by_layer.end()) {
      for (const auto& [i, wt] : it->second) relax(u, nl + i, wt);
    }
  }
  Result r;
  r.length = dist[static_cast<std::size_t>(dst)];
  if (!std::isfinite(r.length)) throw Error(ErrorCode::GraphDisconnected, "layered graph search failed");
  if (want_path) {
    std::vector<int> ids;
    for (int v = dst; v != -1; v = pred[static_cast<std::size_t>(v)]) ids.push_back(v);
    std::reverse(ids.begin(), ids.end());
    for (int id : ids) {
      if (id >= nl) {
        r.points.push_back(sites[static_cast<std::size_t>(id - nl)]->x);
      } else {
        const int col = id / sp.L, k = id % sp.L;
        r.points.push_back(g.node(col) - tl[static_cast<std::size_t>(k)] * g.node_normal(col));
      }
    }
  }
  return r;
}

std::vector<double> LayeredGraph::shortest_many(const Site& x, const std::vector<Site>& ys, LayerWeights w) const {
  const BoundaryGraph& g = model_.graph();
  std::vector<const Site*> sites{&x};
  for (const auto& y : ys) sites.push_back(&y);
  Space sp = make_space(*this, model_, sites, w);
  const int nl = sp.layer_count();
  const int total = nl + static_cast<int>(sites.size());
  std::vector<double> tl(static_cast<std::size_t>(sp.L));
  for (int k = 0; k < sp.L; ++k) tl[static_cast<std::size_t>(k)] = level_t(k);

  std::vector<double> dist(static_cast<std::size_t>(total), std::numeric_limits<double>::infinity());
  std::vector<char> closed(static_cast<std::size_t>(total), 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<std::size_t>(nl)] = 0.0;
  pq.emplace(0.0, nl);
  std::size_t remaining = ys.size();
  auto relax = [&](int from, int to, double wt) {
    const double nd = dist[static_cast<std::size_t>(from)] + wt;
    if (nd < dist[static_cast<std::size_t>(to)]) {
      dist[static_cast<std::size_t>(to)] = nd;
      pq.emplace(nd, to);
    }
  };
  while (!pq.empty() && remaining > 0) {
    const int u = pq.top().second;
    pq.pop();
    if (closed[static_cast<std::size_t>(u)]) continue;
    closed[static_cast<std::size_t>(u)] = 1;
    if (u >= nl) {
      const int i = u - nl;
      if (i > 0) --remaining;
      for (const auto& a : sp.by_inserted[static_cast<std::size_t>(i)]) relax(u, a.layer_id, a.weight);
      for (const auto& [j, wt] : sp.inserted_links[static_cast<std::size_t>(i)]) relax(u, nl + j, wt);
      continue;
    }
    const int col = u / sp.L, k = u % sp.L;
    if (k > 0) relax(u, u - 1, vertical_weight(tl[static_cast<std::size_t>(k - 1)], tl[static_cast<std::size_t>(k)], w));
    if (k + 1 < sp.L) relax(u, u + 1, vertical_weight(tl[static_cast<std::size_t>(k)], tl[static_cast<std::size_t>(k + 1)], w));
    for (const auto* a = g.adj_begin(col); a != g.adj_end(col); ++a) {
      relax(u, a->node * sp.L + k, horizontal_weight(a->edge, k, w));
    }
    if (auto it = sp.by_layer.find(u); it != sp.by_layer.end()) {
      for (const auto& [i, wt] : it->second) relax(u, nl + i, wt);
    }
  }
  std::vector<double> out(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    out[j] = dist[static_cast<std::size_t>(nl) + 1 + j];
    if (!std::isfinite(out[j])) throw Error(ErrorCode::GraphDisconnected, "layered graph search failed");
  }
  return out;
}

}  // namespace hypkob
