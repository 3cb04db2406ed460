#include "hypkob/hyperbolic_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "hypkob/error.hpp"

namespace hypkob {

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::G: return "g";
    case MetricKind::D: return "d";
    case MetricKind::Kobayashi: return "kob";
    case MetricKind::Euclidean: return "euclid";
    case MetricKind::External: return "external";
  }
  return "unknown";
}

std::size_t HyperbolicModel::KeyHash::operator()(const std::vector<long long>& k) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (long long v : k) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

HyperbolicModel::HyperbolicModel(std::shared_ptr<const BoundaryGraph> graph, LayerOptions options)
    : graph_(std::move(graph)), options_(options) {
  if (!graph_) throw Error(ErrorCode::ConfigError, "model needs a boundary graph");
  layers_ = std::make_unique<LayeredGraph>(*this, options_.level_ratio);
}

HyperbolicModel::~HyperbolicModel() = default;

Site HyperbolicModel::locate(const Vec& x) const {
  std::vector<long long> key(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) key[static_cast<std::size_t>(i)] = std::llround(x(i) * 1e12);
  {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.x == x) return it->second;
  }
  const BoundaryFoot f = projection().project(x);
  Site s;
  s.x = x;
  s.foot = f.point;
  s.normal = f.normal;
  s.t = f.distance;
  s.h = std::sqrt(f.distance);
  s.node = graph_->snap(f.point);
  s.in_collar = s.t <= epsilon();
  if (!(s.t > 0.0)) throw Error(ErrorCode::PointOutsideDomain, "point lies on the boundary");
  {
    std::unique_lock lock(cache_mutex_);
    if (cache_.size() >= options_.cache_capacity) cache_.clear();
    cache_.emplace(std::move(key), s);
  }
  return s;
}

Site HyperbolicModel::shell_site(const Site& s, double t) const {
  Site r = s;
  r.x = s.foot - t * s.normal;
  r.t = t;
  r.h = std::sqrt(t);
  r.in_collar = t <= epsilon();
  return r;
}

bool HyperbolicModel::same_projection(const Site& a, const Site& b) const {
  return (a.foot - b.foot).norm() <= options_.same_projection_tol;
}

namespace {
double g_formula(double D, double ha, double hb) {
  const double hmax = std::max(ha, hb), hmin = std::min(ha, hb);
  return 2.0 * std::log1p(D / hmax) + std::log(hmax / hmin);
}
}  // namespace

double HyperbolicModel::g(const Site& a, const Site& b) const {
  return g_formula(graph_->node_distance(a.node, b.node), a.h, b.h);
}

double HyperbolicModel::g_resolved(const Site& a, const Site& b) const {
  const double D = same_projection(a, b) ? 0.0 : graph_->resolved_distance(a.foot, b.foot);
  return g_formula(D, a.h, b.h);
}

double HyperbolicModel::composite_bound(const Site& a, const Site& b, int* regime) const {
  const double hmax = std::max(a.h, b.h), hmin = std::min(a.h, b.h);
  const double D = graph_->node_distance(a.node, b.node);
  const double vertical = std::log(hmax / hmin);
  const double se = std::sqrt(epsilon());
  int r;
  double across;
  if (D == 0.0) {
    r = 0;
    across = 0.0;
  } else if (D <= hmax) {
    r = 1;
    across = 2.0 * D / hmax;
  } else if (D <= se) {
    r = 2;
    across = 2.0 * std::log(D / hmax) + 2.0;
  } else {
    r = 3;
    across = 2.0 * std::log(se / hmax) + 2.0 * D / se;
  }
  if (regime) *regime = r;
  return vertical + across;
}

int classify_regime(const HyperbolicModel& model, const Site& a, const Site& b) {
  int r = 0;
  model.composite_bound(a, b, &r);
  return r;
}

DValue HyperbolicModel::collar_d(const Site& a, const Site& b) const {
  DValue out;
  out.lower = g(a, b);
  out.upper = composite_bound(a, b);
  if (a.node == b.node || out.upper <= out.lower) {
    out.graph = out.upper;
    out.value = out.lower;
    return out;
  }
  out.graph = layers_->shortest(a, b, LayerWeights::D, false).length;
  out.value = std::max(out.lower, std::min(out.graph, out.upper));
  return out;
}

DValue HyperbolicModel::d_sites(const Site& a0, const Site& b0) const {
  const bool swap = lex_less(b0.x, a0.x);
  const Site& a = swap ? b0 : a0;
  const Site& b = swap ? a0 : b0;
  if (a.in_collar && b.in_collar) return collar_d(a, b);
  if (!a.in_collar && !b.in_collar && same_projection(a, b)) {
    DValue out;
    out.value = out.lower = out.upper = out.graph = (a.x - b.x).norm();
    return out;
  }
  const double eps = epsilon();
  const Site ia = a.in_collar ? a : shell_site(a, eps);
  const Site ib = b.in_collar ? b : shell_site(b, eps);
  const double off = (a.x - ia.x).norm() + (b.x - ib.x).norm();
  DValue inner = collar_d(ia, ib);
  inner.value += off;
  inner.lower += off;
  inner.upper += off;
  inner.graph += off;
  return inner;
}

DValue HyperbolicModel::d_value(const Vec& x, const Vec& y) const { return d_sites(locate(x), locate(y)); }

std::vector<double> HyperbolicModel::d_many(const Vec& x, const std::vector<Vec>& ys) const {
  const Site a = locate(x);
  const double eps = epsilon();
  const Site ia = a.in_collar ? a : shell_site(a, eps);
  const double offa = (a.x - ia.x).norm();
  std::vector<double> out(ys.size(), 0.0);
  std::vector<Site> targets;
  std::vector<std::size_t> slot;
  std::vector<double> offb;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const Site b = locate(ys[j]);
    if (!a.in_collar && !b.in_collar && same_projection(a, b)) {
      out[j] = (a.x - b.x).norm();
      continue;
    }
    const Site ib = b.in_collar ? b : shell_site(b, eps);
    if (ib.node == ia.node) {
      out[j] = collar_d(ia, ib).value + offa + (b.x - ib.x).norm();
      continue;
    }
    targets.push_back(ib);
    slot.push_back(j);
    offb.push_back((b.x - ib.x).norm());
  }
  if (!targets.empty()) {
    const auto graph = layers_->shortest_many(ia, targets, LayerWeights::D);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double lo = g(ia, targets[i]);
      const double cap = composite_bound(ia, targets[i]);
      out[slot[i]] = std::max(lo, std::min(graph[i], cap)) + offa + offb[i];
    }
  }
  return out;
}

std::vector<Vec> HyperbolicModel::shell_path(int from_node, int to_node, double t) const {
  std::vector<Vec> pts;
  for (int v : graph_->node_path(from_node, to_node)) pts.push_back(graph_->node(v) - t * graph_->node_normal(v));
  return pts;
}

Polyline HyperbolicModel::composite_polyline(const Site& a, const Site& b, int regime) const {
  const bool a_low = a.h <= b.h;
  const Site& lo = a_low ? a : b;
  const Site& hi = a_low ? b : a;
  std::vector<Vec> pts{lo.x};
  const Vec z = lo.foot - hi.t * lo.normal;
  pts.push_back(z);
  if (regime >= 1) {
    double t = hi.t;
    if (regime == 2) {
      const double D = graph_->node_distance(lo.node, hi.node);
      t = D * D;
    } else if (regime == 3) {
      t = epsilon();
    }
    if (regime >= 2) pts.push_back(lo.foot - t * lo.normal);
    for (auto& p : shell_path(lo.node, hi.node, t)) pts.push_back(std::move(p));
    if (regime >= 2) pts.push_back(hi.foot - t * hi.normal);
  }
  pts.push_back(hi.x);
  if (!a_low) std::reverse(pts.begin(), pts.end());
  return densify(std::move(pts));
}

Polyline HyperbolicModel::densify(std::vector<Vec> points) const {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) {
      const BoundaryFoot fa = projection().project(points[i - 1]), fb = projection().project(points[i]);
      const double t = fa.distance;
      if (t <= epsilon() * (1.0 + 1e-9) && std::abs(t - fb.distance) <= options_.height_tol * std::max(1.0, t) &&
          (fa.point - fb.point).norm() > options_.same_projection_tol) {
        const double delta = std::min(0.1 * std::sqrt(t), 0.5 * graph_->resolution_radius());
        const int m = static_cast<int>(std::ceil((fb.point - fa.point).norm() / delta));
        for (int s = 1; s < m; ++s) {
          const double u = static_cast<double>(s) / m;
          const BoundaryFoot f = projection().nearest_boundary_point((1.0 - u) * fa.point + u * fb.point);
          out.push_back(f.point - t * f.normal);
        }
      }
    }
    out.push_back(points[i]);
  }
  Polyline p = Polyline::from_points(std::move(out));
  p.compact();
  return p;
}

CompositePath HyperbolicModel::composite_upper_path(const Vec& x, const Vec& y) const {
  const Site a = locate(x), b = locate(y);
  if (!a.in_collar || !b.in_collar) {
    throw Error(ErrorCode::PointOutsideShellRegion, "composite path needs both points in the collar");
  }
  CompositePath out;
  out.bound = composite_bound(a, b, &out.regime);
  out.path = composite_polyline(a, b, out.regime);
  out.path.functional = "g";
  out.path.length = out.bound;
  return out;
}

Polyline HyperbolicModel::collar_geodesic(const Site& a0, const Site& b0) const {
  const bool swap = lex_less(b0.x, a0.x);
  const Site& a = swap ? b0 : a0;
  const Site& b = swap ? a0 : b0;
  Polyline out;
  int regime = 0;
  const double cap = composite_bound(a, b, &regime);
  const double lo = g(a, b);
  if (a.node == b.node || cap <= lo) {
    out = composite_polyline(a, b, regime);
  } else {
    auto r = layers_->shortest(a, b, LayerWeights::D, true);
    if (cap < r.length) {
      out = composite_polyline(a, b, regime);
    } else {
      out = densify(std::move(r.points));
    }
  }
  out.functional = "d";
  out.length = collar_d(a, b).value;
  return swap ? out.reversed() : out;
}

Polyline HyperbolicModel::geodesic(const Vec& x, const Vec& y) const {
  const Site a = locate(x), b = locate(y);
  const double value = d_sites(a, b).value;
  if (a.in_collar && b.in_collar) return collar_geodesic(a, b);
  Polyline out;
  if (!a.in_collar && !b.in_collar && same_projection(a, b)) {
    out = Polyline::from_points({a.x, b.x});
  } else {
    const double eps = epsilon();
    const Site ia = a.in_collar ? a : shell_site(a, eps);
    const Site ib = b.in_collar ? b : shell_site(b, eps);
    Polyline mid = collar_geodesic(ia, ib);
    std::vector<Vec> pts;
    if (!a.in_collar) pts.push_back(a.x);
    for (auto& p : mid.points) pts.push_back(p);
    if (!b.in_collar) pts.push_back(b.x);
    out = Polyline::from_points(std::move(pts));
  }
  out.compact();
  out.functional = "d";
  out.length = value;
  return out;
}

Polyline HyperbolicModel::vertical_path(const Vec& x, const Vec& y) const {
  const Site a = locate(x), b = locate(y);
  if (!same_projection(a, b)) throw Error(ErrorCode::ProjectionsDiffer, "vertical path needs a common projection");
  if (!a.in_collar || !b.in_collar) throw Error(ErrorCode::PointOutsideShellRegion, "vertical path needs D_eps points");
  Polyline out = Polyline::from_points({y, x});
  out.compact();
  out.functional = "g";
  out.length = std::abs(std::log(a.h / b.h));
  return out;
}

Polyline HyperbolicModel::horizontal_path(const Vec& x, const Vec& y, const HorizontalOptions& opt) const {
  const Site a = locate(x), b = locate(y);
  if (!a.in_collar || !b.in_collar) throw Error(ErrorCode::PointOutsideShellRegion, "horizontal path needs D_eps points");
  if (std::abs(a.h - b.h) > options_.height_tol * std::max(1.0, a.h)) {
    throw Error(ErrorCode::HeightsDiffer, "horizontal path needs equal heights");
  }
  const double t = a.t, h = a.h;
  if (same_projection(a, b)) {
    Polyline out = Polyline::from_points({x});
    out.functional = "g";
    return out;
  }
  const BoundaryPath route = graph_->resolved_geodesic(a.foot, b.foot);
  const double delta = std::min(opt.spacing_factor * h, 0.5 * graph_->resolution_radius());
  std::vector<Vec> pts{a.x};
  for (std::size_t i = 0; i + 1 < route.points.size(); ++i) {
    const Vec& p = route.points[i];
    const Vec& q = route.points[i + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((q - p).norm() / delta)));
    for (int s = 1; s <= m; ++s) {
      if (i + 2 == route.points.size() && s == m) break;
      const double u = static_cast<double>(s) / m;
      const BoundaryFoot f = projection().nearest_boundary_point((1.0 - u) * p + u * q);
      pts.push_back(f.point - t * f.normal);
    }
  }
  pts.push_back(b.x);
  Polyline out = Polyline::from_points(std::move(pts));
  out.compact();
  out.functional = "g";
  out.length = 2.0 * route.length / h;
  return out;
}

std::vector<double> MetricFunctional::distances_from(const Vec& x, const std::vector<Vec>& ys) const {
  std::vector<double> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.push_back(distance(x, y));
  return out;
}

double GFunctional::chord(const Vec& x, const Vec& y) const {
  return model_->g_resolved(model_->locate(x), model_->locate(y));
}

double DFunctional::chord(const Vec& x, const Vec& y) const {
  return model_->g_resolved(model_->locate(x), model_->locate(y));
}

std::optional<Polyline> EuclideanFunctional::geodesic(const Vec& x, const Vec& y) const {
  std::vector<Vec> pts;
  const int n = 64;
  for (int i = 0; i <= n; ++i) pts.push_back(x + (y - x) * (static_cast<double>(i) / n));
  Polyline p = Polyline::from_points(std::move(pts));
  p.compact();
  p.functional = "euclid";
  p.length = (x - y).norm();
  return p;
}

CEstimate estimate_C(const HyperbolicModel& model, const std::vector<std::pair<Vec, Vec>>& pairs) {
  CEstimate c;
  c.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    const Site a = model.locate(x), b = model.locate(y);
    const double d = model.d_sites(a, b).value;
    const double gv = model.g(a, b);
    const double diff = d - gv;
    const double ad = std::abs(diff);
    c.C = std::max(c.C, ad);
    c.min_margin = std::min(c.min_margin, diff);
    if (a.in_collar && b.in_collar) {
      switch (classify_regime(model, a, b)) {
        case 0: c.vertical = std::max(c.vertical, ad); break;
        case 1: c.case1 = std::max(c.case1, ad); break;
        case 2: c.case2 = std::max(c.case2, ad); break;
        default: c.case3 = std::max(c.case3, ad); break;
      }
    } else if (!a.in_collar && !b.in_collar) {
      c.outside = std::max(c.outside, ad);
    } else {
      c.mixed = std::max(c.mixed, ad);
    }
    ++c.pairs;
  }
  if (pairs.empty()) c.min_margin = 0.0;
  return c;
}

}  // namespace hypkob
