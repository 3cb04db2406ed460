#include "hypkob/kobayashi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hypkob/error.hpp"
#include "hypkob/parallel.hpp"

namespace hypkob {

TangentSplit split_vector(const HeightProjection& projection, const Structure& structure, const Vec& x, const Vec& v) {
  const BoundaryFoot f = projection.project(x);
  if (f.distance > projection.epsilon()) throw Error(ErrorCode::PointOutsideShellRegion, "point lies outside D_eps");
  TangentSplit s;
  s.x = x;
  s.t = f.distance;
  s.n = f.normal.normalized();
  const Mat J = structure.J(x);
  s.Jn = J * s.n;
  const Vec Jtn = J.transpose() * s.n;
  Eigen::Matrix2d A;
  A << s.n.dot(s.n), s.n.dot(s.Jn), Jtn.dot(s.n), Jtn.dot(s.Jn);
  const Eigen::Vector2d rhs(s.n.dot(v), Jtn.dot(v));
  const Eigen::Vector2d ab = A.fullPivLu().solve(rhs);
  s.v_N = ab(0) * s.n + ab(1) * s.Jn;
  s.v_H = v - s.v_N;
  s.basis = horizontal_basis(s.n, J);
  return s;
}

double k_infinitesimal(const HeightProjection& projection, const Structure& structure, const Vec& x, const Vec& v,
                       const KobayashiOptions& options) {
  const double nv = v.norm();
  if (nv == 0.0) throw Error(ErrorCode::ZeroVector, "zero tangent vector");
  const BoundaryFoot f = projection.project(x);
  const double t = f.distance;
  if (!(t > 0.0)) throw Error(ErrorCode::PointOutsideDomain, "point lies on the boundary");
  if (t > projection.epsilon()) return options.c_normal * nv / t;
  const Vec n = f.normal.normalized();
  const Mat J = structure.J(x);
  const Vec Jn = J * n;
  const Vec Jtn = J.transpose() * n;
  Eigen::Matrix2d A;
  A << 1.0, n.dot(Jn), Jtn.dot(n), Jtn.dot(Jn);
  const Eigen::Vector2d ab = A.fullPivLu().solve(Eigen::Vector2d(n.dot(v), Jtn.dot(v)));
  const Vec vN = ab(0) * n + ab(1) * Jn;
  const double vH = (v - vN).norm();
  return options.c_horizontal * vH / std::sqrt(t) + options.c_normal * vN.norm() / t;
}

KobayashiFunctional::KobayashiFunctional(std::shared_ptr<const HyperbolicModel> model, KobayashiOptions options)
    : model_(std::move(model)), options_(options) {
  if (!model_) throw Error(ErrorCode::PreconditionViolated, "null model");
  projection_ = model_->graph().projection_ptr();
  structure_ = model_->graph().structure_ptr();
}

KobayashiFunctional::KobayashiFunctional(std::shared_ptr<const HeightProjection> projection,
                                         std::shared_ptr<const Structure> structure, KobayashiOptions options)
    : projection_(std::move(projection)), structure_(std::move(structure)), options_(options) {}

const HyperbolicModel& KobayashiFunctional::model() const {
  if (!model_) throw Error(ErrorCode::PreconditionViolated, "Kobayashi distances need a boundary graph");
  return *model_;
}

std::optional<double> KobayashiFunctional::infinitesimal(const Vec& x, const Vec& v) const {
  if (v.norm() == 0.0) return 0.0;
  return k_infinitesimal(*projection_, *structure_, x, v, options_);
}

double KobayashiFunctional::outside_offset(const Site& s) const {
  if (s.in_collar) return 0.0;
  return options_.c_normal * std::log(s.t / model().epsilon());
}

double KobayashiFunctional::segment_length(const Vec& x, const Vec& y) const {
  return k_length(*this, Polyline::from_points({x, y}));
}

namespace {

Site to_shell(const HyperbolicModel& m, const Site& s) { return s.in_collar ? s : m.shell_site(s, m.epsilon()); }

double collar_k(const HyperbolicModel& m, const Site& a, const Site& b, double c_normal) {
  if (m.same_projection(a, b)) return c_normal * std::abs(std::log(a.t / b.t));
  return m.layers().shortest(a, b, LayerWeights::K, false).length;
}

}  // namespace

double KobayashiFunctional::distance(const Vec& x, const Vec& y) const {
  const HyperbolicModel& m = model();
  const Site s0 = m.locate(x), s1 = m.locate(y);
  const bool swap = lex_less(s1.x, s0.x);
  const Site& a = swap ? s1 : s0;
  const Site& b = swap ? s0 : s1;
  if (a.x == b.x) return 0.0;
  const double route = outside_offset(a) + outside_offset(b) + collar_k(m, to_shell(m, a), to_shell(m, b), options_.c_normal);
  if (a.in_collar || b.in_collar) return route;
  return std::min(route, segment_length(a.x, b.x));
}

std::vector<double> KobayashiFunctional::distances_from(const Vec& x, const std::vector<Vec>& ys) const {
  const HyperbolicModel& m = model();
  const Site a = m.locate(x);
  const Site ia = to_shell(m, a);
  std::vector<double> out(ys.size(), 0.0);
  std::vector<Site> targets;
  std::vector<std::size_t> slot;
  std::vector<double> off;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const Site b = m.locate(ys[j]);
    if (b.x == a.x) continue;
    const Site ib = to_shell(m, b);
    const double o = outside_offset(a) + outside_offset(b);
    if (m.same_projection(ia, ib) || ib.node == ia.node) {
      out[j] = distance(x, ys[j]);
      continue;
    }
    targets.push_back(ib);
    slot.push_back(j);
    off.push_back(o);
  }
  if (!targets.empty()) {
    const auto lens = m.layers().shortest_many(ia, targets, LayerWeights::K);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      double v = lens[i] + off[i];
      const Vec& y = ys[slot[i]];
      if (!a.in_collar && !m.locate(y).in_collar) v = std::min(v, segment_length(x, y));
      out[slot[i]] = v;
    }
  }
  return out;
}

std::optional<Polyline> KobayashiFunctional::geodesic(const Vec& x, const Vec& y) const {
  const HyperbolicModel& m = model();
  const Site a = m.locate(x), b = m.locate(y);
  const double value = distance(x, y);
  Polyline out;
  if (!a.in_collar && !b.in_collar && segment_length(x, y) <= value) {
    out = Polyline::from_points({x, y});
  } else {
    const Site ia = to_shell(m, a), ib = to_shell(m, b);
    std::vector<Vec> pts;
    if (!a.in_collar) pts.push_back(a.x);
    if (m.same_projection(ia, ib)) {
      pts.push_back(ia.x);
      pts.push_back(ib.x);
    } else {
      auto r = m.layers().shortest(ia, ib, LayerWeights::K, true);
      for (auto& p : r.points) pts.push_back(std::move(p));
    }
    if (!b.in_collar) pts.push_back(b.x);
    out = Polyline::from_points(std::move(pts));
  }
  out.compact();
  out.functional = name();
  out.length = value;
  return out;
}

double k_length(const KobayashiFunctional& functional, const Polyline& polyline) {
  PathLengthOptions o;
  o.rel_tol = functional.options().rel_tol;
  o.max_depth = functional.options().max_depth;
  return path_length(polyline, functional, o).value;
}

namespace {

double c_prime(const std::vector<double>& a, const std::vector<double>& b, const std::vector<char>& skip, double C) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (skip[i]) continue;
    out = std::max(out, b[i] - C * a[i]);
    out = std::max(out, a[i] / C - b[i]);
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(i, v.size() - 1)];
}

}  // namespace

QiFit qi_fit(const std::vector<double>& a, const std::vector<double>& b, const QiOptions& options,
             const std::vector<int>& regimes) {
  if (a.size() != b.size()) throw Error(ErrorCode::PreconditionViolated, "sample size mismatch");
  QiFit fit;
  fit.samples = a.size();
  std::vector<char> skip(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      fit.violations.push_back({i, a[i], b[i], "non-finite value"});
      skip[i] = 1;
    } else if ((a[i] <= options.zero_tol && b[i] > options.budget) ||
               (b[i] <= options.zero_tol && a[i] > options.budget)) {
      fit.violations.push_back({i, a[i], b[i], "zero against value beyond budget"});
      skip[i] = 1;
    }
  }
  double lo = 1.0, hi = options.c_max;
  if (c_prime(a, b, skip, lo) <= options.budget) {
    hi = lo;
  } else if (c_prime(a, b, skip, hi) > options.budget) {
    lo = hi;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (c_prime(a, b, skip, mid) <= options.budget)
        hi = mid;
      else
        lo = mid;
    }
  }
  fit.C = hi;
  fit.C_prime = c_prime(a, b, skip, fit.C);
  fit.within_budget = fit.C_prime <= options.budget;

  std::map<int, std::vector<double>> by_regime;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (skip[i]) continue;
    const int r = i < regimes.size() ? regimes[i] : 0;
    by_regime[r].push_back(std::max({0.0, b[i] - fit.C * a[i], a[i] / fit.C - b[i]}));
  }
  for (auto& [r, v] : by_regime) {
    QiRegimeStats s;
    s.regime = r;
    s.count = static_cast<int>(v.size());
    s.q50 = quantile(v, 0.5);
    s.q90 = quantile(v, 0.9);
    s.q99 = quantile(v, 0.99);
    s.max = *std::max_element(v.begin(), v.end());
    fit.regimes.push_back(s);
  }
  return fit;
}

QiFit qi_check(const MetricFunctional& a, const MetricFunctional& b, const std::vector<std::pair<Vec, Vec>>& pairs,
               const QiOptions& options, const HyperbolicModel* model) {
  std::vector<double> va(pairs.size()), vb(pairs.size());
  std::vector<int> regimes(pairs.size(), 0);
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& [x, y] = pairs[i];
    try {
      va[i] = a.distance(x, y);
    } catch (const Error&) {
      va[i] = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      vb[i] = b.distance(x, y);
    } catch (const Error&) {
      vb[i] = std::numeric_limits<double>::quiet_NaN();
    }
    if (model) {
      const Site sx = model->locate(x), sy = model->locate(y);
      regimes[i] = (sx.in_collar && sy.in_collar) ? classify_regime(*model, sx, sy) : 4;
    }
  });
  return qi_fit(va, vb, options, regimes);
}

}  // namespace hypkob
