#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypkob/error.hpp"
#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob {

Polyline Polyline::from_points(std::vector<Vec> points) {
  Polyline p;
  p.points = std::move(points);
  p.params.resize(p.points.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (i > 0) acc += (p.points[i] - p.points[i - 1]).norm();
    p.params[i] = acc;
  }
  return p;
}

void Polyline::compact(double tol) {
  std::vector<Vec> kept;
  for (auto& q : points) {
    if (kept.empty() || (q - kept.back()).norm() > tol) kept.push_back(std::move(q));
  }
  const std::string f = functional;
  const double len = length;
  *this = from_points(std::move(kept));
  functional = f;
  length = len;
}

Polyline Polyline::reversed() const {
  std::vector<Vec> pts(points.rbegin(), points.rend());
  Polyline out = from_points(std::move(pts));
  out.segment_lengths.assign(segment_lengths.rbegin(), segment_lengths.rend());
  out.functional = functional;
  out.length = length;
  return out;
}

Vec point_at(const Polyline& polyline, double s) {
  const auto& P = polyline.points;
  if (P.empty()) throw Error(ErrorCode::PreconditionViolated, "empty polyline");
  if (P.size() == 1 || s <= 0.0) return P.front();
  if (s >= polyline.params.back()) return P.back();
  const auto it = std::upper_bound(polyline.params.begin(), polyline.params.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - polyline.params.begin());
  const double a = polyline.params[i - 1], b = polyline.params[i];
  const double u = (s - a) / (b - a);
  return (1.0 - u) * P[i - 1] + u * P[i];
}

namespace {

struct SegmentResult {
  double value = 0.0, lower = 0.0;
  int depth = 0;
  bool converged = false;
};

SegmentResult partition_segment(const Vec& p, const Vec& q, const MetricFunctional& f, const PathLengthOptions& o) {
  SegmentResult r;
  if ((p - q).norm() == 0.0) {
    r.converged = true;
    return r;
  }
  std::vector<Vec> pts{p, q};
  double s_prev = f.chord(p, q);
  double r_prev = s_prev;
  for (int k = 1; k <= o.max_depth; ++k) {
    std::vector<Vec> next;
    next.reserve(2 * pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      next.push_back(pts[i]);
      next.push_back(0.5 * (pts[i] + pts[i + 1]));
    }
    next.push_back(pts.back());
    pts = std::move(next);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += f.chord(pts[i], pts[i + 1]);
    const double rich = 2.0 * s - s_prev;
    r.depth = k;
    r.lower = s;
    r.value = rich;
    const double scale = std::max(std::abs(rich), 1e-300);
    if (k >= 2 && std::abs(rich - r_prev) <= o.rel_tol * scale && std::abs(s - s_prev) <= 0.25 * scale) {
      r.converged = true;
      return r;
    }
    if (s == 0.0 && s_prev == 0.0) {
      r.converged = true;
      return r;
    }
    s_prev = s;
    r_prev = rich;
  }
  return r;
}

SegmentResult quadrature_segment(const Vec& p, const Vec& q, const MetricFunctional& f, const PathLengthOptions& o) {
  SegmentResult r;
  const Vec v = q - p;
  if (v.norm() == 0.0) {
    r.converged = true;
    return r;
  }
  double prev = 0.0;
  for (int k = 0; k <= o.max_depth; ++k) {
    const int n = 1 << k;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n;
      s += *f.infinitesimal(p + u * v, v);
    }
    s /= n;
    r.value = r.lower = s;
    r.depth = k;
    if (k >= 2 && std::abs(s - prev) <= o.rel_tol * std::max(std::abs(s), 1e-300)) {
      r.converged = true;
      return r;
    }
    prev = s;
  }
  return r;
}

}  // namespace

PathLength path_length(const Polyline& polyline, const MetricFunctional& functional, const PathLengthOptions& options) {
  PathLength out;
  const auto& P = polyline.points;
  if (P.size() <= 1) return out;
  const Vec probe = P.front();
  const bool quadrature = functional.infinitesimal(probe, Vec::Ones(probe.size())).has_value();
  for (std::size_t i = 0; i + 1 < P.size(); ++i) {
    const SegmentResult s = quadrature ? quadrature_segment(P[i], P[i + 1], functional, options)
                                       : partition_segment(P[i], P[i + 1], functional, options);
    if (!s.converged) {
      std::ostringstream msg;
      msg << "segment " << i << " did not converge; last bracket [" << s.lower << ", " << s.value << "]";
      throw Error(ErrorCode::RefinementStalled, msg.str());
    }
    out.value += s.value;
    out.lower += s.lower;
    out.depth = std::max(out.depth, s.depth);
  }
  out.upper = std::max(out.value, out.lower);
  out.lower = std::min(out.value, out.lower);
  return out;
}

double dilation(const Polyline& polyline, const MetricFunctional& functional, double s) {
  const double L = polyline.params.empty() ? 0.0 : polyline.params.back();
  if (!(L > 0.0)) return 0.0;
  double eta = 0.05 * std::min({s, L - s, 0.2 * L});
  if (!(eta > 0.0)) throw Error(ErrorCode::PreconditionViolated, "dilation needs an interior parameter");
  auto quotient = [&](double e) {
    return functional.chord(point_at(polyline, s - e), point_at(polyline, s + e)) / (2.0 * e);
  };
  double prev = quotient(eta);
  double best = prev;
  double prev_rich = prev;
  for (int j = 0; j < 10; ++j) {
    eta *= 0.5;
    const double cur = quotient(eta);
    const double rich = (4.0 * cur - prev) / 3.0;
    best = rich;
    if (j > 0 && std::abs(rich - prev_rich) <= 1e-10 * std::abs(rich)) break;
    prev = cur;
    prev_rich = rich;
  }
  return best;
}

}  // namespace hypkob
