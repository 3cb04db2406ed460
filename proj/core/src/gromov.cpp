#include "hypkob/gromov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hypkob/error.hpp"
#include "hypkob/parallel.hpp"

namespace hypkob {

namespace {

Vec box_point(const Box& box, std::mt19937_64& rng) {
  Vec x(box.lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit_uniform(rng());
  return x;
}

}  // namespace

std::vector<Vec> sample_points(const HeightProjection& projection, int n, const SamplerSpec& spec) {
  const Domain& domain = projection.domain();
  const Box& box = domain.bounding_box();
  const double eps = projection.epsilon();
  std::mt19937_64 rng(spec.seed);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  long attempts = 0;
  const long max_attempts = 1000L * std::max(n, 1) + 1000;
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > max_attempts) throw Error(ErrorCode::PreconditionViolated, "sampler rejected too many points");
    Vec y = box_point(box, rng);
    if (spec.kind == SamplerKind::Uniform) {
      if (domain.contains(y)) out.push_back(std::move(y));
      continue;
    }
    const double u = unit_uniform(rng());
    auto p = domain.pull_to_boundary(y);
    if (!p) continue;
    const double t = eps * u * u;
    if (t <= 0.0) continue;
    Vec x = *p - t * domain.normal(*p);
    if (domain.contains(x)) out.push_back(std::move(x));
  }
  return out;
}

double four_point_defect(const std::array<double, 6>& d) {
  // d01, d02, d03, d12, d13, d23
  double s[3] = {d[0] + d[5], d[1] + d[4], d[2] + d[3]};
  std::sort(s, s + 3);
  return std::max(0.0, 0.5 * (s[2] - s[1]));
}

namespace {

HyperbolicityReport assemble(const MetricFunctional& functional, const std::vector<std::array<Vec, 4>>& quads,
                             std::uint64_t seed, double threshold) {
  const std::size_t n = quads.size();
  std::vector<double> defect(n, 0.0);
  std::vector<char> failed(n, 0);
  parallel_for(n, [&](std::size_t q) {
    const auto& P = quads[q];
    try {
      std::array<double, 6> d{functional.distance(P[0], P[1]), functional.distance(P[0], P[2]),
                              functional.distance(P[0], P[3]), functional.distance(P[1], P[2]),
                              functional.distance(P[1], P[3]), functional.distance(P[2], P[3])};
      for (double v : d)
        if (!std::isfinite(v)) throw Error(ErrorCode::DerivativeEvaluationFailed, "non-finite distance");
      defect[q] = four_point_defect(d);
    } catch (const std::exception&) {
      failed[q] = 1;
    }
  });
  HyperbolicityReport r;
  r.functional = functional.name();
  r.seed = seed;
  r.threshold = threshold;
  std::size_t worst = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (failed[q]) {
      ++r.errors;
      continue;
    }
    ++r.quadruples;
    if (defect[q] > threshold) ++r.exceed_count;
    if (worst == n || defect[q] > defect[worst]) worst = q;
  }
  if (worst < n) {
    r.delta = defect[worst];
    r.worst.points = quads[worst];
    r.worst.defect = defect[worst];
  }
  return r;
}

}  // namespace

HyperbolicityReport four_point_delta(const MetricFunctional& functional, const std::vector<Vec>& points,
                                     long n_quadruples, std::uint64_t seed, double threshold) {
  if (points.size() < 4) throw Error(ErrorCode::PreconditionViolated, "need at least four points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::vector<std::array<Vec, 4>> quads(static_cast<std::size_t>(std::max(n_quadruples, 0L)));
  for (auto& q : quads)
    for (auto& p : q) p = points[pick(rng)];
  return assemble(functional, quads, seed, threshold);
}

HyperbolicityReport four_point_delta(const MetricFunctional& functional, const HeightProjection& projection,
                                     const SamplerSpec& sampler, long n_quadruples, double threshold) {
  auto pts = sample_points(projection, static_cast<int>(4 * n_quadruples), sampler);
  std::vector<std::array<Vec, 4>> quads(static_cast<std::size_t>(n_quadruples));
  for (std::size_t q = 0; q < quads.size(); ++q)
    for (std::size_t k = 0; k < 4; ++k) quads[q][k] = std::move(pts[4 * q + k]);
  return assemble(functional, quads, sampler.seed, threshold);
}

double gromov_product(const MetricFunctional& functional, const Vec& x, const Vec& y, const Vec& omega) {
  const double v = 0.5 * (functional.distance(x, omega) + functional.distance(y, omega) - functional.distance(x, y));
  return std::max(0.0, v);
}

ConvergenceReport converges_at_infinity(const MetricFunctional& functional, const std::vector<Vec>& sequence,
                                        const Vec& omega, double growth) {
  const std::size_t n = sequence.size();
  if (n < 8) throw Error(ErrorCode::PrefixTooShort, "need at least 8 points");
  std::vector<std::vector<double>> dist(n);
  std::vector<Vec> targets(sequence);
  targets.push_back(omega);
  parallel_for(n, [&](std::size_t i) { dist[i] = functional.distances_from(sequence[i], targets); });
  auto P = [&](std::size_t i, std::size_t j) { return std::max(0.0, 0.5 * (dist[i][n] + dist[j][n] - dist[i][j])); };

  ConvergenceReport r;
  r.tail_minima.assign(n - 1, std::numeric_limits<double>::infinity());
  for (std::size_t k = n - 1; k-- > 0;) {
    double m = k + 1 < n - 1 ? r.tail_minima[k + 1] : std::numeric_limits<double>::infinity();
    for (std::size_t j = k + 1; j < n; ++j) m = std::min(m, P(k, j));
    r.tail_minima[k] = m;
  }
  const auto& m = r.tail_minima;
  const std::size_t K = m.size();
  r.head_min = m.front();
  r.tail_min = m[K / 2];
  const std::size_t third = std::max<std::size_t>(1, K / 3);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < third; ++i) {
    first += m[i];
    last += m[K - 1 - i];
  }
  first /= static_cast<double>(third);
  last /= static_cast<double>(third);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += m[i];
    sxx += x * x;
    sxy += x * m[i];
  }
  const double nk = static_cast<double>(K);
  const double den = nk * sxx - sx * sx;
  r.slope = den > 0 ? (nk * sxy - sx * sy) / den : 0.0;
  r.diverging = (last - first) >= growth && r.slope > 0.05;
  return r;
}

namespace {

struct Approach {
  Vec a, na, b, nb;
};

Approach normals(const HeightProjection& projection, const Vec& a, const Vec& b) {
  const Domain& dom = projection.domain();
  if ((a - b).norm() <= 1e-12) throw Error(ErrorCode::PreconditionViolated, "boundary points coincide");
  return {a, dom.normal(a), b, dom.normal(b)};
}

double level_product(const MetricFunctional& f, const HeightProjection& projection, const Approach& ap,
                     const Vec& omega, int i) {
  const double t = projection.epsilon() * std::ldexp(1.0, -i);
  return gromov_product(f, ap.a - t * ap.na, ap.b - t * ap.nb, omega);
}

bool stabilized(const std::vector<double>& v, double tol) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  return std::abs(v[n - 1] - v[n - 2]) <= tol && std::abs(v[n - 2] - v[n - 3]) <= tol;
}

std::string trend_text(const std::vector<double>& v) {
  std::ostringstream os;
  os << "trend:";
  const std::size_t from = v.size() > 5 ? v.size() - 5 : 0;
  for (std::size_t i = from; i < v.size(); ++i) os << ' ' << v[i];
  return os.str();
}

}  // namespace

BoundaryProductResult boundary_product(const MetricFunctional& functional, const HeightProjection& projection,
                                       const Vec& a, const Vec& b, const Vec& omega, int depth, double tol) {
  if (depth < 4) throw Error(ErrorCode::PreconditionViolated, "depth must be at least 4");
  const Approach ap = normals(projection, a, b);
  BoundaryProductResult r;
  r.trend.resize(static_cast<std::size_t>(depth) + 1);
  parallel_for(r.trend.size(), [&](std::size_t i) {
    r.trend[i] = level_product(functional, projection, ap, omega, static_cast<int>(i));
  });
  r.depth = depth;
  r.value = r.trend.back();
  if (!stabilized(r.trend, tol)) throw Error(ErrorCode::NotStabilized, trend_text(r.trend));
  return r;
}

BoundaryProductResult boundary_product_adaptive(const MetricFunctional& functional,
                                                const HeightProjection& projection, const Vec& a, const Vec& b,
                                                const Vec& omega, int min_depth, int max_depth, double tol) {
  min_depth = std::max(min_depth, 4);
  const Approach ap = normals(projection, a, b);
  BoundaryProductResult r;
  for (int i = 0; i <= max_depth; ++i) {
    r.trend.push_back(level_product(functional, projection, ap, omega, i));
    r.depth = i;
    r.value = r.trend.back();
    if (i >= min_depth && stabilized(r.trend, tol)) return r;
  }
  throw Error(ErrorCode::NotStabilized, trend_text(r.trend));
}

IdentificationTable boundary_identification(const MetricFunctional& functional, const HyperbolicModel& model,
                                            const std::vector<std::pair<Vec, Vec>>& pairs, const Vec& omega,
                                            int max_depth) {
  IdentificationTable table;
  table.rows.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    auto& row = table.rows[i];
    row.a = pairs[i].first;
    row.b = pairs[i].second;
    row.d_H = model.graph().d_H(row.a, row.b);
    if (row.d_H <= 0.0) throw Error(ErrorCode::PreconditionViolated, "pair snaps to one graph node");
    row.product = boundary_product_adaptive(functional, model.projection(), row.a, row.b, omega, 8, max_depth).value;
    row.ratio = std::exp(-row.product) / row.d_H;
  });
  if (table.rows.empty()) return table;
  table.min_ratio = std::numeric_limits<double>::infinity();
  table.max_ratio = 0.0;
  for (const auto& row : table.rows) {
    table.min_ratio = std::min(table.min_ratio, row.ratio);
    table.max_ratio = std::max(table.max_ratio, row.ratio);
  }
  table.spread = table.max_ratio / table.min_ratio;
  table.band = std::max(table.max_ratio, 1.0 / table.min_ratio);
  return table;
}

ThinnessReport triangle_thinness(const MetricFunctional& functional, const Vec& x, const Vec& y, const Vec& z) {
  ThinnessReport r;
  const Vec* v[3] = {&x, &y, &z};
  for (int s = 0; s < 3; ++s) {
    auto g = functional.geodesic(*v[s], *v[(s + 1) % 3]);
    if (!g) throw Error(ErrorCode::PreconditionViolated, "functional has no geodesic solver");
    r.sides[static_cast<std::size_t>(s)] = std::move(*g);
  }
  double spacing = 0.0;
  for (const auto& side : r.sides)
    for (std::size_t i = 1; i < side.points.size(); ++i)
      spacing = std::max(spacing, functional.distance(side.points[i - 1], side.points[i]));
  r.slack = 2.0 * spacing;

  for (int s = 0; s < 3; ++s) {
    const auto& side = r.sides[static_cast<std::size_t>(s)];
    std::vector<Vec> others;
    for (int o = 0; o < 3; ++o)
      if (o != s)
        others.insert(others.end(), r.sides[static_cast<std::size_t>(o)].points.begin(),
                      r.sides[static_cast<std::size_t>(o)].points.end());
    std::vector<double> best(side.points.size());
    parallel_for(side.points.size(), [&](std::size_t i) {
      auto d = functional.distances_from(side.points[i], others);
      best[i] = *std::min_element(d.begin(), d.end());
    });
    for (double b : best) r.thinness = std::max(r.thinness, b);
  }
  return r;
}

}  // namespace hypkob
