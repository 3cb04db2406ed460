#include "hypkob/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "hypkob/error.hpp"
#include "hypkob/parallel.hpp"

namespace hypkob {

SelfMap affine_map(Mat A, Vec b, std::string name) {
  return {std::move(name), [A = std::move(A), b = std::move(b)](const Vec& x) -> Vec { return A * x + b; }};
}

Mat complex_rotation(const std::vector<double>& angles) {
  const int dim = 2 * static_cast<int>(angles.size());
  Mat R = Mat::Zero(dim, dim);
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const int i = 2 * static_cast<int>(k);
    const double c = std::cos(angles[k]), s = std::sin(angles[k]);
    R(i, i) = c;
    R(i, i + 1) = -s;
    R(i + 1, i) = s;
    R(i + 1, i + 1) = c;
  }
  return R;
}

SelfMap contraction_to_boundary(int dimension, double s, double theta) {
  if (dimension % 2 != 0 || dimension < 2) throw Error(ErrorCode::DimensionTooSmall, "dimension must be even");
  std::vector<double> angles(static_cast<std::size_t>(dimension / 2), theta);
  angles[0] = 0.0;
  const Vec p = unit(dimension, 0);
  std::ostringstream name;
  name << "contraction(s=" << s << ",theta=" << theta << ")";
  return affine_map(s * complex_rotation(angles), (1.0 - s) * p, name.str());
}

SelfMap rotation_map(const std::vector<double>& angles) {
  const int dim = 2 * static_cast<int>(angles.size());
  std::ostringstream name;
  name << "rotation(";
  for (std::size_t i = 0; i < angles.size(); ++i) name << (i ? "," : "") << angles[i];
  name << ")";
  return affine_map(complex_rotation(angles), Vec::Zero(dim), name.str());
}

const char* to_string(OrbitVerdict v) {
  switch (v) {
    case OrbitVerdict::Bounded: return "Bounded";
    case OrbitVerdict::ConvergesTo: return "ConvergesTo";
    case OrbitVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

OrbitRecord iterate(const SelfMap& map, const HeightProjection& projection, const Vec& x0,
                    const IterateOptions& options, const MetricFunctional* functional, const Vec* basepoint) {
  const Domain& dom = projection.domain();
  if (!dom.contains(x0)) throw Error(ErrorCode::PointOutsideDomain, "start point is not interior");
  const double floor_t = options.stop_factor * projection.epsilon();
  OrbitRecord rec;
  rec.start = x0;
  Vec x = x0;
  for (int k = 0;; ++k) {
    const BoundaryFoot f = projection.project(x);
    rec.iterates.push_back(x);
    rec.heights.push_back(std::sqrt(f.distance));
    rec.projections.push_back(f.point);
    if (functional && basepoint) rec.distances.push_back(functional->distance(*basepoint, x));
    if (f.distance < floor_t) {
      rec.boundary_stop = true;
      break;
    }
    if (k >= options.n_max) break;
    Vec y = map(x);
    if (dom.rho(y) > options.tolerance) {
      std::ostringstream msg;
      msg << map.name << " left the domain at step " << k + 1 << " (rho = " << dom.rho(y) << ")";
      throw Error(ErrorCode::MapEscapedDomain, msg.str());
    }
    x = std::move(y);
  }
  return rec;
}

OrbitClassification classify_orbit(const std::vector<OrbitRecord>& orbits, const BoundaryGraph& graph,
                                   const ClassifyOptions& options) {
  OrbitClassification out;
  const double eps = graph.projection().epsilon();
  const double floor_h = options.bounded_fraction * std::sqrt(eps);
  if (static_cast<int>(orbits.size()) < options.min_starts) {
    out.evidence = "too few starts";
    return out;
  }
  out.min_tail_height = std::numeric_limits<double>::infinity();
  std::vector<Vec> limits;
  std::ostringstream ev;
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    const auto& r = orbits[o];
    const std::size_t n = r.iterates.size();
    if (static_cast<int>(n) < options.min_iterates && !r.boundary_stop) {
      ev << "orbit " << o << " too short; ";
      out.evidence = ev.str();
      return out;
    }
    const std::size_t half = n / 2;
    double tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = half; k < n; ++k) tail_min = std::min(tail_min, r.heights[k]);
    out.min_tail_height = std::min(out.min_tail_height, tail_min);
    if (tail_min >= floor_h) {
      ++out.bounded;
      continue;
    }
    const std::size_t quarter = n - std::max<std::size_t>(1, n / 4);
    double motion = 0.0;
    for (std::size_t k = quarter; k < n; ++k)
      motion = std::max(motion, graph.resolved_distance(r.projections[k], r.projections.back()));
    out.max_tail_motion = std::max(out.max_tail_motion, motion);
    if (r.heights.back() < floor_h && motion <= options.tolerance) {
      ++out.converging;
      limits.push_back(r.projections.back());
    } else {
      ev << "orbit " << o << " neither bounded nor settled (tail motion " << motion << "); ";
    }
  }
  for (std::size_t i = 0; i < limits.size(); ++i)
    for (std::size_t j = i + 1; j < limits.size(); ++j)
      out.limit_spread = std::max(out.limit_spread, graph.resolved_distance(limits[i], limits[j]));

  const int total = static_cast<int>(orbits.size());
  if (out.bounded == total) {
    out.verdict = OrbitVerdict::Bounded;
  } else if (out.converging == total && out.limit_spread <= options.tolerance) {
    out.verdict = OrbitVerdict::ConvergesTo;
    std::size_t best = 0;
    for (std::size_t o = 1; o < orbits.size(); ++o)
      if (orbits[o].heights.back() < orbits[best].heights.back()) best = o;
    out.limit = orbits[best].projections.back();
  } else {
    ev << out.bounded << " bounded, " << out.converging << " converging of " << total << ", limit spread "
       << out.limit_spread;
  }
  out.evidence = ev.str();
  return out;
}

SemicontractionReport check_semicontraction(const SelfMap& map, const MetricFunctional& functional,
                                            const Domain& domain, const std::vector<std::pair<Vec, Vec>>& pairs,
                                            double slack, double tolerance) {
  SemicontractionReport rep;
  rep.slack = slack;
  const std::size_t n = pairs.size();
  std::vector<double> defect(n, -std::numeric_limits<double>::infinity()), ratio(n, 0.0);
  std::vector<std::string> err(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& [p, q] = pairs[i];
    const Vec fp = map(p), fq = map(q);
    if (domain.rho(fp) > tolerance || domain.rho(fq) > tolerance) {
      err[i] = "MapEscapedDomain";
      return;
    }
    try {
      const double before = functional.distance(p, q);
      const double after = functional.distance(fp, fq);
      defect[i] = after - before;
      ratio[i] = before > 0.0 ? after / before : 1.0;
    } catch (const Error& e) {
      err[i] = to_string(e.code());
    }
  });
  std::vector<double> ratios;
  rep.max_defect = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!err[i].empty()) {
      if (err[i] == "MapEscapedDomain") ++rep.escaped;
      rep.errors.push_back("pair " + std::to_string(i) + ": " + err[i]);
      continue;
    }
    ++rep.pairs;
    rep.max_defect = std::max(rep.max_defect, defect[i]);
    ratios.push_back(ratio[i]);
  }
  if (ratios.empty()) {
    rep.max_defect = 0.0;
  } else {
    std::sort(ratios.begin(), ratios.end());
    rep.ratio_min = ratios.front();
    rep.ratio_max = ratios.back();
    rep.ratio_median = ratios[ratios.size() / 2];
  }
  rep.pass = rep.errors.empty() && rep.max_defect <= slack;
  return rep;
}

}  // namespace hypkob
