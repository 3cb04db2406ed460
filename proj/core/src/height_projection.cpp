#include "hypkob/height_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypkob/error.hpp"

namespace hypkob {

double max_principal_curvature(const Domain& domain, const Vec& p) {
  const Vec g = domain.gradient(p);
  const Mat H = domain.hessian(p);
  const double gn = g.norm();
  if (!(gn > 0.0) || !std::isfinite(gn) || !H.allFinite()) {
    throw Error(ErrorCode::CurvatureEstimateFailed, "singular derivative data at a boundary sample");
  }
  const int dim = domain.dimension();
  Eigen::HouseholderQR<Mat> qr(g / gn);
  const Mat Q = qr.householderQ() * Mat::Identity(dim, dim);
  const Mat T = Q.rightCols(dim - 1);
  const Mat S = T.transpose() * H * T / gn;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::CurvatureEstimateFailed, "shape operator eigen decomposition failed");
  }
  return es.eigenvalues().maxCoeff();
}

ReachEstimate estimate_reach(const Domain& domain, int n_samples, const ProjectionOptions& options) {
  const auto samples = sample_boundary(domain, n_samples, options.seed);
  ReachEstimate out;
  Vec lo = samples.front(), hi = samples.front();
  for (const auto& p : samples) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    out.max_curvature = std::max(out.max_curvature, max_principal_curvature(domain, p));
  }
  out.diameter = (hi - lo).norm();
  out.reach = out.max_curvature > 0.0 ? 1.0 / out.max_curvature : std::numeric_limits<double>::infinity();
  if (domain.options().reach_override) out.reach = *domain.options().reach_override;
  const double ceiling = options.ceiling_fraction * out.diameter;
  const double eps = options.safety_factor * out.reach;
  out.capped = !(eps <= ceiling);
  out.epsilon = out.capped ? ceiling : eps;
  return out;
}

HeightProjection::HeightProjection(std::shared_ptr<const Domain> domain, ProjectionOptions options)
    : domain_(std::move(domain)), options_(options) {
  if (options_.epsilon) {
    if (!(*options_.epsilon > 0.0)) throw Error(ErrorCode::ConfigError, "epsilon must be positive");
    reach_.epsilon = *options_.epsilon;
    reach_.reach = *options_.epsilon / options_.safety_factor;
  } else {
    reach_ = estimate_reach(*domain_, options_.reach_samples, options_);
  }
  samples_ = sample_boundary(*domain_, options_.dense_samples, options_.seed + 0x9e3779b97f4a7c15ULL);
  dense_ = KdTree(samples_);
}

std::optional<BoundaryFoot> HeightProjection::refine(const Vec& x, const Vec& p0) const {
  const Domain& dom = *domain_;
  const int n = dom.dimension();
  const double scale = std::max(1.0, dom.bounding_box().diagonal() * 0.25);
  Vec p = p0;
  Vec g = dom.gradient(p);
  double gg = g.squaredNorm();
  if (!(gg > 0.0)) return std::nullopt;
  double mu = (x - p).dot(g) / gg;

  auto residual = [&](const Vec& pp, double m, Vec* gout) {
    Vec gp = dom.gradient(pp);
    Vec F(n + 1);
    F.head(n) = pp - x + m * gp;
    F(n) = dom.rho(pp) / std::max(gp.norm(), 1e-300);
    if (gout) *gout = gp;
    return F;
  };

  Vec F = residual(p, mu, &g);
  double fn = F.norm();
  for (int it = 0; it < options_.max_iterations; ++it) {
    if (!std::isfinite(fn)) return std::nullopt;
    if (fn <= options_.tolerance * scale) {
      BoundaryFoot out;
      out.point = p;
      out.normal = g / g.norm();
      out.distance = (x - p).norm();
      return out;
    }
    const Mat H = dom.hessian(p);
    const double gnorm = g.norm();
    Mat Jm = Mat::Zero(n + 1, n + 1);
    Jm.topLeftCorner(n, n) = Mat::Identity(n, n) + mu * H;
    Jm.topRightCorner(n, 1) = g;
    // last row: d(rho/|g|) ~ g^T/|g| near the boundary
    Jm.bottomLeftCorner(1, n) = (g / gnorm).transpose();
    const Vec step = Jm.fullPivLu().solve(-F);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Vec pn = p + lambda * step.head(n);
      const double mn = mu + lambda * step(n);
      Vec gn;
      const Vec Fn = residual(pn, mn, &gn);
      const double fnn = Fn.norm();
      if (std::isfinite(fnn) && (fnn < fn || fnn <= options_.tolerance * scale)) {
        p = pn;
        mu = mn;
        F = Fn;
        fn = fnn;
        g = gn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (fn <= 1e3 * options_.tolerance * scale) break;
      return std::nullopt;
    }
  }
  if (fn <= 1e3 * options_.tolerance * scale) {
    BoundaryFoot out;
    out.point = p;
    out.normal = g / g.norm();
    out.distance = (x - p).norm();
    return out;
  }
  return std::nullopt;
}

BoundaryFoot HeightProjection::global_search(const Vec& x) const {
  const auto nearest = dense_.knn(x, options_.refine_candidates);
  std::vector<BoundaryFoot> found;
  for (const auto& [d2, idx] : nearest) {
    (void)d2;
    auto f = refine(x, samples_[static_cast<std::size_t>(idx)]);
    if (f) found.push_back(*f);
  }
  if (found.empty()) {
    // near the medial axis only the height matters; the closest sample is used as the foot
    const auto& [d2, idx] = nearest.front();
    if (reach_.epsilon > 0.0 && std::sqrt(d2) > reach_.epsilon) {
      BoundaryFoot out;
      out.point = samples_[static_cast<std::size_t>(idx)];
      out.normal = domain_->normal(out.point);
      out.distance = std::sqrt(d2);
      return out;
    }
    throw Error(ErrorCode::ProjectionDiverged, "no candidate converged");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : found) best = std::min(best, f.distance);
  const double band = 1e-9 * std::max(1.0, best);
  const BoundaryFoot* pick = nullptr;
  for (const auto& f : found) {
    if (f.distance > best + band) continue;
    if (!pick || lex_less(f.point, pick->point)) pick = &f;
  }
  return *pick;
}

BoundaryFoot HeightProjection::project(const Vec& x) const {
  const Domain& dom = *domain_;
  if (x.size() != dom.dimension() || !x.allFinite() || !(dom.rho(x) < 0.0)) {
    throw Error(ErrorCode::PointOutsideDomain, "point is not strictly inside the domain");
  }
  if (auto p0 = dom.pull_to_boundary(x, 1e-12, options_.max_iterations)) {
    auto f = refine(x, *p0);
    if (f && f->distance <= epsilon() && (x - f->point).dot(f->normal) <= 0.0) return *f;
  }
  return global_search(x);
}

BoundaryFoot HeightProjection::nearest_boundary_point(const Vec& y) const {
  if (auto p0 = domain_->pull_to_boundary(y, 1e-12, options_.max_iterations)) {
    if (auto f = refine(y, *p0)) return *f;
  }
  if (domain_->rho(y) < 0.0) return global_search(y);
  throw Error(ErrorCode::ProjectionDiverged, "nearest boundary point did not converge");
}

Vec HeightProjection::foot_on_shell(const Vec& x, double t) const {
  if (!(t > 0.0) || t > epsilon()) throw Error(ErrorCode::OutsideShellRange, "shell parameter exceeds epsilon");
  const BoundaryFoot f = project(x);
  return f.point - t * f.normal;
}

}  // namespace hypkob
