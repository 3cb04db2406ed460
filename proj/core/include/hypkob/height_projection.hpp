#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "hypkob/domain.hpp"
#include "hypkob/kdtree.hpp"

namespace hypkob {

struct ProjectionOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  double safety_factor = 0.5;
  double ceiling_fraction = 0.25;  ///< ceiling on epsilon as a fraction of the domain diameter
  int reach_samples = 2000;
  int dense_samples = 4000;
  int refine_candidates = 32;
  std::uint64_t seed = 1;
  std::optional<double> epsilon;  ///< bypasses the reach estimate when set
};

struct BoundaryFoot {
  Vec point;
  Vec normal;
  double distance = 0.0;
};

struct ReachEstimate {
  double reach = 0.0;
  double epsilon = 0.0;
  double diameter = 0.0;
  double max_curvature = 0.0;
  bool capped = false;
};

/// epsilon = safety * min over samples of 1/kappa_max, capped at ceiling * diameter.
/// The diameter is the bounding-box diagonal of the boundary samples.
ReachEstimate estimate_reach(const Domain& domain, int n_samples, const ProjectionOptions& options = {});

/// Largest principal curvature of the level set through p (shape operator
/// from gradient and Hessian).
double max_principal_curvature(const Domain& domain, const Vec& p);

/// Height function, nearest-point projection and the collar D_eps. Immutable.
class HeightProjection {
 public:
  explicit HeightProjection(std::shared_ptr<const Domain> domain, ProjectionOptions options = {});

  const Domain& domain() const { return *domain_; }
  std::shared_ptr<const Domain> domain_ptr() const { return domain_; }
  const ProjectionOptions& options() const { return options_; }
  double epsilon() const { return reach_.epsilon; }
  const ReachEstimate& reach() const { return reach_; }
  const std::vector<Vec>& dense_samples() const { return samples_; }

  /// Nearest boundary point of an interior x.
  BoundaryFoot project(const Vec& x) const;
  double height(const Vec& x) const { return std::sqrt(project(x).distance); }
  /// h(x)^2 <= eps.
  bool in_collar(const Vec& x) const { return project(x).distance <= epsilon(); }
  /// pi(x) - t n(pi(x)).
  Vec foot_on_shell(const Vec& x, double t) const;

  /// Converges the first-order nearest-point system from a boundary guess.
  /// Usable from either side of the boundary.
  std::optional<BoundaryFoot> refine(const Vec& x, const Vec& p0) const;
  /// Nearest boundary point of any point near the boundary (either side).
  BoundaryFoot nearest_boundary_point(const Vec& y) const;

 private:
  BoundaryFoot global_search(const Vec& x) const;

  std::shared_ptr<const Domain> domain_;
  ProjectionOptions options_;
  ReachEstimate reach_;
  std::vector<Vec> samples_;
  KdTree dense_;
};

}  // namespace hypkob
