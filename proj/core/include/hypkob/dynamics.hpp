#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob {

struct SelfMap {
  std::string name;
  std::function<Vec(const Vec&)> f;
  Vec operator()(const Vec& x) const { return f(x); }
};

/// x -> A x + b.
SelfMap affine_map(Mat A, Vec b, std::string name = "affine");

/// Complex-linear rotation diag(e^{i theta_k}) in the coordinates z_k = x_{2k} + i x_{2k+1}.
Mat complex_rotation(const std::vector<double>& angles);

/// x -> s U x + (1 - s) p with U = diag(1, e^{i theta}, ...); fixes p = e_0.
SelfMap contraction_to_boundary(int dimension, double s, double theta);

SelfMap rotation_map(const std::vector<double>& angles);

struct IterateOptions {
  int n_max = 400;
  double stop_factor = 1e-6;  ///< stop once h^2 < stop_factor * eps
  double tolerance = 1e-12;   ///< admissible rho(F(x))
};

struct OrbitRecord {
  Vec start;
  std::vector<Vec> iterates;
  std::vector<double> heights;
  std::vector<Vec> projections;
  std::vector<double> distances;  ///< from the basepoint, when a functional is given
  bool boundary_stop = false;
};

OrbitRecord iterate(const SelfMap& map, const HeightProjection& projection, const Vec& x0,
                    const IterateOptions& options = {}, const MetricFunctional* functional = nullptr,
                    const Vec* basepoint = nullptr);

enum class OrbitVerdict { Bounded, ConvergesTo, Inconclusive };

const char* to_string(OrbitVerdict v);

struct ClassifyOptions {
  double bounded_fraction = 0.05;  ///< Bounded iff tail heights >= fraction * sqrt(eps)
  double tolerance = 1e-2;         ///< d_H tolerance for limit agreement
  int min_starts = 5;
  int min_iterates = 50;
};

struct OrbitClassification {
  OrbitVerdict verdict = OrbitVerdict::Inconclusive;
  std::optional<Vec> limit;
  double min_tail_height = 0.0;
  double limit_spread = 0.0;  ///< max pairwise d_H between limit projections
  double max_tail_motion = 0.0;
  int converging = 0, bounded = 0;
  std::string evidence;
};

OrbitClassification classify_orbit(const std::vector<OrbitRecord>& orbits, const BoundaryGraph& graph,
                                   const ClassifyOptions& options = {});

struct SemicontractionReport {
  double max_defect = 0.0;
  double slack = 0.0;
  bool pass = false;
  int pairs = 0;
  int escaped = 0;
  double ratio_min = 0.0, ratio_median = 0.0, ratio_max = 0.0;
  std::vector<std::string> errors;
};

/// max over pairs of dist(F p, F q) - dist(p, q).
SemicontractionReport check_semicontraction(const SelfMap& map, const MetricFunctional& functional,
                                            const Domain& domain, const std::vector<std::pair<Vec, Vec>>& pairs,
                                            double slack, double tolerance = 1e-12);

}  // namespace hypkob
