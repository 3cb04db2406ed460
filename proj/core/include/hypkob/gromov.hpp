#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob {

enum class SamplerKind { Uniform, BoundaryBiased };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::BoundaryBiased;
  std::uint64_t seed = 7;
};

/// Deterministic interior points. Boundary-biased points are p - t n_p with
/// t = eps * u^2, u uniform.
std::vector<Vec> sample_points(const HeightProjection& projection, int n, const SamplerSpec& spec);

struct Quadruple {
  std::array<Vec, 4> points;
  double defect = 0.0;  ///< half the excess of the largest pair sum over the next one
};

struct HyperbolicityReport {
  double delta = 0.0;
  long quadruples = 0;
  long errors = 0;
  Quadruple worst;
  std::string functional;
  std::uint64_t seed = 0;
  long exceed_count = 0;  ///< quadruples with defect above `threshold`
  double threshold = 0.0;
};

/// Four-point defect over all labellings:
/// (S1 - max(S2, S3)) / 2 with S1 the largest of the three pair sums.
double four_point_defect(const std::array<double, 6>& d);

/// Sums over pairings for distances in order d01, d02, d03, d12, d13, d23.
HyperbolicityReport four_point_delta(const MetricFunctional& functional, const std::vector<Vec>& points,
                                     long n_quadruples, std::uint64_t seed, double threshold = 0.0);

HyperbolicityReport four_point_delta(const MetricFunctional& functional, const HeightProjection& projection,
                                     const SamplerSpec& sampler, long n_quadruples, double threshold = 0.0);

double gromov_product(const MetricFunctional& functional, const Vec& x, const Vec& y, const Vec& omega);

struct ConvergenceReport {
  bool diverging = false;
  double tail_min = 0.0;  ///< min product over pairs in the last half
  double head_min = 0.0;  ///< min product over all pairs
  double slope = 0.0;     ///< least-squares growth of tail minima per index
  std::vector<double> tail_minima;
};

/// Tail minima m_k = min_{k <= i < j} (x_i, x_j)_omega; diverging when they
/// grow by at least `growth` over the prefix with a positive trend.
ConvergenceReport converges_at_infinity(const MetricFunctional& functional, const std::vector<Vec>& sequence,
                                        const Vec& omega, double growth = 1.0);

struct BoundaryProductResult {
  double value = 0.0;
  int depth = 0;
  std::vector<double> trend;
};

/// (a,b)_omega along normal approaches a - t_i n_a, b - t_i n_b, t_i = eps 2^-i,
/// i <= depth. Stabilized when the last three values agree within `tol`.
BoundaryProductResult boundary_product(const MetricFunctional& functional, const HeightProjection& projection,
                                       const Vec& a, const Vec& b, const Vec& omega, int depth, double tol = 1e-3);

/// Increases the depth from `min_depth` until stabilization or `max_depth`.
BoundaryProductResult boundary_product_adaptive(const MetricFunctional& functional,
                                                const HeightProjection& projection, const Vec& a, const Vec& b,
                                                const Vec& omega, int min_depth = 8, int max_depth = 40,
                                                double tol = 1e-3);

struct IdentificationRow {
  Vec a, b;
  double d_H = 0.0;
  double product = 0.0;
  double ratio = 0.0;  ///< exp(-product) / d_H
};

struct IdentificationTable {
  std::vector<IdentificationRow> rows;
  double min_ratio = 0.0, max_ratio = 0.0;
  double spread = 0.0;  ///< max_ratio / min_ratio
  double band = 0.0;    ///< C* with all ratios in [1/C*, C*]
};

IdentificationTable boundary_identification(const MetricFunctional& functional, const HyperbolicModel& model,
                                            const std::vector<std::pair<Vec, Vec>>& pairs, const Vec& omega,
                                            int max_depth = 40);

struct ThinnessReport {
  double thinness = 0.0;
  double slack = 0.0;  ///< 2 x max node spacing of the geodesics
  std::array<Polyline, 3> sides;
};

ThinnessReport triangle_thinness(const MetricFunctional& functional, const Vec& x, const Vec& y, const Vec& z);

}  // namespace hypkob
