#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob {

/// Decomposition T_x = N_x + H_x with N = span{n, Jn}, H = {n, J^T n}^perp.
struct TangentSplit {
  Vec x;
  Vec n;       ///< outer normal at pi(x)
  Vec Jn;      ///< J(x) n
  Mat basis;   ///< orthonormal basis of H, 2n - 2 columns
  Vec v_N, v_H;
  double t = 0.0;  ///< dist(x, dD)
};

TangentSplit split_vector(const HeightProjection& projection, const Structure& structure, const Vec& x, const Vec& v);

struct KobayashiOptions {
  double c_horizontal = 1.0;
  double c_normal = 1.0;
  double rel_tol = 1e-5;  ///< quadrature tolerance for lengths
  int max_depth = 16;
};

/// c_h |v_H| / h + c_n |v_N| / h^2 inside D_eps, |v| / h^2 outside.
double k_infinitesimal(const HeightProjection& projection, const Structure& structure, const Vec& x, const Vec& v,
                       const KobayashiOptions& options = {});

/// The normalized Kobayashi estimate as a metric functional. Distances need a
/// hyperbolic model; the infinitesimal form only needs the projection.
class KobayashiFunctional : public MetricFunctional {
 public:
  explicit KobayashiFunctional(std::shared_ptr<const HyperbolicModel> model, KobayashiOptions options = {});
  KobayashiFunctional(std::shared_ptr<const HeightProjection> projection, std::shared_ptr<const Structure> structure,
                      KobayashiOptions options = {});

  MetricKind kind() const override { return MetricKind::Kobayashi; }
  std::string name() const override { return "kobayashi_estimate"; }
  double distance(const Vec& x, const Vec& y) const override;
  std::optional<double> infinitesimal(const Vec& x, const Vec& v) const override;
  std::optional<Polyline> geodesic(const Vec& x, const Vec& y) const override;
  std::vector<double> distances_from(const Vec& x, const std::vector<Vec>& ys) const override;

  const KobayashiOptions& options() const { return options_; }
  bool has_model() const { return model_ != nullptr; }

 private:
  const HyperbolicModel& model() const;
  double outside_offset(const Site& s) const;
  double segment_length(const Vec& x, const Vec& y) const;

  std::shared_ptr<const HyperbolicModel> model_;
  std::shared_ptr<const HeightProjection> projection_;
  std::shared_ptr<const Structure> structure_;
  KobayashiOptions options_;
};

/// Length of a polyline by midpoint quadrature of the estimate.
double k_length(const KobayashiFunctional& functional, const Polyline& polyline);

struct QiOptions {
  double budget = 4.0;  ///< admissible additive constant
  double c_max = 1e6;
  double zero_tol = 1e-12;
};

struct QiViolation {
  std::size_t index = 0;
  double a = 0.0, b = 0.0;
  std::string reason;
};

struct QiRegimeStats {
  int regime = 0;
  int count = 0;
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max = 0.0;  ///< residual beyond C'
};

struct QiFit {
  double C = 1.0;
  double C_prime = 0.0;
  bool within_budget = false;
  std::size_t samples = 0;
  std::vector<QiViolation> violations;
  std::vector<QiRegimeStats> regimes;
};

/// Smallest C >= 1 with C'(C) = max(0, max(b - C a), max(a / C - b)) within
/// budget, so that -C' + a / C <= b <= C a + C'. C'(C) is nonincreasing.
QiFit qi_fit(const std::vector<double>& a, const std::vector<double>& b, const QiOptions& options = {},
             const std::vector<int>& regimes = {});

/// Evaluates both functionals on the pairs and fits; regimes from the model when given.
QiFit qi_check(const MetricFunctional& a, const MetricFunctional& b, const std::vector<std::pair<Vec, Vec>>& pairs,
               const QiOptions& options = {}, const HyperbolicModel* model = nullptr);

}  // namespace hypkob
