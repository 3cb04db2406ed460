#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypkob/boundary_graph.hpp"

namespace hypkob {

/// A located interior point: height data, projection and snapped graph node.
struct Site {
  Vec x;
  Vec foot;    ///< pi(x)
  Vec normal;  ///< outer normal at pi(x)
  double t = 0.0;  ///< dist(x, dD) = h^2
  double h = 0.0;
  int node = -1;   ///< graph node nearest to pi(x)
  bool in_collar = false;
};

/// Discretized path.
struct Polyline {
  std::vector<Vec> points;
  std::vector<double> params;           ///< cumulative Euclidean arclength
  std::vector<double> segment_lengths;  ///< under `functional`, when attached
  std::string functional;
  double length = 0.0;

  static Polyline from_points(std::vector<Vec> points);
  /// Drops consecutive duplicates (within tol) and recomputes params.
  void compact(double tol = 1e-14);
  Polyline reversed() const;
};

struct LayerOptions {
  double level_ratio = 1.25;          ///< ratio between consecutive shell levels
  double same_projection_tol = 1e-7;  ///< feet closer than this are the same projection
  double height_tol = 1e-9;           ///< heights closer than this are equal
  std::size_t cache_capacity = 400000;
};

struct DValue {
  double value = 0.0;
  double lower = 0.0;  ///< g
  double upper = 0.0;  ///< composite cap
  double graph = 0.0;  ///< layered-graph shortest path (inside D_eps part)
};

struct CompositePath {
  Polyline path;
  double bound = 0.0;
  int regime = 0;  ///< 0 vertical, 1 d_H <= h, 2 h < d_H <= sqrt(eps), 3 d_H > sqrt(eps)
};

struct HorizontalOptions {
  double spacing_factor = 0.1;  ///< sub-vertex spacing relative to the common height
};

enum class LayerWeights { D, K };

class LayeredGraph;

/// The hyperbolic construction on a domain: g, d and their paths. Immutable apart
/// from an internal memo of located points; safe for concurrent use.
class HyperbolicModel {
 public:
  explicit HyperbolicModel(std::shared_ptr<const BoundaryGraph> graph, LayerOptions options = {});
  ~HyperbolicModel();

  const BoundaryGraph& graph() const { return *graph_; }
  std::shared_ptr<const BoundaryGraph> graph_ptr() const { return graph_; }
  const HeightProjection& projection() const { return graph_->projection(); }
  const Domain& domain() const { return projection().domain(); }
  const Structure& structure() const { return graph_->structure(); }
  const LayerOptions& options() const { return options_; }
  double epsilon() const { return projection().epsilon(); }
  const LayeredGraph& layers() const { return *layers_; }

  Site locate(const Vec& x) const;
  /// The point of the epsilon-shell above s (same projection).
  Site shell_site(const Site& s, double t) const;
  bool same_projection(const Site& a, const Site& b) const;

  /// g with the snapped graph distance between projections.
  double g(const Site& a, const Site& b) const;
  /// g with the resolved boundary distance; used for partition sums.
  double g_resolved(const Site& a, const Site& b) const;
  double g_value(const Vec& x, const Vec& y) const { return g(locate(x), locate(y)); }

  DValue d_value(const Vec& x, const Vec& y) const;
  DValue d_sites(const Site& a, const Site& b) const;
  /// d from one point to many, sharing one layered-graph search.
  std::vector<double> d_many(const Vec& x, const std::vector<Vec>& ys) const;
  Polyline geodesic(const Vec& x, const Vec& y) const;

  double composite_bound(const Site& a, const Site& b, int* regime = nullptr) const;
  CompositePath composite_upper_path(const Vec& x, const Vec& y) const;
  Polyline vertical_path(const Vec& x, const Vec& y) const;
  Polyline horizontal_path(const Vec& x, const Vec& y, const HorizontalOptions& options = {}) const;

 private:
  DValue collar_d(const Site& a, const Site& b) const;
  Polyline collar_geodesic(const Site& a, const Site& b) const;
  Polyline composite_polyline(const Site& a, const Site& b, int regime) const;
  std::vector<Vec> shell_path(int from_node, int to_node, double t) const;
  /// Inserts shell points between consecutive equal-height points with distinct feet.
  Polyline densify(std::vector<Vec> points) const;

  std::shared_ptr<const BoundaryGraph> graph_;
  LayerOptions options_;
  std::unique_ptr<LayeredGraph> layers_;

  struct KeyHash {
    std::size_t operator()(const std::vector<long long>& k) const noexcept;
  };
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::vector<long long>, Site, KeyHash> cache_;
};

/// Shortest paths in the product of the boundary graph with a geometric grid of
/// shell levels t_k = eps * r^-k.
class LayeredGraph {
 public:
  LayeredGraph(const HyperbolicModel& model, double level_ratio);

  double level_t(int k) const;
  int levels_for(double t_min) const;  ///< highest level index K with t_K >= t_min
  int level_above(double t) const;     ///< largest k with t_k >= t
  double ratio() const { return ratio_; }

  double vertical_weight(double t1, double t2, LayerWeights w) const;
  double horizontal_weight(int edge, int level, LayerWeights w) const;

  struct Result {
    double length = 0.0;
    std::vector<Vec> points;
  };
  /// Single pair; A* with a consistent heuristic.
  Result shortest(const Site& x, const Site& y, LayerWeights w, bool want_path) const;
  /// One source, many targets; Dijkstra until all targets settle.
  std::vector<double> shortest_many(const Site& x, const std::vector<Site>& ys, LayerWeights w) const;

 private:
  const HyperbolicModel& model_;
  double ratio_;
  double log_ratio_;
  double eps_;
};

enum class MetricKind { G, D, Kobayashi, Euclidean, External };

const char* to_string(MetricKind kind);

/// A named distance functional on the domain.
class MetricFunctional {
 public:
  virtual ~MetricFunctional() = default;
  virtual MetricKind kind() const = 0;
  virtual std::string name() const { return to_string(kind()); }
  virtual double distance(const Vec& x, const Vec& y) const = 0;
  /// Two-point value used in partition sums for path lengths.
  virtual double chord(const Vec& x, const Vec& y) const { return distance(x, y); }
  /// Infinitesimal form F(x, v) when the functional has one.
  virtual std::optional<double> infinitesimal(const Vec&, const Vec&) const { return std::nullopt; }
  virtual std::optional<Polyline> geodesic(const Vec&, const Vec&) const { return std::nullopt; }
  /// Distances from x to each y; default loops over distance().
  virtual std::vector<double> distances_from(const Vec& x, const std::vector<Vec>& ys) const;
};

class GFunctional : public MetricFunctional {
 public:
  explicit GFunctional(std::shared_ptr<const HyperbolicModel> model) : model_(std::move(model)) {}
  MetricKind kind() const override { return MetricKind::G; }
  double distance(const Vec& x, const Vec& y) const override { return model_->g_value(x, y); }
  double chord(const Vec& x, const Vec& y) const override;
  const HyperbolicModel& model() const { return *model_; }

 private:
  std::shared_ptr<const HyperbolicModel> model_;
};

class DFunctional : public MetricFunctional {
 public:
  explicit DFunctional(std::shared_ptr<const HyperbolicModel> model) : model_(std::move(model)) {}
  MetricKind kind() const override { return MetricKind::D; }
  double distance(const Vec& x, const Vec& y) const override { return model_->d_value(x, y).value; }
  /// d is the length metric of g, so both share partition chords.
  double chord(const Vec& x, const Vec& y) const override;
  std::optional<Polyline> geodesic(const Vec& x, const Vec& y) const override { return model_->geodesic(x, y); }
  std::vector<double> distances_from(const Vec& x, const std::vector<Vec>& ys) const override {
    return model_->d_many(x, ys);
  }
  const HyperbolicModel& model() const { return *model_; }

 private:
  std::shared_ptr<const HyperbolicModel> model_;
};

class EuclideanFunctional : public MetricFunctional {
 public:
  MetricKind kind() const override { return MetricKind::Euclidean; }
  double distance(const Vec& x, const Vec& y) const override { return (x - y).norm(); }
  std::optional<double> infinitesimal(const Vec&, const Vec& v) const override { return v.norm(); }
  std::optional<Polyline> geodesic(const Vec& x, const Vec& y) const override;
};

class ExternalFunctional : public MetricFunctional {
 public:
  ExternalFunctional(std::string name, std::function<double(const Vec&, const Vec&)> f)
      : name_(std::move(name)), f_(std::move(f)) {}
  MetricKind kind() const override { return MetricKind::External; }
  std::string name() const override { return name_; }
  double distance(const Vec& x, const Vec& y) const override { return f_(x, y); }

 private:
  std::string name_;
  std::function<double(const Vec&, const Vec&)> f_;
};

struct PathLengthOptions {
  double rel_tol = 1e-6;
  int max_depth = 14;
};

struct PathLength {
  double value = 0.0;
  double lower = 0.0;  ///< finest partition sum
  double upper = 0.0;  ///< extrapolated estimate bracket end
  int depth = 0;
};

/// Length as a supremum of partition sums (dyadic refinement per segment with
/// Richardson extrapolation), or by quadrature of the infinitesimal form.
PathLength path_length(const Polyline& polyline, const MetricFunctional& functional,
                       const PathLengthOptions& options = {});

/// Numeric dilation lim g(gamma(s-e), gamma(s+e)) / 2e at Euclidean arclength s.
double dilation(const Polyline& polyline, const MetricFunctional& functional, double s);

/// Point at Euclidean arclength s along the polyline.
Vec point_at(const Polyline& polyline, double s);

struct CEstimate {
  double C = 0.0;
  double vertical = 0.0, case1 = 0.0, case2 = 0.0, case3 = 0.0, outside = 0.0, mixed = 0.0;
  int pairs = 0;
  double min_margin = 0.0;  ///< min of d - g (negative means g > d)
};

/// max |d - g| over the pairs, broken down by regime.
CEstimate estimate_C(const HyperbolicModel& model, const std::vector<std::pair<Vec, Vec>>& pairs);

int classify_regime(const HyperbolicModel& model, const Site& a, const Site& b);

}  // namespace hypkob
