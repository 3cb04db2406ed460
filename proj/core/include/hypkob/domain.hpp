#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypkob/types.hpp"

namespace hypkob {

/// A defining function rho; negative inside, zero on the boundary.
class DefiningFunction {
 public:
  virtual ~DefiningFunction() = default;
  virtual int dimension() const = 0;
  virtual std::string name() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual bool has_derivatives() const { return false; }
  virtual Vec gradient(const Vec& x) const;
  virtual Mat hessian(const Vec& x) const;
};

/// |x - c|^2 - r^2
class BallFunction : public DefiningFunction {
 public:
  BallFunction(Vec center, double radius);
  int dimension() const override { return static_cast<int>(center_.size()); }
  std::string name() const override { return "ball"; }
  double value(const Vec& x) const override;
  bool has_derivatives() const override { return true; }
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Vec center_;
  double radius_;
};

/// sum (x_i / a_i)^2 - 1
class EllipsoidFunction : public DefiningFunction {
 public:
  explicit EllipsoidFunction(Vec semi_axes);
  int dimension() const override { return static_cast<int>(axes_.size()); }
  std::string name() const override { return "ellipsoid"; }
  double value(const Vec& x) const override;
  bool has_derivatives() const override { return true; }
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  const Vec& semi_axes() const { return axes_; }

 private:
  Vec axes_;
};

/// sum |x_i / a_i|^p - 1 with p >= 2
class SuperellipsoidFunction : public DefiningFunction {
 public:
  SuperellipsoidFunction(Vec semi_axes, double exponent);
  int dimension() const override { return static_cast<int>(axes_.size()); }
  std::string name() const override { return "superellipsoid"; }
  double value(const Vec& x) const override;
  bool has_derivatives() const override { return true; }
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

 private:
  Vec axes_;
  double p_;
};

struct Monomial {
  double coefficient = 0.0;
  std::vector<int> exponents;
};

/// Polynomial defining function, sum c * prod x_i^e_i.
class PolynomialFunction : public DefiningFunction {
 public:
  PolynomialFunction(int dimension, std::vector<Monomial> terms);
  int dimension() const override { return dim_; }
  std::string name() const override { return "polynomial"; }
  double value(const Vec& x) const override;
  bool has_derivatives() const override { return true; }
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

 private:
  int dim_;
  std::vector<Monomial> terms_;
};

/// Wraps a callable; derivatives by finite differences.
class CallableFunction : public DefiningFunction {
 public:
  CallableFunction(int dimension, std::function<double(const Vec&)> f, std::string name = "callable");
  int dimension() const override { return dim_; }
  std::string name() const override { return name_; }
  double value(const Vec& x) const override { return f_(x); }

 private:
  int dim_;
  std::function<double(const Vec&)> f_;
  std::string name_;
};

struct DomainOptions {
  bool use_analytic = true;            ///< use analytic derivatives when the function has them
  std::optional<double> fd_step;       ///< default 1e-5 * bounding-box diagonal
  std::optional<double> reach_override;
};

/// Bounded domain {rho < 0} inside an axis-aligned box. Immutable.
class Domain {
 public:
  Domain(std::shared_ptr<const DefiningFunction> rho, Box box, DomainOptions options = {});

  int dimension() const { return dim_; }
  const Box& bounding_box() const { return box_; }
  const DefiningFunction& function() const { return *rho_; }
  const DomainOptions& options() const { return options_; }
  double fd_step() const { return fd_step_; }
  bool analytic() const { return analytic_; }

  double rho(const Vec& x) const { return rho_->value(x); }
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  /// Outer unit normal at a boundary point.
  Vec normal(const Vec& p) const;
  bool contains(const Vec& x) const { return rho(x) < 0.0; }

  /// Newton iteration along the gradient line onto {rho = 0}; works from either side.
  std::optional<Vec> pull_to_boundary(const Vec& y, double tol = 1e-13, int max_iter = 100) const;

 private:
  std::shared_ptr<const DefiningFunction> rho_;
  Box box_;
  DomainOptions options_;
  int dim_;
  double fd_step_;
  bool analytic_;
};

std::shared_ptr<Domain> make_ball(int dimension, double radius = 1.0);
std::shared_ptr<Domain> make_ellipsoid(const Vec& semi_axes);

struct SamplingOptions {
  int oversample = 4;          ///< candidates per requested sample before thinning
  double band_fraction = 0.1;  ///< keep box points with |rho|/|grad rho| below this * diagonal
};

/// Deterministic quasi-uniform boundary samples: shifted Halton box points near
/// the boundary are pulled onto it, then thinned by farthest-point selection.
std::vector<Vec> sample_boundary(const Domain& domain, int n, std::uint64_t seed,
                                 const SamplingOptions& options = {});

/// Deterministic interior points, uniform in the box with rejection.
std::vector<Vec> sample_interior(const Domain& domain, int n, std::uint64_t seed);

/// Uniform double in [0, 1) from a 64-bit generator, identical across platforms.
double unit_uniform(std::uint64_t bits);

/// Radical inverse in the given prime base.
double radical_inverse(std::uint64_t index, int base);

}  // namespace hypkob
