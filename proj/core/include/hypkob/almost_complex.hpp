#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hypkob/domain.hpp"

namespace hypkob {

/// Almost complex structure field x -> J(x) on R^{2n}.
class Structure {
 public:
  explicit Structure(int dimension, double fd_step = 1e-5);
  virtual ~Structure() = default;

  int dimension() const { return dim_; }
  double fd_step() const { return fd_step_; }
  virtual std::string name() const = 0;
  virtual Mat J(const Vec& x) const = 0;
  /// D_v J at x; central differences unless overridden.
  virtual Mat derivative(const Vec& x, const Vec& v) const;
  /// True when J does not depend on x.
  virtual bool constant() const { return false; }

 private:
  int dim_;
  double fd_step_;
};

/// Block-diagonal rotations on the pairs (x1,x2), (x3,x4), ...
class StandardStructure : public Structure {
 public:
  explicit StandardStructure(int dimension);
  std::string name() const override { return "standard"; }
  Mat J(const Vec&) const override { return J0_; }
  Mat derivative(const Vec& x, const Vec&) const override { return Mat::Zero(x.size(), x.size()); }
  bool constant() const override { return true; }

 private:
  Mat J0_;
};

Mat standard_J(int dimension);

/// J(x) = sum_t C_t * prod x_i^e_it.
class PolynomialStructure : public Structure {
 public:
  struct Term {
    Mat coefficient;
    std::vector<int> exponents;
  };
  PolynomialStructure(int dimension, std::vector<Term> terms, double fd_step = 1e-5);
  std::string name() const override { return "polynomial"; }
  Mat J(const Vec& x) const override;

 private:
  std::vector<Term> terms_;
};

/// J(x) = P(x) J_std P(x)^{-1} with P(x) = P0 + sum_i x_i B_i; J^2 = -Id exactly.
class ConjugatedStructure : public Structure {
 public:
  ConjugatedStructure(Mat P0, std::vector<Mat> B, double fd_step = 1e-5);
  std::string name() const override { return "conjugated"; }
  Mat J(const Vec& x) const override;

 private:
  Mat P0_;
  std::vector<Mat> B_;
  Mat J0_;
};

/// Tabulated J on a regular grid, multilinear interpolation (clamped outside).
class GridStructure : public Structure {
 public:
  GridStructure(Box box, std::vector<int> shape, std::vector<Mat> values, double fd_step = 1e-5);
  std::string name() const override { return "grid"; }
  Mat J(const Vec& x) const override;

 private:
  Box box_;
  std::vector<int> shape_;
  std::vector<Mat> values_;
};

struct StructureReport {
  double max_deviation = 0.0;  ///< max entrywise |J^2 + Id|
  Vec worst_point;
  bool pass = false;
};

StructureReport check_structure(const Structure& s, const std::vector<Vec>& points, double tolerance = 1e-10);

/// Covector of d^c_J rho at x: d^c_J rho(Y) = -grad rho . J Y.
Vec dc_covector(const Domain& domain, const Structure& s, const Vec& x);

/// L(X) = d(d^c_J rho)(X, JX) with constant-coefficient extensions and central differences.
double levi_form(const Domain& domain, const Structure& s, const Vec& x, const Vec& X);

/// Matrix of the Levi form on the columns of `frame` (symmetrized, by polarization).
Mat levi_matrix(const Domain& domain, const Structure& s, const Vec& x, const Mat& frame);

struct ConvexityReport {
  double margin = 0.0;  ///< min over samples of the smallest Levi eigenvalue
  Vec worst_point;
  int samples = 0;
  bool pass = false;
};

/// Smallest Levi eigenvalue over an orthonormal frame of R^{2n}, at boundary
/// samples and at points of the inner collar.
ConvexityReport check_strict_convexity(const Domain& domain, const Structure& s, int n_samples,
                                       std::uint64_t seed = 1);

/// Orthonormal basis of {n, J^T n}^perp by modified Gram-Schmidt with pivoting.
/// Columns are deterministic for given inputs.
Mat horizontal_basis(const Vec& n, const Mat& J);

struct ContactData {
  Vec point;
  Vec normal;
  Vec eta;        ///< covector of eta = -d^c_J rho at p
  Mat basis;      ///< 2n x (2n-2) orthonormal basis of the distribution
  Mat omega;      ///< d eta on the basis
  double levi_margin = 0.0;       ///< smallest Levi eigenvalue on the distribution
  double sigma_min = 0.0;         ///< smallest singular value of omega
  double identity_error = 0.0;    ///< max relative |Omega(X,JX) + L(X)| over basis vectors
  double invariance_residual = 0.0;
  double annihilation_residual = 0.0;
};

ContactData contact_at(const Domain& domain, const Structure& s, const Vec& p, double floor_factor = 1e-6);

}  // namespace hypkob
