#include "hypkob/almost_complex.hpp"

#include <algorithm>
#include <cmath>

#include "hypkob/error.hpp"

namespace hypkob {

Structure::Structure(int dimension, double fd_step) : dim_(dimension), fd_step_(fd_step) {
  if (dim_ <= 0 || dim_ % 2 != 0) throw Error(ErrorCode::ConfigError, "structure dimension must be even");
  if (!(fd_step_ > 0.0)) throw Error(ErrorCode::ConfigError, "finite-difference step must be positive");
}

Mat Structure::derivative(const Vec& x, const Vec& v) const {
  const double vn = v.norm();
  if (vn == 0.0) return Mat::Zero(dim_, dim_);
  const double s = fd_step_ / vn;
  return (J(x + s * v) - J(x - s * v)) / (2.0 * s);
}

Mat standard_J(int dimension) {
  Mat J = Mat::Zero(dimension, dimension);
  for (int k = 0; k + 1 < dimension; k += 2) {
    J(k + 1, k) = 1.0;
    J(k, k + 1) = -1.0;
  }
  return J;
}

StandardStructure::StandardStructure(int dimension) : Structure(dimension), J0_(standard_J(dimension)) {}

PolynomialStructure::PolynomialStructure(int dimension, std::vector<Term> terms, double fd_step)
    : Structure(dimension, fd_step), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.coefficient.rows() != dimension || t.coefficient.cols() != dimension ||
        static_cast<int>(t.exponents.size()) != dimension) {
      throw Error(ErrorCode::ConfigError, "polynomial structure term has wrong shape");
    }
  }
}

Mat PolynomialStructure::J(const Vec& x) const {
  Mat out = Mat::Zero(dimension(), dimension());
  for (const auto& t : terms_) {
    double m = 1.0;
    for (int i = 0; i < dimension(); ++i) {
      for (int e = 0; e < t.exponents[static_cast<std::size_t>(i)]; ++e) m *= x(i);
    }
    out += m * t.coefficient;
  }
  return out;
}

ConjugatedStructure::ConjugatedStructure(Mat P0, std::vector<Mat> B, double fd_step)
    : Structure(static_cast<int>(P0.rows()), fd_step), P0_(std::move(P0)), B_(std::move(B)) {
  J0_ = standard_J(dimension());
  if (P0_.cols() != dimension()) throw Error(ErrorCode::ConfigError, "P0 must be square");
  if (!B_.empty() && static_cast<int>(B_.size()) != dimension()) {
    throw Error(ErrorCode::ConfigError, "conjugated structure needs one B matrix per coordinate");
  }
  for (const auto& b : B_) {
    if (b.rows() != dimension() || b.cols() != dimension()) {
      throw Error(ErrorCode::ConfigError, "B matrix has wrong shape");
    }
  }
}

Mat ConjugatedStructure::J(const Vec& x) const {
  Mat P = P0_;
  for (std::size_t i = 0; i < B_.size(); ++i) P += x(static_cast<Eigen::Index>(i)) * B_[i];
  Eigen::PartialPivLU<Mat> lu(P);
  return P * J0_ * lu.inverse();
}

GridStructure::GridStructure(Box box, std::vector<int> shape, std::vector<Mat> values, double fd_step)
    : Structure(box.dimension(), fd_step), box_(std::move(box)), shape_(std::move(shape)), values_(std::move(values)) {
  if (static_cast<int>(shape_.size()) != dimension()) throw Error(ErrorCode::ConfigError, "grid shape rank mismatch");
  std::size_t total = 1;
  for (int s : shape_) {
    if (s < 2) throw Error(ErrorCode::ConfigError, "grid needs at least two nodes per axis");
    total *= static_cast<std::size_t>(s);
  }
  if (values_.size() != total) throw Error(ErrorCode::ConfigError, "grid value count mismatch");
  for (const auto& v : values_) {
    if (v.rows() != dimension() || v.cols() != dimension()) throw Error(ErrorCode::ConfigError, "grid matrix shape");
  }
}

Mat GridStructure::J(const Vec& x) const {
  const int d = dimension();
  std::vector<int> base(static_cast<std::size_t>(d));
  std::vector<double> frac(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const int m = shape_[static_cast<std::size_t>(i)];
    double u = (x(i) - box_.lo(i)) / (box_.hi(i) - box_.lo(i)) * (m - 1);
    u = std::clamp(u, 0.0, static_cast<double>(m - 1));
    int b = std::min(static_cast<int>(std::floor(u)), m - 2);
    base[static_cast<std::size_t>(i)] = b;
    frac[static_cast<std::size_t>(i)] = u - b;
  }
  Mat out = Mat::Zero(d, d);
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int i = 0; i < d; ++i) {
      const int bit = (corner >> i) & 1;
      const double f = frac[static_cast<std::size_t>(i)];
      w *= bit ? f : 1.0 - f;
      flat = flat * static_cast<std::size_t>(shape_[static_cast<std::size_t>(i)]) +
             static_cast<std::size_t>(base[static_cast<std::size_t>(i)] + bit);
    }
    if (w != 0.0) out += w * values_[flat];
  }
  return out;
}

StructureReport check_structure(const Structure& s, const std::vector<Vec>& points, double tolerance) {
  StructureReport r;
  const Mat I = Mat::Identity(s.dimension(), s.dimension());
  for (const auto& x : points) {
    const Mat J = s.J(x);
    const double dev = (J * J + I).cwiseAbs().maxCoeff();
    if (dev > r.max_deviation || r.worst_point.size() == 0) {
      r.max_deviation = std::max(r.max_deviation, dev);
      r.worst_point = x;
    }
  }
  r.pass = r.max_deviation < tolerance;
  return r;
}

Vec dc_covector(const Domain& domain, const Structure& s, const Vec& x) {
  return -(s.J(x).transpose() * domain.gradient(x));
}

namespace {

void require_match(const Domain& domain, const Structure& s) {
  if (domain.dimension() != s.dimension()) {
    throw Error(ErrorCode::ConfigError, "domain and structure dimensions differ");
  }
}

// D_X [alpha(Y)] for the covector field alpha at x.
double directional(const Domain& domain, const Structure& s, const Vec& x, const Vec& X, const Vec& Y) {
  const double xn = X.norm();
  if (xn == 0.0) return 0.0;
  const double h = domain.fd_step() / xn;
  const double fp = dc_covector(domain, s, x + h * X).dot(Y);
  const double fm = dc_covector(domain, s, x - h * X).dot(Y);
  const double out = (fp - fm) / (2.0 * h);
  if (!std::isfinite(out)) throw Error(ErrorCode::DerivativeEvaluationFailed, "non-finite Levi derivative");
  return out;
}

double d_alpha(const Domain& domain, const Structure& s, const Vec& x, const Vec& X, const Vec& Y) {
  return directional(domain, s, x, X, Y) - directional(domain, s, x, Y, X);
}

}  // namespace

double levi_form(const Domain& domain, const Structure& s, const Vec& x, const Vec& X) {
  require_match(domain, s);
  if (X.norm() == 0.0) return 0.0;
  return d_alpha(domain, s, x, X, s.J(x) * X);
}

Mat levi_matrix(const Domain& domain, const Structure& s, const Vec& x, const Mat& frame) {
  require_match(domain, s);
  const int m = static_cast<int>(frame.cols());
  const Mat J = s.J(x);
  // bilinear B(X, Y) = d alpha(X, JY); the Levi matrix is its symmetric part
  Mat B(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) B(i, j) = d_alpha(domain, s, x, frame.col(i), J * frame.col(j));
  }
  return 0.5 * (B + B.transpose());
}

ConvexityReport check_strict_convexity(const Domain& domain, const Structure& s, int n_samples, std::uint64_t seed) {
  require_match(domain, s);
  ConvexityReport r;
  const int n_boundary = std::max(1, n_samples / 2);
  std::vector<Vec> pts = sample_boundary(domain, n_boundary, seed);
  // inner collar points at a tenth of the bounding-box scale
  const double depth = 0.02 * domain.bounding_box().diagonal();
  const std::size_t nb = pts.size();
  for (std::size_t i = 0; i < nb && static_cast<int>(pts.size()) < n_samples; ++i) {
    pts.push_back(pts[i] - depth * domain.normal(pts[i]));
  }
  const Mat frame = Mat::Identity(domain.dimension(), domain.dimension());
  bool first = true;
  for (const auto& x : pts) {
    const Mat L = levi_matrix(domain, s, x, frame);
    Eigen::SelfAdjointEigenSolver<Mat> es(L, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (first || lo < r.margin) {
      r.margin = lo;
      r.worst_point = x;
      first = false;
    }
  }
  r.samples = static_cast<int>(pts.size());
  r.pass = r.margin > 0.0;
  return r;
}

Mat horizontal_basis(const Vec& n, const Mat& J) {
  const int dim = static_cast<int>(n.size());
  Vec a = n.normalized();
  Vec b = J.transpose() * a;
  b -= b.dot(a) * a;
  b.normalize();
  std::vector<Vec> cand;
  for (int i = 0; i < dim; ++i) {
    Vec e = unit(dim, i);
    e -= e.dot(a) * a;
    e -= e.dot(b) * b;
    cand.push_back(e);
  }
  Mat out(dim, dim - 2);
  std::vector<bool> used(static_cast<std::size_t>(dim), false);
  for (int k = 0; k < dim - 2; ++k) {
    int best = -1;
    double bn = -1.0;
    for (int i = 0; i < dim; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double nn = cand[static_cast<std::size_t>(i)].norm();
      if (nn > bn + 1e-12) {
        bn = nn;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    Vec q = cand[static_cast<std::size_t>(best)] / bn;
    // second pass against the basis so far for numerical orthogonality
    for (int j = 0; j < k; ++j) q -= q.dot(out.col(j)) * out.col(j);
    q -= q.dot(a) * a;
    q -= q.dot(b) * b;
    q.normalize();
    out.col(k) = q;
    for (int i = 0; i < dim; ++i) {
      if (!used[static_cast<std::size_t>(i)]) {
        cand[static_cast<std::size_t>(i)] -= cand[static_cast<std::size_t>(i)].dot(q) * q;
      }
    }
  }
  return out;
}

ContactData contact_at(const Domain& domain, const Structure& s, const Vec& p, double floor_factor) {
  require_match(domain, s);
  const int dim = domain.dimension();
  if (dim < 4) throw Error(ErrorCode::DimensionTooSmall, "contact distribution needs 2n >= 4");
  ContactData c;
  c.point = p;
  c.normal = domain.normal(p);
  const Mat J = s.J(p);
  c.eta = J.transpose() * domain.gradient(p);
  c.basis = horizontal_basis(c.normal, J);
  const int m = dim - 2;

  // Omega = d eta from the Jacobian of the covector field eta(z) = J(z)^T grad rho(z)
  std::vector<Vec> deriv(static_cast<std::size_t>(m));
  const double h = domain.fd_step();
  for (int i = 0; i < m; ++i) {
    const Vec b = c.basis.col(i);
    const Vec ep = s.J(p + h * b).transpose() * domain.gradient(p + h * b);
    const Vec em = s.J(p - h * b).transpose() * domain.gradient(p - h * b);
    deriv[static_cast<std::size_t>(i)] = (ep - em) / (2.0 * h);
  }
  c.omega.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      c.omega(i, j) = deriv[static_cast<std::size_t>(i)].dot(c.basis.col(j)) -
                      deriv[static_cast<std::size_t>(j)].dot(c.basis.col(i));
    }
  }
  if (!c.omega.allFinite()) throw Error(ErrorCode::DerivativeEvaluationFailed, "non-finite curvature form");

  const Mat L = levi_matrix(domain, s, p, c.basis);
  Eigen::SelfAdjointEigenSolver<Mat> es(L, Eigen::EigenvaluesOnly);
  c.levi_margin = es.eigenvalues().minCoeff();
  Eigen::JacobiSVD<Mat> svd(c.omega);
  c.sigma_min = svd.singularValues().minCoeff();

  for (int i = 0; i < m; ++i) {
    const Vec X = c.basis.col(i);
    const Vec JX = J * X;
    const Vec coeff = c.basis.transpose() * JX;
    c.invariance_residual = std::max(c.invariance_residual, (JX - c.basis * coeff).norm());
    c.annihilation_residual = std::max(c.annihilation_residual, std::abs(c.eta.dot(X)));
    const double om = c.omega.row(i).dot(coeff);
    const double lv = levi_form(domain, s, p, X);
    const double denom = std::max(std::abs(lv), 1e-300);
    c.identity_error = std::max(c.identity_error, std::abs(om + lv) / denom);
  }
  if (!(c.levi_margin > 0.0) || c.sigma_min < floor_factor * c.levi_margin) {
    throw Error(ErrorCode::DegenerateContact, "curvature form is degenerate on the distribution");
  }
  return c;
}

}  // namespace hypkob
