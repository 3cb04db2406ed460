#include "hypkob/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hypkob/error.hpp"

namespace hypkob {

Vec DefiningFunction::gradient(const Vec&) const {
  throw Error(ErrorCode::DerivativeEvaluationFailed, name() + " has no analytic gradient");
}

Mat DefiningFunction::hessian(const Vec&) const {
  throw Error(ErrorCode::DerivativeEvaluationFailed, name() + " has no analytic Hessian");
}

BallFunction::BallFunction(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius_ > 0.0)) throw Error(ErrorCode::ConfigError, "ball radius must be positive");
}

double BallFunction::value(const Vec& x) const { return (x - center_).squaredNorm() - radius_ * radius_; }
Vec BallFunction::gradient(const Vec& x) const { return 2.0 * (x - center_); }
Mat BallFunction::hessian(const Vec& x) const { return 2.0 * Mat::Identity(x.size(), x.size()); }

EllipsoidFunction::EllipsoidFunction(Vec semi_axes) : axes_(std::move(semi_axes)) {
  if ((axes_.array() <= 0.0).any()) throw Error(ErrorCode::ConfigError, "semi-axes must be positive");
}

double EllipsoidFunction::value(const Vec& x) const {
  return (x.array() / axes_.array()).square().sum() - 1.0;
}
Vec EllipsoidFunction::gradient(const Vec& x) const {
  return (2.0 * x.array() / axes_.array().square()).matrix();
}
Mat EllipsoidFunction::hessian(const Vec&) const {
  return (2.0 / axes_.array().square()).matrix().asDiagonal();
}

SuperellipsoidFunction::SuperellipsoidFunction(Vec semi_axes, double exponent)
    : axes_(std::move(semi_axes)), p_(exponent) {
  if ((axes_.array() <= 0.0).any()) throw Error(ErrorCode::ConfigError, "semi-axes must be positive");
  if (!(p_ >= 2.0)) throw Error(ErrorCode::ConfigError, "superellipsoid exponent must be >= 2");
}

double SuperellipsoidFunction::value(const Vec& x) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i) / axes_(i)), p_);
  return s - 1.0;
}

Vec SuperellipsoidFunction::gradient(const Vec& x) const {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u = x(i) / axes_(i);
    g(i) = p_ * std::copysign(std::pow(std::abs(u), p_ - 1.0), u) / axes_(i);
  }
  return g;
}

Mat SuperellipsoidFunction::hessian(const Vec& x) const {
  Mat h = Mat::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u = std::abs(x(i) / axes_(i));
    h(i, i) = p_ * (p_ - 1.0) * (p_ == 2.0 ? 1.0 : std::pow(u, p_ - 2.0)) / (axes_(i) * axes_(i));
  }
  return h;
}

PolynomialFunction::PolynomialFunction(int dimension, std::vector<Monomial> terms)
    : dim_(dimension), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != dim_) {
      throw Error(ErrorCode::ConfigError, "monomial exponent count does not match dimension");
    }
    for (int e : t.exponents) {
      if (e < 0) throw Error(ErrorCode::ConfigError, "negative exponent in polynomial");
    }
  }
}

namespace {
double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}
}  // namespace

double PolynomialFunction::value(const Vec& x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double m = t.coefficient;
    for (int i = 0; i < dim_; ++i) m *= ipow(x(i), t.exponents[i]);
    s += m;
  }
  return s;
}

Vec PolynomialFunction::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& t : terms_) {
    for (int i = 0; i < dim_; ++i) {
      if (t.exponents[i] == 0) continue;
      double m = t.coefficient * t.exponents[i] * ipow(x(i), t.exponents[i] - 1);
      for (int j = 0; j < dim_; ++j) {
        if (j != i) m *= ipow(x(j), t.exponents[j]);
      }
      g(i) += m;
    }
  }
  return g;
}

Mat PolynomialFunction::hessian(const Vec& x) const {
  Mat h = Mat::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    for (int i = 0; i < dim_; ++i) {
      for (int j = i; j < dim_; ++j) {
        std::vector<int> e = t.exponents;
        double m = t.coefficient;
        if (e[i] == 0) continue;
        m *= e[i];
        e[i] -= 1;
        if (e[j] == 0) continue;
        m *= e[j];
        e[j] -= 1;
        for (int k = 0; k < dim_; ++k) m *= ipow(x(k), e[k]);
        h(i, j) += m;
        if (i != j) h(j, i) += m;
      }
    }
  }
  return h;
}

CallableFunction::CallableFunction(int dimension, std::function<double(const Vec&)> f, std::string name)
    : dim_(dimension), f_(std::move(f)), name_(std::move(name)) {}

Domain::Domain(std::shared_ptr<const DefiningFunction> rho, Box box, DomainOptions options)
    : rho_(std::move(rho)), box_(std::move(box)), options_(options) {
  if (!rho_) throw Error(ErrorCode::ConfigError, "missing defining function");
  dim_ = rho_->dimension();
  if (dim_ <= 0 || box_.dimension() != dim_) {
    throw Error(ErrorCode::ConfigError, "bounding box dimension does not match defining function");
  }
  if ((box_.hi.array() <= box_.lo.array()).any()) throw Error(ErrorCode::ConfigError, "empty bounding box");
  fd_step_ = options_.fd_step.value_or(1e-5 * box_.diagonal());
  if (!(fd_step_ > 0.0)) throw Error(ErrorCode::ConfigError, "finite-difference step must be positive");
  analytic_ = options_.use_analytic && rho_->has_derivatives();
}

Vec Domain::gradient(const Vec& x) const {
  if (analytic_) return rho_->gradient(x);
  Vec g(dim_);
  Vec y = x;
  for (int i = 0; i < dim_; ++i) {
    y(i) = x(i) + fd_step_;
    const double fp = rho_->value(y);
    y(i) = x(i) - fd_step_;
    const double fm = rho_->value(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * fd_step_);
  }
  return g;
}

Mat Domain::hessian(const Vec& x) const {
  if (analytic_) return rho_->hessian(x);
  const double h = fd_step_;
  Mat H(dim_, dim_);
  const double f0 = rho_->value(x);
  Vec y = x;
  for (int i = 0; i < dim_; ++i) {
    y(i) = x(i) + h;
    const double fp = rho_->value(y);
    y(i) = x(i) - h;
    const double fm = rho_->value(y);
    y(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = i + 1; j < dim_; ++j) {
      double acc = 0.0;
      for (int si = -1; si <= 1; si += 2) {
        for (int sj = -1; sj <= 1; sj += 2) {
          y(i) = x(i) + si * h;
          y(j) = x(j) + sj * h;
          acc += si * sj * rho_->value(y);
        }
      }
      y(i) = x(i);
      y(j) = x(j);
      H(i, j) = H(j, i) = acc / (4.0 * h * h);
    }
  }
  return H;
}

Vec Domain::normal(const Vec& p) const {
  Vec g = gradient(p);
  const double n = g.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::DerivativeEvaluationFailed, "vanishing gradient at boundary point");
  }
  return g / n;
}

std::optional<Vec> Domain::pull_to_boundary(const Vec& y, double tol, int max_iter) const {
  Vec p = y;
  const double scale = std::max(1.0, box_.diagonal());
  for (int it = 0; it < max_iter; ++it) {
    const double r = rho(p);
    const Vec g = gradient(p);
    const double gg = g.squaredNorm();
    if (!(gg > 0.0) || !std::isfinite(gg)) return std::nullopt;
    const Vec step = r * g / gg;
    p -= step;
    if (!p.allFinite()) return std::nullopt;
    if (step.norm() <= tol * scale) return p;
  }
  return std::nullopt;
}

std::shared_ptr<Domain> make_ball(int dimension, double radius) {
  Box box{Vec::Constant(dimension, -1.05 * radius), Vec::Constant(dimension, 1.05 * radius)};
  return std::make_shared<Domain>(std::make_shared<BallFunction>(Vec::Zero(dimension), radius), box);
}

std::shared_ptr<Domain> make_ellipsoid(const Vec& semi_axes) {
  Box box{-1.05 * semi_axes, 1.05 * semi_axes};
  return std::make_shared<Domain>(std::make_shared<EllipsoidFunction>(semi_axes), box);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

Vec halton_point(std::uint64_t index, const Vec& shift, const Box& box) {
  const int dim = box.dimension();
  Vec x(dim);
  for (int i = 0; i < dim; ++i) {
    double u = radical_inverse(index, kPrimes[i % 16]) + shift(i);
    u -= std::floor(u);
    x(i) = box.lo(i) + u * (box.hi(i) - box.lo(i));
  }
  return x;
}

}  // namespace

std::vector<Vec> sample_boundary(const Domain& domain, int n, std::uint64_t seed, const SamplingOptions& options) {
  if (n <= 0) return {};
  const Box& box = domain.bounding_box();
  const int dim = domain.dimension();
  if (dim > 16) throw Error(ErrorCode::ConfigError, "boundary sampling supports dimension <= 16");
  std::mt19937_64 rng(seed);
  Vec shift(dim);
  for (int i = 0; i < dim; ++i) shift(i) = unit_uniform(rng());

  const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(1, options.oversample));
  const double band = options.band_fraction * box.diagonal();
  std::vector<Vec> cand;
  cand.reserve(want);
  const std::uint64_t max_draws = 400 * want + 10000;
  for (std::uint64_t idx = 1; cand.size() < want && idx < max_draws; ++idx) {
    const Vec x = halton_point(idx, shift, box);
    const double r = domain.rho(x);
    const Vec g = domain.gradient(x);
    const double gn = g.norm();
    if (!(gn > 0.0) || std::abs(r) / gn > band) continue;
    auto p = domain.pull_to_boundary(x);
    if (!p || !box.contains(*p)) continue;
    if (!(domain.gradient(*p).norm() > 0.0)) continue;
    cand.push_back(*p);
  }
  if (cand.size() < static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::CurvatureEstimateFailed, "boundary sampling produced too few points");
  }

  // farthest-point thinning
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  std::vector<double> mind(cand.size(), std::numeric_limits<double>::infinity());
  std::size_t cur = 0;
  for (int k = 0; k < n; ++k) {
    out.push_back(cand[cur]);
    std::size_t best = 0;
    double bestd = -1.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      mind[i] = std::min(mind[i], (cand[i] - cand[cur]).squaredNorm());
      if (mind[i] > bestd) {
        bestd = mind[i];
        best = i;
      }
    }
    cur = best;
  }
  return out;
}

std::vector<Vec> sample_interior(const Domain& domain, int n, std::uint64_t seed) {
  const Box& box = domain.bounding_box();
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  std::size_t guard = 0;
  while (static_cast<int>(out.size()) < n && guard++ < 10000000) {
    Vec x(box.dimension());
    for (int i = 0; i < box.dimension(); ++i) x(i) = box.lo(i) + unit_uniform(rng()) * (box.hi(i) - box.lo(i));
    if (domain.rho(x) < 0.0) out.push_back(x);
  }
  return out;
}

}  // namespace hypkob
