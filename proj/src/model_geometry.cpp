#include "warpmass/model_geometry.hpp"

#include <cmath>

#include "warpmass/error.hpp"

namespace warpmass {

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::SinhC: return "sinh_c";
    case ProfileKind::Linear: return "linear";
    case ProfileKind::Custom: return "custom";
  }
  return "unknown";
}

WarpingProfile WarpingProfile::sinh_c(double c, double a) {
  if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorKind::InvalidModel, "warping scale c must be >= 0");
  if (c == 0.0) return linear(a);
  WarpingProfile p;
  p.kind_ = ProfileKind::SinhC;
  p.c_ = c;
  p.a_ = a;
  return p;
}

WarpingProfile WarpingProfile::linear(double a) {
  WarpingProfile p;
  p.kind_ = ProfileKind::Linear;
  p.c_ = 0.0;
  p.a_ = a;
  return p;
}

WarpingProfile WarpingProfile::custom(double c, double a, Fn f, Fn df, Fn d2f) {
  if (!(c >= 0.0)) fail(ErrorKind::InvalidModel, "warping scale c must be >= 0");
  if (!f || !df || !d2f) fail(ErrorKind::InvalidModel, "custom profile needs f, f', f''");
  WarpingProfile p;
  p.kind_ = ProfileKind::Custom;
  p.c_ = c;
  p.a_ = a;
  p.f_ = std::move(f);
  p.df_ = std::move(df);
  p.d2f_ = std::move(d2f);
  return p;
}

void WarpingProfile::require_domain(double r) const {
  if (!(r > a_)) fail(ErrorKind::DomainError, "radius must exceed the left endpoint a");
}

void WarpingProfile::require_positive(double fr, double r) const {
  if (!(fr > 0.0)) fail(ErrorKind::NonPositiveWarp, "f(" + std::to_string(r) + ") <= 0");
}

double WarpingProfile::f(double r) const {
  require_domain(r);
  const double x = r - a_;
  switch (kind_) {
    case ProfileKind::SinhC: return std::sinh(c_ * x) / c_;
    case ProfileKind::Linear: return x;
    case ProfileKind::Custom: {
      const double v = f_(r);
      require_positive(v, r);
      return v;
    }
  }
  return 0.0;
}

double WarpingProfile::df(double r) const {
  require_domain(r);
  switch (kind_) {
    case ProfileKind::SinhC: return std::cosh(c_ * (r - a_));
    case ProfileKind::Linear: return 1.0;
    case ProfileKind::Custom: return df_(r);
  }
  return 0.0;
}

double WarpingProfile::d2f(double r) const {
  require_domain(r);
  switch (kind_) {
    case ProfileKind::SinhC: return c_ * std::sinh(c_ * (r - a_));
    case ProfileKind::Linear: return 0.0;
    case ProfileKind::Custom: return d2f_(r);
  }
  return 0.0;
}

double WarpingProfile::log_derivative(double r) const {
  require_domain(r);
  const double x = r - a_;
  switch (kind_) {
    case ProfileKind::SinhC: return c_ / std::tanh(c_ * x);
    case ProfileKind::Linear: return 1.0 / x;
    case ProfileKind::Custom: return df_(r) / f(r);
  }
  return 0.0;
}

double WarpingProfile::second_ratio(double r) const {
  require_domain(r);
  switch (kind_) {
    case ProfileKind::SinhC: return c_ * c_;
    case ProfileKind::Linear: return 0.0;
    case ProfileKind::Custom: return d2f_(r) / f(r);
  }
  return 0.0;
}

double WarpingProfile::inverse(double r) const {
  require_domain(r);
  const double x = r - a_;
  switch (kind_) {
    case ProfileKind::SinhC: {
      const double y = c_ * x;
      if (y > 700.0) return 2.0 * c_ * std::exp(-y);
      return c_ / std::sinh(y);
    }
    case ProfileKind::Linear: return 1.0 / x;
    case ProfileKind::Custom: return 1.0 / f(r);
  }
  return 0.0;
}

double WarpingProfile::inverse_square(double r) const {
  const double v = inverse(r);
  return v * v;
}

double WarpingProfile::fiber_term(double r) const {
  require_domain(r);
  switch (kind_) {
    case ProfileKind::SinhC: return -c_ * c_;
    case ProfileKind::Linear: return 0.0;
    case ProfileKind::Custom: {
      const double fr = f(r);
      const double d = df_(r);
      return (1.0 - d * d) / (fr * fr);
    }
  }
  return 0.0;
}

double WarpingProfile::log_f(double r) const {
  require_domain(r);
  const double x = r - a_;
  switch (kind_) {
    case ProfileKind::SinhC: {
      const double y = c_ * x;
      if (y > 20.0) return y - std::log(2.0 * c_) + std::log1p(-std::exp(-2.0 * y));
      return std::log(std::sinh(y) / c_);
    }
    case ProfileKind::Linear: return std::log(x);
    case ProfileKind::Custom: return std::log(f(r));
  }
  return 0.0;
}

ClosedFactorData ClosedFactorData::round_sphere(int n, double kappa) {
  if (n < 1) fail(ErrorKind::InvalidDimension, "round sphere needs n >= 1");
  if (!(kappa > 0.0)) fail(ErrorKind::InvalidModel, "sphere curvature must be positive");
  ClosedFactorData d;
  d.n_ = n;
  d.scal_inf_ = d.scal_sup_ = n * (n - 1.0) * kappa;
  d.lambda_N_ = sphere_dirac_bottom(n, std::sqrt(kappa));
  d.sphere_kappa_ = kappa;
  return d;
}

ClosedFactorData ClosedFactorData::point() {
  ClosedFactorData d;
  d.n_ = 0;
  return d;
}

ClosedFactorData ClosedFactorData::explicit_factor(int n, double scal_inf, double scal_sup, double lambda_N,
                                                   SpectrumCatalog laplace) {
  if (n < 0) fail(ErrorKind::InvalidDimension, "factor dimension must be >= 0");
  if (!(scal_inf <= scal_sup)) fail(ErrorKind::InvalidModel, "scal_inf must not exceed scal_sup");
  if (!(lambda_N >= 0.0)) fail(ErrorKind::InvalidModel, "lambda_N must be >= 0");
  ClosedFactorData d;
  d.n_ = n;
  d.scal_inf_ = scal_inf;
  d.scal_sup_ = scal_sup;
  d.lambda_N_ = lambda_N;
  d.explicit_ = std::move(laplace);
  return d;
}

double ClosedFactorData::scal() const {
  if (!constant_scal()) fail(ErrorKind::NonConstantScal, "scal_N is not constant; supply a representative");
  return scal_inf_;
}

double ClosedFactorData::sphere_kappa() const {
  if (!sphere_kappa_) fail(ErrorKind::InvalidModel, "factor is not a round sphere");
  return *sphere_kappa_;
}

SpectrumCatalog ClosedFactorData::laplace_catalog(int count) const {
  if (n_ == 0) return SpectrumCatalog(SpectrumOperator::ExplicitClosedFactor, 0, 0.0, {{0.0, 1}});
  if (sphere_kappa_) return sphere_laplace_catalog(n_, *sphere_kappa_, count);
  if (static_cast<int>(explicit_.truncation_count()) < count)
    fail(ErrorKind::TruncationExceeded, "explicit spectrum has fewer entries than requested");
  std::vector<EigenvalueEntry> head(explicit_.entries().begin(), explicit_.entries().begin() + count);
  return SpectrumCatalog(explicit_.op(), n_, 0.0, std::move(head));
}

double conformal_constant(int m) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  return 4.0 * (m - 1.0) / (m - 2.0);
}

double critical_exponent(int m) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  return 2.0 * m / (m - 2.0);
}

ModelSpace::ModelSpace(ClosedFactorData factor, int k, WarpingProfile profile)
    : factor_(std::move(factor)), k_(k), profile_(std::move(profile)) {
  if (k_ < 1) fail(ErrorKind::InvalidModel, "fiber dimension k must be >= 1");
  if (m() < 3) fail(ErrorKind::InvalidModel, "total dimension m = n + k + 1 must be >= 3");
}

double ModelSpace::a_m() const { return conformal_constant(m()); }
double ModelSpace::p() const { return critical_exponent(m()); }

double scalar_curvature(const ModelSpace& model, double r) {
  return scalar_curvature(model, r, model.factor().scal());
}

double scalar_curvature(const ModelSpace& model, double r, double scal_N) {
  const auto& prof = model.profile();
  const double k = model.k();
  return scal_N + k * (k - 1.0) * prof.fiber_term(r) - 2.0 * k * prof.second_ratio(r);
}

double asymptotic_scal(const ModelSpace& model) { return asymptotic_scal(model, model.factor().scal()); }

double asymptotic_scal(const ModelSpace& model, double scal_N) {
  const double k = model.k();
  const double c = model.c();
  return scal_N - k * (k + 1.0) * c * c;
}

double mean_curvature(const ModelSpace& model, double r) { return model.profile().log_derivative(r); }

}  // namespace warpmass
