#pragma once

#include <functional>
#include <optional>

#include "warpmass/spectra.hpp"

namespace warpmass {

enum class ProfileKind { SinhC, Linear, Custom };

const char* to_string(ProfileKind kind);

// Warping function f on (a, inf).
class WarpingProfile {
 public:
  using Fn = std::function<double(double)>;

  // f(r) = sinh(c (r - a)) / c; c = 0 degenerates to the linear profile.
  static WarpingProfile sinh_c(double c, double a = 0.0);
  // f(r) = r - a.
  static WarpingProfile linear(double a = 0.0);
  // User-supplied f, f', f''; c is the asymptotic scale f''/f -> c^2.
  static WarpingProfile custom(double c, double a, Fn f, Fn df, Fn d2f);

  ProfileKind kind() const { return kind_; }
  double c() const { return c_; }
  double a() const { return a_; }

  double f(double r) const;
  double df(double r) const;
  double d2f(double r) const;
  // Overflow-safe ratios.
  double log_derivative(double r) const;  // f'/f
  double second_ratio(double r) const;    // f''/f
  double inverse_square(double r) const;  // 1/f^2
  double inverse(double r) const;         // 1/f
  // (1 - f'^2)/f^2, the curvature of the warped fiber direction.
  double fiber_term(double r) const;
  double log_f(double r) const;

 private:
  void require_domain(double r) const;
  void require_positive(double fr, double r) const;

  ProfileKind kind_ = ProfileKind::SinhC;
  double c_ = 1.0;
  double a_ = 0.0;
  Fn f_, df_, d2f_;
};

// Spectral and curvature summary of the closed factor N.
class ClosedFactorData {
 public:
  // Round S^n with sectional curvature kappa.
  static ClosedFactorData round_sphere(int n, double kappa = 1.0);
  // N = point (n = 0).
  static ClosedFactorData point();
  static ClosedFactorData explicit_factor(int n, double scal_inf, double scal_sup, double lambda_N,
                                          SpectrumCatalog laplace);

  int n() const { return n_; }
  double scal_inf() const { return scal_inf_; }
  double scal_sup() const { return scal_sup_; }
  double lambda_N() const { return lambda_N_; }
  bool constant_scal() const { return scal_inf_ == scal_sup_; }
  // Constant scal_N; NonConstantScal otherwise.
  double scal() const;
  bool is_round_sphere() const { return sphere_kappa_.has_value(); }
  double sphere_kappa() const;
  // Laplace eigenvalues of N; round spheres generate their catalog on demand.
  SpectrumCatalog laplace_catalog(int count) const;
  bool satisfies_lichnerowicz() const { return lambda_N_ * lambda_N_ >= 0.25 * scal_inf_; }

 private:
  int n_ = 0;
  double scal_inf_ = 0.0;
  double scal_sup_ = 0.0;
  double lambda_N_ = 0.0;
  std::optional<double> sphere_kappa_;
  SpectrumCatalog explicit_;
};

class ModelSpace {
 public:
  ModelSpace(ClosedFactorData factor, int k, WarpingProfile profile);

  const ClosedFactorData& factor() const { return factor_; }
  const WarpingProfile& profile() const { return profile_; }
  int n() const { return factor_.n(); }
  int k() const { return k_; }
  int m() const { return factor_.n() + k_ + 1; }
  double c() const { return profile_.c(); }
  double a_m() const;
  double p() const;

 private:
  ClosedFactorData factor_;
  int k_;
  WarpingProfile profile_;
};

double conformal_constant(int m);  // a_m = 4(m-1)/(m-2)
double critical_exponent(int m);   // p = 2m/(m-2)

// scal_g(r) with scal_N the constant value of the factor.
double scalar_curvature(const ModelSpace& model, double r);
double scalar_curvature(const ModelSpace& model, double r, double scal_N);
// s = scal_N - k(k+1)c^2.
double asymptotic_scal(const ModelSpace& model);
double asymptotic_scal(const ModelSpace& model, double scal_N);
double mean_curvature(const ModelSpace& model, double r);

}  // namespace warpmass
