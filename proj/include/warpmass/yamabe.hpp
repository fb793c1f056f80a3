#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "warpmass/green_mass.hpp"
#include "warpmass/model_geometry.hpp"

namespace warpmass {

// m(m-1) vol(S^m)^{2/m}.
double q_star_sphere(int m);
// c^{2/m} q_star_sphere(m), the Yamabe constant of S^1 x H_c^{m-1}.
double scaling_reference(int m, double c);

// Value and gradient of a test function in the coordinates (t, r): t is the distance on N from the pole's
// foot point and r the distance on H from the pole's fiber point.
struct TestJet {
  double u = 0.0;
  double u_t = 0.0;
  double u_r = 0.0;
};

enum class TestShape {
  HRadial,     // depends on r only
  PoleRadial,  // depends on rho = sqrt(t^2 + r^2) only
  General      // depends on (t, r)
};

class RadialTestFunction {
 public:
  // Profile of one variable: value and derivative.
  using Profile = std::function<void(double x, double& u, double& du)>;
  using Field = std::function<TestJet(double t, double r)>;

  // u(r), zero for r >= support.
  static RadialTestFunction h_radial(Profile profile, double support, std::vector<double> kinks = {},
                                     double scale = 1.0);
  // u(rho), zero for rho >= support.
  static RadialTestFunction pole_radial(Profile profile, double support, std::vector<double> kinks = {},
                                        double scale = 1.0);
  // u(t, r), zero for r >= support; kinks are circles rho = const.
  static RadialTestFunction general(Field field, double support, std::vector<double> kinks, double scale);

  TestShape shape() const { return shape_; }
  TestJet jet(double t, double r) const;
  double support() const { return support_; }
  const std::vector<double>& kinks() const { return kinks_; }
  // Length scale of the finest feature at the pole (used to grade quadrature panels).
  double scale() const { return scale_; }
  // The function multiplied by a positive constant.
  RadialTestFunction scaled(double factor) const;

 private:
  TestShape shape_ = TestShape::HRadial;
  Profile profile_;
  Field field_;
  double support_ = 0.0;
  std::vector<double> kinks_;
  double scale_ = 1.0;
  double factor_ = 1.0;
};

struct QuadratureOptions {
  double rel_tol = 1e-6;     // relative change of the quotient between successive orders
  int initial_order = 8;     // Gauss-Legendre points per panel
  int max_order = 64;
  int angular_panels = 8;    // panels per angular sector
};

struct QuotientReport {
  double numerator = 0.0;    // integral of a_m |grad u|^2 + scal u^2
  double denominator = 0.0;  // ||u||_p^2
  double quotient = 0.0;
  double reference = 0.0;    // q_star_sphere(m)
  double strict_gap = 0.0;   // (reference - quotient) / reference
  int order = 0;             // accepted Gauss-Legendre order
  double convergence = 0.0;  // relative change at the accepted order
};

// Yamabe quotient on N x H for N a point or a round sphere.
QuotientReport quotient(const ModelSpace& model, const RadialTestFunction& u, const QuadratureOptions& options = {});
// Quotient of the constant function on the round unit S^m, integrated numerically.
QuotientReport sphere_constant_quotient(int m, const QuadratureOptions& options = {});

// (1 + rho^2)^{(2-m)/2} - (1 + R^2)^{(2-m)/2}, cut off at rho = R.
RadialTestFunction euclidean_bubble(int m, double truncation);

// Memoized Green-function jets in the (t, r) coordinates.
class GreenSampler {
 public:
  explicit GreenSampler(const GreenField& field);
  TestJet jet(double t, double r) const;  // u = Gamma
  const GreenField& field() const { return field_; }
  std::size_t cache_size() const;

 private:
  struct Impl;
  const GreenField& field_;
  std::shared_ptr<Impl> impl_;
};

struct SchoenParams {
  double eps = 0.01;
  double rho0 = 0.05;                // bubble cap radius
  double rho1 = 0.1;                 // Green-function radius
  double cutoff = 1e-8;              // relative to the largest Green value on rho = rho1
  bool normal_correction = false;    // second-order conformal normal coordinates at the pole
  double mismatch_tolerance = 0.1;   // bubble against delta0 * Gamma on rho = rho1
  int gluing_samples = 65;
};

struct SchoenDiagnostics {
  double delta0 = 0.0;
  double green_cut = 0.0;
  double support = 0.0;
  double mismatch = 0.0;  // max relative deviation of delta0 * Gamma from the bubble on rho = rho1
};

// Bubble on rho <= rho0, blended linearly in rho into delta0 (Gamma - Gamma_cut)_+ on rho >= rho1.
RadialTestFunction schoen_test(const ModelSpace& model, std::shared_ptr<const GreenSampler> green,
                               const MassEstimate& mass, const SchoenParams& params,
                               SchoenDiagnostics* diagnostics = nullptr);

struct SweepEntry {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  QuotientReport report;
  SchoenDiagnostics diagnostics;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  double reference = 0.0;
  std::optional<double> min_quotient;
  double min_eps = 0.0;
  double relative_gap = 0.0;  // (reference - min_quotient) / reference
  bool strictly_below = false;
};

// eps = 2^{-j} for j = 3..12.
std::vector<double> default_eps_grid();

SweepReport schoen_sweep(const ModelSpace& model, std::shared_ptr<const GreenSampler> green, const MassEstimate& mass,
                         const SchoenParams& base, const std::vector<double>& eps_grid,
                         const QuadratureOptions& options = {});

}  // namespace warpmass
