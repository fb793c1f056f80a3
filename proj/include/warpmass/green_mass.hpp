#pragma once

#include <iosfwd>
#include <vector>

#include "warpmass/model_geometry.hpp"
#include "warpmass/radial_ode.hpp"

namespace warpmass {

struct GreenConfig {
  int truncation_L = 64;
  double r_max = 30.0;             // right end of low-mode profiles
  double r_min = 1e-3;             // left end of low-mode profiles
  double mode_extent = 40.0;       // high modes stop once their decay beyond mode 0 exceeds this exponent
  double matching_tolerance = 1e-7;
  Tolerances tol{1e-11, 1e-10};
  double tail_tolerance = 1e-9;    // relative truncation tolerance of the zonal sum
  double antipode_guard = 1e-3;    // |theta - pi| below this is rejected
  unsigned threads = 0;
};

struct ModeProfile {
  int l = 0;
  double mu = 0.0;
  double nu = 0.0;          // mu + s/a_m
  long multiplicity = 1;    // dimension of the N-eigenspace
  double r_lo = 0.0;
  double r_hi = 0.0;
  double decay = 0.0;       // predicted decay exponent kc/2 + sqrt(k^2c^2/4 + nu)
  double singular_strength = 0.0;
  double wronskian_spread = 0.0;
  Trajectory profile;       // state (g, g')
};

class GreenModeTable {
 public:
  GreenModeTable(ModelSpace model, GreenConfig config, std::vector<ModeProfile> modes);

  const ModelSpace& model() const { return model_; }
  const GreenConfig& config() const { return config_; }
  const std::vector<ModeProfile>& modes() const { return modes_; }
  int truncation() const { return static_cast<int>(modes_.size()) - 1; }
  // Sectional curvature of the round factor (1 for N = point).
  double kappa() const;
  // Pole-to-point distance for the angle theta on N and radius r on H.
  double distance(double theta, double r) const;

  // g_l(r) and g_l'(r); zero beyond the profile's right end.
  void mode_values(std::size_t index, double r, double& g, double& dg) const;
  // Number of leading modes whose profiles reach r.
  std::size_t active_modes(double r) const;
  // dim_l / vol(S^n_kappa), the value of Z_l at coincidence.
  const std::vector<double>& zonal_weights() const { return weights_; }

 private:
  ModelSpace model_;
  GreenConfig config_;
  std::vector<ModeProfile> modes_;
  std::vector<double> weights_;
  std::vector<double> reach_;  // suffix maxima of r_hi
};

// Coefficient of the near-origin template r^{1-k} (k >= 2) or -log r (k = 1).
double template_coefficient(const ModelSpace& model);
// 1/((m-2) omega_{m-1}).
double leading_reference(int m);

ModeProfile solve_mode_green(const ModelSpace& model, int l, double mu, const GreenConfig& config = {});
GreenModeTable build_green_table(const ModelSpace& model, const GreenConfig& config = {});

// Relative residual of the mode equation at r, using dense output and a centered difference.
double mode_residual(const GreenModeTable& table, std::size_t index, double r);

// Zonal eigenspace kernel of S^n_kappa at angle theta, with its theta-derivative.
void zonal_kernels(int n, double kappa, int L, double theta, std::vector<double>& z, std::vector<double>& dz);

struct EvalPoint {
  double theta = 0.0;
  double r = 0.0;
};

struct GreenJet {
  double value = 0.0;
  double d_theta = 0.0;
  double d_r = 0.0;
  double tail = 0.0;  // estimated truncation error
};

// Truncated zonal sum with its derivatives; no accuracy guards.
GreenJet green_jet(const GreenModeTable& table, double theta, double r);
// Guarded evaluation: rejects the antipodal caustic and truncation beyond tail_tolerance.
std::vector<double> assemble_green(const GreenModeTable& table, const std::vector<EvalPoint>& points);
void write_gamma_csv(const GreenModeTable& table, const std::vector<EvalPoint>& points, std::ostream& out);

// Green function with the radial variable continued below the convergence radius of the mode sum by
// an even quartic in r matched to value and two derivatives.
class GreenField {
 public:
  explicit GreenField(const GreenModeTable& table, double extent = 25.0);
  double matching_radius() const { return r_match_; }
  GreenJet jet(double theta, double r) const;
  const GreenModeTable& table() const { return table_; }

 private:
  void sums(double theta, double r, double out[3], double dtheta[3]) const;
  void contract(double theta, const std::vector<double>* g, double out[3], double dtheta[3]) const;
  const GreenModeTable& table_;
  double r_match_;
  std::vector<double> match_[3];  // g_l, g_l', g_l'' at the matching radius
};

struct ShellSpec {
  double rho_min = 0.06;
  double rho_max = 0.2;
  int points = 25;
  double direction = 0.0;  // angle from the H-axis toward the N-axis
};

struct LeadingFit {
  double coefficient = 0.0;
  double reference = 0.0;
  double relative_error = 0.0;
  double residual = 0.0;
};

LeadingFit fit_leading(const GreenModeTable& table, const ShellSpec& shell = {});
double fit_leading_coefficient(const GreenModeTable& table, const ShellSpec& shell = {});

struct MassEstimate {
  double leading_coefficient = 0.0;
  double leading_reference = 0.0;
  double mass_term = 0.0;
  double uncertainty = 0.0;
  double zero_band = 0.0;          // 0.05 * leading_reference / rho_max^{m-2}
  double geodesic_constant = 0.0;  // constant term in geodesic distance
  double normal_offset = 0.0;      // P(x,x)/(12 omega_3) for m = 4, else 0
  bool offset_applied = false;
  double nuisance_amplitude = 0.0; // coefficient of rho^{3-m}
  double log_amplitude = 0.0;      // coefficient of log rho (m = 4 screening)
  std::vector<double> order_estimates;
  double rho_min = 0.0;
  double rho_max = 0.0;
  int points = 0;
  double residual = 0.0;
  int order = 0;
};

MassEstimate fit_mass_term(const GreenModeTable& table, const ShellSpec& shell = {});

void write_table(const GreenModeTable& table, std::ostream& out);
GreenModeTable read_table(std::istream& in);

}  // namespace warpmass
