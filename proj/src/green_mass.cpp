#include "warpmass/green_mass.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "warpmass/error.hpp"
#include "warpmass/product_curvature.hpp"
#include "warpmass/quadrature.hpp"

namespace warpmass {

namespace {

void require_supported(const ModelSpace& model) {
  const auto kind = model.profile().kind();
  if (kind == ProfileKind::Custom || model.profile().a() != 0.0)
    fail(ErrorKind::InvalidModel, "Green tables need a sinh_c or linear profile with a = 0");
  if (model.n() > 0 && !model.factor().is_round_sphere())
    fail(ErrorKind::InvalidModel, "Green tables need N to be a point or a round sphere");
}

double disc_of(const ModelSpace& model, double nu) {
  const double kc = model.k() * model.c();
  return 0.25 * kc * kc + nu;
}

// Direction (g, g') of the decaying solution of g'' + (k/r) g' = nu g at r.
Vec euclidean_decaying_data(int k, double nu, double r) {
  Vec x(2);
  if (nu == 0.0) {
    x << 1.0, (1.0 - k) / r;
    return x;
  }
  const double z = std::sqrt(nu);
  const double p = 0.5 * (k - 1.0);
  gsl_sf_result a, b;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int s1 = gsl_sf_bessel_Knu_scaled_e(p, z * r, &a);
  const int s2 = gsl_sf_bessel_Knu_scaled_e(p + 1.0, z * r, &b);
  gsl_set_error_handler(old);
  if (s1 || s2 || !(a.val > 0.0)) fail(ErrorKind::MatchingFailure, "Bessel evaluation failed");
  x << 1.0, -z * b.val / a.val;
  return x;
}

double log_wronskian(const ModelSpace& model, const Trajectory& reg, const Trajectory& dec, double r, int& sign) {
  double ls_reg = 0.0, ls_dec = 0.0;
  const Vec yr = reg.scaled_at(r, ls_reg);
  const Vec yd = dec.scaled_at(r, ls_dec);
  const double det = yr[0] * yd[1] - yr[1] * yd[0];
  if (!(std::abs(det) > 0.0)) fail(ErrorKind::MatchingFailure, "vanishing Wronskian");
  sign = det > 0.0 ? 1 : -1;
  return model.k() * model.profile().log_f(r) + ls_reg + ls_dec + std::log(std::abs(det));
}

double fit_template(const ModelSpace& model, const Trajectory& prof, double r_lo) {
  const int k = model.k();
  const int npts = 12;
  const int ncols = k == 3 ? 5 : 4;
  Eigen::MatrixXd A(npts, ncols);
  Eigen::VectorXd y(npts);
  for (int i = 0; i < npts; ++i) {
    const double r = r_lo * std::pow(2.0, static_cast<double>(i) / (npts - 1));
    const double T = k == 1 ? -std::log(r) : std::pow(r, 1.0 - k);
    A(i, 0) = T;
    A(i, 1) = 1.0;
    A(i, 2) = r * r * T;
    A(i, 3) = r * r;
    if (k == 3) A(i, 4) = std::log(r);
    y[i] = prof.at(r)[0];
  }
  return least_squares(A, y)[0];
}

// Z_l and dZ_l/dtheta for l < count from the normalized Gegenbauer recurrence.
void zonal_values(int n, const std::vector<double>& weights, std::size_t count, double theta, std::vector<double>& z,
                  std::vector<double>& dz) {
  z.assign(count, 0.0);
  dz.assign(count, 0.0);
  if (count == 0) return;
  if (n == 0) {
    z[0] = weights[0];
    return;
  }
  const double x = std::cos(theta);
  const double sn = std::sin(theta);
  const double lam = 0.5 * (n - 1.0);
  double r_prev2 = 0.0, r_prev = 1.0, d_prev2 = 0.0, d_prev = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    double R, dR;
    if (l == 0) {
      R = 1.0;
      dR = 0.0;
    } else if (l == 1) {
      R = x;
      dR = 1.0;
    } else {
      const double den = l + 2.0 * lam - 1.0;
      R = (2.0 * (l + lam - 1.0) * x * r_prev - (l - 1.0) * r_prev2) / den;
      dR = (2.0 * (l + lam - 1.0) * (r_prev + x * d_prev) - (l - 1.0) * d_prev2) / den;
    }
    z[l] = weights[l] * R;
    dz[l] = -weights[l] * sn * dR;
    r_prev2 = r_prev;
    r_prev = R;
    d_prev2 = d_prev;
    d_prev = dR;
  }
}

std::vector<double> zonal_weight_table(int n, double kappa, int L) {
  std::vector<double> w(L + 1, 1.0);
  if (n == 0) return w;
  const double vol = sphere_volume(n) * std::pow(kappa, -0.5 * n);
  for (int l = 0; l <= L; ++l) w[l] = sphere_harmonic_dimension(n, l) / vol;
  return w;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double template_coefficient(const ModelSpace& model) {
  const int k = model.k();
  const double a = model.a_m();
  if (k == 1) return 1.0 / (2.0 * std::numbers::pi * a);
  return 1.0 / (a * (k - 1.0) * sphere_volume(k));
}

double leading_reference(int m) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  return 1.0 / ((m - 2.0) * sphere_volume(m - 1));
}

ModeProfile solve_mode_green(const ModelSpace& model, int l, double mu, const GreenConfig& cfg) {
  require_supported(model);
  const double scal_N = model.factor().scal();
  const double a = model.a_m();
  const double s = asymptotic_scal(model, scal_N);
  const int k = model.k();
  const double c = model.c();
  const bool linear = model.profile().kind() == ProfileKind::Linear;

  ModeProfile mode;
  mode.l = l;
  mode.mu = mu;
  mode.nu = mu + s / a;
  const double disc = disc_of(model, mode.nu);
  if (disc < 0.0 || (disc == 0.0 && !linear) || (linear && mode.nu < 0.0))
    fail(ErrorKind::MatchingFailure, "mode " + std::to_string(l) + " has no decaying Green profile");
  const double root = std::sqrt(disc);
  mode.decay = 0.5 * k * c + root;
  mode.multiplicity = model.n() == 0 ? 1 : sphere_harmonic_dimension(model.n(), l);

  const double gamma0 = 0.5 * k * c + std::sqrt(std::max(0.0, disc_of(model, s / a)));
  const double scale = std::sqrt(std::max(1.0, mode.nu));
  mode.r_lo = std::min(cfg.r_min, 0.01 / scale);
  double r_hi = cfg.r_max;
  if (l > 0 && mode.decay > gamma0) {
    const double budget = cfg.mode_extent + std::log(1.0 + mode.multiplicity);
    r_hi = std::min(r_hi, budget / (mode.decay - gamma0));
  }
  r_hi = std::max(r_hi, 64.0 * mode.r_lo);

  const LinearOdeSystem sys = build_scalar_mode_system(model, mu, 0.0, scal_N);
  IntegrateOptions opt;
  opt.tol = cfg.tol;

  // Decaying branch, integrated backward.
  double r_far = r_hi;
  Vec far_data;
  if (linear) {
    far_data = euclidean_decaying_data(k, mode.nu, r_far);
  } else {
    r_far = r_hi + 30.0 / (2.0 * root);
    far_data.resize(2);
    far_data << 1.0, -mode.decay;
  }
  opt.max_step = std::max(r_far - mode.r_lo, 1e-12) / 64.0;
  Trajectory dec = decaying_solution(sys, r_far, mode.r_lo, opt, DecayTarget{far_data});

  // Regular branch from the series start.
  const double r_s = 0.25 * mode.r_lo;
  const double nu = mode.nu;
  const double a2 = nu / (2.0 * (k + 1.0));
  const double a4 = a2 * (nu - 2.0 * k * c * c / 3.0) / (12.0 + 4.0 * k);
  Vec reg0(2);
  reg0 << 1.0 + a2 * r_s * r_s + a4 * std::pow(r_s, 4), 2.0 * a2 * r_s + 4.0 * a4 * std::pow(r_s, 3);
  const double r_mid = std::sqrt(mode.r_lo * r_hi);
  opt.max_step = (r_mid - r_s) / 32.0;
  Trajectory reg = integrate_from(sys, r_s, reg0, r_mid, opt);

  int sign_lo = 0, sign_mid = 0;
  const double lw_lo = log_wronskian(model, reg, dec, mode.r_lo, sign_lo);
  const double lw_mid = log_wronskian(model, reg, dec, r_mid, sign_mid);
  mode.wronskian_spread = sign_lo == sign_mid ? std::abs(std::expm1(lw_mid - lw_lo)) : 2.0;
  if (!(mode.wronskian_spread <= cfg.matching_tolerance))
    fail(ErrorKind::MatchingFailure, "Wronskian inconsistency " + fmt(mode.wronskian_spread) + " in mode " +
                                         std::to_string(l));

  const double log_c = -std::log(a * sphere_volume(k)) - lw_lo;
  const bool negate = sign_lo > 0;  // C = -1/(a omega_k W)
  dec.rescale(log_c, negate);
  mode.r_hi = r_far;
  mode.singular_strength = fit_template(model, dec, mode.r_lo);
  mode.profile = std::move(dec);
  return mode;
}

GreenModeTable::GreenModeTable(ModelSpace model, GreenConfig config, std::vector<ModeProfile> modes)
    : model_(std::move(model)), config_(config), modes_(std::move(modes)) {
  if (modes_.empty()) fail(ErrorKind::InvalidModel, "Green table has no modes");
  weights_ = zonal_weight_table(model_.n(), kappa(), truncation());
  reach_.resize(modes_.size());
  double reach = 0.0;
  for (std::size_t i = modes_.size(); i-- > 0;) {
    reach = std::max(reach, modes_[i].r_hi);
    reach_[i] = reach;
  }
}

std::size_t GreenModeTable::active_modes(double r) const {
  // reach_ is non-increasing
  auto it = std::partition_point(reach_.begin(), reach_.end(), [r](double v) { return v >= r; });
  return static_cast<std::size_t>(it - reach_.begin());
}

double GreenModeTable::kappa() const { return model_.n() == 0 ? 1.0 : model_.factor().sphere_kappa(); }

double GreenModeTable::distance(double theta, double r) const {
  const double t = theta / std::sqrt(kappa());
  return std::sqrt(t * t + r * r);
}

void GreenModeTable::mode_values(std::size_t index, double r, double& g, double& dg) const {
  const ModeProfile& md = modes_[index];
  if (r > md.r_hi) {
    g = dg = 0.0;
    return;
  }
  if (r < md.r_lo) fail(ErrorKind::DomainError, "radius below the profile's left end");
  const Vec y = md.profile.at(r);
  g = y[0];
  dg = y[1];
}

GreenModeTable build_green_table(const ModelSpace& model, const GreenConfig& cfg) {
  require_supported(model);
  if (cfg.truncation_L < 0) fail(ErrorKind::DomainError, "truncation must be >= 0");
  const int L = model.n() == 0 ? 0 : cfg.truncation_L;
  const double kappa = model.n() == 0 ? 1.0 : model.factor().sphere_kappa();
  std::vector<ModeProfile> modes(L + 1);
  parallel_for(static_cast<std::size_t>(L + 1), cfg.threads, [&](std::size_t l) {
    const double mu = model.n() == 0 ? 0.0 : kappa * l * (l + model.n() - 1.0);
    modes[l] = solve_mode_green(model, static_cast<int>(l), mu, cfg);
  });
  return GreenModeTable(model, cfg, std::move(modes));
}

double mode_residual(const GreenModeTable& table, std::size_t index, double r) {
  const ModeProfile& md = table.modes()[index];
  const ModelSpace& model = table.model();
  const double h = 1e-4 * std::min(r - md.r_lo, 1.0 / std::max(1.0, md.decay));
  if (!(h > 0.0) || r + h > md.r_hi) fail(ErrorKind::DomainError, "residual point too close to the profile ends");
  const Vec y = md.profile.at(r);
  const double d2 = (md.profile.at(r + h)[1] - md.profile.at(r - h)[1]) / (2.0 * h);
  const double kh = model.k() * model.profile().log_derivative(r);
  const double res = d2 + kh * y[1] - md.nu * y[0];
  const double scale = std::abs(d2) + std::abs(kh * y[1]) + std::abs(md.nu * y[0]);
  return scale > 0.0 ? std::abs(res) / scale : std::abs(res);
}

void zonal_kernels(int n, double kappa, int L, double theta, std::vector<double>& z, std::vector<double>& dz) {
  if (L < 0) fail(ErrorKind::DomainError, "truncation must be >= 0");
  if (n > 0 && !(kappa > 0.0)) fail(ErrorKind::DomainError, "sphere curvature must be positive");
  const int count = n == 0 ? 1 : L + 1;
  zonal_values(n, zonal_weight_table(n, kappa, count - 1), count, theta, z, dz);
  z.resize(L + 1, 0.0);
  dz.resize(L + 1, 0.0);
}

GreenJet green_jet(const GreenModeTable& table, double theta, double r) {
  const ModelSpace& model = table.model();
  const int L = table.truncation();
  const std::size_t count = table.active_modes(r);
  std::vector<double> z, dz;
  zonal_values(model.n(), table.zonal_weights(), count, theta, z, dz);
  const double a = model.a_m();
  GreenJet out;
  for (std::size_t l = 0; l < count; ++l) {
    double g, dg;
    table.mode_values(l, r, g, dg);
    out.value += z[l] * g;
    out.d_r += z[l] * dg;
    out.d_theta += dz[l] * g;
  }
  out.value *= a;
  out.d_r *= a;
  out.d_theta *= a;
  if (L > 0 && count == table.modes().size()) {
    double g, dg;
    table.mode_values(L, r, g, dg);
    const double gap = table.modes()[L].decay - table.modes()[L - 1].decay;
    const double q = std::exp(-gap * r);
    out.tail = q < 1.0 ? std::abs(a * table.zonal_weights()[L] * g) * q / (1.0 - q)
                       : std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<double> assemble_green(const GreenModeTable& table, const std::vector<EvalPoint>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  const double guard = table.config().antipode_guard;
  for (const auto& p : points) {
    if (table.model().n() > 0 && (p.theta < 0.0 || p.theta > std::numbers::pi))
      fail(ErrorKind::DomainError, "theta must lie in [0, pi]");
    if (table.model().n() > 0 && std::numbers::pi - p.theta < guard)
      fail(ErrorKind::DomainError, "evaluation too close to the antipodal caustic");
    if (!(p.r > 0.0)) fail(ErrorKind::DomainError, "radius must be positive");
    const GreenJet j = green_jet(table, p.theta, p.r);
    if (j.tail > table.config().tail_tolerance * std::abs(j.value))
      fail(ErrorKind::TruncationError, "zonal tail " + fmt(j.tail) + " exceeds tolerance at r = " + fmt(p.r));
    out.push_back(j.value);
  }
  return out;
}

void write_gamma_csv(const GreenModeTable& table, const std::vector<EvalPoint>& points, std::ostream& out) {
  out << "theta,r,gamma\n";
  std::vector<EvalPoint> one(1);
  for (const auto& p : points) {
    one[0] = p;
    const double v = assemble_green(table, one)[0];
    out << fmt(p.theta) << ',' << fmt(p.r) << ',' << fmt(v) << '\n';
  }
}

// ---------------------------------------------------------------- GreenField

GreenField::GreenField(const GreenModeTable& table, double extent) : table_(table) {
  const auto& last = table.modes().back();
  r_match_ = std::max(extent / last.decay, 4.0 * last.r_lo);
  if (table.modes().size() == 1) r_match_ = std::max(last.r_lo * 4.0, 1e-6);
  const std::size_t count = table.active_modes(r_match_);
  const double kh = table.model().k() * table.model().profile().log_derivative(r_match_);
  for (auto& v : match_) v.resize(count);
  for (std::size_t l = 0; l < count; ++l) {
    table.mode_values(l, r_match_, match_[0][l], match_[1][l]);
    match_[2][l] = table.modes()[l].nu * match_[0][l] - kh * match_[1][l];
  }
}

void GreenField::contract(double theta, const std::vector<double>* g, double out[3], double dtheta[3]) const {
  const std::size_t count = g[0].size();
  std::vector<double> z, dz;
  zonal_values(table_.model().n(), table_.zonal_weights(), count, theta, z, dz);
  for (int i = 0; i < 3; ++i) {
    double s = 0.0, d = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
      s += z[l] * g[i][l];
      d += dz[l] * g[i][l];
    }
    out[i] = table_.model().a_m() * s;
    dtheta[i] = table_.model().a_m() * d;
  }
}

void GreenField::sums(double theta, double r, double out[3], double dtheta[3]) const {
  const std::size_t count = table_.active_modes(r);
  const double kh = table_.model().k() * table_.model().profile().log_derivative(r);
  std::vector<double> g[3];
  for (auto& v : g) v.resize(count);
  for (std::size_t l = 0; l < count; ++l) {
    table_.mode_values(l, r, g[0][l], g[1][l]);
    g[2][l] = table_.modes()[l].nu * g[0][l] - kh * g[1][l];
  }
  contract(theta, g, out, dtheta);
}

GreenJet GreenField::jet(double theta, double r) const {
  if (r < 0.0) fail(ErrorKind::DomainError, "radius must be >= 0");
  double v[3], d[3];
  if (r >= r_match_) {
    sums(theta, r, v, d);
    return GreenJet{v[0], d[0], v[1], 0.0};
  }
  contract(theta, match_, v, d);
  const double e = r_match_;
  auto coeffs = [e](const double s[3], double& A, double& B, double& C) {
    C = (s[2] - s[1] / e) / (8.0 * e * e);
    B = 0.5 * (s[2] - 12.0 * C * e * e);
    A = s[0] - B * e * e - C * e * e * e * e;
  };
  double A, B, C, At, Bt, Ct;
  coeffs(v, A, B, C);
  coeffs(d, At, Bt, Ct);
  const double r2 = r * r;
  GreenJet j;
  j.value = A + B * r2 + C * r2 * r2;
  j.d_r = 2.0 * B * r + 4.0 * C * r2 * r;
  j.d_theta = At + Bt * r2 + Ct * r2 * r2;
  return j;
}

// ---------------------------------------------------------------- fits

namespace {

struct ShellData {
  std::vector<double> rho;
  std::vector<double> gamma;
};

ShellData sample_shell(const GreenModeTable& table, const ShellSpec& shell) {
  if (!(shell.rho_min > 0.0) || !(shell.rho_max > shell.rho_min) || shell.rho_max > 0.2 + 1e-12)
    fail(ErrorKind::ShellTooCoarse, "shell must satisfy 0 < rho_min < rho_max <= 0.2");
  if (shell.points < 8) fail(ErrorKind::ShellTooCoarse, "shell needs at least 8 sample points");
  if (table.model().n() == 0 && shell.direction != 0.0)
    fail(ErrorKind::DomainError, "N = point admits only the radial direction");
  if (!(std::cos(shell.direction) > 0.0)) fail(ErrorKind::DomainError, "direction must have a radial component");
  ShellData d;
  std::vector<EvalPoint> pts;
  const double sk = std::sqrt(table.kappa());
  for (int i = 0; i < shell.points; ++i) {
    const double rho = shell.rho_min + (shell.rho_max - shell.rho_min) * i / (shell.points - 1.0);
    d.rho.push_back(rho);
    pts.push_back({sk * rho * std::sin(shell.direction), rho * std::cos(shell.direction)});
  }
  d.gamma = assemble_green(table, pts);
  return d;
}

Eigen::VectorXd fit_powers(const ShellData& d, const std::vector<double>& powers, bool with_log, double& residual) {
  const int n = static_cast<int>(d.rho.size());
  const int p = static_cast<int>(powers.size()) + (with_log ? 1 : 0);
  if (n < p + 3) fail(ErrorKind::ShellTooCoarse, "too few shell points for the fit order");
  Eigen::MatrixXd A(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < powers.size(); ++j) A(i, j) = std::pow(d.rho[i], powers[j]);
    if (with_log) A(i, p - 1) = std::log(d.rho[i]);
    y[i] = d.gamma[i];
  }
  const Eigen::VectorXd x = least_squares(A, y);
  residual = std::sqrt((A * x - y).squaredNorm() / n);
  return x;
}

}  // namespace

LeadingFit fit_leading(const GreenModeTable& table, const ShellSpec& shell) {
  const int m = table.model().m();
  const ShellData d = sample_shell(table, shell);
  const std::vector<double> powers{2.0 - m, 3.0 - m};
  LeadingFit fit;
  fit.coefficient = fit_powers(d, powers, false, fit.residual)[0];
  fit.reference = leading_reference(m);
  fit.relative_error = std::abs(fit.coefficient / fit.reference - 1.0);
  return fit;
}

double fit_leading_coefficient(const GreenModeTable& table, const ShellSpec& shell) {
  return fit_leading(table, shell).coefficient;
}

MassEstimate fit_mass_term(const GreenModeTable& table, const ShellSpec& shell) {
  const ModelSpace& model = table.model();
  const int m = model.m();
  if (m > 5) fail(ErrorKind::InvalidDimension, "mass extraction is limited to m <= 5");
  MassEstimate est;
  const LeadingFit lead = fit_leading(table, shell);
  est.leading_coefficient = lead.coefficient;
  est.leading_reference = lead.reference;
  est.rho_min = shell.rho_min;
  est.rho_max = shell.rho_max;
  est.points = shell.points;
  est.zero_band = 0.05 * lead.reference / std::pow(shell.rho_max, m - 2.0);

  ShellData d = sample_shell(table, shell);
  for (std::size_t i = 0; i < d.rho.size(); ++i) d.gamma[i] -= lead.reference * std::pow(d.rho[i], 2.0 - m);

  std::vector<double> negative;
  for (int e = 3 - m; e < 0; ++e) negative.push_back(e);
  const std::size_t c_index = negative.size();

  const int orders[] = {2, 3, 4};
  for (int p : orders) {
    std::vector<double> powers = negative;
    for (int j = 0; j <= p; ++j) powers.push_back(j);
    double res = 0.0;
    const Eigen::VectorXd x = fit_powers(d, powers, false, res);
    est.order_estimates.push_back(x[c_index]);
    if (p == 3) {
      est.residual = res;
      if (!negative.empty()) est.nuisance_amplitude = x[0];
    }
  }
  est.order = 3;
  est.geodesic_constant = est.order_estimates[1];
  const double d1 = std::abs(est.order_estimates[1] - est.order_estimates[0]);
  const double d2 = std::abs(est.order_estimates[2] - est.order_estimates[1]);
  est.uncertainty = std::max(d1, d2);

  if (m == 4) {
    std::vector<double> powers = negative;
    for (int j = 0; j <= 3; ++j) powers.push_back(j);
    double res = 0.0;
    const Eigen::VectorXd x = fit_powers(d, powers, true, res);
    est.log_amplitude = x[x.size() - 1];
  }

  // Resolution floor from the truncated zonal sums at the innermost shell point.
  const double sk = std::sqrt(table.kappa());
  const GreenJet inner = green_jet(table, sk * shell.rho_min * std::sin(shell.direction),
                                   shell.rho_min * std::cos(shell.direction));
  est.uncertainty += inner.tail + 1e-10 * std::abs(inner.value);

  if (d2 > est.uncertainty || (d2 > d1 && d2 > 1e-9 * lead.reference / std::pow(shell.rho_min, m - 2.0)))
    fail(ErrorKind::ExtrapolationUnstable, "successive-order constant estimates do not settle");

  if (m == 4) {
    std::vector<ConstantCurvatureFactor> factors;
    if (model.n() > 0) factors.push_back(ConstantCurvatureFactor::make(model.n(), table.kappa()));
    factors.push_back(ConstantCurvatureFactor::make(model.k() + 1, -model.c() * model.c()));
    const Eigen::MatrixXd P = schouten(product_curvature(factors));
    Eigen::VectorXd xhat = Eigen::VectorXd::Zero(m);
    if (model.n() > 0) xhat[0] = std::sin(shell.direction);
    xhat[model.n()] = std::cos(shell.direction);
    est.normal_offset = xhat.dot(P * xhat) / (12.0 * sphere_volume(3));
    est.offset_applied = true;
  }
  est.mass_term = est.geodesic_constant - est.normal_offset;
  return est;
}

// ---------------------------------------------------------------- serialization

void write_table(const GreenModeTable& table, std::ostream& out) {
  const ModelSpace& model = table.model();
  const GreenConfig& cfg = table.config();
  out << "warpmass-green-table 1\n";
  out << "n " << model.n() << '\n';
  out << "kappa " << fmt(table.kappa()) << '\n';
  out << "k " << model.k() << '\n';
  out << "c " << fmt(model.c()) << '\n';
  out << "profile " << to_string(model.profile().kind()) << '\n';
  out << "scal_N " << fmt(model.factor().scal()) << '\n';
  out << "lambda_N " << fmt(model.factor().lambda_N()) << '\n';
  out << "m " << model.m() << '\n';
  out << "L " << table.truncation() << '\n';
  out << "config " << cfg.truncation_L << ' ' << fmt(cfg.r_max) << ' ' << fmt(cfg.r_min) << ' '
      << fmt(cfg.mode_extent) << ' ' << fmt(cfg.matching_tolerance) << ' ' << fmt(cfg.tol.abs) << ' '
      << fmt(cfg.tol.rel) << ' ' << fmt(cfg.tail_tolerance) << ' ' << fmt(cfg.antipode_guard) << '\n';
  out << "modes " << table.modes().size() << '\n';
  for (const auto& md : table.modes()) {
    const Trajectory& tr = md.profile;
    out << "mode,l,mu,nu,multiplicity,r_lo,r_hi,decay,singular_strength,wronskian_spread,nodes,steps\n";
    out << "mode," << md.l << ',' << fmt(md.mu) << ',' << fmt(md.nu) << ',' << md.multiplicity << ','
        << fmt(md.r_lo) << ',' << fmt(md.r_hi) << ',' << fmt(md.decay) << ',' << fmt(md.singular_strength) << ','
        << fmt(md.wronskian_spread) << ',' << tr.size() << ',' << tr.steps().size() << '\n';
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const Vec& x = tr.scaled_state(i);
      out << "node," << fmt(tr.t(i)) << ',' << fmt(x[0]) << ',' << fmt(x[1]) << ',' << fmt(tr.log_scale(i)) << '\n';
    }
    for (const auto& st : tr.steps()) {
      out << "step," << fmt(st.t_lo) << ',' << fmt(st.t_hi) << ',' << fmt(st.log_scale);
      for (const auto& cv : st.coeffs) out << ',' << fmt(cv[0]) << ',' << fmt(cv[1]);
      out << '\n';
    }
    out << "end\n";
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double to_d(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::IoError, "malformed number '" + s + "'");
  }
  if (pos != s.size()) fail(ErrorKind::IoError, "malformed number '" + s + "'");
  return v;
}

template <class T>
T read_key(std::istream& in, const std::string& key) {
  std::string line, name;
  if (!std::getline(in, line)) fail(ErrorKind::IoError, "missing header key " + key);
  std::istringstream ls(line);
  T value{};
  if (!(ls >> name >> value) || name != key) fail(ErrorKind::IoError, "expected header key " + key);
  return value;
}

}  // namespace

GreenModeTable read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "warpmass-green-table 1") fail(ErrorKind::IoError, "unknown table format");
  const int n = read_key<int>(in, "n");
  const double kappa = read_key<double>(in, "kappa");
  const int k = read_key<int>(in, "k");
  const double c = read_key<double>(in, "c");
  const std::string profile = read_key<std::string>(in, "profile");
  read_key<double>(in, "scal_N");
  read_key<double>(in, "lambda_N");
  read_key<int>(in, "m");
  read_key<int>(in, "L");
  GreenConfig cfg;
  {
    if (!std::getline(in, line)) fail(ErrorKind::IoError, "missing config line");
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name >> cfg.truncation_L >> cfg.r_max >> cfg.r_min >> cfg.mode_extent >> cfg.matching_tolerance >>
          cfg.tol.abs >> cfg.tol.rel >> cfg.tail_tolerance >> cfg.antipode_guard) ||
        name != "config")
      fail(ErrorKind::IoError, "malformed config line");
  }
  const std::size_t count = read_key<std::size_t>(in, "modes");
  WarpingProfile prof = profile == "linear" ? WarpingProfile::linear() : WarpingProfile::sinh_c(c);
  ClosedFactorData factor = n == 0 ? ClosedFactorData::point() : ClosedFactorData::round_sphere(n, kappa);
  ModelSpace model(factor, k, prof);

  std::vector<ModeProfile> modes;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line) || line.rfind("mode,l,", 0) != 0) fail(ErrorKind::IoError, "missing mode header");
    if (!std::getline(in, line)) fail(ErrorKind::IoError, "missing mode line");
    const auto f = split_csv(line);
    if (f.size() != 12 || f[0] != "mode") fail(ErrorKind::IoError, "malformed mode line");
    ModeProfile md;
    md.l = static_cast<int>(to_d(f[1]));
    md.mu = to_d(f[2]);
    md.nu = to_d(f[3]);
    md.multiplicity = static_cast<long>(to_d(f[4]));
    md.r_lo = to_d(f[5]);
    md.r_hi = to_d(f[6]);
    md.decay = to_d(f[7]);
    md.singular_strength = to_d(f[8]);
    md.wronskian_spread = to_d(f[9]);
    const auto nodes = static_cast<std::size_t>(to_d(f[10]));
    const auto steps = static_cast<std::size_t>(to_d(f[11]));
    md.profile.set_tolerances(cfg.tol);
    for (std::size_t j = 0; j < nodes; ++j) {
      if (!std::getline(in, line)) fail(ErrorKind::IoError, "truncated node block");
      const auto g = split_csv(line);
      if (g.size() != 5 || g[0] != "node") fail(ErrorKind::IoError, "malformed node line");
      Vec x(2);
      x << to_d(g[2]), to_d(g[3]);
      md.profile.push_node(to_d(g[1]), x, to_d(g[4]));
    }
    for (std::size_t j = 0; j < steps; ++j) {
      if (!std::getline(in, line)) fail(ErrorKind::IoError, "truncated step block");
      const auto g = split_csv(line);
      if (g.size() != 14 || g[0] != "step") fail(ErrorKind::IoError, "malformed step line");
      DenseStep st;
      st.t_lo = to_d(g[1]);
      st.t_hi = to_d(g[2]);
      st.log_scale = to_d(g[3]);
      for (int q = 0; q < 5; ++q) {
        Vec cv(2);
        cv << to_d(g[4 + 2 * q]), to_d(g[5 + 2 * q]);
        st.coeffs.push_back(cv);
      }
      md.profile.push_step(std::move(st));
    }
    if (!std::getline(in, line) || line != "end") fail(ErrorKind::IoError, "missing mode terminator");
    md.profile.validate();
    modes.push_back(std::move(md));
  }
  return GreenModeTable(model, cfg, std::move(modes));
}

}  // namespace warpmass
