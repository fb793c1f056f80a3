#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "warpmass/conditions.hpp"
#include "warpmass/error.hpp"
#include "warpmass/green_mass.hpp"
#include "warpmass/spectra.hpp"

using namespace warpmass;

namespace {

ModelSpace s2h2(double c) { return ModelSpace(ClosedFactorData::round_sphere(2), 1, WarpingProfile::sinh_c(c)); }
ModelSpace euclidean_r3() { return ModelSpace(ClosedFactorData::point(), 2, WarpingProfile::linear()); }

GreenConfig config_L(int L, double tail = 1e-9) {
  GreenConfig cfg;
  cfg.truncation_L = L;
  cfg.tail_tolerance = tail;
  return cfg;
}

const GreenModeTable& table64() {
  static const GreenModeTable t = build_green_table(s2h2(0.9), config_L(64, 1e-2));
  return t;
}

}  // namespace

TEST_CASE("reference coefficients") {
  CHECK(leading_reference(4) == doctest::Approx(1.0 / (4.0 * std::numbers::pi * std::numbers::pi)));
  CHECK(leading_reference(3) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK(template_coefficient(euclidean_r3()) == doctest::Approx(1.0 / (8.0 * 4.0 * std::numbers::pi)));
}

TEST_CASE("Euclidean Newtonian potential is reproduced") {
  const ModelSpace r3 = euclidean_r3();
  const ModeProfile md = solve_mode_green(r3, 0, 0.0);
  const double coeff = 1.0 / (8.0 * 4.0 * std::numbers::pi);
  CHECK(md.singular_strength == doctest::Approx(coeff).epsilon(1e-6));
  for (double r : {0.01, 0.1, 1.0, 5.0, 20.0}) CHECK(md.profile.at(r)[0] == doctest::Approx(coeff / r).epsilon(1e-6));

  const GreenModeTable t = build_green_table(r3);
  const LeadingFit fit = fit_leading(t, ShellSpec{0.1, 0.2, 25, 0.0});
  CHECK(fit.relative_error < 1e-6);
  const MassEstimate e = fit_mass_term(t, ShellSpec{0.06, 0.2, 25, 0.0});
  CHECK(std::abs(e.mass_term) < 1e-8);
}

TEST_CASE("mode profiles satisfy the mode equation and decay at the predicted rate") {
  const GreenModeTable& t = table64();
  CHECK(t.truncation() == 64);
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{5}, std::size_t{20}}) {
    const ModeProfile& md = t.modes()[i];
    for (double r : {2.0 * md.r_lo + 1e-3, 0.1, 0.5}) CHECK(mode_residual(t, i, r) < 1e-6);
    CHECK(md.singular_strength == doctest::Approx(template_coefficient(t.model())).epsilon(1e-6));
  }
  const ModeProfile& g0 = t.modes()[0];
  const RateFit fit = fit_decay_rate(g0.profile, 15.0, 27.0);
  CHECK(std::abs(fit.rate + g0.decay) < 5e-2);
  const ModelSpace m = s2h2(0.9);
  CHECK(g0.decay == doctest::Approx(compute_alpha(m, 0.0).alpha_minus));

  const GreenModeTable c1 = build_green_table(s2h2(1.0), config_L(4, 1e-2));
  CHECK(std::abs(fit_decay_rate(c1.modes()[0].profile, 15.0, 27.0).rate + 1.0) < 5e-2);
}

TEST_CASE("zonal sum at the pole direction equals a_m times the plain mode sum") {
  const GreenModeTable& t = table64();
  std::vector<double> z, dz;
  zonal_kernels(2, 1.0, 64, 0.0, z, dz);
  for (double r : {0.5, 1.0, 3.0}) {
    double sum = 0.0;
    for (std::size_t l = 0; l < t.modes().size(); ++l) {
      if (r > t.modes()[l].r_hi) continue;
      double g, dg;
      t.mode_values(l, r, g, dg);
      sum += z[l] * g;
    }
    CHECK(green_jet(t, 0.0, r).value == doctest::Approx(t.model().a_m() * sum).epsilon(1e-12));
    CHECK(z[0] == doctest::Approx(1.0 / sphere_volume(2)));
  }
}

TEST_CASE("assembled Green function is positive and solves the equation away from the pole") {
  const GreenModeTable& t = table64();
  std::vector<EvalPoint> pts;
  for (double th : {0.0, 0.4, 1.2, 2.5, 3.0})
    for (double r : {0.3, 0.8, 2.0, 6.0}) pts.push_back({th, r});
  for (double v : assemble_green(t, pts)) CHECK(v > 0.0);

  // Finite-difference conformal Laplacian along a ray, with the metric dtheta^2 + dr^2 + f^2 sigma.
  const ModelSpace& m = t.model();
  const double a = m.a_m(), h = 1e-3;
  for (auto [th, r] : {std::pair{0.5, 1.0}, std::pair{1.5, 0.7}, std::pair{2.0, 2.0}}) {
    auto G = [&](double x, double y) { return green_jet(t, x, y).value; };
    const double g = G(th, r);
    const double g_rr = (G(th, r + h) - 2 * g + G(th, r - h)) / (h * h);
    const double g_r = (G(th, r + h) - G(th, r - h)) / (2 * h);
    const double g_tt = (G(th + h, r) - 2 * g + G(th - h, r)) / (h * h);
    const double g_t = (G(th + h, r) - G(th - h, r)) / (2 * h);
    const double lap = g_rr + m.k() * m.profile().log_derivative(r) * g_r + g_tt + g_t / std::tan(th);
    const double res = -a * lap + scalar_curvature(m, r) * g;
    CHECK(std::abs(res) < 1e-4 * std::abs(g));
  }
}

TEST_CASE("guards") {
  const GreenModeTable& t = table64();
  CHECK_THROWS_AS(assemble_green(t, {{std::numbers::pi - 1e-4, 1.0}}), Error);
  CHECK_THROWS_AS(assemble_green(t, {{0.5, 0.0}}), Error);
  CHECK_THROWS_AS(fit_leading(t, ShellSpec{0.1, 0.5, 25, 0.0}), Error);
  CHECK_THROWS_AS(fit_leading(t, ShellSpec{0.1, 0.2, 4, 0.0}), Error);
  const GreenModeTable strict = build_green_table(s2h2(0.9), config_L(4, 1e-12));
  CHECK_THROWS_AS(assemble_green(strict, {{0.0, 0.05}}), Error);
  CHECK_THROWS_AS(ModelSpace(ClosedFactorData::point(), 1, WarpingProfile::sinh_c(1.0)), Error);
}

TEST_CASE("leading coefficient on S2 x H2") {
  const GreenModeTable t = build_green_table(s2h2(1.0), config_L(64, 1e-2));
  const LeadingFit fit = fit_leading(t, ShellSpec{0.1, 0.2, 25, 0.0});
  CHECK(fit.reference == doctest::Approx(1.0 / (4.0 * std::numbers::pi * std::numbers::pi)));
  CHECK(fit.relative_error < 0.02);
}

TEST_CASE("mass vanishes at c = 1 and is positive at c = 0.9") {
  const ShellSpec shell{0.06, 0.2, 25, 0.0};
  const GreenModeTable t1 = build_green_table(s2h2(1.0), config_L(512));
  const MassEstimate zero = fit_mass_term(t1, shell);
  CHECK(std::abs(zero.mass_term) <= zero.zero_band);
  CHECK(std::abs(zero.mass_term) <= 3.0 * zero.uncertainty);
  CHECK(zero.offset_applied);

  const GreenModeTable t2 = build_green_table(s2h2(0.9), config_L(1024));
  const MassEstimate pos = fit_mass_term(t2, shell);
  CHECK(pos.mass_term - 3.0 * pos.uncertainty > 0.0);
}

TEST_CASE("table files round-trip exactly") {
  const GreenModeTable t = build_green_table(s2h2(0.9), config_L(6, 1e-2));
  std::stringstream a;
  write_table(t, a);
  const GreenModeTable back = read_table(a);
  std::stringstream b;
  write_table(back, b);
  CHECK(a.str() == b.str());
  for (double r : {0.2, 1.0, 4.0})
    CHECK(green_jet(back, 0.3, r).value == green_jet(t, 0.3, r).value);

  std::istringstream junk("not a table\n");
  CHECK_THROWS_AS(read_table(junk), Error);
}
