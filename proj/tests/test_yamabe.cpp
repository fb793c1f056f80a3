#include "doctest.h"

#include <cmath>
#include <memory>
#include <numbers>

#include "warpmass/error.hpp"
#include "warpmass/spectra.hpp"
#include "warpmass/yamabe.hpp"

using namespace warpmass;

namespace {

ModelSpace euclidean(int m) { return ModelSpace(ClosedFactorData::point(), m - 1, WarpingProfile::linear()); }

RadialTestFunction smooth_bump(double support) {
  return RadialTestFunction::h_radial(
      [support](double r, double& u, double& du) {
        const double x = r / support;
        u = (1.0 - x * x) * (1.0 - x * x);
        du = -4.0 * x * (1.0 - x * x) / support;
      },
      support);
}

}  // namespace

TEST_CASE("sphere constants") {
  CHECK(q_star_sphere(3) == doctest::Approx(6.0 * std::pow(2.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0)));
  CHECK(q_star_sphere(3) == doctest::Approx(43.823).epsilon(1e-4));
  CHECK(q_star_sphere(4) == doctest::Approx(12.0 * std::sqrt(8.0 * std::numbers::pi * std::numbers::pi / 3.0)));
  CHECK(q_star_sphere(4) == doctest::Approx(61.562).epsilon(1e-4));
  for (int m = 3; m <= 6; ++m)
    CHECK(sphere_constant_quotient(m).quotient == doctest::Approx(q_star_sphere(m)).epsilon(1e-10));
  CHECK(scaling_reference(4, 1.0) == doctest::Approx(q_star_sphere(4)));
  CHECK(scaling_reference(4, 0.5) == doctest::Approx(43.531).epsilon(1e-4));
  CHECK_THROWS_AS(scaling_reference(4, 0.0), Error);
}

TEST_CASE("truncated Euclidean bubbles") {
  // Relative excess over q_star_sphere at truncation radius 10, from an independent high-precision quadrature.
  const double frozen[3] = {0.16016408378884, 0.026463984635553, 0.0048631882860548};
  for (int m = 3; m <= 5; ++m) {
    const QuotientReport r10 = quotient(euclidean(m), euclidean_bubble(m, 10.0));
    CHECK(r10.quotient / q_star_sphere(m) - 1.0 == doctest::Approx(frozen[m - 3]).epsilon(1e-6));
    const QuotientReport far = quotient(euclidean(m), euclidean_bubble(m, 1000.0));
    CHECK(std::abs(far.quotient / q_star_sphere(m) - 1.0) < 0.01);
    CHECK(far.quotient > q_star_sphere(m));
  }
}

TEST_CASE("quotient is scale invariant") {
  const ModelSpace m(ClosedFactorData::round_sphere(2), 1, WarpingProfile::sinh_c(0.5));
  const RadialTestFunction u = euclidean_bubble(4, 3.0);
  const double q = quotient(m, u).quotient;
  for (double t : {1e-3, 0.5, 7.0, 1e4}) CHECK(quotient(m, u.scaled(t)).quotient == doctest::Approx(q).epsilon(1e-12));
}

TEST_CASE("radial functions on S1 x H3 stay above the scaling bound") {
  const ModelSpace m(ClosedFactorData::round_sphere(1), 2, WarpingProfile::sinh_c(0.5));
  const double bound = scaling_reference(4, 0.5);
  for (double support : {1.0, 4.0, 12.0}) {
    const QuotientReport r = quotient(m, smooth_bump(support));
    CHECK(r.quotient >= bound * (1.0 - 1e-6));
  }
}

TEST_CASE("non-round factors are rejected") {
  const ModelSpace m(ClosedFactorData::explicit_factor(2, 1.0, 3.0, 1.0, sphere_laplace_catalog(2, 1.0, 4)), 1,
                     WarpingProfile::sinh_c(1.0));
  CHECK_THROWS_AS(quotient(m, smooth_bump(2.0)), Error);
}

TEST_CASE("Schoen test functions") {
  const ModelSpace m(ClosedFactorData::round_sphere(2), 1, WarpingProfile::sinh_c(0.5));
  GreenConfig cfg;
  cfg.truncation_L = 512;
  const GreenModeTable table = build_green_table(m, cfg);
  const MassEstimate mass = fit_mass_term(table);
  REQUIRE(mass.mass_term > mass.uncertainty);
  const GreenField field(table);
  auto sampler = std::make_shared<const GreenSampler>(field);

  SchoenParams sp;
  sp.eps = 1.0 / 64.0;
  SchoenDiagnostics diag;
  const RadialTestFunction u = schoen_test(m, sampler, mass, sp, &diag);
  CHECK(diag.mismatch < sp.mismatch_tolerance);
  CHECK(diag.delta0 > 0.0);
  for (double rho : {sp.rho0, sp.rho1})
    for (double phi : {0.0, 0.7, 1.4}) {
      const double d = 1e-13 * rho;
      const TestJet in = u.jet((rho - d) * std::sin(phi), (rho - d) * std::cos(phi));
      const TestJet out = u.jet((rho + d) * std::sin(phi), (rho + d) * std::cos(phi));
      CHECK(std::abs(in.u - out.u) <= 1e-11 * std::abs(in.u));
    }
  CHECK(u.jet(0.0, diag.support * 1.01).u == 0.0);

  const QuotientReport q = quotient(m, u);
  CHECK(std::isfinite(q.quotient));
  CHECK(q.quotient > 0.0);

  MassEstimate negative = mass;
  negative.mass_term = -1.0;
  CHECK_THROWS_AS(schoen_test(m, sampler, negative, sp), Error);
  SchoenParams bad = sp;
  bad.rho0 = 0.2;
  CHECK_THROWS_AS(schoen_test(m, sampler, mass, bad), Error);

  const SweepReport sw = schoen_sweep(m, sampler, mass, sp, {1.0 / 16.0, 1.0 / 32.0});
  REQUIRE(sw.min_quotient.has_value());
  CHECK(sw.entries.size() == 2);
  CHECK(sw.min_eps == doctest::Approx(1.0 / 32.0));
  CHECK(*sw.min_quotient > q_star_sphere(4));
}
