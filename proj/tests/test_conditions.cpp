#include "doctest.h"

#include <cmath>
#include <random>

#include "warpmass/conditions.hpp"
#include "warpmass/error.hpp"

using namespace warpmass;

namespace {

ModelSpace sphere_model(int n, int k, double c, double kappa = 1.0) {
  return ModelSpace(ClosedFactorData::round_sphere(n, kappa), k, WarpingProfile::sinh_c(c));
}

}  // namespace

TEST_CASE("alpha exponents") {
  const DecayExponents e = decay_exponents(sphere_model(2, 1, 1.0));
  CHECK(e.alpha_plus == doctest::Approx(1.0));
  CHECK(e.alpha_minus == doctest::Approx(1.0));
  CHECK(e.beta == doctest::Approx(1.5));

  const ModelSpace flat_n(ClosedFactorData::explicit_factor(1, 0.0, 0.0, 0.0, SpectrumCatalog()), 2,
                          WarpingProfile::sinh_c(1.0));
  const DecayExponents f = compute_alpha(flat_n, 0.0);
  CHECK(f.alpha_plus == doctest::Approx(1.0));
  CHECK(f.alpha_minus == doctest::Approx(1.0));

  for (double eps : {0.1, 0.37, 1.0}) {
    const ModelSpace m = sphere_model(3, 2, 0.6);
    CHECK(compute_alpha(m, eps).alpha_plus - compute_alpha(m, 0.0).alpha_plus == doctest::Approx(eps));
  }
}

TEST_CASE("beta exponent") {
  CHECK(compute_beta(sphere_model(2, 1, 1.0)) == doctest::Approx(1.5));
  CHECK(compute_beta(sphere_model(3, 1, 0.5)) == doctest::Approx(1.75));
  const ModelSpace zero(ClosedFactorData::explicit_factor(2, 0.0, 0.0, 0.0, SpectrumCatalog()), 3,
                        WarpingProfile::sinh_c(0.8));
  CHECK(compute_beta(zero) == doctest::Approx(1.2));
}

TEST_CASE("inequality of the exponents") {
  const Check a = check_vgl(1.0, 1.0, 1.5, 4);
  CHECK(a.holds);
  CHECK(a.margin == doctest::Approx(2.0));
  const Check b = check_vgl(1.0, 1.0, 0.5, 4);
  CHECK_FALSE(b.holds);
  CHECK(b.margin == doctest::Approx(0.0).epsilon(1e-15));
  const Check c = check_vgl(2.0, 1.0, 2.0, 3);
  CHECK_FALSE(c.holds);
  CHECK(c.margin == doctest::Approx(-1.0));
}

TEST_CASE("scalar curvature condition and spectrum bottom") {
  const Check s2 = check_cond_main_1(sphere_model(2, 1, 1.0));
  CHECK(s2.holds);
  CHECK(s2.margin == doctest::Approx(1.5));
  const Check flat = check_cond_main_1(sphere_model(3, 2, 0.0));
  CHECK(flat.margin == doctest::Approx(6.0));
  CHECK_FALSE(check_cond_main_1(sphere_model(1, 2, 0.5)).holds);

  CHECK(spectrum_bottom(sphere_model(2, 1, 1.0)) == doctest::Approx(0.25));
  CHECK(spectrum_bottom(sphere_model(2, 1, 0.0)) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("main condition") {
  const Check c = check_cond_main(sphere_model(2, 1, 1.0));
  CHECK(c.holds);
  CHECK(c.margin == doctest::Approx(2.0));
  CHECK(cond_main_b(sphere_model(2, 1, 1.0)) == doctest::Approx(-1.0 / 12.0));
  for (int n = 2; n <= 6; ++n) CHECK(check_cond_main(sphere_model(n, 2, 0.0)).holds);
}

TEST_CASE("example chain") {
  CHECK(example_chain_check(sphere_model(2, 1, 1.0)).all());
  CHECK(example_chain_check(sphere_model(3, 2, 0.7)).all());
  for (int n = 2; n <= 6; ++n) CHECK(example_chain_check(sphere_model(n, 3, 0.0)).all());
}

TEST_CASE("full hypothesis sweep over sphere models") {
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= 8; ++k)
      for (int i = 0; i <= 10; ++i) {
        const ConditionReport r = evaluate_conditions(sphere_model(n, k, 0.1 * i));
        CHECK(r.all_hypotheses);
      }
  const ConditionReport one = evaluate_conditions(sphere_model(1, 2, 1.0));
  CHECK_FALSE(one.all_hypotheses);
}

TEST_CASE("sign of the spectrum bottom matches the scalar condition") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> dn(1, 7), dk(1, 8);
  std::uniform_real_distribution<double> dc(0.0, 2.0), dkap(0.1, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const ModelSpace m = sphere_model(dn(rng), dk(rng), dc(rng), dkap(rng));
    const double d = spectrum_bottom(m);
    const double margin = check_cond_main_1(m).margin;
    CHECK(m.a_m() * d == doctest::Approx(margin).epsilon(1e-12).scale(1.0));
  }
}
