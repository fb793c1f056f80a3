#include "doctest.h"

#include <cmath>

#include "warpmass/error.hpp"
#include "warpmass/model_geometry.hpp"

using namespace warpmass;

namespace {

ModelSpace s2_model(int k, double c) { return ModelSpace(ClosedFactorData::round_sphere(2), k, WarpingProfile::sinh_c(c)); }

}  // namespace

TEST_CASE("sinh_c profile values and tail ratio") {
  for (double c : {0.1, 0.5, 1.0, 2.0}) {
    const WarpingProfile p = WarpingProfile::sinh_c(c);
    for (double r : {0.01, 0.5, 3.0}) CHECK(p.f(r) == doctest::Approx(std::sinh(c * r) / c).epsilon(1e-14));
    for (double r = 20.0 / std::max(c, 0.1); r < 40.0 / std::max(c, 0.1); r += 1.0)
      CHECK(std::abs(p.second_ratio(r) - c * c) < 1e-9);
    for (double r = 1e-3; r < 50.0; r *= 1.7) CHECK(p.f(r) > 0.0);
  }
}

TEST_CASE("linear profile is the c = 0 limit") {
  const WarpingProfile p = WarpingProfile::linear();
  for (double r : {0.1, 1.0, 7.5}) {
    CHECK(p.f(r) == doctest::Approx(r));
    CHECK(p.df(r) == doctest::Approx(1.0));
    CHECK(p.d2f(r) == 0.0);
  }
  CHECK(WarpingProfile::sinh_c(0.0).f(2.0) == doctest::Approx(2.0));
}

TEST_CASE("closed factor data for round spheres") {
  const ClosedFactorData s2 = ClosedFactorData::round_sphere(2);
  CHECK(s2.scal_inf() == doctest::Approx(2.0));
  CHECK(s2.scal_sup() == doctest::Approx(2.0));
  CHECK(s2.lambda_N() == doctest::Approx(1.0));
  const ClosedFactorData s3 = ClosedFactorData::round_sphere(3, 0.25);
  CHECK(s3.scal() == doctest::Approx(6.0 * 0.25));
  CHECK(s3.lambda_N() == doctest::Approx(0.75));
  for (int n = 2; n <= 6; ++n) CHECK(ClosedFactorData::round_sphere(n).satisfies_lichnerowicz());
}

TEST_CASE("conformal constants") {
  CHECK(conformal_constant(3) == doctest::Approx(8.0));
  CHECK(conformal_constant(4) == doctest::Approx(6.0));
  CHECK(critical_exponent(4) == doctest::Approx(4.0));
  CHECK(critical_exponent(3) == doctest::Approx(6.0));
  for (int m = 3; m <= 12; ++m) {
    CHECK(conformal_constant(m) > 4.0);
    CHECK(critical_exponent(m) > 2.0);
  }
}

TEST_CASE("scalar curvature examples") {
  const ModelSpace h3(ClosedFactorData::point(), 2, WarpingProfile::sinh_c(1.0));
  for (double r : {0.3, 1.0, 5.0}) CHECK(scalar_curvature(h3, r) == doctest::Approx(-6.0).epsilon(1e-12));
  const ModelSpace lin(ClosedFactorData::round_sphere(2), 1, WarpingProfile::linear());
  CHECK(scalar_curvature(lin, 1e6) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(asymptotic_scal(s2_model(2, 1.0)) == doctest::Approx(-4.0));
  CHECK(asymptotic_scal(s2_model(1, 1.0)) == doctest::Approx(0.0));
  CHECK(asymptotic_scal(s2_model(1, 0.0)) == doctest::Approx(2.0));
  const ModelSpace s3k2(ClosedFactorData::round_sphere(3), 2, WarpingProfile::sinh_c(1.0));
  CHECK(asymptotic_scal(s3k2) == doctest::Approx(0.0));
}

TEST_CASE("scalar curvature tends to its asymptotic value") {
  for (int k = 1; k <= 4; ++k)
    for (double c : {0.3, 1.0}) {
      const ModelSpace m = s2_model(k, c);
      CHECK(std::abs(scalar_curvature(m, 40.0 / c) - asymptotic_scal(m)) < 1e-9);
    }
}

TEST_CASE("mean curvature") {
  CHECK(mean_curvature(s2_model(1, 1.0), 1.0) == doctest::Approx(1.0 / std::tanh(1.0)));
  const ModelSpace lin(ClosedFactorData::round_sphere(2), 1, WarpingProfile::linear());
  CHECK(mean_curvature(lin, 2.0) == doctest::Approx(0.5));
  CHECK(std::abs(mean_curvature(s2_model(1, 0.5), 40.0) - 0.5) < 1e-8);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(ModelSpace(ClosedFactorData::point(), 1, WarpingProfile::sinh_c(1.0)), Error);
  CHECK_THROWS_AS(ModelSpace(ClosedFactorData::round_sphere(2), 0, WarpingProfile::sinh_c(1.0)), Error);
  CHECK_THROWS_AS(WarpingProfile::sinh_c(-1.0), Error);
}
