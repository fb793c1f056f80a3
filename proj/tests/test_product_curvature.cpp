#include "doctest.h"

#include <cmath>

#include "warpmass/error.hpp"
#include "warpmass/product_curvature.hpp"

using namespace warpmass;

namespace {

using Factors = std::vector<ConstantCurvatureFactor>;

Factors pair(int d1, double k1, int d2, double k2) {
  return {ConstantCurvatureFactor::make(d1, k1), ConstantCurvatureFactor::make(d2, k2)};
}

// Weyl tensor of a product of two space forms evaluated on a mixed pair, by hand:
// W = R - P wedge g with P the Schouten tensor, for orthonormal X in the first and Y in the second factor.
double mixed_weyl_oracle(int d1, double k1, int d2, double k2) {
  const int m = d1 + d2;
  const double ric1 = (d1 - 1) * k1, ric2 = (d2 - 1) * k2;
  const double scal = d1 * ric1 + d2 * ric2;
  const double p1 = (ric1 - scal / (2.0 * (m - 1))) / (m - 2);
  const double p2 = (ric2 - scal / (2.0 * (m - 1))) / (m - 2);
  return 0.0 - (p1 + p2);
}

}  // namespace

TEST_CASE("Kulkarni-Nomizu product") {
  const Eigen::MatrixXd g = product_metric(4);
  const CurvatureTensor gg = kulkarni_nomizu(g, g);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b) CHECK(gg(a, b, a, b) == doctest::Approx(2.0));

  Eigen::MatrixXd h(3, 3), k(3, 3);
  h << 1, 2, 0, 2, -1, 3, 0, 3, 4;
  k << 0.5, 0, 1, 0, 2, -1, 1, -1, 0;
  const CurvatureTensor hk = kulkarni_nomizu(h, k), kh = kulkarni_nomizu(k, h);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) CHECK(hk(a, b, c, d) == doctest::Approx(kh(a, b, c, d)));
  CHECK(symmetry_defects(hk).max() < 1e-14);

  const CurvatureTensor space = 0.5 * -1.7 * kulkarni_nomizu(product_metric(3), product_metric(3));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) CHECK(space(a, b, a, b) == doctest::Approx(-1.7));
}

TEST_CASE("product curvature contractions") {
  CHECK(scalar(product_curvature(pair(2, 1.0, 2, -1.0))) == doctest::Approx(0.0).epsilon(1e-14));
  const CurvatureTensor ss = product_curvature(pair(2, 1.0, 2, 1.0));
  CHECK((ricci(ss) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(scalar(ss) == doctest::Approx(4.0));

  const CurvatureTensor line = product_curvature(pair(1, 0.0, 3, 2.0));
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 4; ++d) {
        CHECK(line(0, b, c, d) == 0.0);
        CHECK(line(b, c, d, 0) == 0.0);
      }
  CHECK(symmetry_defects(line).max() < 1e-14);
}

TEST_CASE("Weyl tensor of products") {
  CHECK(weyl(product_curvature(pair(2, 1.0, 2, -1.0)), product_metric(4)).max_abs() <= 1e-12);
  const CurvatureTensor W = weyl(product_curvature(pair(2, 1.0, 2, 1.0)), product_metric(4));
  CHECK(W(0, 2, 0, 2) == doctest::Approx(mixed_weyl_oracle(2, 1.0, 2, 1.0)));
  CHECK(W(0, 2, 0, 2) == doctest::Approx(-1.0 / 3.0));
  CHECK(max_trace(W) < 1e-14);

  for (int m = 3; m <= 6; ++m) {
    const CurvatureTensor sphere = 0.5 * kulkarni_nomizu(product_metric(m), product_metric(m));
    if (m >= 4) CHECK(weyl(sphere, product_metric(m)).max_abs() < 1e-14);
  }
}

TEST_CASE("Weyl tensor is trace-free with curvature symmetries on random products") {
  for (int d1 = 1; d1 <= 3; ++d1)
    for (int d2 = 2; d2 <= 3; ++d2)
      for (double k1 : {-1.3, 0.4})
        for (double k2 : {0.7, 2.0}) {
          if (d1 + d2 < 4) continue;
          const CurvatureTensor W = weyl(product_curvature(pair(d1, k1, d2, k2)), product_metric(d1 + d2));
          CHECK(max_trace(W) < 1e-12);
          CHECK(symmetry_defects(W).max() < 1e-12);
          CHECK(W(0, d1, 0, d1) == doctest::Approx(mixed_weyl_oracle(d1, d1 == 1 ? 0.0 : k1, d2, k2)));
        }
}

TEST_CASE("Cotton tensor") {
  CHECK(cotton(pair(1, 0.0, 2, 1.0)).max_abs() == 0.0);
  CHECK(cotton_line_times_surface(Eigen::Vector2d::Zero()).max_abs() == 0.0);
  const Tensor3 c = cotton_line_times_surface(Eigen::Vector2d(4.0, 0.0));
  CHECK(c.max_abs() == doctest::Approx(1.0));
  CHECK(cotton({ConstantCurvatureFactor::make(1, 0.0), ConstantCurvatureFactor::make(1, 0.0),
                ConstantCurvatureFactor::make(1, 0.0)})
            .max_abs() == 0.0);
}

TEST_CASE("conformal flatness classification") {
  CHECK(classify_conformal_flatness(pair(2, 1.0, 2, -1.0)).numeric == Flatness::ConformallyFlat);
  const FlatnessVerdict ss = classify_conformal_flatness(pair(2, 1.0, 2, 1.0));
  CHECK(ss.numeric == Flatness::NotFlat);
  CHECK(ss.max_abs > 0.1);
  CHECK(classify_conformal_flatness(pair(1, 0.0, 2, 1.7)).numeric == Flatness::ConformallyFlat);

  const std::vector<std::pair<int, int>> dims{{1, 2}, {2, 2}, {2, 3}, {3, 3}, {1, 3}};
  for (auto [d1, d2] : dims)
    for (double k1 : {-2.0, -1.0, 0.0, 1.0, 2.0})
      for (double k2 : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const FlatnessVerdict v = classify_conformal_flatness(pair(d1, k1, d2, k2));
        CHECK(v.agree());
        if (v.numeric == Flatness::ConformallyFlat)
          CHECK(v.max_abs <= 1e-12);
        else
          CHECK(v.max_abs >= 0.1);
      }
  CHECK_THROWS_AS(ConstantCurvatureFactor::make(0, 1.0), Error);
}
