#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "warpmass/error.hpp"
#include "warpmass/radial_ode.hpp"

using namespace warpmass;

namespace {

ModelSpace s2_model(int k, double c) { return ModelSpace(ClosedFactorData::round_sphere(2), k, WarpingProfile::sinh_c(c)); }

std::vector<double> sorted_real(const Mat& m) {
  std::vector<double> out;
  for (const auto& z : eigenvalues(m)) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

LinearOdeSystem constant_system(const Mat& J) {
  LinearOdeSystem s;
  s.dim = static_cast<int>(J.rows());
  s.J = J;
  return s;
}

LinearOdeSystem perturbed_diagonal() {
  Mat J = Mat::Zero(2, 2);
  J(0, 0) = -1.0;
  J(1, 1) = -2.0;
  LinearOdeSystem s = constant_system(J);
  s.G = [](double t) { return Mat(Mat::Constant(2, 2, 1.0 / t)); };
  s.t0 = 1.0;
  return s;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat rotation_generator() {
  Mat J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  return J;
}

}  // namespace

TEST_CASE("scalar mode system eigenvalues") {
  const auto ev = sorted_real(build_scalar_mode_system(s2_model(1, 1.0), 0.0, 0.0).J);
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(0.0).epsilon(1e-12));

  const ModelSpace flat(ClosedFactorData::round_sphere(2), 1, WarpingProfile::linear());
  const auto ev0 = sorted_real(build_scalar_mode_system(flat, 0.0, 0.0).J);
  CHECK(ev0[0] == doctest::Approx(-std::sqrt(2.0 / 6.0)));
  CHECK(ev0[1] == doctest::Approx(std::sqrt(2.0 / 6.0)));

  const LinearOdeSystem sys = build_scalar_mode_system(s2_model(2, 0.7), 2.0, 0.0);
  CHECK(sys.G(80.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Dirac mode system eigenvalues and structure") {
  const auto ev = sorted_real(build_dirac_mode_system(s2_model(1, 1.0), 1.0, fiber_dirac_rho(1)).J);
  CHECK(ev[0] == doctest::Approx(-1.5));
  CHECK(ev[1] == doctest::Approx(-1.5));
  CHECK(ev[2] == doctest::Approx(0.5));
  CHECK(ev[3] == doctest::Approx(0.5));

  for (const auto& z : eigenvalues(build_dirac_mode_system(s2_model(3, 0.4), 0.0, fiber_dirac_rho(3)).J))
    CHECK(z.real() == doctest::Approx(-0.6));

  const ModelSpace s2k2(ClosedFactorData::round_sphere(2), 2, WarpingProfile::sinh_c(0.5));
  const auto ev2 = sorted_real(build_dirac_mode_system(s2k2, 1.5, fiber_dirac_rho(2)).J);
  CHECK(ev2[0] == doctest::Approx(-2.0));
  CHECK(ev2[1] == doctest::Approx(-2.0));
  CHECK(ev2[2] == doctest::Approx(1.0));
  CHECK(ev2[3] == doctest::Approx(1.0));

  const Mat B = dirac_B();
  CHECK((B * B - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  for (double lam : {0.5, 1.0, 2.5}) {
    const Mat A = dirac_A(lam) / lam;
    CHECK((A * B + B * A).cwiseAbs().maxCoeff() < 1e-15);
  }
  const LinearOdeSystem sys = build_dirac_mode_system(s2_model(1, 1.0), 1.0, fiber_dirac_rho(1));
  const Mat pattern = Mat::Identity(4, 4) + B.cwiseAbs();
  for (double r : {0.5, 2.0, 10.0}) {
    const Mat G = sys.G(r);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (pattern(i, j) == 0.0) CHECK(G(i, j) == 0.0);
  }
}

TEST_CASE("integrator reproduces exact solutions") {
  Mat J1(1, 1);
  J1 << -1.0;
  Vec x1(1);
  x1 << 1.0;
  const Trajectory tr = integrate(constant_system(J1), x1, 5.0);
  CHECK(tr.state(tr.size() - 1)(0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
  for (double t : {0.3, 1.7, 4.2}) CHECK(tr.at(t)(0) == doctest::Approx(std::exp(-t)).epsilon(1e-8));

  Mat J2(2, 2);
  J2 << 0.0, 1.0, 0.0, 0.0;
  const Trajectory poly = integrate(constant_system(J2), vec2(0.0, 1.0), 6.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    CHECK(poly.state(i)(0) == doctest::Approx(poly.t(i)).epsilon(1e-10));
    CHECK(poly.state(i)(1) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("decaying hyperbolic mode matches the closed form") {
  // On H^3 with scal = -6 and a = 8 the l = 0 mode is exp(-r/2)/sinh(r).
  const ModelSpace h3(ClosedFactorData::point(), 2, WarpingProfile::sinh_c(1.0));
  const LinearOdeSystem sys = build_scalar_mode_system(h3, 0.0, 0.0);
  const Trajectory tr = decaying_solution(sys, 25.0, 0.5);
  for (double r : {0.6, 1.0, 3.0, 8.0, 15.0}) {
    const Vec x = tr.at(r);
    CHECK(x(1) / x(0) == doctest::Approx(-0.5 - 1.0 / std::tanh(r)).epsilon(1e-6));
  }
}

TEST_CASE("rate fits") {
  Mat J(1, 1);
  J << -2.0;
  Vec x(1);
  x << 1.0;
  const RateFit fit = fit_decay_rate(integrate(constant_system(J), x, 10.0), 2.0, 8.0);
  CHECK(fit.rate == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(fit.residual < 1e-8);

  const ModelSpace m = s2_model(1, 0.5);
  const RateFit f0 = fit_decay_rate(decaying_solution(build_scalar_mode_system(m, 0.0, 0.0), 40.0, 14.0), 15.0, 30.0);
  CHECK(std::abs(f0.rate + 0.25 + std::sqrt(0.0625 + 0.25)) < 1e-2);

  const ModelSpace m1 = s2_model(1, 1.0);
  const RateFit f1 = fit_decay_rate(decaying_solution(build_scalar_mode_system(m1, 2.0, 0.0), 40.0, 14.0), 15.0, 30.0);
  CHECK(std::abs(f1.rate + 2.0) < 1e-2);

  const LinearOdeSystem dirac = build_dirac_mode_system(m1, 1.0, fiber_dirac_rho(1));
  const RateFit fd = fit_decay_rate(decaying_solution(dirac, 40.0, 14.0), 15.0, 30.0);
  CHECK(std::abs(fd.rate + 1.5) < 1e-2);
  CHECK(dirac_mode_rate(m1, 1.0) == doctest::Approx(-1.5));
}

TEST_CASE("unperturbed diagonal system") {
  Mat J = Mat::Zero(2, 2);
  J(0, 0) = -1.0;
  J(1, 1) = -2.0;
  const RateFit fit = fit_decay_rate(decaying_solution(constant_system(J), 30.0, 0.0), 5.0, 25.0);
  CHECK(fit.rate == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("perturbed system rates bracket the eigenvalues and tighten") {
  const LinearOdeSystem sys = perturbed_diagonal();
  const Trajectory dec_near = decaying_solution(sys, 250.0, 40.0);
  const Trajectory dec_far = decaying_solution(sys, 500.0, 90.0);
  const double d1 = std::abs(fit_decay_rate(dec_near, 50.0, 200.0).rate + 2.0);
  const double d2 = std::abs(fit_decay_rate(dec_far, 100.0, 400.0).rate + 2.0);
  CHECK(d1 <= 0.05);
  CHECK(d2 < d1);

  const Trajectory fwd = integrate(sys, vec2(1.0, 0.0), 400.0);
  const double g1 = std::abs(fit_decay_rate(fwd, 50.0, 200.0).rate + 1.0);
  const double g2 = std::abs(fit_decay_rate(fwd, 100.0, 400.0).rate + 1.0);
  CHECK(g1 <= 0.05);
  CHECK(g2 < g1);
}

TEST_CASE("integration is linear in the initial data") {
  const LinearOdeSystem sys = build_scalar_mode_system(s2_model(2, 0.8), 2.0, 0.0);
  LinearOdeSystem shifted = sys;
  shifted.t0 = 0.5;
  const Vec x = vec2(1.0, -0.3), y = vec2(-0.2, 2.0);
  const double alpha = 1.7, beta = -0.6;
  const Trajectory tx = integrate(shifted, x, 6.0), ty = integrate(shifted, y, 6.0);
  const Trajectory tz = integrate(shifted, alpha * x + beta * y, 6.0);
  for (double t : {0.7, 2.0, 4.5, 6.0}) {
    const Vec lhs = tz.at(t), rhs = alpha * tx.at(t) + beta * ty.at(t);
    CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("error shrinks at least twofold when the tolerance is halved") {
  const LinearOdeSystem sys = constant_system(rotation_generator());
  const Vec x0 = vec2(1.0, 0.0);
  auto error_at = [&](double rel) {
    IntegrateOptions opt;
    opt.tol = Tolerances{rel * 1e-2, rel};
    const Trajectory tr = integrate(sys, x0, 20.0, opt);
    const Vec end = tr.state(tr.size() - 1);
    return std::hypot(end(0) - std::cos(20.0), end(1) + std::sin(20.0));
  };
  double product = 1.0;
  int pairs = 0;
  for (double rel = 1e-5; rel > 1e-9; rel *= 0.5) {
    const double e1 = error_at(rel), e2 = error_at(0.5 * rel);
    product *= e1 / e2;
    ++pairs;
  }
  CHECK(std::pow(product, 1.0 / pairs) >= 2.0);
}

TEST_CASE("invalid decay requests") {
  Mat J = Mat::Zero(2, 2);
  J(0, 0) = -1.0;
  J(1, 1) = -1.0;
  CHECK_THROWS_AS(decaying_solution(constant_system(J), 10.0, 20.0), Error);
  Mat K = Mat::Zero(2, 2);
  K(0, 0) = -1.0;
  K(1, 1) = -2.0;
  const Trajectory tr = decaying_solution(constant_system(K), 10.0, 0.0);
  CHECK_THROWS_AS(fit_decay_rate(tr, 3.0, 3.0), Error);
}
