#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "warpmass/conditions.hpp"
#include "warpmass/error.hpp"
#include "warpmass/green_mass.hpp"
#include "warpmass/product_curvature.hpp"
#include "warpmass/radial_ode.hpp"
#include "warpmass/yamabe.hpp"

using namespace warpmass;

namespace {

// Pinned tolerances and budgets, one block per criterion.
constexpr double kRateTol = 1e-2;             // criteria 1 and 2
constexpr double kBracket = 0.05;             // criterion 3
constexpr double kSignTol = 1e-12;            // criterion 4
constexpr long kRandomDraws = 10000;
constexpr std::uint64_t kSeed = 20240601;
constexpr double kLeadingTol = 0.02;          // criterion 5
constexpr double kEuclidTol = 1e-6;
constexpr double kStrictGap = 0.005;          // criterion 7
constexpr double kBubbleTol = 0.01;
constexpr double kFlatTol = 1e-12;            // criterion 8
constexpr double kNonFlatMin = 0.1;
constexpr double kBudget[10] = {0, 5, 5, 60, 5, 60, 600, 60, 5, 10};

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[1024];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelSpace s2h(int k, double c) { return ModelSpace(ClosedFactorData::round_sphere(2), k, WarpingProfile::sinh_c(c)); }

LinearOdeSystem constant_system(const Mat& J) {
  LinearOdeSystem s;
  s.dim = static_cast<int>(J.rows());
  s.J = J;
  return s;
}

Outcome c1_scalar_rates() {
  const ModelSpace m = s2h(1, 0.5);
  double worst = 0.0;
  std::string d;
  for (double mu : {0.0, 2.0}) {
    const Trajectory tr = decaying_solution(build_scalar_mode_system(m, mu, 0.0), 40.0, 14.0);
    const double fitted = fit_decay_rate(tr, 15.0, 30.0).rate;
    const double predicted = scalar_mode_rate(m, mu, 2.0);
    worst = std::max(worst, std::abs(fitted - predicted));
    d += fmt("mu=%g fitted %.6f predicted %.6f; ", mu, fitted, predicted);
  }
  return {worst < kRateTol, d + fmt("max dev %.2e < %.0e", worst, kRateTol)};
}

Outcome c2_dirac_rates() {
  const ModelSpace m = s2h(1, 1.0);
  const Trajectory tr = decaying_solution(build_dirac_mode_system(m, 1.0, fiber_dirac_rho(1)), 40.0, 14.0);
  const double fitted = fit_decay_rate(tr, 15.0, 30.0).rate;
  const double dev = std::abs(fitted + 1.5);
  return {dev < kRateTol, fmt("fitted %.6f vs -1.5, dev %.2e < %.0e", fitted, dev, kRateTol)};
}

Outcome c3_bracket() {
  Mat J = Mat::Zero(2, 2);
  J(0, 0) = -1.0;
  J(1, 1) = -2.0;
  LinearOdeSystem sys = constant_system(J);
  sys.G = [](double t) { return Mat(Mat::Constant(2, 2, 1.0 / t)); };
  sys.t0 = 1.0;
  Vec e1(2);
  e1 << 1.0, 0.0;
  const Trajectory fwd = integrate(sys, e1, 400.0);
  const double f1 = fit_decay_rate(fwd, 50.0, 200.0).rate, f2 = fit_decay_rate(fwd, 100.0, 400.0).rate;
  const double d1 = fit_decay_rate(decaying_solution(sys, 250.0, 40.0), 50.0, 200.0).rate;
  const double d2 = fit_decay_rate(decaying_solution(sys, 500.0, 90.0), 100.0, 400.0).rate;
  const bool in = std::abs(f1 + 1.0) <= kBracket && std::abs(d1 + 2.0) <= kBracket;
  const bool tight = std::abs(f2 + 1.0) < std::abs(f1 + 1.0) && std::abs(d2 + 2.0) < std::abs(d1 + 2.0);
  return {in && tight, fmt("rate(-1): %.4f -> %.4f, rate(-2): %.4f -> %.4f on [50,200] -> [100,400]", f1, f2, d1, d2)};
}

Outcome c4_hypotheses() {
  long models = 0, passed = 0;
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= 8; ++k)
      for (int i = 0; i <= 10; ++i) {
        const ModelSpace m(ClosedFactorData::round_sphere(n), k, WarpingProfile::sinh_c(0.1 * i));
        ++models;
        passed += check_cond_main_1(m).holds && spectrum_bottom(m) > 0.0 && check_cond_main(m).holds;
      }
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> dn(1, 7), dk(1, 8);
  std::uniform_real_distribution<double> dc(0.0, 2.0), dkap(0.1, 3.0);
  long agree = 0;
  for (long i = 0; i < kRandomDraws; ++i) {
    const ModelSpace m(ClosedFactorData::round_sphere(dn(rng), dkap(rng)), dk(rng), WarpingProfile::sinh_c(dc(rng)));
    const double d = spectrum_bottom(m), margin = check_cond_main_1(m).margin;
    const auto sgn = [](double x) { return (x > kSignTol) - (x < -kSignTol); };
    agree += sgn(d) == sgn(margin);
  }
  return {passed == models && agree == kRandomDraws,
          fmt("%ld/%ld sweep models pass; sign agreement %ld/%ld (seed %llu)", passed, models, agree, kRandomDraws,
              static_cast<unsigned long long>(kSeed))};
}

Outcome c5_leading() {
  const ModelSpace r3(ClosedFactorData::point(), 2, WarpingProfile::linear());
  const LeadingFit e = fit_leading(build_green_table(r3), ShellSpec{0.1, 0.2, 25, 0.0});
  GreenConfig cfg;
  cfg.truncation_L = 64;
  cfg.tail_tolerance = 1e-2;
  const LeadingFit s = fit_leading(build_green_table(s2h(1, 1.0), cfg), ShellSpec{0.1, 0.2, 25, 0.0});
  return {e.relative_error < kEuclidTol && s.relative_error < kLeadingTol,
          fmt("R^3: a=%.10f rel %.1e; S2xH2 (L=64): a=%.6f vs %.6f rel %.2e", e.coefficient, e.relative_error,
              s.coefficient, s.reference, s.relative_error)};
}

Outcome c6_mass() {
  const ShellSpec shell{0.06, 0.2, 25, 0.0};
  auto table = [](double c, int L) {
    GreenConfig cfg;
    cfg.truncation_L = L;
    return build_green_table(s2h(1, c), cfg);
  };
  const MassEstimate z = fit_mass_term(table(1.0, 512), shell);
  const MassEstimate z2 = fit_mass_term(table(1.0, 1024), shell);
  const MassEstimate p = fit_mass_term(table(0.9, 1024), shell);
  const double change = std::abs(z2.mass_term - z.mass_term);
  const bool zero = std::abs(z.mass_term) <= z.zero_band;
  const bool stable = change < z.zero_band && change <= std::max(z.uncertainty, z2.uncertainty);
  const bool positive = p.mass_term - p.uncertainty > 0.0;
  return {zero && stable && positive,
          fmt("c=1: m=%.2e +- %.1e (zero band %.4f), doubling change %.1e; c=0.9: m=%.3e +- %.1e "
              "(%.0f uncertainties above 0)",
              z.mass_term, z.uncertainty, z.zero_band, change, p.mass_term, p.uncertainty,
              p.mass_term / p.uncertainty)};
}

Outcome c7_yamabe() {
  double worst_bubble = 0.0;
  for (int m = 3; m <= 5; ++m) {
    const ModelSpace flat(ClosedFactorData::point(), m - 1, WarpingProfile::linear());
    const double q = quotient(flat, euclidean_bubble(m, 1000.0)).quotient;
    worst_bubble = std::max(worst_bubble, std::abs(q / q_star_sphere(m) - 1.0));
  }
  const ModelSpace m = s2h(1, 0.5);
  GreenConfig cfg;
  cfg.truncation_L = 1024;
  const GreenModeTable table = build_green_table(m, cfg);
  const MassEstimate mass = fit_mass_term(table);
  const GreenField field(table);
  const SweepReport sw = schoen_sweep(m, std::make_shared<const GreenSampler>(field), mass, SchoenParams{},
                                      default_eps_grid());
  double conv = 0.0;
  for (const auto& e : sw.entries)
    if (e.ok && e.eps == sw.min_eps) conv = e.report.convergence;
  const bool strict = sw.min_quotient && sw.strictly_below && sw.relative_gap > 10.0 * conv;
  const bool gap = sw.min_quotient && sw.relative_gap >= kStrictGap;
  const bool bubbles = worst_bubble < kBubbleTol;
  return {strict && gap && bubbles,
          fmt("min Q=%.10f at eps=2^%d vs Q*=%.10f: strict inequality %s (gap %.2e, quadrature %.1e); "
              "0.5%% gap %s; bubbles within %.1e %s",
              sw.min_quotient.value_or(NAN), static_cast<int>(std::lround(std::log2(sw.min_eps))), sw.reference,
              strict ? "CERTIFIED" : "NOT CERTIFIED", sw.relative_gap, conv, gap ? "met" : "NOT MET", worst_bubble,
              bubbles ? "ok" : "FAILED")};
}

Outcome c8_flatness() {
  long total = 0, ok = 0;
  const int dims[5][2] = {{1, 2}, {2, 2}, {2, 3}, {3, 3}, {1, 3}};
  for (const auto& d : dims)
    for (double k1 : {-2.0, -1.0, 0.0, 1.0, 2.0})
      for (double k2 : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const FlatnessVerdict v = classify_conformal_flatness(
            {ConstantCurvatureFactor::make(d[0], k1), ConstantCurvatureFactor::make(d[1], k2)}, kFlatTol);
        const bool norm = v.numeric == Flatness::ConformallyFlat ? v.max_abs <= kFlatTol : v.max_abs >= kNonFlatMin;
        ++total;
        ok += v.agree() && norm;
      }
  const double cot = cotton({ConstantCurvatureFactor::make(1, 0.0), ConstantCurvatureFactor::make(2, 1.0)}).max_abs();
  return {ok == total && cot == 0.0, fmt("%ld/%ld cases agree with thresholds; |C(R x S2)| = %g", ok, total, cot)};
}

Outcome c9_integrator() {
  Mat J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  const LinearOdeSystem rot = constant_system(J);
  Vec x0(2);
  x0 << 1.0, 0.0;
  auto err = [&](double rel) {
    IntegrateOptions opt;
    opt.tol = Tolerances{1e-2 * rel, rel};
    const Trajectory tr = integrate(rot, x0, 20.0, opt);
    const Vec e = tr.state(tr.size() - 1);
    return std::hypot(e(0) - std::cos(20.0), e(1) + std::sin(20.0));
  };
  double log_ratio = 0.0;
  int pairs = 0;
  for (double rel = 1e-5; rel > 1e-9; rel *= 0.5, ++pairs) log_ratio += std::log(err(rel) / err(0.5 * rel));
  const double mean_ratio = std::exp(log_ratio / pairs);

  LinearOdeSystem sys = build_scalar_mode_system(s2h(2, 0.8), 2.0, 0.0);
  sys.t0 = 0.5;
  Vec x(2), y(2);
  x << 1.0, -0.3;
  y << -0.2, 2.0;
  const Trajectory tx = integrate(sys, x, 6.0), ty = integrate(sys, y, 6.0), tz = integrate(sys, 1.7 * x - 0.6 * y, 6.0);
  double lin = 0.0;
  for (double t : {0.7, 2.0, 4.5, 6.0}) {
    const Vec r = 1.7 * tx.at(t) - 0.6 * ty.at(t);
    lin = std::max(lin, (tz.at(t) - r).norm() / (1.0 + r.norm()));
  }
  const Mat A = dirac_A(1.3) / 1.3, B = dirac_B();
  const double anti = (A * B + B * A).cwiseAbs().maxCoeff();
  const double inv = (B * B - Mat::Identity(4, 4)).cwiseAbs().maxCoeff();
  return {mean_ratio >= 2.0 && lin < 1e-8 && anti < 1e-15 && inv == 0.0,
          fmt("error ratio per tolerance halving %.2f >= 2; linearity defect %.1e; {A,B} %.0e; B^2-I %.0e", mean_ratio,
              lin, anti, inv)};
}

}  // namespace

int main() {
  const std::function<Outcome()> checks[] = {c1_scalar_rates, c2_dirac_rates, c3_bracket,  c4_hypotheses, c5_leading,
                                             c6_mass,         c7_yamabe,      c8_flatness, c9_integrator};
  const char* names[] = {"scalar decay rates",      "Dirac decay rates",        "perturbed-ODE bracket",
                         "hypothesis sweep",        "Green leading coefficient", "rigidity mass zero",
                         "Yamabe strict inequality", "conformal flatness",       "integrator invariants"};
  int failed = 0;
  for (int i = 0; i < 9; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i]();
    } catch (const Error& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < kBudget[i + 1];
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] criterion %d %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", i + 1, names[i],
                o.detail.c_str(), secs, kBudget[i + 1]);
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
