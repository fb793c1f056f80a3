#include "warpmass/conditions.hpp"

#include <cmath>

#include "warpmass/error.hpp"

namespace warpmass {

Check strict_check(double margin) { return Check{margin > 0.0, margin}; }

double re_sqrt(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

DecayExponents compute_alpha(const ModelSpace& model, double epsilon) {
  if (!(epsilon >= 0.0)) fail(ErrorKind::DomainError, "epsilon must be >= 0");
  const double k = model.k();
  const double c = model.c();
  const double a = model.a_m();
  const double base = 0.25 * k * k * c * c;
  const double curv = c * c * k * (k + 1.0);
  DecayExponents e;
  e.epsilon = epsilon;
  e.alpha_plus = 0.5 * k * c + epsilon + re_sqrt(base + (model.factor().scal_sup() - curv) / a);
  e.alpha_minus = 0.5 * k * c - epsilon + re_sqrt(base + (model.factor().scal_inf() - curv) / a);
  e.beta = compute_beta(model);
  return e;
}

double compute_beta(const ModelSpace& model) { return 0.5 * model.k() * model.c() + model.factor().lambda_N(); }

DecayExponents decay_exponents(const ModelSpace& model, double epsilon) { return compute_alpha(model, epsilon); }

Check check_vgl(double alpha1, double alpha2, double beta, int m) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  if (alpha1 < alpha2) fail(ErrorKind::HypothesisViolated, "alpha1 < alpha2");
  if (!(alpha2 > 0.0) || !(beta > 0.0)) fail(ErrorKind::HypothesisViolated, "exponents must be positive");
  const double ratio = static_cast<double>(m) / (m - 2.0);
  return strict_check(2.0 * beta - ratio * alpha1 + alpha2);
}

Check check_cond_main_1(const ModelSpace& model) {
  const double scal = model.factor().scal();
  const double c = model.c();
  return strict_check(scal - c * c * model.k() * (model.n() - 1.0) / (model.m() - 2.0));
}

double spectrum_bottom(const ModelSpace& model) {
  const double scal = model.factor().scal();
  const double k = model.k();
  const double c = model.c();
  return 0.25 * c * c * k * k + (scal - c * c * k * (k + 1.0)) / model.a_m();
}

double cond_main_b(const ModelSpace& model) {
  const double c = model.c();
  return model.k() * c * c * (1.0 - model.n()) / (4.0 * (model.m() - 1.0));
}

Check check_cond_main(const ModelSpace& model) {
  if (model.n() <= 1) fail(ErrorKind::InvalidFactorDimension, "cond_main needs n > 1");
  const double m = model.m();
  const double a = model.a_m();
  const double b = cond_main_b(model);
  const double kc = model.k() * model.c();
  const double lhs = kc * (3.0 - m) / (m - 2.0) + (m / (m - 2.0)) * re_sqrt(b + model.factor().scal_sup() / a) -
                     re_sqrt(b + model.factor().scal_inf() / a);
  return strict_check(2.0 * model.factor().lambda_N() - lhs);
}

ChainCheck example_chain_check(const ModelSpace& model) {
  const double scal = model.factor().scal();
  const double lambda = model.factor().lambda_N();
  if (lambda * lambda < 0.25 * scal) fail(ErrorKind::HypothesisViolated, "lambda_N^2 < scal_N/4");
  if (model.n() <= 1) fail(ErrorKind::InvalidFactorDimension, "chain needs n > 1");
  const double m = model.m();
  const double a = model.a_m();
  const double b = cond_main_b(model);
  const double kc = model.k() * model.c();
  const double tol = 1e-12 * (1.0 + std::abs(lambda) + std::abs(scal));
  const double lhs = kc * (3.0 - m) / (m - 2.0) + (2.0 / (m - 2.0)) * re_sqrt(b + scal / a);
  const double mid = (2.0 / (m - 2.0)) * re_sqrt(scal / a);
  const double right = 2.0 * lambda / std::sqrt((m - 2.0) * (m - 1.0));
  ChainCheck out;
  out.first = lhs <= mid + tol;
  out.second = mid <= right + tol;
  out.third = right < 2.0 * lambda;
  return out;
}

ConditionReport evaluate_conditions(const ModelSpace& model) {
  ConditionReport rep;
  rep.exponents = compute_alpha(model, 0.0);
  if (model.factor().constant_scal()) {
    rep.cond_main_1 = check_cond_main_1(model);
    rep.spectrum_bottom_d = spectrum_bottom(model);
  } else {
    rep.notes += "scal_N not constant: cond_main_1 and d not applicable; ";
  }
  try {
    rep.vgl = check_vgl(rep.exponents.alpha_plus, rep.exponents.alpha_minus, rep.exponents.beta, model.m());
  } catch (const Error& e) {
    rep.notes += std::string("vgl: ") + e.what() + "; ";
  }
  try {
    rep.cond_main = check_cond_main(model);
  } catch (const Error& e) {
    rep.notes += std::string("cond_main: ") + e.what() + "; ";
  }
  rep.all_hypotheses = rep.cond_main_1 && rep.cond_main_1->holds && rep.spectrum_bottom_d &&
                       *rep.spectrum_bottom_d > 0.0 && rep.vgl && rep.vgl->holds && rep.cond_main &&
                       rep.cond_main->holds;
  return rep;
}

}  // namespace warpmass
