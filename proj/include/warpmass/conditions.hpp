#pragma once

#include <optional>
#include <string>

#include "warpmass/model_geometry.hpp"

namespace warpmass {

// Signed outcome of a strict inequality: margin = RHS - LHS, holds iff margin > 0.
struct Check {
  bool holds = false;
  double margin = 0.0;
};

Check strict_check(double margin);

struct DecayExponents {
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
};

// Real part of the principal square root.
double re_sqrt(double x);

DecayExponents compute_alpha(const ModelSpace& model, double epsilon);
double compute_beta(const ModelSpace& model);
DecayExponents decay_exponents(const ModelSpace& model, double epsilon = 0.0);

Check check_vgl(double alpha1, double alpha2, double beta, int m);
Check check_cond_main_1(const ModelSpace& model);
double spectrum_bottom(const ModelSpace& model);
// b = kc^2(1-n)/(4(m-1)).
double cond_main_b(const ModelSpace& model);
Check check_cond_main(const ModelSpace& model);

struct ChainCheck {
  bool first = false;   // kc(3-m)/(m-2) + (m/(m-2))Re sqrt(b+S/a) - Re sqrt(b+S/a) <= (2/(m-2)) sqrt(S/a)
  bool second = false;  // (2/(m-2)) sqrt(S/a) <= 2 lambda_N / sqrt((m-2)(m-1))
  bool third = false;   // 2 lambda_N / sqrt((m-2)(m-1)) < 2 lambda_N
  bool all() const { return first && second && third; }
};
ChainCheck example_chain_check(const ModelSpace& model);

struct ConditionReport {
  std::optional<Check> cond_main_1;
  std::optional<double> spectrum_bottom_d;
  std::optional<Check> vgl;
  std::optional<Check> cond_main;
  DecayExponents exponents;
  bool all_hypotheses = false;
  std::string notes;
};

ConditionReport evaluate_conditions(const ModelSpace& model);

}  // namespace warpmass
