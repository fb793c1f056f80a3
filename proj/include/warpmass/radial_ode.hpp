#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "warpmass/model_geometry.hpp"

namespace warpmass {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

// x' = (J + G(t)) x on (t0, inf).
struct LinearOdeSystem {
  int dim = 0;
  Mat J;
  std::function<Mat(double)> G;
  double t0 = 0.0;

  Mat matrix(double t) const;
};

struct Tolerances {
  double abs = 1e-12;
  double rel = 1e-10;
};

struct IntegrateOptions {
  Tolerances tol;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects automatically
  long max_steps = 5'000'000;
};

// Quartic dense-output polynomial of one accepted step, in the step's own scale.
struct DenseStep {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double log_scale = 0.0;
  std::vector<Vec> coeffs;  // monomials in theta = (t - t_lo)/(t_hi - t_lo)
};

// Solution samples stored as scaled state times exp(log_scale).
class Trajectory {
 public:
  Trajectory() = default;
  static Trajectory from_samples(const std::vector<double>& t, const std::vector<Vec>& x,
                                 Tolerances tol = {});

  std::size_t size() const { return t_.size(); }
  int dim() const { return t_.empty() ? 0 : static_cast<int>(x_.front().size()); }
  double t(std::size_t i) const { return t_[i]; }
  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  const std::vector<double>& grid() const { return t_; }
  const Vec& scaled_state(std::size_t i) const { return x_[i]; }
  double log_scale(std::size_t i) const { return log_scale_[i]; }
  Vec state(std::size_t i) const;
  double log_norm(std::size_t i) const;
  const Tolerances& tolerances() const { return tol_; }
  bool has_dense_output() const { return !steps_.empty(); }
  const std::vector<DenseStep>& steps() const { return steps_; }

  // Dense evaluation; the result equals scaled * exp(log_scale).
  Vec scaled_at(double t, double& log_scale) const;
  Vec at(double t) const;
  double log_norm_at(double t) const;

  // Multiplies the solution by sign * exp(log_factor).
  void rescale(double log_factor, bool negate);

  void write_csv(std::ostream& out) const;

  // Construction from raw pieces (integration and deserialization).
  void push_node(double t, const Vec& x, double log_scale);
  void push_step(DenseStep step);
  void set_tolerances(Tolerances tol) { tol_ = tol; }
  void reverse();
  void validate() const;

 private:
  std::vector<double> t_;
  std::vector<Vec> x_;
  std::vector<double> log_scale_;
  std::vector<DenseStep> steps_;
  std::vector<double> step_end_;  // search keys, max(t_lo, t_hi) per step
  Tolerances tol_;
};

// Integrates from t_start to t_end (either direction) with Dormand-Prince 5(4).
Trajectory integrate_from(const LinearOdeSystem& system, double t_start, const Vec& x0, double t_end,
                          const IntegrateOptions& options = {});
// Integrates from system.t0 forward to t1.
Trajectory integrate(const LinearOdeSystem& system, const Vec& x0, double t1, const IntegrateOptions& options = {});

struct RateFit {
  double rate = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

// Least-squares slope of log|x| on trajectory nodes inside [t_lo, t_hi].
RateFit fit_decay_rate(const Trajectory& traj, double t_lo, double t_hi);

struct DecayTarget {
  Vec initial;  // vector in the chosen invariant subspace of J
};

// Solution with the most negative Re-rate, integrated backward from t_far to t_stop
// (default: system.t0). |x(t_far)| = 1.
Trajectory decaying_solution(const LinearOdeSystem& system, double t_far,
                             std::optional<double> t_stop = std::nullopt,
                             const IntegrateOptions& options = {},
                             std::optional<DecayTarget> target = std::nullopt);

std::vector<std::complex<double>> eigenvalues(const Mat& m);

// Mode system of the conformal Laplacian for the N-eigenvalue mu and S^k-eigenvalue lambda.
LinearOdeSystem build_scalar_mode_system(const ModelSpace& model, double mu, double lambda);
LinearOdeSystem build_scalar_mode_system(const ModelSpace& model, double mu, double lambda, double scal_N);
// Predicted decaying rate -kc/2 - Re sqrt(k^2c^2/4 + mu + s/a_m).
double scalar_mode_rate(const ModelSpace& model, double mu, double scal_N);

Mat dirac_A(double lambda);
Mat dirac_B();
LinearOdeSystem build_dirac_mode_system(const ModelSpace& model, double lambda, double rho,
                                        bool allow_general_rho = false);
double dirac_mode_rate(const ModelSpace& model, double lambda);

}  // namespace warpmass
