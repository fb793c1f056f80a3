#include "warpmass/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "warpmass/error.hpp"

namespace warpmass {

Mat LinearOdeSystem::matrix(double t) const {
  if (G) return J + G(t);
  return J;
}

// ---------------------------------------------------------------- Trajectory

Trajectory Trajectory::from_samples(const std::vector<double>& t, const std::vector<Vec>& x, Tolerances tol) {
  if (t.size() != x.size()) fail(ErrorKind::DimensionMismatch, "sample grid and states differ in length");
  Trajectory tr;
  tr.tol_ = tol;
  for (std::size_t i = 0; i < t.size(); ++i) tr.push_node(t[i], x[i], 0.0);
  tr.validate();
  return tr;
}

Vec Trajectory::state(std::size_t i) const { return x_[i] * std::exp(log_scale_[i]); }

double Trajectory::log_norm(std::size_t i) const { return std::log(x_[i].norm()) + log_scale_[i]; }

void Trajectory::push_node(double t, const Vec& x, double log_scale) {
  t_.push_back(t);
  x_.push_back(x);
  log_scale_.push_back(log_scale);
}

void Trajectory::push_step(DenseStep step) {
  step_end_.push_back(std::max(step.t_lo, step.t_hi));
  steps_.push_back(std::move(step));
}

void Trajectory::reverse() {
  std::reverse(t_.begin(), t_.end());
  std::reverse(x_.begin(), x_.end());
  std::reverse(log_scale_.begin(), log_scale_.end());
  std::reverse(steps_.begin(), steps_.end());
  std::reverse(step_end_.begin(), step_end_.end());
}

void Trajectory::validate() const {
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (i > 0 && !(t_[i] > t_[i - 1])) fail(ErrorKind::DomainError, "trajectory grid must be strictly increasing");
    if (!x_[i].allFinite() || !std::isfinite(log_scale_[i]))
      fail(ErrorKind::NonFiniteState, "non-finite trajectory state");
  }
}

static double step_min(const DenseStep& s) { return std::min(s.t_lo, s.t_hi); }
static double step_max(const DenseStep& s) { return std::max(s.t_lo, s.t_hi); }

Vec Trajectory::scaled_at(double t, double& log_scale) const {
  if (steps_.empty()) fail(ErrorKind::DomainError, "trajectory has no dense output");
  const double lo = step_min(steps_.front());
  const double hi = step_max(steps_.back());
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (t < lo - slack || t > hi + slack) fail(ErrorKind::DomainError, "evaluation outside trajectory support");
  auto pos = static_cast<std::size_t>(std::upper_bound(step_end_.begin(), step_end_.end(), t) - step_end_.begin());
  if (pos == steps_.size()) --pos;
  const DenseStep& s = steps_[pos];
  const double theta = std::clamp((t - s.t_lo) / (s.t_hi - s.t_lo), 0.0, 1.0);
  Vec y = s.coeffs.back();
  for (int j = static_cast<int>(s.coeffs.size()) - 2; j >= 0; --j) y = y * theta + s.coeffs[j];
  log_scale = s.log_scale;
  return y;
}

Vec Trajectory::at(double t) const {
  double ls = 0.0;
  Vec y = scaled_at(t, ls);
  return y * std::exp(ls);
}

double Trajectory::log_norm_at(double t) const {
  double ls = 0.0;
  Vec y = scaled_at(t, ls);
  return std::log(y.norm()) + ls;
}

void Trajectory::rescale(double log_factor, bool negate) {
  for (std::size_t i = 0; i < x_.size(); ++i) {
    log_scale_[i] += log_factor;
    if (negate) x_[i] = -x_[i];
  }
  for (auto& s : steps_) {
    s.log_scale += log_factor;
    if (negate)
      for (auto& c : s.coeffs) c = -c;
  }
}

void Trajectory::write_csv(std::ostream& out) const {
  const int d = dim();
  out << "t";
  for (int j = 1; j <= d; ++j) out << ",x_" << j;
  out << ",|x|\n";
  char buf[64];
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec x = state(i);
    std::snprintf(buf, sizeof buf, "%.17g", t_[i]);
    out << buf;
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", x[j]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", x.norm());
    out << buf;
  }
}

// ---------------------------------------------------------------- Dormand-Prince

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const Tolerances& tol) {
  double sum = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    sum += q * q;
  }
  return std::sqrt(sum / err.size());
}

Vec rhs(const LinearOdeSystem& sys, double t, const Vec& y) { return sys.matrix(t) * y; }

double initial_step(const LinearOdeSystem& sys, double t, const Vec& y, const Vec& f0, double dir,
                    const IntegrateOptions& opt) {
  Vec sc(y.size());
  for (int i = 0; i < y.size(); ++i) sc[i] = opt.tol.abs + opt.tol.rel * std::abs(y[i]);
  const double dy = std::sqrt((y.array() / sc.array()).square().mean());
  const double df = std::sqrt((f0.array() / sc.array()).square().mean());
  double h0 = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
  h0 = std::min(h0, opt.max_step);
  const Vec y1 = y + dir * h0 * f0;
  const Vec f1 = rhs(sys, t + dir * h0, y1);
  const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().mean()) / h0;
  const double dmax = std::max(df, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, opt.max_step});
}

}  // namespace

Trajectory integrate_from(const LinearOdeSystem& sys, double t_start, const Vec& x0, double t_end,
                          const IntegrateOptions& opt) {
  if (x0.size() != sys.dim || sys.J.rows() != sys.dim || sys.J.cols() != sys.dim)
    fail(ErrorKind::DimensionMismatch, "initial vector and system dimension differ");
  if (!(opt.tol.abs > 0.0) || !(opt.tol.rel > 0.0)) fail(ErrorKind::DomainError, "tolerances must be positive");
  if (t_end == t_start) fail(ErrorKind::DomainError, "empty integration interval");
  if (!x0.allFinite()) fail(ErrorKind::NonFiniteState, "non-finite initial state");

  const double dir = t_end > t_start ? 1.0 : -1.0;
  const double span = std::abs(t_end - t_start);
  const double max_step = std::min(opt.max_step, span);

  Trajectory tr;
  tr.set_tolerances(opt.tol);

  double t = t_start;
  double log_scale = 0.0;
  Vec y = x0;
  {
    const double nrm = y.norm();
    if (nrm > 0.0) {
      y /= nrm;
      log_scale = std::log(nrm);
    }
  }
  tr.push_node(t, y, log_scale);

  Vec k1 = rhs(sys, t, y);
  double h = opt.initial_step > 0.0 ? std::min(opt.initial_step, max_step)
                                    : initial_step(sys, t, y, k1, dir, IntegrateOptions{opt.tol, max_step});
  bool last_rejected = false;
  long steps = 0;

  while (dir * (t_end - t) > 0.0) {
    if (++steps > opt.max_steps) fail(ErrorKind::StepSizeUnderflow, "maximum number of steps exceeded");
    bool final_step = false;
    if (h >= std::abs(t_end - t)) {
      h = std::abs(t_end - t);
      final_step = true;
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      fail(ErrorKind::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t));
    const double hs = dir * h;

    const Vec k2 = rhs(sys, t + c2 * hs, y + hs * (a21 * k1));
    const Vec k3 = rhs(sys, t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(sys, t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs(sys, t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double t_new = final_step ? t_end : t + hs;
    const Vec k6 = rhs(sys, t_new, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = rhs(sys, t_new, y1);

    if (!y1.allFinite() || !k7.allFinite()) {
      if (h > 1e-3 * span) {
        h *= 0.1;
        last_rejected = true;
        continue;
      }
      fail(ErrorKind::NonFiniteState, "non-finite state at t = " + std::to_string(t));
    }

    const Vec err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y1, opt.tol);
    if (!std::isfinite(en)) fail(ErrorKind::NonFiniteState, "non-finite error estimate");

    if (en <= 1.0) {
      DenseStep ds;
      ds.t_lo = t;
      ds.t_hi = t_new;
      ds.log_scale = log_scale;
      const Vec ydiff = y1 - y;
      const Vec bspl = hs * k1 - ydiff;
      const Vec r4 = ydiff - hs * k7 - bspl;
      const Vec r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      ds.coeffs = {y, ydiff + bspl, r4 + r5 - bspl, -(r4 + 2.0 * r5), r5};
      tr.push_step(std::move(ds));

      t = t_new;
      y = y1;
      k1 = k7;
      const double nrm = y.norm();
      if (nrm > 0.0) {
        y /= nrm;
        k1 /= nrm;
        log_scale += std::log(nrm);
      }
      tr.push_node(t, y, log_scale);

      double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 10.0;
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, max_step);
      last_rejected = false;
    } else {
      const double fac = std::max(0.2, 0.9 * std::pow(en, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }

  if (dir < 0.0) tr.reverse();
  return tr;
}

Trajectory integrate(const LinearOdeSystem& system, const Vec& x0, double t1, const IntegrateOptions& options) {
  if (!(t1 > system.t0)) fail(ErrorKind::DomainError, "t1 must exceed t0");
  return integrate_from(system, system.t0, x0, t1, options);
}

// ---------------------------------------------------------------- rates

RateFit fit_decay_rate(const Trajectory& traj, double t_lo, double t_hi) {
  if (!(t_lo < t_hi)) fail(ErrorKind::DomainError, "fit window must satisfy t_lo < t_hi");
  if (traj.size() == 0 || t_lo < traj.t_min() - 1e-12 || t_hi > traj.t_max() + 1e-12)
    fail(ErrorKind::DomainError, "fit window outside trajectory support");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.t(i);
    if (t < t_lo || t > t_hi) continue;
    if (!(traj.scaled_state(i).norm() > 0.0)) fail(ErrorKind::ZeroNormOnWindow, "|x| vanishes on the window");
    ts.push_back(t);
    ys.push_back(traj.log_norm(i));
  }
  if (ts.size() < 10) fail(ErrorKind::WindowTooSmall, "fewer than 10 samples in the fit window");
  const double n = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
  }
  RateFit fit;
  fit.rate = sty / stt;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = ts.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (ym + fit.rate * (ts[i] - tm));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<std::complex<double>> eigenvalues(const Mat& m) {
  Eigen::MatrixXd a = m;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  std::sort(out.begin(), out.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });
  return out;
}

Trajectory decaying_solution(const LinearOdeSystem& system, double t_far, std::optional<double> t_stop,
                             const IntegrateOptions& options, std::optional<DecayTarget> target) {
  const double stop = t_stop.value_or(system.t0);
  if (!(t_far > stop)) fail(ErrorKind::DomainError, "t_far must exceed the stopping point");
  Vec x0;
  if (target) {
    x0 = target->initial;
  } else {
    Eigen::MatrixXd a = system.J;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, true);
    const auto& ev = es.eigenvalues();
    int best = 0;
    for (int i = 1; i < ev.size(); ++i)
      if (ev[i].real() < ev[best].real()) best = i;
    const double scale = 1.0 + std::abs(ev[best]);
    for (int i = 0; i < ev.size(); ++i) {
      if (i == best) continue;
      const bool tie = std::abs(ev[i].real() - ev[best].real()) <= 1e-9 * scale;
      const bool same = std::abs(ev[i] - ev[best]) <= 1e-9 * scale;
      const bool conjugate = std::abs(ev[i] - std::conj(ev[best])) <= 1e-9 * scale && ev[best].imag() != 0.0;
      if (tie && !same && !conjugate)
        fail(ErrorKind::DegenerateSpectrum, "several eigenvalues share the most negative real part");
    }
    x0 = es.eigenvectors().col(best).real();
    if (!(x0.norm() > 0.0)) x0 = es.eigenvectors().col(best).imag();
  }
  if (x0.size() != system.dim) fail(ErrorKind::DimensionMismatch, "target vector has wrong dimension");
  const double nrm = x0.norm();
  if (!(nrm > 0.0)) fail(ErrorKind::DomainError, "target vector vanishes");
  x0 /= nrm;
  return integrate_from(system, t_far, x0, stop, options);
}

// ---------------------------------------------------------------- mode systems

LinearOdeSystem build_scalar_mode_system(const ModelSpace& model, double mu, double lambda) {
  return build_scalar_mode_system(model, mu, lambda, model.factor().scal());
}

LinearOdeSystem build_scalar_mode_system(const ModelSpace& model, double mu, double lambda, double scal_N) {
  if (!(mu >= 0.0) || !(lambda >= 0.0)) fail(ErrorKind::DomainError, "mode eigenvalues must be >= 0");
  const double a = model.a_m();
  const double s = asymptotic_scal(model, scal_N);
  const double k = model.k();
  const double c = model.c();
  LinearOdeSystem sys;
  sys.dim = 2;
  sys.t0 = model.profile().a();
  sys.J = Mat::Zero(2, 2);
  sys.J(0, 1) = 1.0;
  sys.J(1, 0) = mu + s / a;
  sys.J(1, 1) = -k * c;
  sys.G = [model, a, s, k, c, lambda, scal_N](double r) {
    Mat g = Mat::Zero(2, 2);
    g(1, 0) = (scalar_curvature(model, r, scal_N) - s) / a + lambda * model.profile().inverse_square(r);
    g(1, 1) = k * (c - model.profile().log_derivative(r));
    return g;
  };
  return sys;
}

double scalar_mode_rate(const ModelSpace& model, double mu, double scal_N) {
  const double k = model.k();
  const double c = model.c();
  const double arg = 0.25 * k * k * c * c + mu + asymptotic_scal(model, scal_N) / model.a_m();
  return -0.5 * k * c - (arg > 0.0 ? std::sqrt(arg) : 0.0);
}

Mat dirac_A(double lambda) {
  Mat A = Mat::Zero(4, 4);
  A(0, 1) = A(1, 0) = lambda;
  A(2, 3) = A(3, 2) = -lambda;
  return A;
}

Mat dirac_B() {
  Mat B = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) B(i, 3 - i) = 1.0;
  return B;
}

LinearOdeSystem build_dirac_mode_system(const ModelSpace& model, double lambda, double rho, bool allow_general_rho) {
  const double k = model.k();
  if (!allow_general_rho && std::abs(rho * rho - 0.25 * k * k) > 1e-12 * (1.0 + k * k))
    fail(ErrorKind::ModeSelectionViolation, "fiber Dirac eigenvalue must satisfy rho^2 = k^2/4");
  const double c = model.c();
  LinearOdeSystem sys;
  sys.dim = 4;
  sys.t0 = model.profile().a();
  sys.J = dirac_A(lambda) - 0.5 * k * c * Mat::Identity(4, 4);
  const Mat B = dirac_B();
  sys.G = [model, k, c, rho, B](double r) {
    Mat g = 0.5 * k * (c - model.profile().log_derivative(r)) * Mat::Identity(4, 4);
    g += rho * model.profile().inverse(r) * B;
    return g;
  };
  return sys;
}

double dirac_mode_rate(const ModelSpace& model, double lambda) { return -0.5 * model.k() * model.c() - std::abs(lambda); }

}  // namespace warpmass
