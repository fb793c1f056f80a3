#include "warpmass/yamabe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "warpmass/error.hpp"
#include "warpmass/product_curvature.hpp"
#include "warpmass/quadrature.hpp"
#include "warpmass/spectra.hpp"

namespace warpmass {

double q_star_sphere(int m) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  return m * (m - 1.0) * std::pow(sphere_volume(m), 2.0 / m);
}

double scaling_reference(int m, double c) {
  if (!(c > 0.0)) fail(ErrorKind::DomainError, "c must be positive");
  return std::pow(c, 2.0 / m) * q_star_sphere(m);
}

// ---------------------------------------------------------------- test functions

RadialTestFunction RadialTestFunction::h_radial(Profile profile, double support, std::vector<double> kinks,
                                                double scale) {
  RadialTestFunction f;
  f.shape_ = TestShape::HRadial;
  f.profile_ = std::move(profile);
  f.support_ = support;
  f.kinks_ = std::move(kinks);
  f.scale_ = scale;
  return f;
}

RadialTestFunction RadialTestFunction::pole_radial(Profile profile, double support, std::vector<double> kinks,
                                                   double scale) {
  RadialTestFunction f = h_radial(std::move(profile), support, std::move(kinks), scale);
  f.shape_ = TestShape::PoleRadial;
  return f;
}

RadialTestFunction RadialTestFunction::general(Field field, double support, std::vector<double> kinks, double scale) {
  RadialTestFunction f;
  f.shape_ = TestShape::General;
  f.field_ = std::move(field);
  f.support_ = support;
  f.kinks_ = std::move(kinks);
  f.scale_ = scale;
  return f;
}

TestJet RadialTestFunction::jet(double t, double r) const {
  TestJet j;
  switch (shape_) {
    case TestShape::HRadial:
      if (r < support_) profile_(r, j.u, j.u_r);
      break;
    case TestShape::PoleRadial: {
      const double rho = std::hypot(t, r);
      if (rho < support_) {
        double du = 0.0;
        profile_(rho, j.u, du);
        if (rho > 0.0) {
          j.u_t = du * t / rho;
          j.u_r = du * r / rho;
        }
      }
      break;
    }
    case TestShape::General:
      if (r < support_) j = field_(t, r);
      break;
  }
  j.u *= factor_;
  j.u_t *= factor_;
  j.u_r *= factor_;
  return j;
}

RadialTestFunction RadialTestFunction::scaled(double factor) const {
  if (!(factor > 0.0)) fail(ErrorKind::DomainError, "scale factor must be positive");
  RadialTestFunction f = *this;
  f.factor_ *= factor;
  return f;
}

RadialTestFunction euclidean_bubble(int m, double truncation) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  if (!(truncation > 0.0)) fail(ErrorKind::DomainError, "truncation radius must be positive");
  const double e = 0.5 * (2.0 - m);
  const double floor = std::pow(1.0 + truncation * truncation, e);
  auto profile = [m, e, floor](double r, double& u, double& du) {
    const double q = 1.0 + r * r;
    u = std::pow(q, e) - floor;
    du = (2.0 - m) * r * std::pow(q, e - 1.0);
  };
  return RadialTestFunction::h_radial(profile, truncation, {}, 1.0);
}

// ---------------------------------------------------------------- quadrature

namespace {

struct Sums {
  double num = 0.0;
  double den = 0.0;  // integral of |u|^p
};

// Panel breakpoints on [start, end]: graded toward 0 at the given scale, split at kinks, with adjacent
// breakpoints in ratio <= 2 and panel length <= max_len.
std::vector<double> radial_breaks(double scale, const std::vector<double>& kinks, double start, double end,
                                  double max_len) {
  std::vector<double> pts{start, end};
  for (double k : kinks)
    if (k > start && k < end) pts.push_back(k);
  for (double s = scale * std::ldexp(1.0, -8); s < end; s *= 2.0)
    if (s > start) pts.push_back(s);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> out{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = out.back();
    const double b = pts[i];
    int pieces = 1;
    if (a > 0.0 && b / a > 2.0) pieces = static_cast<int>(std::ceil(std::log2(b / a)));
    std::vector<double> sub;
    for (int j = 1; j <= pieces; ++j) sub.push_back(j == pieces ? b : a * std::pow(b / a, static_cast<double>(j) / pieces));
    double prev = a;
    for (double q : sub) {
      const int n = std::max(1, static_cast<int>(std::ceil((q - prev) / max_len)));
      for (int j = 1; j <= n; ++j) out.push_back(j == n ? q : prev + (q - prev) * j / n);
      prev = q;
    }
  }
  return out;
}

class Integrator {
 public:
  Integrator(const ModelSpace& model, const RadialTestFunction& u) : model_(model), u_(u) {
    if (model.n() > 0 && !model.factor().is_round_sphere())
      fail(ErrorKind::UnsupportedNonRadial, "quotients need N to be a point or a round sphere");
    a_ = model.a_m();
    p_ = model.p();
    if (model.n() > 0) {
      kappa_ = model.factor().sphere_kappa();
      T_ = std::numbers::pi / std::sqrt(kappa_);
      vol_N_ = sphere_volume(model.n()) * std::pow(kappa_, -0.5 * model.n());
      om_N_ = sphere_volume(model.n() - 1);
    }
    om_k_ = sphere_volume(model.k());
    start_ = model.profile().a();
    if (u.shape() != TestShape::HRadial && start_ != 0.0)
      fail(ErrorKind::InvalidModel, "pole-centered test functions need a profile starting at r = 0");
    if (!(u.support() > start_)) fail(ErrorKind::DomainError, "test function support is empty");
  }

  Sums run(int order) const {
    if (model_.n() == 0 || u_.shape() == TestShape::HRadial) return run_1d(order);
    return run_2d(order);
  }

 private:
  double radial_weight(double r) const { return om_k_ * std::pow(model_.profile().f(r), model_.k()); }
  double sphere_weight(double t) const {
    if (model_.n() == 1) return om_N_;
    const double sk = std::sqrt(kappa_);
    return om_N_ * std::pow(std::sin(sk * t) / sk, model_.n() - 1);
  }

  void accumulate(Sums& s, double w, double r, const TestJet& j) const {
    const double scal = scalar_curvature(model_, r);
    s.num += w * (a_ * (j.u_t * j.u_t + j.u_r * j.u_r) + scal * j.u * j.u);
    s.den += w * std::pow(std::abs(j.u), p_);
  }

  Sums run_1d(int order) const {
    const double factor = (model_.n() > 0) ? vol_N_ : 1.0;
    const double end = u_.support();
    const auto br = radial_breaks(u_.scale(), u_.kinks(), start_, end, 1.0);
    std::vector<double> x, w;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) append_gauss_panel(order, br[i], br[i + 1], x, w);
    Sums s;
    for (std::size_t i = 0; i < x.size(); ++i) {
      TestJet j = u_.jet(0.0, x[i]);
      if (u_.shape() == TestShape::HRadial) j.u_t = 0.0;
      accumulate(s, factor * w[i] * radial_weight(x[i]), x[i], j);
    }
    return s;
  }

  Sums run_2d(int order) const {
    const double R = u_.support();
    std::vector<double> phi_breaks{0.0, std::atan2(T_, R), 0.5 * std::numbers::pi};
    if (u_.shape() == TestShape::PoleRadial && R > T_) phi_breaks.push_back(std::asin(T_ / R));
    std::sort(phi_breaks.begin(), phi_breaks.end());
    std::vector<double> px, pw;
    for (std::size_t i = 0; i + 1 < phi_breaks.size(); ++i) {
      const double a = phi_breaks[i], b = phi_breaks[i + 1];
      if (!(b > a)) continue;
      const int panels = angular_panels_;
      for (int j = 0; j < panels; ++j)
        append_gauss_panel(order, a + (b - a) * j / panels, a + (b - a) * (j + 1) / panels, px, pw);
    }
    Sums s;
    std::vector<double> rx, rw;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double sp = std::sin(px[i]), cp = std::cos(px[i]);
      double end = std::min(sp > 0.0 ? T_ / sp : INFINITY, cp > 0.0 ? R / cp : INFINITY);
      if (u_.shape() == TestShape::PoleRadial) end = std::min(end, R);
      const auto br = radial_breaks(u_.scale(), u_.kinks(), 0.0, end, 1.0);
      rx.clear();
      rw.clear();
      for (std::size_t q = 0; q + 1 < br.size(); ++q) append_gauss_panel(order, br[q], br[q + 1], rx, rw);
      for (std::size_t q = 0; q < rx.size(); ++q) {
        const double t = rx[q] * sp, r = rx[q] * cp;
        const TestJet j = u_.jet(t, r);
        if (j.u == 0.0 && j.u_t == 0.0 && j.u_r == 0.0) continue;
        const double w = pw[i] * rw[q] * rx[q] * sphere_weight(t) * radial_weight(r);
        accumulate(s, w, r, j);
      }
    }
    return s;
  }

 public:
  int angular_panels_ = 8;

 private:
  const ModelSpace& model_;
  const RadialTestFunction& u_;
  double a_ = 0.0, p_ = 0.0, kappa_ = 1.0, T_ = 0.0, vol_N_ = 1.0, om_N_ = 1.0, om_k_ = 1.0, start_ = 0.0;
};

QuotientReport make_report(const Sums& s, double p, int m) {
  if (!(s.den > 0.0)) fail(ErrorKind::ZeroNormOnWindow, "test function vanishes");
  QuotientReport rep;
  rep.numerator = s.num;
  rep.denominator = std::pow(s.den, 2.0 / p);
  rep.quotient = rep.numerator / rep.denominator;
  rep.reference = q_star_sphere(m);
  rep.strict_gap = (rep.reference - rep.quotient) / rep.reference;
  return rep;
}

template <class Eval>
QuotientReport converge(Eval&& eval, const QuadratureOptions& opt) {
  if (opt.initial_order < 1 || opt.max_order < opt.initial_order)
    fail(ErrorKind::DomainError, "invalid quadrature orders");
  QuotientReport prev = eval(opt.initial_order);
  prev.order = opt.initial_order;
  double change = INFINITY;
  for (int order = 2 * opt.initial_order; order <= opt.max_order; order *= 2) {
    QuotientReport cur = eval(order);
    change = std::abs(cur.quotient - prev.quotient) / std::abs(cur.quotient);
    cur.order = order;
    cur.convergence = change;
    if (change < opt.rel_tol) return cur;
    prev = cur;
  }
  fail(ErrorKind::QuadratureNotConverged,
       "quotient changed by " + std::to_string(change) + " at order " + std::to_string(prev.order));
}

}  // namespace

QuotientReport quotient(const ModelSpace& model, const RadialTestFunction& u, const QuadratureOptions& options) {
  Integrator integ(model, u);
  integ.angular_panels_ = std::max(1, options.angular_panels);
  const double p = model.p();
  const int m = model.m();
  return converge([&](int order) { return make_report(integ.run(order), p, m); }, options);
}

QuotientReport sphere_constant_quotient(int m, const QuadratureOptions& options) {
  if (m < 3) fail(ErrorKind::InvalidDimension, "m must be >= 3");
  const double p = critical_exponent(m);
  const double om = sphere_volume(m - 1);
  auto eval = [&](int order) {
    std::vector<double> x, w;
    for (int j = 0; j < 8; ++j)
      append_gauss_panel(order, std::numbers::pi * j / 8.0, std::numbers::pi * (j + 1) / 8.0, x, w);
    Sums s;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dv = om * std::pow(std::sin(x[i]), m - 1) * w[i];
      s.num += dv * m * (m - 1.0);
      s.den += dv;
    }
    return make_report(s, p, m);
  };
  return converge(eval, options);
}

// ---------------------------------------------------------------- Green sampler

struct GreenSampler::Impl {
  struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
      return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ull ^ k.second);
    }
  };
  mutable std::mutex mutex;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, TestJet, KeyHash> cache;
};

GreenSampler::GreenSampler(const GreenField& field) : field_(field), impl_(std::make_shared<Impl>()) {}

TestJet GreenSampler::jet(double t, double r) const {
  const auto key = std::make_pair(std::bit_cast<std::uint64_t>(t), std::bit_cast<std::uint64_t>(r));
  {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end()) return it->second;
  }
  const double sk = std::sqrt(field_.table().kappa());
  const double theta = field_.table().model().n() == 0 ? 0.0 : sk * t;
  const GreenJet g = field_.jet(theta, r);
  const TestJet j{g.value, sk * g.d_theta, g.d_r};
  std::lock_guard<std::mutex> lock(impl_->mutex);
  impl_->cache.emplace(key, j);
  return j;
}

std::size_t GreenSampler::cache_size() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->cache.size();
}

// ---------------------------------------------------------------- Schoen test function

namespace {

struct Bubble {
  int m = 4;
  double eps = 1.0;
  double p_n = 0.0;  // Schouten tensor on N directions
  double p_h = 0.0;  // Schouten tensor on H directions
  bool corrected = true;

  TestJet operator()(double t, double r) const {
    const double rho = std::hypot(t, r);
    double phi = 1.0, phi_t = 0.0, phi_r = 0.0;
    double s = rho, s_t = rho > 0.0 ? t / rho : 0.0, s_r = rho > 0.0 ? r / rho : 1.0;
    if (corrected) {
      const double q = p_n * t * t + p_h * r * r;
      phi = 1.0 + 0.25 * (m - 2.0) * q;
      phi_t = 0.5 * (m - 2.0) * p_n * t;
      phi_r = 0.5 * (m - 2.0) * p_h * r;
      s = rho * (1.0 + q / 6.0);
      s_t = s_t * (1.0 + q / 6.0) + rho * p_n * t / 3.0;
      s_r = s_r * (1.0 + q / 6.0) + rho * p_h * r / 3.0;
    }
    const double amp = std::pow(eps, 0.5 * (m - 2.0));
    const double base = eps * eps + s * s;
    const double b = amp * std::pow(base, 0.5 * (2.0 - m));
    const double db = -(m - 2.0) * s * amp * std::pow(base, -0.5 * m);
    return TestJet{phi * b, phi_t * b + phi * db * s_t, phi_r * b + phi * db * s_r};
  }
};

}  // namespace

RadialTestFunction schoen_test(const ModelSpace& model, std::shared_ptr<const GreenSampler> green,
                               const MassEstimate& mass, const SchoenParams& params, SchoenDiagnostics* diagnostics) {
  if (!green) fail(ErrorKind::DomainError, "Green sampler is required");
  if (!(params.eps > 0.0) || !(params.rho0 > 0.0) || !(params.rho1 > params.rho0))
    fail(ErrorKind::DomainError, "need eps > 0 and 0 < rho0 < rho1");
  if (!(params.cutoff > 0.0 && params.cutoff < 1.0)) fail(ErrorKind::DomainError, "cutoff must lie in (0, 1)");
  if (!(mass.mass_term - mass.uncertainty > 0.0))
    fail(ErrorKind::MassNotPositive, "mass estimate is not positive beyond its uncertainty");
  const int n = model.n();
  const int m = model.m();
  const GreenModeTable& table = green->field().table();
  if (table.model().m() != m || table.model().n() != n || table.model().c() != model.c())
    fail(ErrorKind::DimensionMismatch, "Green table belongs to a different model");
  const double kappa = table.kappa();
  if (n > 0 && params.rho1 > 0.5 * std::numbers::pi / std::sqrt(kappa))
    fail(ErrorKind::DomainError, "rho1 must stay below half the distance to the antipode");

  Bubble bubble;
  bubble.m = m;
  bubble.eps = params.eps;
  bubble.corrected = params.normal_correction;
  {
    std::vector<ConstantCurvatureFactor> factors;
    if (n > 0) factors.push_back(ConstantCurvatureFactor::make(n, kappa));
    factors.push_back(ConstantCurvatureFactor::make(model.k() + 1, -model.c() * model.c()));
    const Eigen::MatrixXd P = schouten(product_curvature(factors));
    bubble.p_n = n > 0 ? P(0, 0) : 0.0;
    bubble.p_h = P(n, n);
  }

  // Gluing circle rho = rho1.
  const int samples = n == 0 ? 1 : std::max(2, params.gluing_samples);
  std::vector<double> gam(samples), bub(samples);
  double gmax = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double phi = samples == 1 ? 0.0 : 0.5 * std::numbers::pi * i / (samples - 1.0);
    const double t = params.rho1 * std::sin(phi), r = params.rho1 * std::cos(phi);
    gam[i] = green->jet(t, r).u;
    bub[i] = bubble(t, r).u;
    if (!(gam[i] > 0.0)) fail(ErrorKind::GluingMismatch, "Green function is not positive on the gluing circle");
    gmax = std::max(gmax, gam[i]);
  }
  const double gcut = params.cutoff * gmax;
  double mean_b = 0.0, mean_g = 0.0;
  for (int i = 0; i < samples; ++i) {
    mean_b += bub[i];
    mean_g += gam[i] - gcut;
  }
  const double delta0 = mean_b / mean_g;
  double mismatch = 0.0;
  for (int i = 0; i < samples; ++i) mismatch = std::max(mismatch, std::abs(delta0 * (gam[i] - gcut) / bub[i] - 1.0));
  if (mismatch > params.mismatch_tolerance)
    fail(ErrorKind::GluingMismatch, "bubble and Green function differ by " + std::to_string(mismatch) +
                                        " on the gluing circle");

  // Support: Gamma(0, r) = Gamma_cut along the H-axis, where Gamma is largest at fixed r.
  double lo = params.rho1;
  double hi = table.modes().front().r_hi * 0.999;
  if (green->jet(0.0, hi).u > gcut) fail(ErrorKind::TruncationError, "Green table too short for the cutoff");
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (green->jet(0.0, mid).u > gcut ? lo : hi) = mid;
  }
  const double support = hi;

  if (diagnostics) *diagnostics = SchoenDiagnostics{delta0, gcut, support, mismatch};

  const double rho0 = params.rho0, rho1 = params.rho1;
  auto field = [bubble, green, delta0, gcut, rho0, rho1](double t, double r) {
    const double rho = std::hypot(t, r);
    if (rho <= rho0) return bubble(t, r);
    auto outer = [&]() {
      TestJet g = green->jet(t, r);
      if (g.u <= gcut) return TestJet{};
      return TestJet{delta0 * (g.u - gcut), delta0 * g.u_t, delta0 * g.u_r};
    };
    if (rho >= rho1) return outer();
    const TestJet b = bubble(t, r);
    const TestJet g = outer();
    const double w = (rho1 - rho) / (rho1 - rho0);
    const double w_t = -t / (rho * (rho1 - rho0));
    const double w_r = -r / (rho * (rho1 - rho0));
    return TestJet{w * b.u + (1.0 - w) * g.u, w_t * (b.u - g.u) + w * b.u_t + (1.0 - w) * g.u_t,
                   w_r * (b.u - g.u) + w * b.u_r + (1.0 - w) * g.u_r};
  };
  return RadialTestFunction::general(field, support, {rho0, rho1}, params.eps);
}

std::vector<double> default_eps_grid() {
  std::vector<double> out;
  for (int j = 3; j <= 12; ++j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

SweepReport schoen_sweep(const ModelSpace& model, std::shared_ptr<const GreenSampler> green, const MassEstimate& mass,
                         const SchoenParams& base, const std::vector<double>& eps_grid,
                         const QuadratureOptions& options) {
  SweepReport rep;
  rep.reference = q_star_sphere(model.m());
  for (double eps : eps_grid) {
    SweepEntry e;
    e.eps = eps;
    SchoenParams p = base;
    p.eps = eps;
    try {
      const RadialTestFunction u = schoen_test(model, green, mass, p, &e.diagnostics);
      e.report = quotient(model, u, options);
      e.ok = true;
      if (!rep.min_quotient || e.report.quotient < *rep.min_quotient) {
        rep.min_quotient = e.report.quotient;
        rep.min_eps = eps;
      }
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::MassNotPositive) throw;
      e.error = err.what();
    }
    rep.entries.push_back(std::move(e));
  }
  if (rep.min_quotient) {
    rep.relative_gap = (rep.reference - *rep.min_quotient) / rep.reference;
    rep.strictly_below = *rep.min_quotient < rep.reference;
  }
  return rep;
}

}  // namespace warpmass
