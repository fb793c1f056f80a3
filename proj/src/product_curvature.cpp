#include "warpmass/product_curvature.hpp"

#include <algorithm>
#include <cmath>

#include "warpmass/error.hpp"

namespace warpmass {

ConstantCurvatureFactor ConstantCurvatureFactor::make(int dim, double kappa) {
  if (dim < 1) fail(ErrorKind::InvalidDimension, "factor dimension must be >= 1");
  return ConstantCurvatureFactor{dim, dim == 1 ? 0.0 : kappa};
}

CurvatureTensor::CurvatureTensor(int dim) : d_(dim), v_(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

CurvatureTensor& CurvatureTensor::operator+=(const CurvatureTensor& o) {
  if (o.d_ != d_) fail(ErrorKind::DimensionMismatch, "curvature tensors differ in dimension");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

CurvatureTensor& CurvatureTensor::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
CurvatureTensor operator*(double s, CurvatureTensor a) { return a *= s; }

Tensor3::Tensor3(int dim) : d_(dim), v_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

CurvatureTensor kulkarni_nomizu(const Eigen::MatrixXd& h, const Eigen::MatrixXd& k) {
  if (h.rows() != h.cols() || k.rows() != k.cols() || h.rows() != k.rows())
    fail(ErrorKind::DimensionMismatch, "Kulkarni-Nomizu factors must be square of equal size");
  const int d = static_cast<int>(h.rows());
  CurvatureTensor out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          out(a, b, c, e) = h(a, c) * k(b, e) + h(b, e) * k(a, c) - h(a, e) * k(b, c) - h(b, c) * k(a, e);
  return out;
}

Eigen::MatrixXd product_metric(int dim) { return Eigen::MatrixXd::Identity(dim, dim); }

CurvatureTensor product_curvature(const std::vector<ConstantCurvatureFactor>& factors) {
  int m = 0;
  for (const auto& f : factors) {
    if (f.dim < 1) fail(ErrorKind::InvalidDimension, "factor dimension must be >= 1");
    m += f.dim;
  }
  if (m < 3) fail(ErrorKind::InvalidDimension, "total dimension must be >= 3");
  CurvatureTensor R(m);
  int offset = 0;
  for (const auto& f : factors) {
    const double kappa = f.dim == 1 ? 0.0 : f.kappa;
    Eigen::MatrixXd gi = Eigen::MatrixXd::Zero(m, m);
    gi.block(offset, offset, f.dim, f.dim).setIdentity();
    R += (0.5 * kappa) * kulkarni_nomizu(gi, gi);
    offset += f.dim;
  }
  return R;
}

Eigen::MatrixXd ricci(const CurvatureTensor& R) {
  const int d = R.dim();
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e)
      for (int a = 0; a < d; ++a) ric(b, e) += R(a, b, a, e);
  return ric;
}

double scalar(const CurvatureTensor& R) { return ricci(R).trace(); }

Eigen::MatrixXd schouten(const CurvatureTensor& R) {
  const int m = R.dim();
  if (m < 3) fail(ErrorKind::DimensionTooSmall, "Schouten tensor needs m >= 3");
  const Eigen::MatrixXd ric = ricci(R);
  return (ric - ric.trace() / (2.0 * (m - 1.0)) * Eigen::MatrixXd::Identity(m, m)) / (m - 2.0);
}

CurvatureTensor weyl(const CurvatureTensor& R, const Eigen::MatrixXd& g) {
  const int m = R.dim();
  if (m <= 3) fail(ErrorKind::DimensionTooSmall, "Weyl tensor needs m >= 4");
  if (g.rows() != m || g.cols() != m) fail(ErrorKind::DimensionMismatch, "metric and curvature differ in dimension");
  const Eigen::MatrixXd ric = ricci(R);
  const double s = ric.trace();
  CurvatureTensor W = R;
  W += (s / (2.0 * (m - 1.0) * (m - 2.0))) * kulkarni_nomizu(g, g);
  W += (-1.0 / (m - 2.0)) * kulkarni_nomizu(ric, g);
  return W;
}

double SymmetryDefects::max() const { return std::max({antisym12, antisym34, pair, bianchi}); }

SymmetryDefects symmetry_defects(const CurvatureTensor& R) {
  const int d = R.dim();
  SymmetryDefects s;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          s.antisym12 = std::max(s.antisym12, std::abs(R(a, b, c, e) + R(b, a, c, e)));
          s.antisym34 = std::max(s.antisym34, std::abs(R(a, b, c, e) + R(a, b, e, c)));
          s.pair = std::max(s.pair, std::abs(R(a, b, c, e) - R(c, e, a, b)));
          s.bianchi = std::max(s.bianchi, std::abs(R(a, b, c, e) + R(b, c, a, e) + R(c, a, b, e)));
        }
  return s;
}

double max_trace(const CurvatureTensor& W) {
  const int d = W.dim();
  double out = 0.0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double t13 = 0.0, t14 = 0.0, t23 = 0.0, t24 = 0.0, t12 = 0.0, t34 = 0.0;
      for (int a = 0; a < d; ++a) {
        t13 += W(a, x, a, y);
        t14 += W(a, x, y, a);
        t23 += W(x, a, a, y);
        t24 += W(x, a, y, a);
        t12 += W(a, a, x, y);
        t34 += W(x, y, a, a);
      }
      out = std::max({out, std::abs(t13), std::abs(t14), std::abs(t23), std::abs(t24), std::abs(t12), std::abs(t34)});
    }
  return out;
}

Tensor3 cotton_from_derivatives(const Tensor3& grad_ric, const Eigen::VectorXd& grad_scal) {
  const int m = grad_ric.dim();
  if (m != 3 || grad_scal.size() != 3) fail(ErrorKind::DimensionMismatch, "Cotton tensor needs m = 3");
  auto grad_p = [&](int i, int j, int k) {
    return grad_ric(i, j, k) - (i == j ? grad_scal[k] / (2.0 * (m - 1.0)) : 0.0);
  };
  Tensor3 C(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) C(i, j, k) = grad_p(i, j, k) - grad_p(i, k, j);
  return C;
}

Tensor3 cotton_line_times_surface(const Eigen::Vector2d& grad_scal2) {
  // Frame index 0 is the line; the surface Ricci tensor is (scal_2/2) g_2.
  Tensor3 grad_ric(3);
  Eigen::VectorXd grad_scal = Eigen::VectorXd::Zero(3);
  grad_scal[1] = grad_scal2[0];
  grad_scal[2] = grad_scal2[1];
  for (int i = 1; i < 3; ++i)
    for (int k = 0; k < 3; ++k) grad_ric(i, i, k) = 0.5 * grad_scal[k];
  return cotton_from_derivatives(grad_ric, grad_scal);
}

Tensor3 cotton(const std::vector<ConstantCurvatureFactor>& factors) {
  int m = 0;
  for (const auto& f : factors) m += f.dim;
  if (m != 3) fail(ErrorKind::DimensionMismatch, "Cotton tensor is defined here for m = 3 products");
  // Constant-curvature factors have parallel Ricci tensor and constant scalar curvature.
  return cotton_from_derivatives(Tensor3(3), Eigen::VectorXd::Zero(3));
}

const char* to_string(Flatness f) { return f == Flatness::ConformallyFlat ? "CONFORMALLY_FLAT" : "NOT_FLAT"; }

FlatnessVerdict classify_conformal_flatness(const std::vector<ConstantCurvatureFactor>& factors, double tolerance) {
  if (factors.size() != 2) fail(ErrorKind::InvalidFactorization, "exactly two factors are required");
  const auto f1 = ConstantCurvatureFactor::make(factors[0].dim, factors[0].kappa);
  const auto f2 = ConstantCurvatureFactor::make(factors[1].dim, factors[1].kappa);
  const int m = f1.dim + f2.dim;
  if (m < 3) fail(ErrorKind::InvalidFactorization, "total dimension must be >= 3");
  FlatnessVerdict v;
  const bool flat = std::min(f1.dim, f2.dim) == 1 || f1.kappa == -f2.kappa;
  v.predicate = flat ? Flatness::ConformallyFlat : Flatness::NotFlat;
  if (m >= 4) {
    const CurvatureTensor R = product_curvature({f1, f2});
    v.max_abs = weyl(R, product_metric(m)).max_abs();
  } else {
    v.max_abs = cotton({f1, f2}).max_abs();
  }
  v.numeric = v.max_abs <= tolerance ? Flatness::ConformallyFlat : Flatness::NotFlat;
  return v;
}

}  // namespace warpmass
