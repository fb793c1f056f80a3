#pragma once

#include <vector>

#include <Eigen/Dense>

namespace warpmass {

struct ConstantCurvatureFactor {
  int dim = 1;
  double kappa = 0.0;

  // Enforces dim >= 1; a one-dimensional factor is flat.
  static ConstantCurvatureFactor make(int dim, double kappa);
};

// (0,4)-tensor in an orthonormal frame, d^4 entries.
class CurvatureTensor {
 public:
  explicit CurvatureTensor(int dim = 0);
  int dim() const { return d_; }
  double& operator()(int a, int b, int c, int d) { return v_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return v_[index(a, b, c, d)]; }
  double max_abs() const;
  CurvatureTensor& operator+=(const CurvatureTensor& o);
  CurvatureTensor& operator*=(double s);

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * d_ + b) * d_ + c) * d_ + d;
  }
  int d_;
  std::vector<double> v_;
};

CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b);
CurvatureTensor operator*(double s, CurvatureTensor a);

// Three-index tensor T_{ijk}.
class Tensor3 {
 public:
  explicit Tensor3(int dim = 0);
  int dim() const { return d_; }
  double& operator()(int i, int j, int k) { return v_[(static_cast<std::size_t>(i) * d_ + j) * d_ + k]; }
  double operator()(int i, int j, int k) const { return v_[(static_cast<std::size_t>(i) * d_ + j) * d_ + k]; }
  double max_abs() const;

 private:
  int d_;
  std::vector<double> v_;
};

CurvatureTensor kulkarni_nomizu(const Eigen::MatrixXd& h, const Eigen::MatrixXd& k);
CurvatureTensor product_curvature(const std::vector<ConstantCurvatureFactor>& factors);
Eigen::MatrixXd product_metric(int dim);

Eigen::MatrixXd ricci(const CurvatureTensor& R);
double scalar(const CurvatureTensor& R);
// (Ric - scal/(2(m-1)) g)/(m-2).
Eigen::MatrixXd schouten(const CurvatureTensor& R);
CurvatureTensor weyl(const CurvatureTensor& R, const Eigen::MatrixXd& g);

struct SymmetryDefects {
  double antisym12 = 0.0;
  double antisym34 = 0.0;
  double pair = 0.0;
  double bianchi = 0.0;
  double max() const;
};
SymmetryDefects symmetry_defects(const CurvatureTensor& R);
// Largest entry over all single metric contractions of W.
double max_trace(const CurvatureTensor& W);

// C_ijk = grad_k P_ij - grad_j P_ik with P = Ric - scal/(2(m-1)) g; grad_ric(i,j,k) = nabla_k Ric_ij.
Tensor3 cotton_from_derivatives(const Tensor3& grad_ric, const Eigen::VectorXd& grad_scal);
// Cotton tensor of R x M^2 at a point where the surface has scalar-curvature gradient grad_scal2.
Tensor3 cotton_line_times_surface(const Eigen::Vector2d& grad_scal2);
// Cotton tensor of a three-dimensional product of constant-curvature factors (identically zero).
Tensor3 cotton(const std::vector<ConstantCurvatureFactor>& factors);

enum class Flatness { ConformallyFlat, NotFlat };
const char* to_string(Flatness f);

struct FlatnessVerdict {
  Flatness predicate = Flatness::NotFlat;
  Flatness numeric = Flatness::NotFlat;
  double max_abs = 0.0;  // sup-norm of Weyl (m >= 4) or Cotton (m = 3)
  bool agree() const { return predicate == numeric; }
};

FlatnessVerdict classify_conformal_flatness(const std::vector<ConstantCurvatureFactor>& factors,
                                            double tolerance = 1e-12);

}  // namespace warpmass
