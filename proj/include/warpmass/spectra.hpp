#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace warpmass {

// Volume of the unit round sphere S^n (n = 0 gives the two-point sphere).
double sphere_volume(int n);
// Volume of the unit ball B^k.
double ball_volume(int k);

struct EigenvalueEntry {
  double value = 0.0;
  long multiplicity = 1;
};

enum class SpectrumOperator { LaplaceSphere, DiracSphereSquared, ExplicitClosedFactor };

// Distinct eigenvalues with multiplicities, strictly increasing.
class SpectrumCatalog {
 public:
  SpectrumCatalog() = default;
  SpectrumCatalog(SpectrumOperator op, int dim, double curvature, std::vector<EigenvalueEntry> entries);

  SpectrumOperator op() const { return op_; }
  int dim() const { return dim_; }
  double curvature() const { return curvature_; }
  const std::vector<EigenvalueEntry>& entries() const { return entries_; }

  // Distinct-indexed view.
  std::size_t truncation_count() const { return entries_.size(); }
  double distinct_value(std::size_t i) const;
  long multiplicity(std::size_t i) const;

  // Multiplicity-counted view: j-th eigenvalue in 0,1,2,... order with repetition.
  long counted_size() const;
  double counted_value(long j) const;

  double largest() const;

 private:
  SpectrumOperator op_ = SpectrumOperator::ExplicitClosedFactor;
  int dim_ = 0;
  double curvature_ = 0.0;
  std::vector<EigenvalueEntry> entries_;
};

// Eigenvalues curvature_scale * l(l+k-1) of the Laplacian on S^k.
SpectrumCatalog sphere_laplace_catalog(int k, double curvature_scale, int count);
// Squared Dirac eigenvalues curvature_scale * (k/2 + l)^2 on S^k. Multiplicities are
// the true spinor multiplicities 2^{floor(k/2)+1} * C(l+k-1, l).
SpectrumCatalog sphere_dirac_squared_catalog(int k, double curvature_scale, int count);
// Bottom of |D| on the round S^n of curvature c^2.
double sphere_dirac_bottom(int n, double c);
// Multiplicity of the degree-l spherical harmonics on S^k.
long sphere_harmonic_dimension(int k, int l);

// Number of eigenvalues <= x counted with multiplicity.
long weyl_count(const SpectrumCatalog& catalog, double x);
// Leading Weyl constant: N(x) ~ C x^{k/2} on S^k of curvature scale (Laplace).
double weyl_constant(int k, double curvature_scale = 1.0);

// Validated explicit catalog; values must be nondecreasing, equal values are merged.
SpectrumCatalog explicit_catalog(int dim, const std::vector<EigenvalueEntry>& raw);
SpectrumCatalog parse_spectrum(std::istream& in, int dim);
SpectrumCatalog load_spectrum_file(const std::string& path, int dim);

// Fiber mode selection for the S^k direction: keeps only the zero eigenvalue.
SpectrumCatalog fiber_scalar_modes(const SpectrumCatalog& catalog);
// Fixed fiber Dirac eigenvalue rho with rho^2 = k^2/4.
double fiber_dirac_rho(int k);

}  // namespace warpmass
