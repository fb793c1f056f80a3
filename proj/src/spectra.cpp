#include "warpmass/spectra.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "warpmass/error.hpp"

namespace warpmass {

double sphere_volume(int n) {
  if (n < 0) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 0");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double ball_volume(int k) {
  if (k < 0) fail(ErrorKind::InvalidDimension, "ball dimension must be >= 0");
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

SpectrumCatalog::SpectrumCatalog(SpectrumOperator op, int dim, double curvature,
                                 std::vector<EigenvalueEntry> entries)
    : op_(op), dim_(dim), curvature_(curvature), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].multiplicity < 1) fail(ErrorKind::InvalidSpectrum, "multiplicity must be >= 1");
    if (!std::isfinite(entries_[i].value)) fail(ErrorKind::InvalidSpectrum, "non-finite eigenvalue");
    if (i > 0 && !(entries_[i].value > entries_[i - 1].value))
      fail(ErrorKind::InvalidSpectrum, "catalog values must be strictly increasing");
  }
}

double SpectrumCatalog::distinct_value(std::size_t i) const {
  if (i >= entries_.size()) fail(ErrorKind::TruncationExceeded, "index beyond catalog");
  return entries_[i].value;
}

long SpectrumCatalog::multiplicity(std::size_t i) const {
  if (i >= entries_.size()) fail(ErrorKind::TruncationExceeded, "index beyond catalog");
  return entries_[i].multiplicity;
}

long SpectrumCatalog::counted_size() const {
  long total = 0;
  for (const auto& e : entries_) total += e.multiplicity;
  return total;
}

double SpectrumCatalog::counted_value(long j) const {
  if (j < 0) fail(ErrorKind::DomainError, "negative index");
  for (const auto& e : entries_) {
    if (j < e.multiplicity) return e.value;
    j -= e.multiplicity;
  }
  fail(ErrorKind::TruncationExceeded, "index beyond catalog");
}

double SpectrumCatalog::largest() const {
  if (entries_.empty()) fail(ErrorKind::TruncationExceeded, "empty catalog");
  return entries_.back().value;
}

static double binomial(long n, long r) {
  if (r < 0 || n < r) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0)));
}

long sphere_harmonic_dimension(int k, int l) {
  if (k < 1) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 1");
  if (l < 0) return 0;
  if (k == 1) return l == 0 ? 1 : 2;
  return static_cast<long>(binomial(l + k, k) - binomial(l + k - 2, k));
}

SpectrumCatalog sphere_laplace_catalog(int k, double curvature_scale, int count) {
  if (k < 1) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 1");
  if (count < 1) fail(ErrorKind::DomainError, "count must be >= 1");
  if (!(curvature_scale > 0.0)) fail(ErrorKind::DomainError, "curvature scale must be positive");
  std::vector<EigenvalueEntry> entries;
  entries.reserve(count);
  for (int l = 0; l < count; ++l)
    entries.push_back({curvature_scale * l * (l + k - 1.0), sphere_harmonic_dimension(k, l)});
  return SpectrumCatalog(SpectrumOperator::LaplaceSphere, k, curvature_scale, std::move(entries));
}

SpectrumCatalog sphere_dirac_squared_catalog(int k, double curvature_scale, int count) {
  if (k < 1) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 1");
  if (count < 1) fail(ErrorKind::DomainError, "count must be >= 1");
  if (!(curvature_scale > 0.0)) fail(ErrorKind::DomainError, "curvature scale must be positive");
  const double spinor_rank = std::ldexp(1.0, k / 2);
  std::vector<EigenvalueEntry> entries;
  for (int l = 0; l < count; ++l) {
    const double v = 0.5 * k + l;
    const double mult = 2.0 * spinor_rank * binomial(l + k - 1, l);
    entries.push_back({curvature_scale * v * v, static_cast<long>(mult)});
  }
  return SpectrumCatalog(SpectrumOperator::DiracSphereSquared, k, curvature_scale, std::move(entries));
}

double sphere_dirac_bottom(int n, double c) {
  if (n < 1) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 1");
  return 0.5 * n * c;
}

long weyl_count(const SpectrumCatalog& catalog, double x) {
  if (x < 0.0) fail(ErrorKind::DomainError, "x must be >= 0");
  if (catalog.entries().empty() || x > catalog.largest())
    fail(ErrorKind::TruncationExceeded, "x beyond catalog truncation");
  long total = 0;
  for (const auto& e : catalog.entries()) {
    if (e.value > x) break;
    total += e.multiplicity;
  }
  return total;
}

double weyl_constant(int k, double curvature_scale) {
  if (k < 1) fail(ErrorKind::InvalidDimension, "sphere dimension must be >= 1");
  const double vol = sphere_volume(k) * std::pow(curvature_scale, -0.5 * k);
  return ball_volume(k) * vol / std::pow(2.0 * std::numbers::pi, k);
}

SpectrumCatalog explicit_catalog(int dim, const std::vector<EigenvalueEntry>& raw) {
  std::vector<EigenvalueEntry> merged;
  for (const auto& e : raw) {
    if (e.multiplicity < 1) fail(ErrorKind::InvalidSpectrum, "multiplicity must be >= 1");
    if (!std::isfinite(e.value)) fail(ErrorKind::InvalidSpectrum, "non-finite eigenvalue");
    if (e.value < 0.0) fail(ErrorKind::InvalidSpectrum, "Laplace eigenvalues must be >= 0");
    if (!merged.empty()) {
      if (e.value < merged.back().value) fail(ErrorKind::InvalidSpectrum, "eigenvalues must be nondecreasing");
      if (e.value == merged.back().value) {
        merged.back().multiplicity += e.multiplicity;
        continue;
      }
    }
    merged.push_back(e);
  }
  if (merged.empty()) fail(ErrorKind::InvalidSpectrum, "empty spectrum");
  return SpectrumCatalog(SpectrumOperator::ExplicitClosedFactor, dim, 0.0, std::move(merged));
}

SpectrumCatalog parse_spectrum(std::istream& in, int dim) {
  std::vector<EigenvalueEntry> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double value;
    if (!(ls >> value)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        fail(ErrorKind::InvalidSpectrum, "line " + std::to_string(lineno) + ": expected eigenvalue");
      continue;
    }
    double mult = 1.0;
    if (!(ls >> mult)) fail(ErrorKind::InvalidSpectrum, "line " + std::to_string(lineno) + ": expected multiplicity");
    if (mult != std::floor(mult) || mult < 1.0)
      fail(ErrorKind::InvalidSpectrum, "line " + std::to_string(lineno) + ": multiplicity must be a positive integer");
    std::string rest;
    if (ls >> rest) fail(ErrorKind::InvalidSpectrum, "line " + std::to_string(lineno) + ": trailing data");
    raw.push_back({value, static_cast<long>(mult)});
  }
  return explicit_catalog(dim, raw);
}

SpectrumCatalog load_spectrum_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open spectrum file " + path);
  return parse_spectrum(in, dim);
}

SpectrumCatalog fiber_scalar_modes(const SpectrumCatalog& catalog) {
  std::vector<EigenvalueEntry> kept;
  for (const auto& e : catalog.entries())
    if (e.value == 0.0) kept.push_back(e);
  if (kept.empty()) fail(ErrorKind::ModeSelectionViolation, "catalog has no zero mode");
  return SpectrumCatalog(catalog.op(), catalog.dim(), catalog.curvature(), std::move(kept));
}

double fiber_dirac_rho(int k) {
  if (k < 1) fail(ErrorKind::InvalidDimension, "fiber dimension must be >= 1");
  return 0.5 * k;
}

}  // namespace warpmass
