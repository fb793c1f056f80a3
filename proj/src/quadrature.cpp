#include "warpmass/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <gsl/gsl_integration.h>

#include "warpmass/error.hpp"

namespace warpmass {

const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  if (n < 1) fail(ErrorKind::DomainError, "Gauss rule needs at least one node");
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
  if (!table) fail(ErrorKind::DomainError, "cannot allocate Gauss-Legendre table");
  auto rule = std::make_unique<GaussRule>();
  rule->x.resize(n);
  rule->w.resize(n);
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->x[i], &rule->w[i], table);
  gsl_integration_glfixed_table_free(table);
  return *cache.emplace(n, std::move(rule)).first->second;
}

void append_gauss_panel(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  const GaussRule& g = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    x.push_back(mid + half * g.x[i]);
    w.push_back(half * g.w[i]);
  }
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != b.size()) fail(ErrorKind::DimensionMismatch, "least-squares system has inconsistent sizes");
  if (A.rows() < A.cols()) fail(ErrorKind::ShellTooCoarse, "fewer samples than fit parameters");
  // Column scaling keeps the normal structure well conditioned for mixed powers.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::VectorXd x = As.colPivHouseholderQr().solve(b);
  return x.cwiseQuotient(scale);
}

}  // namespace warpmass
