#pragma once

#include <vector>

#include <Eigen/Dense>

namespace warpmass {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

const GaussRule& gauss_legendre(int n);

// Appends the n-point rule mapped to [a, b].
void append_gauss_panel(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

// Least-squares solution with column pivoting.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn);

}  // namespace warpmass

#include "warpmass/parallel_impl.hpp"
