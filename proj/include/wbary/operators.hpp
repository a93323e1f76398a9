#pragma once

// Matrix-free linear operators, the bilinear saddle objective, its gradient
// operator and the exact duality-gap certificate.
//
// The saddle objective is
//   F(x, y) = (1/m) (d'x + 2 |d|_inf (y'Ax - c'y))
// over x in (simplex_{n^2})^m x simplex_n and y in [-1, 1]^{2mn}, where block i
// of Ax is (rowsums(x_i) - p ; colsums(x_i)) and c = (0, q_1, ..., 0, q_m).

#include <span>

#include "wbary/problem.hpp"

namespace wbary {

/// Row sums followed by column sums of the n x n plan stored in `plan`.
Vector apply_marginals(std::size_t n, std::span<const double> plan);
void apply_marginals(std::size_t n, std::span<const double> plan, std::span<double> out);

/// Transpose of apply_marginals: out(j, k) = y[j] + y[n + k].
Vector apply_marginals_adjoint(std::size_t n, std::span<const double> y);
void apply_marginals_adjoint(std::size_t n, std::span<const double> y, std::span<double> out);

/// Full operator A = (blockdiag(A), E) applied to a primal vector.
DualVector big_operator_apply(const PrimalVector& x);

/// A' y: plan block i is A' y_i, the bary block is -sum_i y_i[0..n).
PrimalVector big_operator_adjoint(const DualVector& y);

/// Stacked vector c = (0_n, q_1, ..., 0_n, q_m).
DualVector stacked_measures(const BarycenterProblem& prob);

double objective_F(const PrimalVector& x, const DualVector& y, const BarycenterProblem& prob);

struct SaddleGradient {
  PrimalVector gx;  // (1/m)(d + 2|d|_inf A'y)
  DualVector gy;    // (2|d|_inf/m)(c - Ax)
};

SaddleGradient gradient_operator(const PrimalVector& x, const DualVector& y,
                                 const BarycenterProblem& prob);

/// max over the dual box of F(x, .), attained at the sign vector of Ax - c.
double primal_value(const PrimalVector& x, const BarycenterProblem& prob);

/// min over the primal simplices of F(., y): per-block minimum coefficient.
double dual_value(const DualVector& y, const BarycenterProblem& prob);

/// primal_value(x) - dual_value(y). Nonnegative up to rounding.
double duality_gap(const PrimalVector& x, const DualVector& y, const BarycenterProblem& prob);

/// Constants of the entropy (primal) and half-square (dual) prox setup.
struct ProxGeometry {
  double rx_sq = 0.0;  // 3 m ln n
  double ry_sq = 0.0;  // m n
  double a1 = 0.0;     // 1 / rx_sq
  double a2 = 0.0;     // 1 / ry_sq
};

ProxGeometry make_geometry(std::size_t n, std::size_t m);

/// Primal prox-function: sum_i <x_i, ln x_i> + m <p, ln p> (0 ln 0 = 0).
double primal_prox_function(const PrimalVector& x);

struct BregmanValues {
  double bx = 0.0;
  double by = 0.0;
};

/// B_X(x, x_ref) with the linear correction terms and B_Y(y, y_ref) = |y - y_ref|^2 / 2.
/// Throws DomainError if x_ref vanishes where x is positive.
BregmanValues bregman_divergences(const PrimalVector& x, const DualVector& y,
                                  const PrimalVector& x_ref, const DualVector& y_ref);

}  // namespace wbary
