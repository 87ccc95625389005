#pragma once

#include <vector>

#include "phaseret/errors.hpp"

namespace phaseret::metrics {

/// Cyclic Jacobi eigendecomposition of a symmetric n x n matrix (row-major).
/// Returns eigenvalues (ascending) and the matching eigenvectors as rows of
/// `vectors` (vectors[i*n..] is the eigenvector of values[i]).
void symmetric_eigen(const std::vector<double>& a, int n,
                     std::vector<double>& values, std::vector<double>& vectors);

/// Moore-Penrose pseudo-inverse of a symmetric matrix: eigenvalues below
/// rel_tol * max|eig| are treated as zero.
std::vector<double> pinv_symmetric(const std::vector<double>& a, int n,
                                   double rel_tol = 1e-10);

/// x^T M x for symmetric M.
double quad_form(const std::vector<double>& m, const std::vector<double>& x, int n);

}  // namespace phaseret::metrics
