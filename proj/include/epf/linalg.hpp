#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

/// Small dense linear solves used by the least-squares fits. Row-major
/// square systems, partial pivoting; fine for the <= 10-variable normal
/// equations that appear in this project.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
	const std::size_t n = b.size();
	if (a.size() != n * n) throw DimensionMismatch("solve_dense: matrix/vector size mismatch");
	std::vector<std::size_t> piv(n);
	for (std::size_t i = 0; i < n; ++i) piv[i] = i;

	for (std::size_t k = 0; k < n; ++k) {
		std::size_t best = k;
		double best_abs = std::fabs(a[piv[k] * n + k]);
		for (std::size_t i = k + 1; i < n; ++i) {
			double v = std::fabs(a[piv[i] * n + k]);
			if (v > best_abs) {
				best_abs = v;
				best = i;
			}
		}
		if (best_abs < 1e-300) throw NumericalFailure("solve_dense: singular matrix");
		std::swap(piv[k], piv[best]);
		const double pivot = a[piv[k] * n + k];
		for (std::size_t i = k + 1; i < n; ++i) {
			const double f = a[piv[i] * n + k] / pivot;
			if (f == 0.0) continue;
			a[piv[i] * n + k] = 0.0;
			for (std::size_t j = k + 1; j < n; ++j) a[piv[i] * n + j] -= f * a[piv[k] * n + j];
			b[piv[i]] -= f * b[piv[k]];
		}
	}
	std::vector<double> x(n);
	for (std::size_t kk = n; kk-- > 0;) {
		double s = b[piv[kk]];
		for (std::size_t j = kk + 1; j < n; ++j) s -= a[piv[kk] * n + j] * x[j];
		x[kk] = s / a[piv[kk] * n + kk];
	}
	return x;
}

/// Ordinary least squares via normal equations. X is row-major [n x k].
/// Returns the coefficient vector; throws NumericalFailure when X'X is
/// numerically singular.
inline std::vector<double> ols(const std::vector<double>& x, const std::vector<double>& y,
                               std::size_t k) {
	const std::size_t n = y.size();
	if (x.size() != n * k) throw DimensionMismatch("ols: design matrix size mismatch");
	if (n < k) throw DimensionMismatch("ols: fewer rows than coefficients");
	std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
	for (std::size_t i = 0; i < n; ++i) {
		const double* row = &x[i * k];
		for (std::size_t a = 0; a < k; ++a) {
			xty[a] += row[a] * y[i];
			for (std::size_t b = a; b < k; ++b) xtx[a * k + b] += row[a] * row[b];
		}
	}
	for (std::size_t a = 0; a < k; ++a)
		for (std::size_t b = 0; b < a; ++b) xtx[a * k + b] = xtx[b * k + a];
	return solve_dense(std::move(xtx), std::move(xty));
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
	return s;
}

} // namespace epf
