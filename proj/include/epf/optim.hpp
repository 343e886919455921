#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace epf {

struct OptimResult {
	std::vector<double> x;
	double value = 0.0;
	int evaluations = 0;
	bool converged = false;
};

/// Nelder-Mead downhill simplex. Derivative-free, deterministic, good enough
/// for the <= 6-dimensional conditional-sum-of-squares profiles fitted here.
inline OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, double step = 0.25,
                               double ftol = 1e-12, int max_eval = 20000) {
	const std::size_t n = x0.size();
	OptimResult res;
	if (n == 0) {
		res.x = x0;
		res.value = f(x0);
		res.evaluations = 1;
		res.converged = true;
		return res;
	}

	std::vector<std::vector<double>> pts(n + 1, x0);
	std::vector<double> fv(n + 1);
	for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
	int evals = 0;
	for (std::size_t i = 0; i <= n; ++i) {
		fv[i] = f(pts[i]);
		++evals;
	}

	auto order = [&]() {
		std::vector<std::size_t> idx(n + 1);
		for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
		std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
		std::vector<std::vector<double>> p2(n + 1);
		std::vector<double> f2(n + 1);
		for (std::size_t i = 0; i <= n; ++i) {
			p2[i] = pts[idx[i]];
			f2[i] = fv[idx[i]];
		}
		pts.swap(p2);
		fv.swap(f2);
	};

	order();
	while (evals < max_eval) {
		if (std::fabs(fv[n] - fv[0]) <= ftol * (std::fabs(fv[0]) + std::fabs(fv[n]) + 1e-30)) {
			res.converged = true;
			break;
		}
		std::vector<double> centroid(n, 0.0);
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

		auto blend = [&](double coef) {
			std::vector<double> p(n);
			for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (pts[n][j] - centroid[j]);
			return p;
		};

		std::vector<double> xr = blend(-1.0);
		double fr = f(xr);
		++evals;
		if (fr < fv[0]) {
			std::vector<double> xe = blend(-2.0);
			double fe = f(xe);
			++evals;
			if (fe < fr) {
				pts[n] = std::move(xe);
				fv[n] = fe;
			} else {
				pts[n] = std::move(xr);
				fv[n] = fr;
			}
		} else if (fr < fv[n - 1]) {
			pts[n] = std::move(xr);
			fv[n] = fr;
		} else {
			const bool outside = fr < fv[n];
			std::vector<double> xc = blend(outside ? -0.5 : 0.5);
			double fc = f(xc);
			++evals;
			if (fc < std::min(fr, fv[n])) {
				pts[n] = std::move(xc);
				fv[n] = fc;
			} else {
				// shrink toward the best vertex
				for (std::size_t i = 1; i <= n; ++i) {
					for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
					fv[i] = f(pts[i]);
					++evals;
				}
			}
		}
		order();
	}

	res.x = pts[0];
	res.value = fv[0];
	res.evaluations = evals;
	return res;
}

/// Nelder-Mead with one polish restart around the first optimum.
inline OptimResult nelder_mead_restarted(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> x0, double step = 0.25,
                                         double ftol = 1e-13, int max_eval = 20000) {
	OptimResult a = nelder_mead(f, std::move(x0), step, ftol, max_eval);
	OptimResult b = nelder_mead(f, a.x, step * 0.1, ftol, max_eval / 2);
	b.evaluations += a.evaluations;
	if (a.value < b.value) {
		b.x = a.x;
		b.value = a.value;
	}
	b.converged = a.converged || b.converged;
	return b;
}

/// Golden-section scan + refinement for smooth one-dimensional profiles.
/// Scans a coarse grid first so narrow basins are not missed.
inline OptimResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                   int grid = 33, int iters = 80) {
	OptimResult res;
	double best_x = lo;
	double best_f = f(lo);
	int evals = 1;
	for (int i = 1; i <= grid; ++i) {
		const double x = lo + (hi - lo) * static_cast<double>(i) / grid;
		const double v = f(x);
		++evals;
		if (v < best_f) {
			best_f = v;
			best_x = x;
		}
	}
	const double span = (hi - lo) / grid;
	double a = std::max(lo, best_x - span);
	double b = std::min(hi, best_x + span);
	const double gr = 0.61803398874989484820;
	double x1 = b - gr * (b - a);
	double x2 = a + gr * (b - a);
	double f1 = f(x1);
	double f2 = f(x2);
	evals += 2;
	for (int i = 0; i < iters && (b - a) > 1e-12; ++i) {
		if (f1 < f2) {
			b = x2;
			x2 = x1;
			f2 = f1;
			x1 = b - gr * (b - a);
			f1 = f(x1);
		} else {
			a = x1;
			x1 = x2;
			f1 = f2;
			x2 = a + gr * (b - a);
			f2 = f(x2);
		}
		++evals;
	}
	const double xm = 0.5 * (a + b);
	const double fm = f(xm);
	++evals;
	res.x = {fm < best_f ? xm : best_x};
	res.value = std::min(fm, best_f);
	res.evaluations = evals;
	res.converged = true;
	return res;
}

} // namespace epf
