#pragma once

// Quantile regression by exact pinball-loss minimisation, posed as an LP and
// handed to the simplex solver, plus the weighted three-scenario set for the
// two-day-ahead load.

#include <cmath>
#include <string>
#include <vector>

#include "epf/errors.hpp"
#include "epf/lp.hpp"
#include "epf/timeseries.hpp"

namespace epf {

struct QuantileModel {
	double q = 0.5;
	std::vector<double> beta;      // intercept first when the design carries one
	std::vector<int> dropped_cols; // removed for rank deficiency, coefficient zeroed
	bool degenerate = false;
	double loss = 0.0; // total in-sample pinball loss at the optimum
};

inline double pinball_loss(double u, double q) { return u * (q - (u < 0.0 ? 1.0 : 0.0)); }

namespace detail {

// Rank screen via pivoted Gram elimination; returns kept column indices.
inline std::vector<int> independent_columns(const std::vector<double>& x, std::size_t n,
                                            std::size_t k) {
	std::vector<double> g(k * k, 0.0);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t a = 0; a < k; ++a)
			for (std::size_t b = 0; b < k; ++b) g[a * k + b] += x[i * k + a] * x[i * k + b];
	std::vector<int> kept;
	std::vector<bool> used(k, false);
	std::vector<double> work = g;
	for (std::size_t step = 0; step < k; ++step) {
		// next pivot: largest remaining diagonal
		int best = -1;
		double best_v = 0.0;
		for (std::size_t j = 0; j < k; ++j) {
			if (used[j]) continue;
			if (work[j * k + j] > best_v) {
				best_v = work[j * k + j];
				best = static_cast<int>(j);
			}
		}
		double scale = 0.0;
		for (std::size_t j = 0; j < k; ++j) scale = std::max(scale, g[j * k + j]);
		if (best < 0 || best_v <= 1e-10 * (1.0 + scale)) break;
		used[best] = true;
		kept.push_back(best);
		const double piv = work[best * k + best];
		for (std::size_t a = 0; a < k; ++a) {
			if (used[a]) continue;
			const double f = work[a * k + best] / piv;
			if (f == 0.0) continue;
			for (std::size_t b = 0; b < k; ++b) work[a * k + b] -= f * work[best * k + b];
		}
	}
	std::sort(kept.begin(), kept.end());
	return kept;
}

} // namespace detail

/// Exact pinball-loss minimiser via the residual-split LP. X is row-major
/// [n x k]. Rank-deficient designs are repaired by dropping dependent
/// columns (their coefficients are zero and listed in dropped_cols).
inline QuantileModel fit_quantile_regression(const std::vector<double>& x,
                                             const std::vector<double>& y, std::size_t k, double q,
                                             const SolverOptions& solver_opt = {}) {
	const std::size_t n = y.size();
	if (q <= 0.0 || q >= 1.0) throw OutOfRange("quantile level must be inside (0,1)");
	if (x.size() != n * k) throw DimensionMismatch("design matrix size mismatch");
	if (n < k + 1) throw DimensionMismatch("need at least k+1 observations");

	QuantileModel model;
	model.q = q;
	model.beta.assign(k, 0.0);

	std::vector<int> kept = detail::independent_columns(x, n, k);
	if (kept.size() < k) {
		model.degenerate = true;
		std::vector<bool> is_kept(k, false);
		for (int j : kept) is_kept[j] = true;
		for (std::size_t j = 0; j < k; ++j)
			if (!is_kept[j]) model.dropped_cols.push_back(static_cast<int>(j));
	}

	LinearProgram lp;
	std::vector<int> beta_var(kept.size());
	for (std::size_t j = 0; j < kept.size(); ++j)
		beta_var[j] = lp.add_var("b" + std::to_string(kept[j]), -kInf, kInf, 0.0);
	std::vector<int> over(n), under(n);
	for (std::size_t i = 0; i < n; ++i) {
		over[i] = lp.add_var("u" + std::to_string(i), 0.0, kInf, q);
		under[i] = lp.add_var("v" + std::to_string(i), 0.0, kInf, 1.0 - q);
	}
	for (std::size_t i = 0; i < n; ++i) {
		std::vector<std::pair<int, double>> terms;
		for (std::size_t j = 0; j < kept.size(); ++j) {
			const double v = x[i * k + kept[j]];
			if (v != 0.0) terms.push_back({beta_var[j], v});
		}
		terms.push_back({over[i], 1.0});
		terms.push_back({under[i], -1.0});
		lp.add_eq(std::move(terms), y[i]);
	}

	LPSolution sol = solve(lp, solver_opt);
	if (sol.status != LPStatus::Optimal)
		throw SolveFailed(std::string("quantile regression LP ") + status_name(sol.status));
	for (std::size_t j = 0; j < kept.size(); ++j) model.beta[kept[j]] = sol.x[beta_var[j]];
	model.loss = sol.objective_value;
	return model;
}

inline double predict_quantile(const QuantileModel& model, const std::vector<double>& x) {
	if (x.size() != model.beta.size())
		throw DimensionMismatch("regressor row length does not match coefficients");
	double s = 0.0;
	for (std::size_t j = 0; j < x.size(); ++j) s += model.beta[j] * x[j];
	return s;
}

/// Low / expected / high scenario triple for one day of load, with the
/// integration-rule weights.
struct ScenarioSet {
	HourlySeries low;
	HourlySeries expected;
	HourlySeries high;
	double w_low = 1.0 / 6.0;
	double w_expected = 2.0 / 3.0;
	double w_high = 1.0 / 6.0;
	bool crossing_repaired = false;
};

struct ScenarioWeights {
	double low = 1.0 / 6.0;
	double expected = 2.0 / 3.0;
	double high = 1.0 / 6.0;
};

/// Evaluates the 5 % / 95 % models on [1, point] per hour. A crossing hour
/// (low > high) is repaired by swapping the two values and flagged.
inline ScenarioSet build_scenarios(const HourlySeries& point2da, const QuantileModel& q05,
                                   const QuantileModel& q95,
                                   const ScenarioWeights& weights = {}) {
	std::vector<double> lo(point2da.size()), hi(point2da.size());
	bool repaired = false;
	for (std::size_t h = 0; h < point2da.size(); ++h) {
		double a = predict_quantile(q05, {1.0, point2da[h]});
		double b = predict_quantile(q95, {1.0, point2da[h]});
		if (a > b) {
			std::swap(a, b);
			repaired = true;
		}
		lo[h] = a;
		hi[h] = b;
	}
	std::vector<CalendarFlags> flags;
	for (std::int64_t d = point2da.first_day(); d < point2da.first_day() + point2da.n_days(); ++d)
		flags.push_back(point2da.flags_for_day(d));
	ScenarioSet out{HourlySeries(point2da.start(), std::move(lo), flags, point2da.unit()),
	                point2da,
	                HourlySeries(point2da.start(), std::move(hi), flags, point2da.unit()),
	                weights.low,
	                weights.expected,
	                weights.high,
	                repaired};
	const double sum = out.w_low + out.w_expected + out.w_high;
	if (std::fabs(sum - 1.0) > 1e-9) throw ModelError("scenario weights must sum to 1");
	return out;
}

} // namespace epf
