#pragma once

// Scoring and statistical comparison: error measures with calendar slices,
// pinball scores, calibration counts, interval widths, negative-price
// probabilities and the multivariate Diebold-Mariano test.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "epf/errors.hpp"
#include "epf/postproc.hpp"
#include "epf/stats.hpp"
#include "epf/timeseries.hpp"

namespace epf {

inline double rmse(const std::vector<double>& actual, const std::vector<double>& forecast) {
	if (actual.size() != forecast.size() || actual.empty())
		throw AlignmentError("rmse: series must align");
	double s = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) {
		const double e = actual[i] - forecast[i];
		s += e * e;
	}
	return std::sqrt(s / static_cast<double>(actual.size()));
}

inline double mae(const std::vector<double>& actual, const std::vector<double>& forecast) {
	if (actual.size() != forecast.size() || actual.empty())
		throw AlignmentError("mae: series must align");
	double s = 0.0;
	for (std::size_t i = 0; i < actual.size(); ++i) s += std::fabs(actual[i] - forecast[i]);
	return s / static_cast<double>(actual.size());
}

/// Mean pinball loss per quantile level.
inline std::vector<double> pinball_score(const std::vector<double>& actual,
                                         const std::vector<std::vector<double>>& quantile_forecasts,
                                         const std::vector<double>& q_grid) {
	if (actual.size() != quantile_forecasts.size())
		throw AlignmentError("pinball: one quantile row per observation required");
	std::vector<double> out(q_grid.size(), 0.0);
	for (std::size_t i = 0; i < actual.size(); ++i) {
		if (quantile_forecasts[i].size() != q_grid.size())
			throw AlignmentError("pinball: quantile row does not match the grid");
		for (std::size_t qi = 0; qi < q_grid.size(); ++qi)
			out[qi] += pinball_loss(actual[i] - quantile_forecasts[i][qi], q_grid[qi]);
	}
	for (double& v : out) v /= actual.empty() ? 1.0 : static_cast<double>(actual.size());
	return out;
}

/// Counts actuals per bin between adjacent predicted quantiles. With a
/// 19-level grid this yields the 20-bin calibration histogram; outer bins
/// catch everything below the lowest and at or above the highest quantile.
inline std::vector<std::int64_t> coverage_histogram(
    const std::vector<double>& actual, const std::vector<std::vector<double>>& quantile_forecasts) {
	if (actual.size() != quantile_forecasts.size())
		throw AlignmentError("coverage: one quantile row per observation required");
	if (actual.empty()) return {};
	const std::size_t levels = quantile_forecasts.front().size();
	std::vector<std::int64_t> bins(levels + 1, 0);
	for (std::size_t i = 0; i < actual.size(); ++i) {
		const auto& qs = quantile_forecasts[i];
		std::size_t b = 0;
		while (b < levels && actual[i] >= qs[b]) ++b;
		++bins[b];
	}
	return bins;
}

enum class DmNorm { L1, L2 };

struct DmOutcome {
	double statistic = 0.0;
	double p_value = 1.0;
	bool zero_variance = false;
	int n_days = 0;
};

/// Multivariate Diebold-Mariano test on daily loss differentials. The
/// one-sided alternative is that model b is more accurate than model a.
inline DmOutcome dm_test(const std::vector<std::array<double, 24>>& errors_a,
                         const std::vector<std::array<double, 24>>& errors_b,
                         DmNorm norm = DmNorm::L1) {
	if (errors_a.size() != errors_b.size())
		throw AlignmentError("dm_test: day ranges must align");
	const int n = static_cast<int>(errors_a.size());
	if (n < 30) throw TooFewDays("dm_test: need at least 30 common days");
	std::vector<double> delta(n);
	auto day_norm = [&](const std::array<double, 24>& e) {
		double s = 0.0;
		for (double v : e) s += norm == DmNorm::L1 ? std::fabs(v) : v * v;
		return norm == DmNorm::L1 ? s : std::sqrt(s);
	};
	for (int d = 0; d < n; ++d) delta[d] = day_norm(errors_a[d]) - day_norm(errors_b[d]);
	DmOutcome out;
	out.n_days = n;
	const double m = mean(delta);
	const double var = variance_population(delta);
	if (var <= 0.0) {
		out.zero_variance = true;
		out.statistic = 0.0;
		out.p_value = 1.0;
		return out;
	}
	out.statistic = std::sqrt(static_cast<double>(n)) * m / std::sqrt(var);
	out.p_value = 1.0 - normal_cdf(out.statistic);
	return out;
}

// ---------------------------------------------------------------------------
// Full report over an evaluation range.
// ---------------------------------------------------------------------------

struct ErrorStats {
	double rmse = 0.0;
	double mae = 0.0;
	std::int64_t hours = 0;
};

struct EvalReport {
	ErrorStats overall;
	std::map<int, ErrorStats> by_year;
	ErrorStats peak, offpeak;                      // base = overall
	std::array<ErrorStats, 5> by_price_quantile{}; // 20 % groups of actual prices
	std::array<double, 5> price_group_bounds{};    // upper bounds of groups 0..3 plus max

	std::vector<double> q_grid;
	std::vector<double> pinball_by_q;
	std::vector<std::int64_t> coverage;          // all hours
	std::vector<std::int64_t> coverage_peak;
	std::vector<std::int64_t> coverage_offpeak;

	std::array<std::vector<double>, 24> width_by_hour; // q95-q05 samples per hour of day
	std::array<double, 192> width_by_how{};            // mean width per hour of week
	std::array<std::int64_t, 192> how_counts{};
	std::array<double, 192> neg_prob_by_how{};         // mean negative-price probability
};

/// One evaluated hour: actual price, point forecast and (optionally) the
/// probabilistic forecast columns for that hour.
struct EvalHour {
	std::int64_t day = 0;
	int hour = 1; // 1..24
	double actual = 0.0;
	double point = 0.0;
	std::vector<double> quantiles; // empty when no probabilistic forecast
};

inline EvalReport slice_report(const std::vector<EvalHour>& hours, const Calendar& calendar,
                               const std::vector<double>& q_grid) {
	if (hours.empty()) throw AlignmentError("slice_report: nothing to evaluate");
	EvalReport rep;
	rep.q_grid = q_grid;

	auto accumulate = [](ErrorStats& st, double err) {
		st.rmse += err * err;
		st.mae += std::fabs(err);
		st.hours += 1;
	};
	auto finish = [](ErrorStats& st) {
		if (st.hours == 0) return;
		st.rmse = std::sqrt(st.rmse / static_cast<double>(st.hours));
		st.mae /= static_cast<double>(st.hours);
	};

	// price-quantile group bounds from the empirical distribution of actuals
	std::vector<double> actuals;
	actuals.reserve(hours.size());
	for (const auto& h : hours) actuals.push_back(h.actual);
	for (int g = 0; g < 4; ++g)
		rep.price_group_bounds[g] = quantile(actuals, 0.2 * static_cast<double>(g + 1));
	rep.price_group_bounds[4] = *std::max_element(actuals.begin(), actuals.end());

	std::vector<double> act_for_pinball;
	std::vector<std::vector<double>> q_for_pinball;
	std::vector<double> act_peak, act_off;
	std::vector<std::vector<double>> q_peak, q_off;

	for (const auto& h : hours) {
		const double err = h.actual - h.point;
		const CalendarFlags flags = calendar.flags_of(h.day);
		accumulate(rep.overall, err);
		accumulate(rep.by_year[calendar.year_of(h.day)], err);
		const bool peak = is_peak_hour(h.hour, flags);
		accumulate(peak ? rep.peak : rep.offpeak, err);

		int group = 0;
		while (group < 4 && h.actual > rep.price_group_bounds[group]) ++group;
		accumulate(rep.by_price_quantile[group], err);

		const int how = hour_of_week({h.day, h.hour}, flags);
		if (!h.quantiles.empty()) {
			if (h.quantiles.size() != q_grid.size())
				throw AlignmentError("slice_report: quantile row does not match the grid");
			act_for_pinball.push_back(h.actual);
			q_for_pinball.push_back(h.quantiles);
			(peak ? act_peak : act_off).push_back(h.actual);
			(peak ? q_peak : q_off).push_back(h.quantiles);
			const double width = h.quantiles.back() - h.quantiles.front();
			rep.width_by_hour[h.hour - 1].push_back(width);
			rep.width_by_how[how - 1] += width;

			ProbabilisticForecast pf;
			pf.q_grid = q_grid;
			pf.quantiles[0] = h.quantiles;
			rep.neg_prob_by_how[how - 1] += negative_price_probability(pf, 1);
			rep.how_counts[how - 1] += 1;
		}
	}
	finish(rep.overall);
	for (auto& [year, st] : rep.by_year) finish(st);
	finish(rep.peak);
	finish(rep.offpeak);
	for (auto& st : rep.by_price_quantile) finish(st);

	if (!act_for_pinball.empty()) {
		rep.pinball_by_q = pinball_score(act_for_pinball, q_for_pinball, q_grid);
		rep.coverage = coverage_histogram(act_for_pinball, q_for_pinball);
		rep.coverage_peak = coverage_histogram(act_peak, q_peak);
		rep.coverage_offpeak = coverage_histogram(act_off, q_off);
	}
	for (int i = 0; i < 192; ++i) {
		if (rep.how_counts[i] == 0) continue;
		rep.width_by_how[i] /= static_cast<double>(rep.how_counts[i]);
		rep.neg_prob_by_how[i] /= static_cast<double>(rep.how_counts[i]);
	}
	return rep;
}

} // namespace epf
