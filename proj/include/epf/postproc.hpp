#pragma once

// Price-estimator error post-processing: univariate and multivariate ARX
// sub-models on three window lengths, arithmetic combination into the final
// point forecast, and quantile regression averaging over the six sub-model
// forecasts for the probabilistic forecast, split into peak and off-peak.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "epf/density.hpp"
#include "epf/errors.hpp"
#include "epf/linalg.hpp"
#include "epf/optim.hpp"
#include "epf/timeseries.hpp"

namespace epf {

/// Peak hours: 8 a.m. to 8 p.m., Monday to Friday.
inline bool is_peak_hour(int hour, const CalendarFlags& flags) {
	return flags.weekday <= 5 && hour >= 9 && hour <= 20;
}

/// Price-estimator errors with the exogenous drivers, day-aligned.
class PriceErrorPanel {
public:
	PriceErrorPanel() = default;
	PriceErrorPanel(std::int64_t first_day, std::vector<double> eps, std::vector<double> wind,
	                std::vector<CalendarFlags> flags)
	    : first_day_(first_day), eps_(std::move(eps)), wind_(std::move(wind)),
	      flags_(std::move(flags)) {
		if (eps_.size() % 24 != 0 || eps_.size() != wind_.size() ||
		    flags_.size() != eps_.size() / 24)
			throw AlignmentError("panel fields must cover the same whole-day range");
		const std::size_t days = flags_.size();
		min_prev_.resize(days);
		max_prev_.resize(days);
		for (std::size_t d = 0; d < days; ++d) {
			double lo = eps_[d * 24], hi = eps_[d * 24];
			for (int h = 1; h < 24; ++h) {
				lo = std::min(lo, eps_[d * 24 + h]);
				hi = std::max(hi, eps_[d * 24 + h]);
			}
			min_prev_[d] = lo;
			max_prev_[d] = hi;
		}
	}

	std::int64_t first_day() const { return first_day_; }
	std::int64_t last_day() const { return first_day_ + n_days() - 1; }
	std::int64_t n_days() const { return static_cast<std::int64_t>(flags_.size()); }

	double eps(std::int64_t day, int hour) const { return eps_[index(day, hour)]; }
	double wind(std::int64_t day, int hour) const { return wind_[index(day, hour)]; }
	const CalendarFlags& flags(std::int64_t day) const {
		return flags_.at(static_cast<std::size_t>(day - first_day_));
	}
	double eps_min_of(std::int64_t day) const {
		return min_prev_.at(static_cast<std::size_t>(day - first_day_));
	}
	double eps_max_of(std::int64_t day) const {
		return max_prev_.at(static_cast<std::size_t>(day - first_day_));
	}

	std::size_t index(std::int64_t day, int hour) const {
		const std::int64_t k = (day - first_day_) * 24 + hour - 1;
		if (k < 0 || k >= static_cast<std::int64_t>(eps_.size()))
			throw OutOfRange("panel lookup outside range");
		return static_cast<std::size_t>(k);
	}

private:
	std::int64_t first_day_ = 0;
	std::vector<double> eps_;
	std::vector<double> wind_;
	std::vector<CalendarFlags> flags_;
	std::vector<double> min_prev_, max_prev_;
};

/// Exogenous data of the forecast target day.
struct TargetDayExog {
	std::array<double, 24> wind{};
	CalendarFlags flags;
};

struct UvArxParams {
	// endogenous: lags 1, 2 (hourly), 24 (daily), 168 (weekly) and the
	// one-hour-lagged innovation
	double phi0 = 0.0, phi1 = 0.0, phi2 = 0.0, phi3 = 0.0, phi4 = 0.0, phi5 = 0.0;
	// exogenous: previous-day min/max error, holiday dummy, wind forecast
	double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0, omega4 = 0.0;
	double sigma2 = 0.0;
	bool converged = true;
};

struct MvHourParams {
	double phi0 = 0.0, phi1 = 0.0, phi2 = 0.0;
	double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0, omega4 = 0.0;
	double sigma2 = 0.0;
	bool degenerate = false;
};

struct MvArxParams {
	std::array<MvHourParams, 24> hours;
};

namespace detail {

// row range with all lags available, clamped to the panel
inline std::pair<std::int64_t, std::int64_t> uv_window(const PriceErrorPanel& panel,
                                                       int window_weeks, std::int64_t end_day) {
	const std::int64_t lo = std::max(panel.first_day() + 7,
	                                 end_day - static_cast<std::int64_t>(window_weeks) * 7 + 1);
	if (end_day > panel.last_day() || lo > end_day - 9)
		throw OutOfRange("panel too short for the requested fit window");
	return {lo, end_day};
}

} // namespace detail

/// Conditional-least-squares fit of the hourly-resolution model. The lagged
/// innovation coefficient is profiled by a one-dimensional search; all other
/// coefficients drop out as filtered least squares.
inline UvArxParams fit_uv(const PriceErrorPanel& panel, int window_weeks, std::int64_t end_day) {
	const auto [day_lo, day_hi] = detail::uv_window(panel, window_weeks, end_day);
	const std::size_t n = static_cast<std::size_t>((day_hi - day_lo + 1) * 24);
	constexpr std::size_t k = 9; // intercept + 4 eps lags + 4 exogenous
	std::vector<double> x(n * k), y(n);
	std::size_t r = 0;
	for (std::int64_t d = day_lo; d <= day_hi; ++d) {
		for (int h = 1; h <= 24; ++h, ++r) {
			auto lag = [&](int hours_back) {
				const std::int64_t t = (d - panel.first_day()) * 24 + (h - 1) - hours_back;
				return panel.eps(panel.first_day() + t / 24, static_cast<int>(t % 24) + 1);
			};
			y[r] = panel.eps(d, h);
			double* row = &x[r * k];
			row[0] = 1.0;
			row[1] = lag(1);
			row[2] = lag(2);
			row[3] = lag(24);
			row[4] = lag(168);
			row[5] = panel.eps_min_of(d - 1);
			row[6] = panel.eps_max_of(d - 1);
			row[7] = panel.flags(d).is_holiday ? 1.0 : 0.0;
			row[8] = panel.wind(d, h);
		}
	}

	// keep independent columns only (a window may contain no holidays)
	std::vector<int> kept = detail::independent_columns(x, n, k);
	auto css_for = [&](double phi5, std::vector<double>* beta_out) {
		std::vector<double> fy(n), fx(n * kept.size());
		double prev_y = 0.0;
		std::vector<double> prev_x(kept.size(), 0.0);
		for (std::size_t i = 0; i < n; ++i) {
			fy[i] = y[i] - phi5 * prev_y;
			prev_y = fy[i];
			for (std::size_t a = 0; a < kept.size(); ++a) {
				fx[i * kept.size() + a] = x[i * k + kept[a]] - phi5 * prev_x[a];
				prev_x[a] = fx[i * kept.size() + a];
			}
		}
		std::vector<double> beta = ols(fx, fy, kept.size());
		double css = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			double fit = 0.0;
			for (std::size_t a = 0; a < kept.size(); ++a) fit += fx[i * kept.size() + a] * beta[a];
			const double e = fy[i] - fit;
			css += e * e;
		}
		if (beta_out) *beta_out = std::move(beta);
		return css;
	};

	OptimResult opt = minimize_scalar([&](double p) { return css_for(p, nullptr); }, -0.98, 0.98);
	std::vector<double> beta;
	const double css = css_for(opt.x[0], &beta);

	UvArxParams p;
	std::array<double*, 9> slots{&p.phi0, &p.phi1, &p.phi2, &p.phi3, &p.phi4,
	                             &p.omega1, &p.omega2, &p.omega3, &p.omega4};
	for (std::size_t a = 0; a < kept.size(); ++a) *slots[kept[a]] = beta[a];
	p.phi5 = opt.x[0];
	p.sigma2 = css / static_cast<double>(n);
	p.converged = opt.converged;
	return p;
}

namespace detail {

inline double uv_mean(const UvArxParams& p, double e1, double e2, double e24, double e168,
                      double emin, double emax, double hol, double wind, double psi1) {
	return p.phi0 + p.phi1 * e1 + p.phi2 * e2 + p.phi3 * e24 + p.phi4 * e168 + p.phi5 * psi1 +
	       p.omega1 * emin + p.omega2 * emax + p.omega3 * hol + p.omega4 * wind;
}

} // namespace detail

/// Recursive 24-step forecast for the day after `end_day`; within-day lags
/// use their own forecasts and future innovations are zero.
inline std::array<double, 24> forecast_uv(const UvArxParams& p, const PriceErrorPanel& panel,
                                          std::int64_t end_day, const TargetDayExog& target) {
	if (end_day > panel.last_day() || end_day - 7 < panel.first_day())
		throw OutOfRange("forecast_uv: need at least a week of history before the target");
	// absolute panel hour, zero before the panel starts
	auto panel_at = [&](std::int64_t t) {
		if (t < 0) return 0.0;
		return panel.eps(panel.first_day() + t / 24, static_cast<int>(t % 24) + 1);
	};
	// rebuild innovations over the trailing history so psi of the last
	// in-sample hour is available to the first forecast step
	const std::int64_t hist_lo = std::max(panel.first_day() + 1, end_day - 56);
	double psi_prev = 0.0;
	for (std::int64_t d = hist_lo; d <= end_day; ++d) {
		for (int h = 1; h <= 24; ++h) {
			const std::int64_t t = (d - panel.first_day()) * 24 + h - 1;
			const double mean = detail::uv_mean(
			    p, panel_at(t - 1), panel_at(t - 2), panel_at(t - 24), panel_at(t - 168),
			    panel.eps_min_of(d - 1), panel.eps_max_of(d - 1),
			    panel.flags(d).is_holiday ? 1.0 : 0.0, panel.wind(d, h), psi_prev);
			psi_prev = panel.eps(d, h) - mean;
		}
	}

	std::array<double, 24> out{};
	const double emin = panel.eps_min_of(end_day);
	const double emax = panel.eps_max_of(end_day);
	const double hol = target.flags.is_holiday ? 1.0 : 0.0;
	const std::int64_t t0 = (end_day + 1 - panel.first_day()) * 24; // first target hour
	auto past = [&](int h, int back) {
		const int idx = h - 1 - back; // within the forecast day
		if (idx >= 0) return out[idx];
		return panel_at(t0 + h - 1 - back);
	};
	for (int h = 1; h <= 24; ++h) {
		const double psi1 = h == 1 ? psi_prev : 0.0;
		out[h - 1] = detail::uv_mean(p, past(h, 1), past(h, 2), past(h, 24), past(h, 168), emin,
		                             emax, hol, target.wind[h - 1], psi1);
	}
	return out;
}

/// One least-squares fit per hour of the day on same-hour daily lags.
inline MvArxParams fit_mv(const PriceErrorPanel& panel, int window_weeks, std::int64_t end_day) {
	const auto [day_lo, day_hi] = detail::uv_window(panel, window_weeks, end_day);
	MvArxParams out;
	constexpr std::size_t k = 7;
	for (int h = 1; h <= 24; ++h) {
		const std::size_t n = static_cast<std::size_t>(day_hi - day_lo + 1);
		std::vector<double> x(n * k), y(n);
		std::size_t r = 0;
		for (std::int64_t d = day_lo; d <= day_hi; ++d, ++r) {
			y[r] = panel.eps(d, h);
			double* row = &x[r * k];
			row[0] = 1.0;
			row[1] = panel.eps(d - 1, h);
			row[2] = panel.eps(d - 7, h);
			row[3] = panel.eps_min_of(d - 1);
			row[4] = panel.eps_max_of(d - 1);
			row[5] = panel.flags(d).is_holiday ? 1.0 : 0.0;
			row[6] = panel.wind(d, h);
		}
		std::vector<int> kept = detail::independent_columns(x, n, k);
		MvHourParams& hp = out.hours[h - 1];
		hp.degenerate = kept.size() < k;
		std::vector<double> xk(n * kept.size());
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t a = 0; a < kept.size(); ++a) xk[i * kept.size() + a] = x[i * k + kept[a]];
		std::vector<double> beta = ols(xk, y, kept.size());
		std::array<double*, 7> slots{&hp.phi0, &hp.phi1, &hp.phi2,
		                             &hp.omega1, &hp.omega2, &hp.omega3, &hp.omega4};
		for (std::size_t a = 0; a < kept.size(); ++a) *slots[kept[a]] = beta[a];
		double rss = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			double fit = 0.0;
			for (std::size_t a = 0; a < kept.size(); ++a) fit += xk[i * kept.size() + a] * beta[a];
			rss += (y[i] - fit) * (y[i] - fit);
		}
		hp.sigma2 = rss / static_cast<double>(n);
	}
	return out;
}

/// One-step forecast per hour for the day after `end_day`.
inline std::array<double, 24> forecast_mv(const MvArxParams& p, const PriceErrorPanel& panel,
                                          std::int64_t end_day, const TargetDayExog& target) {
	if (end_day > panel.last_day() || end_day - 6 < panel.first_day())
		throw OutOfRange("forecast_mv: need at least a week of history before the target");
	std::array<double, 24> out{};
	for (int h = 1; h <= 24; ++h) {
		const auto& hp = p.hours[h - 1];
		out[h - 1] = hp.phi0 + hp.phi1 * panel.eps(end_day, h) + hp.phi2 * panel.eps(end_day - 6, h) +
		             hp.omega1 * panel.eps_min_of(end_day) + hp.omega2 * panel.eps_max_of(end_day) +
		             hp.omega3 * (target.flags.is_holiday ? 1.0 : 0.0) +
		             hp.omega4 * target.wind[h - 1];
	}
	return out;
}

enum class SubModel { Uv44, Uv48, Uv52, Mv44, Mv48, Mv52 };
constexpr std::array<SubModel, 6> kSubModels{SubModel::Uv44, SubModel::Uv48, SubModel::Uv52,
                                             SubModel::Mv44, SubModel::Mv48, SubModel::Mv52};

inline const char* submodel_name(SubModel m) {
	switch (m) {
		case SubModel::Uv44: return "uv44";
		case SubModel::Uv48: return "uv48";
		case SubModel::Uv52: return "uv52";
		case SubModel::Mv44: return "mv44";
		case SubModel::Mv48: return "mv48";
		default: return "mv52";
	}
}

/// Six per-hour price forecasts (estimator plus predicted error).
struct SubModelForecasts {
	std::array<std::array<double, 24>, 6> price{};
	std::array<bool, 6> present{};

	const std::array<double, 24>& of(SubModel m) const { return price[static_cast<int>(m)]; }
	void set(SubModel m, const std::array<double, 24>& v) {
		price[static_cast<int>(m)] = v;
		present[static_cast<int>(m)] = true;
	}
};

/// Arithmetic average of the six sub-model price forecasts.
inline std::array<double, 24> combine_point(const SubModelForecasts& six) {
	for (bool p : six.present)
		if (!p) throw MissingSubModel("all six sub-model forecasts are required");
	std::array<double, 24> out{};
	for (int h = 0; h < 24; ++h) {
		double s = 0.0;
		for (int m = 0; m < 6; ++m) s += six.price[m][h];
		out[h] = s / 6.0;
	}
	return out;
}

inline std::vector<double> default_quantile_grid() {
	std::vector<double> q;
	for (int i = 1; i <= 19; ++i) q.push_back(0.05 * i);
	return q;
}

/// Training row for the quantile regression averaging stage.
struct QraRow {
	std::array<double, 6> forecasts{};
	double actual = 0.0;
	bool peak = false;
};

enum class Segment { Peak, OffPeak };

/// 7-coefficient quantile regression of actual prices on the six sub-model
/// forecasts, restricted to one daily segment.
inline QuantileModel fit_price_qra(const std::vector<QraRow>& history, double q, Segment segment) {
	std::vector<double> x, y;
	for (const auto& row : history) {
		if ((segment == Segment::Peak) != row.peak) continue;
		x.push_back(1.0);
		for (double f : row.forecasts) x.push_back(f);
		y.push_back(row.actual);
	}
	if (y.size() < 16) throw TooFewDays("quantile regression averaging needs more segment rows");
	return fit_quantile_regression(x, y, 7, q);
}

/// Per-hour monotone quantile grid plus the combined point forecast.
struct ProbabilisticForecast {
	std::vector<double> q_grid = default_quantile_grid();
	std::array<std::vector<double>, 24> quantiles; // per hour, aligned with q_grid
	std::array<double, 24> point{};
	std::array<bool, 24> peak{};
	bool rearranged = false; // some hour needed monotone rearrangement
};

/// Evaluates the per-(quantile, segment) models on the six forecasts and
/// rearranges each hour into monotone order.
inline ProbabilisticForecast predict_probabilistic(
    const std::map<std::pair<int, int>, QuantileModel>& models, // (q index, segment)
    const std::vector<double>& q_grid, const SubModelForecasts& six,
    const CalendarFlags& day_flags) {
	ProbabilisticForecast out;
	out.q_grid = q_grid;
	out.point = combine_point(six);
	for (int h = 1; h <= 24; ++h) {
		out.peak[h - 1] = is_peak_hour(h, day_flags);
		const int seg = out.peak[h - 1] ? 0 : 1;
		std::vector<double> row{1.0};
		for (int m = 0; m < 6; ++m) row.push_back(six.price[m][h - 1]);
		std::vector<double> qs;
		for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
			const auto it = models.find({static_cast<int>(qi), seg});
			if (it == models.end()) throw MissingSubModel("missing quantile model for segment");
			qs.push_back(predict_quantile(it->second, row));
		}
		for (std::size_t i = 1; i < qs.size(); ++i)
			if (qs[i] < qs[i - 1]) out.rearranged = true;
		std::sort(qs.begin(), qs.end());
		out.quantiles[h - 1] = std::move(qs);
	}
	return out;
}

/// P(price < 0) read off the piecewise-linear quantile function; outside the
/// estimated grid the first/last segment is extrapolated and clamped into
/// the outer 5 % band.
inline double negative_price_probability(const ProbabilisticForecast& f, int hour) {
	if (hour < 1 || hour > 24) throw OutOfRange("hour must lie in [1,24]");
	const auto& v = f.quantiles[hour - 1];
	const auto& q = f.q_grid;
	const std::size_t n = v.size();
	if (n == 0) throw OutOfRange("empty quantile grid");
	if (v.front() > 0.0) {
		// below the lowest estimated quantile: linear tail, bounded at zero
		const double slope_span = v.size() > 1 ? v[1] - v[0] : 0.0;
		if (slope_span <= 0.0) return 0.0;
		const double lambda = 1.0 - v[0] / slope_span;
		return q.front() * std::clamp(lambda, 0.0, 1.0);
	}
	if (v.back() <= 0.0) {
		const double slope_span = n > 1 ? v[n - 1] - v[n - 2] : 0.0;
		if (slope_span <= 0.0) return 1.0;
		const double lambda = 1.0 - (0.0 - v[n - 1]) / slope_span;
		return 1.0 - (1.0 - q.back()) * std::clamp(lambda, 0.0, 1.0);
	}
	for (std::size_t i = 1; i < n; ++i) {
		if (v[i] >= 0.0) {
			if (v[i] == v[i - 1]) return q[i];
			const double w = (0.0 - v[i - 1]) / (v[i] - v[i - 1]);
			return q[i - 1] + (q[i] - q[i - 1]) * w;
		}
	}
	return q.back();
}

} // namespace epf
