#pragma once

// Load forecast improvement: decompose the TSO forecast error into a weekly
// seasonal profile plus a multiplicative seasonal ARMA remainder, forecast
// both, and add the error forecast back onto the TSO forecast. A SARMAX
// variant with a lag-168 exogenous regressor produces the two-day-ahead
// load forecast feeding the dispatch scenarios.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "epf/errors.hpp"
#include "epf/linalg.hpp"
#include "epf/optim.hpp"
#include "epf/rng.hpp"
#include "epf/timeseries.hpp"

namespace epf {

struct LoadRecord {
	HourlySeries actual;       // MWh
	HourlySeries tso_forecast; // MWh
};

/// actual - tso_forecast, elementwise on identical ranges.
inline HourlySeries forecast_error(const LoadRecord& rec) {
	return rec.actual - rec.tso_forecast;
}

/// Mean forecast error per (hour, weekday); the static weekly season.
class SeasonalProfile {
public:
	double at(int hour, int weekday) const {
		if (hour < 1 || hour > 24 || weekday < 1 || weekday > 7)
			throw OutOfRange("SeasonalProfile lookup outside (hour, weekday) grid");
		return hs_[hour - 1][weekday - 1];
	}
	double& cell(int hour, int weekday) { return hs_[hour - 1][weekday - 1]; }

private:
	std::array<std::array<double, 7>, 24> hs_{};
};

/// Averages errors into the 24x7 grid over the trailing `window` of the
/// series. Every cell must receive at least one observation.
inline SeasonalProfile fit_seasonal_profile(const HourlySeries& errors, const WindowSpec& window) {
	validate_window(window);
	SeasonalProfile p;
	std::array<std::array<double, 7>, 24> sum{};
	std::array<std::array<int, 7>, 24> cnt{};
	const std::int64_t horizon = static_cast<std::int64_t>(window.length_days) * 24;
	const std::size_t first =
	    errors.size() > static_cast<std::size_t>(horizon) ? errors.size() - horizon : 0;
	for (std::size_t k = first; k < errors.size(); ++k) {
		const HourStamp s = errors.stamp_at(k);
		const int wd = errors.flags_for_day(s.day).weekday;
		sum[s.hour - 1][wd - 1] += errors[k];
		cnt[s.hour - 1][wd - 1] += 1;
	}
	for (int h = 1; h <= 24; ++h) {
		for (int wd = 1; wd <= 7; ++wd) {
			if (cnt[h - 1][wd - 1] == 0)
				throw EmptyCell("no observation for hour " + std::to_string(h) + ", weekday " +
				                std::to_string(wd));
			p.cell(h, wd) = sum[h - 1][wd - 1] / cnt[h - 1][wd - 1];
		}
	}
	return p;
}

/// Profile lookup along a range of stamps.
inline HourlySeries seasonal_component(const SeasonalProfile& profile, HourStamp start,
                                       std::size_t n_hours,
                                       const std::vector<CalendarFlags>& day_flags,
                                       Unit unit = Unit::MWh) {
	std::vector<double> vals(n_hours);
	for (std::size_t k = 0; k < n_hours; ++k) {
		const HourStamp s = advance(start, static_cast<std::int64_t>(k));
		const CalendarFlags& f = day_flags.at(static_cast<std::size_t>(s.day - start.day));
		vals[k] = profile.at(s.hour, f.weekday);
	}
	return HourlySeries(start, std::move(vals), day_flags, unit);
}

inline HourlySeries seasonal_component(const SeasonalProfile& profile, const HourlySeries& like) {
	std::vector<CalendarFlags> flags;
	for (std::int64_t d = like.first_day(); d < like.first_day() + like.n_days(); ++d)
		flags.push_back(like.flags_for_day(d));
	return seasonal_component(profile, like.start(), like.size(), flags, like.unit());
}

/// Multiplicative seasonal ARMA with hourly lag 1 and seasonal lag 24.
struct SarmaParams {
	double phi0 = 0.0;
	double phi1 = 0.0;
	double phi24 = 0.0;
	double omega1 = 0.0;
	double omega24 = 0.0;
	double sigma2 = 0.0;
	bool converged = true;
	bool stationary = true;
};

/// SarmaParams plus the coefficient on the lag-168 exogenous regressor.
struct SarmaxParams : SarmaParams {
	double phi168 = 0.0;
};

namespace detail {

// One step of the seasonal ARMA mean recursion; pre-sample values are zero.
// lag(v, t, k) reads v[t-k] or 0.
template <typename Get>
inline double sarma_mean(const SarmaParams& p, std::size_t t, Get value,
                         const std::vector<double>& psi) {
	auto lag_v = [&](std::size_t k) { return t >= k ? value(t - k) : 0.0; };
	auto lag_p = [&](std::size_t k) { return t >= k ? psi[t - k] : 0.0; };
	return p.phi0 + p.phi1 * lag_v(1) + p.phi24 * lag_v(24) - p.phi1 * p.phi24 * lag_v(25) +
	       p.omega1 * lag_p(1) + p.omega24 * lag_p(24) + p.omega1 * p.omega24 * lag_p(25);
}

} // namespace detail

/// Innovations recovered from the observed remainder series by inverting the
/// seasonal ARMA recursion with zero pre-sample values.
inline std::vector<double> sarma_innovations(const SarmaParams& params,
                                             const std::vector<double>& rc) {
	std::vector<double> psi(rc.size(), 0.0);
	for (std::size_t t = 0; t < rc.size(); ++t) {
		const double mean = detail::sarma_mean(params, t, [&](std::size_t k) { return rc[k]; }, psi);
		psi[t] = rc[t] - mean;
	}
	return psi;
}

inline HourlySeries sarma_innovations(const SarmaParams& params, const HourlySeries& rc) {
	if (rc.size() < 26) throw OutOfRange("remainder series must cover at least 26 hours");
	std::vector<double> psi = sarma_innovations(params, rc.values());
	std::vector<CalendarFlags> flags;
	for (std::int64_t d = rc.first_day(); d < rc.first_day() + rc.n_days(); ++d)
		flags.push_back(rc.flags_for_day(d));
	return HourlySeries(rc.start(), std::move(psi), std::move(flags), rc.unit());
}

/// Forward simulation of the seasonal ARMA given innovations.
inline std::vector<double> simulate_sarma(const SarmaParams& params,
                                          const std::vector<double>& psi) {
	std::vector<double> rc(psi.size(), 0.0);
	for (std::size_t t = 0; t < psi.size(); ++t) {
		rc[t] = detail::sarma_mean(params, t, [&](std::size_t k) { return rc[k]; }, psi) + psi[t];
	}
	return rc;
}

namespace detail {

// Conditional sum of squares for given AR/MA coefficients with the intercept
// profiled out exactly: psi(theta) = base - phi0 * drift where both satisfy
// the same MA recursion. Returns the optimal phi0 and the innovations.
struct SarmaProfile {
	double phi0 = 0.0;
	double css = 0.0;
	double sigma2 = 0.0;
};

inline SarmaProfile sarma_css_profiled(const std::vector<double>& rc, double phi1, double phi24,
                                       double om1, double om24, std::vector<double>* psi_out = nullptr) {
	const std::size_t n = rc.size();
	std::vector<double> base(n), drift(n);
	auto lag = [&](const std::vector<double>& v, std::size_t t, std::size_t k) {
		return t >= k ? v[t - k] : 0.0;
	};
	for (std::size_t t = 0; t < n; ++t) {
		const double ar = phi1 * lag(rc, t, 1) + phi24 * lag(rc, t, 24) - phi1 * phi24 * lag(rc, t, 25);
		base[t] = rc[t] - ar - om1 * lag(base, t, 1) - om24 * lag(base, t, 24) -
		          om1 * om24 * lag(base, t, 25);
		drift[t] = 1.0 - om1 * lag(drift, t, 1) - om24 * lag(drift, t, 24) -
		           om1 * om24 * lag(drift, t, 25);
	}
	double bd = 0.0, dd = 0.0;
	for (std::size_t t = 0; t < n; ++t) {
		bd += base[t] * drift[t];
		dd += drift[t] * drift[t];
	}
	SarmaProfile out;
	out.phi0 = dd > 0.0 ? bd / dd : 0.0;
	double css = 0.0;
	for (std::size_t t = 0; t < n; ++t) {
		const double e = base[t] - out.phi0 * drift[t];
		css += e * e;
		if (psi_out) (*psi_out)[t] = e;
	}
	out.css = css;
	out.sigma2 = n > 0 ? css / static_cast<double>(n) : 0.0;
	return out;
}

} // namespace detail

/// Conditional-sum-of-squares fit. AR and MA coefficients are optimised in a
/// tanh reparameterisation so the search stays inside the stationary and
/// invertible region; the intercept is profiled out exactly.
inline SarmaParams fit_sarma(const std::vector<double>& rc, int max_eval = 4000) {
	SarmaParams p;
	if (rc.size() < 26) throw OutOfRange("fit_sarma: series too short");
	bool all_zero = true;
	for (double v : rc)
		if (v != 0.0) {
			all_zero = false;
			break;
		}
	if (all_zero) return p; // degenerate series: everything stays zero

	// A cancelling AR/MA pair leaves the CSS nearly flat and sample noise
	// rewards wandering along that ridge. A penalty of a few dozen sigma^2
	// dominates the O(sigma^2) ridge noise yet stays far below the O(n
	// sigma^2) identification curvature, so real coefficients shift by well
	// under 1e-2 while white-noise fits collapse to zero.
	double m0 = 0.0;
	for (double v : rc) m0 += v;
	m0 /= static_cast<double>(rc.size());
	double css0 = 0.0;
	for (double v : rc) css0 += (v - m0) * (v - m0);
	const double ridge = 32.0 * css0 / static_cast<double>(rc.size());
	auto objective = [&](const std::vector<double>& u) {
		const double a = std::tanh(u[0]), b = std::tanh(u[1]), c = std::tanh(u[2]),
		             d = std::tanh(u[3]);
		return detail::sarma_css_profiled(rc, a, b, c, d).css +
		       ridge * (a * a + b * b + c * c + d * d);
	};
	OptimResult opt = nelder_mead_restarted(objective, {0.0, 0.0, 0.0, 0.0}, 0.25, 1e-13, max_eval);
	p.phi1 = std::tanh(opt.x[0]);
	p.phi24 = std::tanh(opt.x[1]);
	p.omega1 = std::tanh(opt.x[2]);
	p.omega24 = std::tanh(opt.x[3]);
	auto prof = detail::sarma_css_profiled(rc, p.phi1, p.phi24, p.omega1, p.omega24);
	p.phi0 = prof.phi0;
	p.sigma2 = prof.sigma2;
	p.converged = opt.converged;
	p.stationary = std::fabs(p.phi1) < 1.0 && std::fabs(p.phi24) < 1.0;
	return p;
}

inline SarmaParams fit_sarma(const HourlySeries& rc, int max_eval = 4000) {
	if (rc.size() < 30u * 24u) throw OutOfRange("fit_sarma: need at least 30 days");
	return fit_sarma(rc.values(), max_eval);
}

/// Recursive h-step forecast of the remainder with future innovations zero
/// and future values replaced by their own forecasts.
inline std::vector<double> sarma_forecast(const SarmaParams& params,
                                          const std::vector<double>& rc_history,
                                          std::size_t n_ahead) {
	const std::size_t n = rc_history.size();
	std::vector<double> ext(rc_history);
	std::vector<double> psi = sarma_innovations(params, rc_history);
	psi.resize(n + n_ahead, 0.0); // future innovations set to zero
	ext.resize(n + n_ahead, 0.0);
	for (std::size_t t = n; t < n + n_ahead; ++t)
		ext[t] = detail::sarma_mean(params, t, [&](std::size_t k) { return ext[k]; }, psi);
	return std::vector<double>(ext.begin() + n, ext.end());
}

/// Error forecast for the 24 hours following the history: remainder forecast
/// plus the seasonal profile of the target day. `target_flags` are the
/// calendar flags of the forecast day(s).
inline HourlySeries forecast_error_hours(const SarmaParams& params, const SeasonalProfile& profile,
                                         const HourlySeries& eps_history,
                                         const std::vector<CalendarFlags>& target_flags,
                                         std::size_t n_hours) {
	if (eps_history.size() < 26) throw OutOfRange("error history must cover at least 26 hours");
	// remainder = error minus static season over the history
	const HourlySeries sc_hist = seasonal_component(profile, eps_history);
	std::vector<double> rc(eps_history.size());
	for (std::size_t k = 0; k < rc.size(); ++k) rc[k] = eps_history[k] - sc_hist[k];

	const std::vector<double> rc_fc = sarma_forecast(params, rc, n_hours);
	const HourStamp start = advance(eps_history.end(), 1);
	std::vector<double> vals(n_hours);
	for (std::size_t k = 0; k < n_hours; ++k) {
		const HourStamp s = advance(start, static_cast<std::int64_t>(k));
		const CalendarFlags& f = target_flags.at(static_cast<std::size_t>(s.day - start.day));
		vals[k] = rc_fc[k] + profile.at(s.hour, f.weekday);
	}
	return HourlySeries(start, std::move(vals), target_flags, eps_history.unit());
}

inline HourlySeries forecast_error_24h(const SarmaParams& params, const SeasonalProfile& profile,
                                       const HourlySeries& eps_history,
                                       const std::vector<CalendarFlags>& target_flags) {
	return forecast_error_hours(params, profile, eps_history, target_flags, 24);
}

/// l_hat_star = l_hat + eps_hat.
inline HourlySeries improve_forecast(const HourlySeries& tso, const HourlySeries& eps_hat) {
	return tso + eps_hat;
}

// ---------------------------------------------------------------------------
// Two-day-ahead model on the TSO forecast series itself, with the forecast
// one week earlier as exogenous regressor.
// ---------------------------------------------------------------------------

namespace detail {

struct SarmaxProfile {
	double phi0 = 0.0;
	double phi168 = 0.0;
	double css = 0.0;
	double sigma2 = 0.0;
};

inline SarmaxProfile sarmax_css_profiled(const std::vector<double>& y, double phi1, double phi24,
                                         double om1, double om24) {
	const std::size_t n = y.size();
	std::vector<double> base(n), d0(n), d168(n);
	auto lag = [&](const std::vector<double>& v, std::size_t t, std::size_t k) {
		return t >= k ? v[t - k] : 0.0;
	};
	for (std::size_t t = 0; t < n; ++t) {
		const double ar = phi1 * lag(y, t, 1) + phi24 * lag(y, t, 24) - phi1 * phi24 * lag(y, t, 25);
		const double ma = [&](const std::vector<double>& v) {
			return om1 * lag(v, t, 1) + om24 * lag(v, t, 24) + om1 * om24 * lag(v, t, 25);
		}(base);
		base[t] = y[t] - ar - ma;
		d0[t] = 1.0 - (om1 * lag(d0, t, 1) + om24 * lag(d0, t, 24) + om1 * om24 * lag(d0, t, 25));
		d168[t] = lag(y, t, 168) -
		          (om1 * lag(d168, t, 1) + om24 * lag(d168, t, 24) + om1 * om24 * lag(d168, t, 25));
	}
	// 2x2 least squares in (phi0, phi168)
	double a00 = 0.0, a01 = 0.0, a11 = 0.0, b0 = 0.0, b1 = 0.0;
	for (std::size_t t = 0; t < n; ++t) {
		a00 += d0[t] * d0[t];
		a01 += d0[t] * d168[t];
		a11 += d168[t] * d168[t];
		b0 += d0[t] * base[t];
		b1 += d168[t] * base[t];
	}
	SarmaxProfile out;
	const double det = a00 * a11 - a01 * a01;
	if (std::fabs(det) > 1e-12 * (1.0 + a00) * (1.0 + a11)) {
		out.phi0 = (b0 * a11 - b1 * a01) / det;
		out.phi168 = (a00 * b1 - a01 * b0) / det;
	} else {
		out.phi0 = a00 > 0.0 ? b0 / a00 : 0.0;
		out.phi168 = 0.0;
	}
	double css = 0.0;
	for (std::size_t t = 0; t < n; ++t) {
		const double e = base[t] - out.phi0 * d0[t] - out.phi168 * d168[t];
		css += e * e;
	}
	out.css = css;
	out.sigma2 = n > 0 ? css / static_cast<double>(n) : 0.0;
	return out;
}

template <typename Get>
inline double sarmax_mean(const SarmaxParams& p, std::size_t t, Get value,
                          const std::vector<double>& psi) {
	auto lag_v = [&](std::size_t k) { return t >= k ? value(t - k) : 0.0; };
	auto lag_p = [&](std::size_t k) { return t >= k ? psi[t - k] : 0.0; };
	return p.phi0 + p.phi1 * lag_v(1) + p.phi168 * lag_v(168) + p.phi24 * lag_v(24) -
	       p.phi1 * p.phi24 * lag_v(25) + p.omega1 * lag_p(1) + p.omega24 * lag_p(24) +
	       p.omega1 * p.omega24 * lag_p(25);
}

} // namespace detail

inline std::vector<double> sarmax_innovations(const SarmaxParams& params,
                                              const std::vector<double>& y) {
	std::vector<double> psi(y.size(), 0.0);
	for (std::size_t t = 0; t < y.size(); ++t) {
		const double mean = detail::sarmax_mean(params, t, [&](std::size_t k) { return y[k]; }, psi);
		psi[t] = y[t] - mean;
	}
	return psi;
}

inline std::vector<double> simulate_sarmax(const SarmaxParams& params,
                                           const std::vector<double>& psi) {
	std::vector<double> y(psi.size(), 0.0);
	for (std::size_t t = 0; t < psi.size(); ++t)
		y[t] = detail::sarmax_mean(params, t, [&](std::size_t k) { return y[k]; }, psi) + psi[t];
	return y;
}

inline SarmaxParams fit_sarmax_2da(const std::vector<double>& tso_history, int max_eval = 4000) {
	if (tso_history.size() < 169) throw OutOfRange("fit_sarmax_2da: need at least 169 hours");
	double m0 = 0.0;
	for (double v : tso_history) m0 += v;
	m0 /= static_cast<double>(tso_history.size());
	double css0 = 0.0;
	for (double v : tso_history) css0 += (v - m0) * (v - m0);
	const double ridge = 32.0 * css0 / static_cast<double>(tso_history.size());
	auto objective = [&](const std::vector<double>& u) {
		const double a = std::tanh(u[0]), b = std::tanh(u[1]), c = std::tanh(u[2]),
		             d = std::tanh(u[3]);
		return detail::sarmax_css_profiled(tso_history, a, b, c, d).css +
		       ridge * (a * a + b * b + c * c + d * d);
	};
	OptimResult opt = nelder_mead_restarted(objective, {0.0, 0.0, 0.0, 0.0}, 0.25, 1e-13, max_eval);
	SarmaxParams p;
	p.phi1 = std::tanh(opt.x[0]);
	p.phi24 = std::tanh(opt.x[1]);
	p.omega1 = std::tanh(opt.x[2]);
	p.omega24 = std::tanh(opt.x[3]);
	auto prof = detail::sarmax_css_profiled(tso_history, p.phi1, p.phi24, p.omega1, p.omega24);
	p.phi0 = prof.phi0;
	p.phi168 = prof.phi168;
	p.sigma2 = prof.sigma2;
	p.converged = opt.converged;
	p.stationary = std::fabs(p.phi1) < 1.0 && std::fabs(p.phi24) < 1.0;
	return p;
}

inline SarmaxParams fit_sarmax_2da(const HourlySeries& tso_history, int max_eval = 4000) {
	return fit_sarmax_2da(tso_history.values(), max_eval);
}

/// Recursive 48-step forecast keeping hours 25..48: with history ending at
/// the last hour of day d this is exactly day d+2.
inline std::vector<double> forecast_2da(const SarmaxParams& params,
                                        const std::vector<double>& tso_history) {
	const std::size_t n = tso_history.size();
	if (n < 169) throw OutOfRange("forecast_2da: need at least 169 hours of history");
	std::vector<double> ext(tso_history);
	std::vector<double> psi = sarmax_innovations(params, tso_history);
	ext.resize(n + 48, 0.0);
	psi.resize(n + 48, 0.0);
	for (std::size_t t = n; t < n + 48; ++t)
		ext[t] = detail::sarmax_mean(params, t, [&](std::size_t k) { return ext[k]; }, psi);
	return std::vector<double>(ext.begin() + n + 24, ext.end());
}

inline HourlySeries forecast_2da(const SarmaxParams& params, const HourlySeries& tso_history,
                                 const std::vector<CalendarFlags>& target_flags) {
	std::vector<double> vals = forecast_2da(params, tso_history.values());
	const HourStamp start = advance(tso_history.end(), 25);
	return HourlySeries(start, std::move(vals), target_flags, tso_history.unit());
}

} // namespace epf
