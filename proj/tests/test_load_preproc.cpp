#include <catch2/catch.hpp>

#include <cmath>

#include "epf/load_preproc.hpp"
#include "epf/rng.hpp"

using namespace epf;

namespace {

std::vector<CalendarFlags> flags_from(int first_weekday, int n_days) {
	std::vector<CalendarFlags> out;
	for (int d = 0; d < n_days; ++d) out.push_back({(first_weekday - 1 + d) % 7 + 1, false});
	return out;
}

HourlySeries series_of(std::vector<double> vals, int first_weekday = 1, std::int64_t day0 = 0) {
	const int n_days = static_cast<int>(vals.size() / 24);
	return HourlySeries::whole_days(day0, std::move(vals), flags_from(first_weekday, n_days),
	                                Unit::MWh);
}

} // namespace

TEST_CASE("forecast_error subtracts elementwise", "[load]") {
	auto actual = series_of(std::vector<double>(24, 100.0));
	auto fc = series_of(std::vector<double>(24, 100.0));
	auto zero = forecast_error({actual, fc});
	for (std::size_t k = 0; k < 24; ++k) CHECK(zero[k] == 0.0);

	std::vector<double> va(24, 100.0), vf(24, 90.0);
	va[1] = 110.0;
	vf[1] = 115.0;
	auto eps = forecast_error({series_of(va), series_of(vf)});
	CHECK(eps[0] == 10.0);
	CHECK(eps[1] == -5.0);

	auto other = series_of(std::vector<double>(24, 1.0), 1, 5);
	CHECK_THROWS_AS(forecast_error({actual, other}), AlignmentError);
}

TEST_CASE("seasonal profile averages by hour and weekday", "[load]") {
	// constant errors give a constant profile
	auto c = fit_seasonal_profile(series_of(std::vector<double>(24 * 14, 3.25)), {14, 1});
	for (int h = 1; h <= 24; ++h)
		for (int wd = 1; wd <= 7; ++wd) CHECK(c.at(h, wd) == Approx(3.25));

	// one week with the weekday index at every hour: cell (h, wd) = wd
	std::vector<double> vals;
	for (int d = 0; d < 7; ++d)
		for (int h = 0; h < 24; ++h) vals.push_back(static_cast<double>(d % 7 + 1));
	auto p = fit_seasonal_profile(series_of(vals), {7, 1});
	for (int h = 1; h <= 24; ++h)
		for (int wd = 1; wd <= 7; ++wd) CHECK(p.at(h, wd) == Approx(static_cast<double>(wd)));

	CHECK_THROWS_AS(fit_seasonal_profile(series_of(std::vector<double>(24 * 3, 1.0)), {3, 1}),
	                EmptyCell);
}

TEST_CASE("seasonal component is the calendar lookup", "[load]") {
	std::vector<double> vals;
	for (int d = 0; d < 7; ++d)
		for (int h = 0; h < 24; ++h) vals.push_back(static_cast<double>(d % 7 + 1));
	auto p = fit_seasonal_profile(series_of(vals), {7, 1});

	// a Tuesday reads 2 everywhere
	auto tue = seasonal_component(p, {0, 1}, 24, flags_from(2, 1));
	for (std::size_t k = 0; k < 24; ++k) CHECK(tue[k] == Approx(2.0));

	// two consecutive Mondays give identical blocks
	auto span = seasonal_component(p, {0, 1}, 24 * 8, flags_from(1, 8));
	for (int h = 0; h < 24; ++h) CHECK(span[h] == span[24 * 7 + h]);
}

TEST_CASE("innovation recursion inverts the forward model", "[load]") {
	SarmaParams zero;
	std::vector<double> rc{1.0, -2.0, 0.5, 3.0};
	rc.resize(60, 0.25);
	auto psi = sarma_innovations(zero, rc);
	for (std::size_t t = 0; t < rc.size(); ++t) CHECK(psi[t] == rc[t]);

	SarmaParams mean_only;
	mean_only.phi0 = 5.0;
	auto psi2 = sarma_innovations(mean_only, std::vector<double>(80, 5.0));
	CHECK(psi2[0] == 0.0);
	for (double v : psi2) CHECK(v == Approx(0.0).margin(1e-12));

	// round trip: simulate then invert
	Rng rng(11);
	SarmaParams p;
	p.phi0 = 0.3;
	p.phi1 = 0.55;
	p.phi24 = 0.25;
	p.omega1 = 0.3;
	p.omega24 = 0.15;
	std::vector<double> noise(24 * 40);
	for (auto& v : noise) v = rng.normal();
	auto rc3 = simulate_sarma(p, noise);
	auto rec = sarma_innovations(p, rc3);
	for (std::size_t t = 0; t < noise.size(); ++t) CHECK(rec[t] == Approx(noise[t]).margin(1e-10));
}

TEST_CASE("conditional least squares recovers simulated coefficients", "[load]") {
	Rng rng(2024);
	SarmaParams truth;
	truth.phi0 = 0.0;
	truth.phi1 = 0.6;
	truth.phi24 = 0.3;
	truth.omega1 = 0.2;
	truth.omega24 = 0.1;
	std::vector<double> noise(365 * 24);
	for (auto& v : noise) v = rng.normal();
	auto rc = simulate_sarma(truth, noise);
	auto fit = fit_sarma(rc);
	CHECK(fit.phi0 == Approx(truth.phi0).margin(0.1));
	CHECK(fit.phi1 == Approx(truth.phi1).margin(0.1));
	CHECK(fit.phi24 == Approx(truth.phi24).margin(0.1));
	CHECK(fit.omega1 == Approx(truth.omega1).margin(0.1));
	CHECK(fit.omega24 == Approx(truth.omega24).margin(0.1));
	CHECK(fit.sigma2 == Approx(1.0).margin(0.15));
	CHECK(fit.stationary);
}

TEST_CASE("degenerate and white-noise series", "[load]") {
	auto z = fit_sarma(std::vector<double>(24 * 40, 0.0));
	CHECK(z.phi0 == 0.0);
	CHECK(z.sigma2 == 0.0);

	Rng rng(5150);
	int ok = 0;
	const int seeds = 20;
	for (int s = 0; s < seeds; ++s) {
		std::vector<double> wn(365 * 24);
		for (auto& v : wn) v = rng.normal();
		auto fit = fit_sarma(wn, 1200);
		const bool small = std::fabs(fit.phi1) < 0.1 && std::fabs(fit.phi24) < 0.1 &&
		                   std::fabs(fit.omega1) < 0.1 && std::fabs(fit.omega24) < 0.1;
		ok += small ? 1 : 0;
	}
	CHECK(ok >= 19); // 95 % of fits stay near zero
}

TEST_CASE("24-hour error forecast", "[load]") {
	// zero stochastic part: forecast equals the profile lookup
	std::vector<double> vals;
	for (int d = 0; d < 14; ++d)
		for (int h = 0; h < 24; ++h) vals.push_back(7.5);
	auto hist = series_of(vals);
	auto profile = fit_seasonal_profile(hist, {14, 1});
	SarmaParams zero;
	auto fc = forecast_error_24h(zero, profile, hist, flags_from(1, 1));
	REQUIRE(fc.size() == 24);
	for (std::size_t k = 0; k < 24; ++k) CHECK(fc[k] == Approx(7.5));
	CHECK(fc.start().day == hist.end().day + 1);

	// AR(1) halving from the last remainder
	SarmaParams ar;
	ar.phi1 = 0.5;
	std::vector<double> rc_hist(24 * 3, 0.0);
	rc_hist.back() = 8.0;
	auto halving = sarma_forecast(ar, rc_hist, 24);
	CHECK(halving[0] == Approx(4.0));
	CHECK(halving[1] == Approx(2.0));
	CHECK(halving[2] == Approx(1.0));

	// independent 24-step loop oracle
	Rng rng(31);
	SarmaParams p;
	p.phi0 = 0.1;
	p.phi1 = 0.4;
	p.phi24 = 0.3;
	p.omega1 = 0.25;
	p.omega24 = 0.1;
	std::vector<double> noise(24 * 50);
	for (auto& v : noise) v = rng.normal();
	auto rc = simulate_sarma(p, noise);
	auto fast = sarma_forecast(p, rc, 24);

	// oracle: extend psi with zeros and unroll the recursion by hand
	std::vector<double> psi = sarma_innovations(p, rc);
	std::vector<double> ext = rc;
	for (int step = 0; step < 24; ++step) {
		const std::size_t t = ext.size();
		auto lag_v = [&](std::size_t k) { return t >= k ? ext[t - k] : 0.0; };
		auto lag_p = [&](std::size_t k) { return t >= k && t - k < psi.size() ? psi[t - k] : 0.0; };
		ext.push_back(p.phi0 + p.phi1 * lag_v(1) + p.phi24 * lag_v(24) -
		              p.phi1 * p.phi24 * lag_v(25) + p.omega1 * lag_p(1) + p.omega24 * lag_p(24) +
		              p.omega1 * p.omega24 * lag_p(25));
	}
	for (int k = 0; k < 24; ++k) CHECK(fast[k] == Approx(ext[rc.size() + k]).margin(1e-10));
}

TEST_CASE("decomposition identity on the calibration window", "[load]") {
	Rng rng(8);
	std::vector<double> vals(24 * 21);
	for (auto& v : vals) v = rng.normal(0.0, 50.0);
	auto eps = series_of(vals);
	auto profile = fit_seasonal_profile(eps, {21, 1});
	auto sc = seasonal_component(profile, eps);
	auto rc = eps - sc;
	auto rebuilt = sc + rc;
	for (std::size_t k = 0; k < eps.size(); ++k) CHECK(rebuilt[k] == Approx(eps[k]).margin(1e-12));
}

TEST_CASE("improved forecast beats the raw forecast on structured errors", "[load]") {
	auto identity = improve_forecast(series_of(std::vector<double>(24, 100.0)),
	                                 series_of(std::vector<double>(24, 0.0)));
	CHECK(identity[5] == 100.0);
	auto shifted = improve_forecast(series_of(std::vector<double>(24, 100.0)),
	                                series_of(std::vector<double>(24, 10.0)));
	CHECK(shifted[5] == 110.0);

	// simulation: error = weekly season + seasonal ARMA remainder
	Rng rng(99);
	SarmaParams truth;
	truth.phi1 = 0.7;
	truth.phi24 = 0.2;
	truth.omega1 = 0.2;
	const int cal_days = 120, test_days = 14;
	const int n = (cal_days + test_days) * 24;
	std::vector<double> noise(n);
	for (auto& v : noise) v = rng.normal(0.0, 40.0);
	auto rc = simulate_sarma(truth, noise);
	std::vector<double> eps(n);
	for (int k = 0; k < n; ++k) {
		const int wd = (k / 24) % 7 + 1;
		const int h = k % 24;
		eps[k] = rc[k] + 120.0 * std::sin(2.0 * 3.14159265358979 * h / 24.0) + 30.0 * wd;
	}
	auto eps_series = series_of(eps);

	double sq_raw = 0.0, sq_improved = 0.0;
	int count = 0;
	for (int day = cal_days; day < cal_days + test_days; ++day) {
		auto hist = eps_series.slice({0, 1}, {day - 1, 24});
		auto profile = fit_seasonal_profile(hist, {cal_days, 1});
		auto params = fit_sarma(hist.values(), 600);
		auto eps_hat = forecast_error_24h(params, profile, hist, flags_from(day % 7 + 1, 1));
		for (int h = 0; h < 24; ++h) {
			const double truth_eps = eps[day * 24 + h];
			sq_raw += truth_eps * truth_eps; // raw forecast keeps the whole error
			const double remaining = truth_eps - eps_hat[h];
			sq_improved += remaining * remaining;
			++count;
		}
	}
	CHECK(sq_improved / count < sq_raw / count);
}

TEST_CASE("two-day-ahead model", "[load]") {
	// phi168 = 1 copies the forecast one week earlier
	SarmaxParams weekly;
	weekly.phi168 = 1.0;
	Rng rng(41);
	std::vector<double> hist(24 * 14);
	for (auto& v : hist) v = rng.uniform(100.0, 200.0);
	auto fc = forecast_2da(weekly, hist);
	REQUIRE(fc.size() == 24);
	const std::size_t n = hist.size();
	for (int k = 0; k < 24; ++k)
		CHECK(fc[k] == Approx(hist[n + 24 + static_cast<std::size_t>(k) - 168]));

	// indexing contract: history through day d gives the day d+2 block
	auto hist_series = series_of(std::vector<double>(24 * 14, 150.0), 1, 0);
	auto fc2 = forecast_2da(weekly, hist_series, flags_from(1, 1));
	CHECK(fc2.start().day == 15); // history covers days 0..13 = through day d = 13
	CHECK(fc2.start().hour == 1);

	// simulate-then-fit recovery; low series mean keeps the intercept and
	// the lag-168 level regressor from trading off
	SarmaxParams truth;
	truth.phi0 = 0.5;
	truth.phi1 = 0.5;
	truth.phi24 = 0.2;
	truth.phi168 = 0.15;
	truth.omega1 = 0.3;
	truth.omega24 = 0.2;
	std::vector<double> noise(365 * 24);
	for (auto& v : noise) v = rng.normal();
	auto y = simulate_sarmax(truth, noise);
	auto fit = fit_sarmax_2da(y);
	CHECK(fit.phi0 == Approx(truth.phi0).margin(0.1));
	CHECK(fit.phi1 == Approx(truth.phi1).margin(0.1));
	CHECK(fit.phi24 == Approx(truth.phi24).margin(0.1));
	CHECK(fit.phi168 == Approx(truth.phi168).margin(0.1));
	CHECK(fit.omega1 == Approx(truth.omega1).margin(0.1));
	CHECK(fit.omega24 == Approx(truth.omega24).margin(0.1));
}

TEST_CASE("fitted parameters never lose to the starting point", "[load]") {
	Rng rng(606);
	SarmaParams truth;
	truth.phi1 = 0.5;
	truth.omega24 = 0.2;
	std::vector<double> noise(24 * 120);
	for (auto& v : noise) v = rng.normal();
	auto rc = simulate_sarma(truth, noise);
	auto fit = fit_sarma(rc, 1500);
	const double css_fit =
	    detail::sarma_css_profiled(rc, fit.phi1, fit.phi24, fit.omega1, fit.omega24).css;
	const double css_zero = detail::sarma_css_profiled(rc, 0.0, 0.0, 0.0, 0.0).css;
	CHECK(css_fit <= css_zero);
	CHECK(fit.converged);
}
