#include <catch2/catch.hpp>

#include <cmath>

#include "epf/evaluation.hpp"
#include "epf/rng.hpp"

using namespace epf;

TEST_CASE("rmse and mae basics", "[evaluation]") {
	std::vector<double> a{1.0, 2.0, 3.0};
	CHECK(rmse(a, a) == 0.0);
	CHECK(mae(a, a) == 0.0);

	std::vector<double> actual{3.0, -4.0}, zero{0.0, 0.0};
	CHECK(rmse(actual, zero) == Approx(std::sqrt(12.5)));
	CHECK(mae(actual, zero) == Approx(3.5));

	// constant bias: rmse equals mae equals |bias|
	std::vector<double> biased{1.0 + 2.5, 2.0 + 2.5, 3.0 + 2.5};
	CHECK(rmse(a, biased) == Approx(2.5));
	CHECK(mae(a, biased) == Approx(2.5));
	CHECK(rmse(a, biased) >= mae(a, biased));

	CHECK_THROWS_AS(rmse(a, zero), AlignmentError);
}

TEST_CASE("rmse never undercuts mae", "[evaluation]") {
	Rng rng(12);
	for (int trial = 0; trial < 20; ++trial) {
		std::vector<double> x(50), y(50);
		for (int i = 0; i < 50; ++i) {
			x[i] = rng.normal(0.0, 10.0);
			y[i] = rng.normal(0.0, 10.0);
		}
		CHECK(rmse(x, y) >= mae(x, y) - 1e-12);
	}
}

TEST_CASE("pinball score direct values", "[evaluation]") {
	const std::vector<double> grid{0.9};
	CHECK(pinball_score({10.0}, {{8.0}}, grid)[0] == Approx(1.8));
	CHECK(pinball_score({10.0}, {{12.0}}, grid)[0] == Approx(0.2));

	// perfect forecasts on a degenerate distribution
	std::vector<double> g19;
	for (int i = 1; i <= 19; ++i) g19.push_back(0.05 * i);
	std::vector<std::vector<double>> qf(5, std::vector<double>(19, 42.0));
	auto scores = pinball_score(std::vector<double>(5, 42.0), qf, g19);
	for (double s : scores) CHECK(s == Approx(0.0).margin(1e-12));
}

TEST_CASE("pinball at the median is half the mae", "[evaluation]") {
	Rng rng(77);
	std::vector<double> actual(200);
	std::vector<std::vector<double>> med(200);
	std::vector<double> med_flat(200);
	for (int i = 0; i < 200; ++i) {
		actual[i] = rng.normal(50.0, 10.0);
		med_flat[i] = rng.normal(50.0, 2.0);
		med[i] = {med_flat[i]};
	}
	const double pb = pinball_score(actual, med, {0.5})[0];
	CHECK(pb == Approx(0.5 * mae(actual, med_flat)).margin(1e-9));
}

TEST_CASE("coverage histogram bins and partitions", "[evaluation]") {
	std::vector<double> grid;
	std::vector<double> qs;
	for (int i = 1; i <= 19; ++i) {
		grid.push_back(0.05 * i);
		qs.push_back(10.0 * i);
	}
	// all actuals above the highest quantile
	auto top = coverage_histogram({500.0, 600.0}, {qs, qs});
	CHECK(top.back() == 2);
	std::int64_t total = 0;
	for (auto c : top) total += c;
	CHECK(total == 2);

	// empty input gives empty histogram
	CHECK(coverage_histogram({}, {}).empty());

	// actuals drawn from the forecast's own distribution: uniform bins
	Rng rng(31);
	std::vector<double> actual;
	std::vector<std::vector<double>> rows;
	for (int i = 0; i < 10000; ++i) {
		const double mu = rng.uniform(20.0, 60.0);
		std::vector<double> q;
		for (double g : grid) {
			// normal quantile via binary search on the cdf
			double lo = mu - 60.0, hi = mu + 60.0;
			for (int it = 0; it < 60; ++it) {
				const double mid = 0.5 * (lo + hi);
				(normal_cdf((mid - mu) / 8.0) < g ? lo : hi) = mid;
			}
			q.push_back(0.5 * (lo + hi));
		}
		rows.push_back(q);
		actual.push_back(mu + 8.0 * rng.normal());
	}
	auto bins = coverage_histogram(actual, rows);
	REQUIRE(bins.size() == 20);
	std::int64_t n = 0;
	for (auto c : bins) n += c;
	CHECK(n == 10000);
	CHECK(chi_square_uniformity_p(bins) > 0.01);
}

TEST_CASE("dm test basics", "[evaluation]") {
	Rng rng(5);
	const int n = 365;
	std::vector<std::array<double, 24>> ea(n), eb(n);
	for (int d = 0; d < n; ++d)
		for (int h = 0; h < 24; ++h) {
			eb[d][h] = rng.normal(0.0, 3.0) + 1.0;
			ea[d][h] = 2.0 * eb[d][h];
		}
	// identical errors: zero variance flag, p = 1
	auto same = dm_test(ea, ea);
	CHECK(same.zero_variance);
	CHECK(same.p_value == 1.0);

	// doubled errors: b is clearly better
	auto better = dm_test(ea, eb);
	CHECK(better.p_value < 0.01);

	// antisymmetry
	auto swapped = dm_test(eb, ea);
	CHECK(swapped.statistic == Approx(-better.statistic).margin(1e-12));

	CHECK_THROWS_AS(dm_test(std::vector<std::array<double, 24>>(10),
	                        std::vector<std::array<double, 24>>(10)),
	                TooFewDays);

	// L2 norm variant runs and finds the same direction
	auto l2 = dm_test(ea, eb, DmNorm::L2);
	CHECK(l2.p_value < 0.01);
}

TEST_CASE("dm test null p-values look uniform", "[evaluation]") {
	Rng rng(2025);
	std::vector<double> pvals;
	for (int seed = 0; seed < 200; ++seed) {
		const int n = 120;
		std::vector<std::array<double, 24>> ea(n), eb(n);
		for (int d = 0; d < n; ++d)
			for (int h = 0; h < 24; ++h) {
				ea[d][h] = rng.normal();
				eb[d][h] = rng.normal();
			}
		pvals.push_back(dm_test(ea, eb).p_value);
	}
	CHECK(ks_uniform_p(pvals) > 0.01);
}

TEST_CASE("slice report aggregates every field", "[evaluation]") {
	Calendar cal({2019, 1, 1});
	std::vector<double> grid;
	for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);

	// zero-error forecasts zero every error field
	std::vector<EvalHour> perfect;
	for (int d = 0; d < 20; ++d)
		for (int h = 1; h <= 24; ++h) {
			EvalHour e;
			e.day = d;
			e.hour = h;
			e.actual = 40.0 + h;
			e.point = e.actual;
			perfect.push_back(e);
		}
	auto rep0 = slice_report(perfect, cal, grid);
	CHECK(rep0.overall.rmse == 0.0);
	CHECK(rep0.peak.mae == 0.0);
	CHECK(rep0.by_year.at(2019).hours == 480);

	// peak-only bias isolates into the peak segment
	Rng rng(9);
	std::vector<EvalHour> biased = perfect;
	for (auto& e : biased) {
		const bool peak = is_peak_hour(e.hour, cal.flags_of(e.day));
		e.point = e.actual - (peak ? 5.0 : 0.0);
	}
	auto rep1 = slice_report(biased, cal, grid);
	CHECK(rep1.peak.rmse == Approx(5.0));
	CHECK(rep1.peak.mae == Approx(5.0));
	CHECK(rep1.offpeak.rmse == Approx(0.0).margin(1e-12));

	// price-quantile groups split N into five nearly equal parts
	std::vector<EvalHour> spread;
	for (int d = 0; d < 25; ++d)
		for (int h = 1; h <= 24; ++h) {
			EvalHour e;
			e.day = d;
			e.hour = h;
			e.actual = rng.uniform(0.0, 100.0);
			e.point = e.actual + rng.normal();
			e.quantiles.assign(19, 0.0);
			for (int i = 0; i < 19; ++i) e.quantiles[i] = e.actual + (i - 9) * 2.0 + 0.5;
			spread.push_back(e);
		}
	auto rep2 = slice_report(spread, cal, grid);
	const std::int64_t n_total = static_cast<std::int64_t>(spread.size());
	std::int64_t group_sum = 0;
	for (const auto& g : rep2.by_price_quantile) {
		CHECK(std::llabs(g.hours - n_total / 5) <= 1);
		group_sum += g.hours;
	}
	CHECK(group_sum == n_total);

	// coverage partition: bins sum to the evaluated hours per segment
	std::int64_t cov_sum = 0;
	for (auto c : rep2.coverage) cov_sum += c;
	CHECK(cov_sum == n_total);
	std::int64_t peak_sum = 0;
	for (auto c : rep2.coverage_peak) peak_sum += c;
	std::int64_t off_sum = 0;
	for (auto c : rep2.coverage_offpeak) off_sum += c;
	CHECK(peak_sum + off_sum == n_total);

	// interval widths recorded per hour of day and hour of week
	CHECK(rep2.width_by_hour[0].size() == 25);
	CHECK(rep2.width_by_hour[0][0] == Approx(36.0));
	double how_mass = 0.0;
	for (int i = 0; i < 192; ++i) how_mass += static_cast<double>(rep2.how_counts[i]);
	CHECK(how_mass == Approx(static_cast<double>(n_total)));
}
