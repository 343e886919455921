#include <catch2/catch.hpp>

#include <cmath>

#include "epf/density.hpp"
#include "epf/rng.hpp"

using namespace epf;

namespace {

std::vector<CalendarFlags> flat_flags(int n_days) {
	std::vector<CalendarFlags> out;
	for (int d = 0; d < n_days; ++d) out.push_back({d % 7 + 1, false});
	return out;
}

// brute force: for intercept-only data the optimal fit is at a data point
double scan_intercept_only(const std::vector<double>& y, double q) {
	double best_v = 0.0, best_loss = 1e300;
	for (double cand : y) {
		double loss = 0.0;
		for (double yi : y) loss += pinball_loss(yi - cand, q);
		if (loss < best_loss - 1e-12) {
			best_loss = loss;
			best_v = cand;
		}
	}
	return best_v;
}

double total_loss(const std::vector<double>& x, const std::vector<double>& y, std::size_t k,
                  const std::vector<double>& beta, double q) {
	double loss = 0.0;
	for (std::size_t i = 0; i < y.size(); ++i) {
		double fit = 0.0;
		for (std::size_t j = 0; j < k; ++j) fit += x[i * k + j] * beta[j];
		loss += pinball_loss(y[i] - fit, q);
	}
	return loss;
}

} // namespace

TEST_CASE("perfect regressor interpolates with zero loss", "[density]") {
	std::vector<double> x, y;
	for (int i = 0; i < 12; ++i) {
		x.push_back(1.0);
		x.push_back(3.0 + i);
		y.push_back(3.0 + i);
	}
	for (double q : {0.1, 0.5, 0.9}) {
		auto m = fit_quantile_regression(x, y, 2, q);
		CHECK(m.loss == Approx(0.0).margin(1e-9));
		CHECK(m.beta[0] == Approx(0.0).margin(1e-9));
		CHECK(m.beta[1] == Approx(1.0).margin(1e-9));
	}
}

TEST_CASE("intercept-only fits hit empirical quantiles", "[density]") {
	std::vector<double> y{1, 2, 3, 4, 5};
	std::vector<double> x(5, 1.0);
	auto med = fit_quantile_regression(x, y, 1, 0.5);
	CHECK(med.beta[0] == Approx(3.0));
	CHECK(scan_intercept_only(y, 0.5) == 3.0);

	auto q90 = fit_quantile_regression(x, y, 1, 0.9);
	CHECK(q90.beta[0] == Approx(5.0));
	CHECK(scan_intercept_only(y, 0.9) == 5.0);
}

TEST_CASE("LP optimum matches exhaustive grid search on small data", "[density]") {
	Rng rng(314);
	for (int trial = 0; trial < 12; ++trial) {
		const std::size_t n = 4 + trial % 3; // 4..6 points
		std::vector<double> x, y;
		for (std::size_t i = 0; i < n; ++i) {
			x.push_back(1.0);
			x.push_back(rng.uniform(-3.0, 3.0));
			y.push_back(rng.uniform(-5.0, 5.0));
		}
		const double q = 0.1 + 0.2 * (trial % 5);
		auto m = fit_quantile_regression(x, y, 2, q);

		// oracle: an optimal line passes through two data points (or is any
		// quantile-flat line); enumerate all point pairs plus flats
		double best = 1e300;
		for (std::size_t a = 0; a < n; ++a) {
			for (std::size_t b = 0; b < n; ++b) {
				if (a == b) continue;
				const double xa = x[a * 2 + 1], xb = x[b * 2 + 1];
				if (std::fabs(xa - xb) < 1e-9) continue;
				const double slope = (y[b] - y[a]) / (xb - xa);
				const double icept = y[a] - slope * xa;
				best = std::min(best, total_loss(x, y, 2, {icept, slope}, q));
			}
			best = std::min(best, total_loss(x, y, 2, {y[a], 0.0}, q));
		}
		CHECK(m.loss <= best + 1e-6);
		CHECK(m.loss == Approx(total_loss(x, y, 2, m.beta, q)).margin(1e-7));
	}
}

TEST_CASE("perturbing fitted coefficients never improves the loss", "[density]") {
	Rng rng(25);
	std::vector<double> x, y;
	for (int i = 0; i < 60; ++i) {
		const double xi = rng.uniform(0.0, 10.0);
		x.push_back(1.0);
		x.push_back(xi);
		y.push_back(2.0 + 0.5 * xi + rng.normal(0.0, 1.0 + 0.2 * xi));
	}
	for (double q : {0.05, 0.5, 0.95}) {
		auto m = fit_quantile_regression(x, y, 2, q);
		const double at_opt = total_loss(x, y, 2, m.beta, q);
		for (std::size_t j = 0; j < 2; ++j) {
			for (double d : {-1e-3, 1e-3}) {
				auto b = m.beta;
				b[j] += d;
				CHECK(total_loss(x, y, 2, b, q) >= at_opt - 1e-9);
			}
		}
	}
}

TEST_CASE("monotone in q on training rows", "[density]") {
	Rng rng(77);
	std::vector<double> x, y;
	for (int i = 0; i < 200; ++i) {
		const double xi = rng.uniform(1.0, 9.0);
		x.push_back(1.0);
		x.push_back(xi);
		y.push_back(10.0 + 2.0 * xi + rng.normal(0.0, 2.0));
	}
	auto m05 = fit_quantile_regression(x, y, 2, 0.05);
	auto m50 = fit_quantile_regression(x, y, 2, 0.50);
	auto m95 = fit_quantile_regression(x, y, 2, 0.95);
	for (int i = 0; i < 200; ++i) {
		const std::vector<double> row{1.0, x[i * 2 + 1]};
		const double a = predict_quantile(m05, row);
		const double b = predict_quantile(m50, row);
		const double c = predict_quantile(m95, row);
		CHECK(a <= b + 1e-7);
		CHECK(b <= c + 1e-7);
	}
}

TEST_CASE("rank-deficient designs drop dependent columns", "[density]") {
	// third column is twice the second
	std::vector<double> x, y;
	Rng rng(5);
	for (int i = 0; i < 30; ++i) {
		const double xi = rng.uniform(0.0, 4.0);
		x.push_back(1.0);
		x.push_back(xi);
		x.push_back(2.0 * xi);
		y.push_back(1.0 + 3.0 * xi + rng.normal());
	}
	auto m = fit_quantile_regression(x, y, 3, 0.5);
	CHECK(m.degenerate);
	REQUIRE(m.dropped_cols.size() == 1);
	CHECK(m.beta[m.dropped_cols[0]] == 0.0);
}

TEST_CASE("predict_quantile is the inner product", "[density]") {
	QuantileModel m;
	m.beta = {0.0, 1.0};
	CHECK(predict_quantile(m, {1.0, 42.0}) == 42.0);
	m.beta = {10.0, 0.0};
	CHECK(predict_quantile(m, {1.0, -3.0}) == 10.0);
	m.beta = {1.0, 2.0};
	CHECK(predict_quantile(m, {1.0, 3.0}) == 7.0);
	CHECK_THROWS_AS(predict_quantile(m, {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("scenario construction with symmetric offsets", "[density]") {
	auto point = HourlySeries::whole_days(0, std::vector<double>(24, 50000.0), flat_flags(1),
	                                      Unit::MWh);
	QuantileModel lo{0.05, {-100.0, 1.0}, {}, false, 0.0};
	QuantileModel hi{0.95, {100.0, 1.0}, {}, false, 0.0};
	auto set = build_scenarios(point, lo, hi);
	CHECK(set.low[0] == Approx(49900.0));
	CHECK(set.expected[0] == Approx(50000.0));
	CHECK(set.high[0] == Approx(50100.0));
	CHECK_FALSE(set.crossing_repaired);
	CHECK(set.w_low + set.w_expected + set.w_high == Approx(1.0));

	// crossing models swap and flag
	auto crossed = build_scenarios(point, hi, lo);
	CHECK(crossed.crossing_repaired);
	for (std::size_t h = 0; h < 24; ++h) CHECK(crossed.low[h] <= crossed.high[h]);
}

TEST_CASE("simulated heteroscedastic coverage near 90 percent", "[density]") {
	Rng rng(2718);
	const int n = 10000;
	std::vector<double> x, y;
	std::vector<double> points(n);
	for (int i = 0; i < n; ++i) {
		const double point = rng.uniform(30000.0, 70000.0);
		const double sd = 500.0 + 0.02 * point;
		points[i] = point;
		x.push_back(1.0);
		x.push_back(point);
		y.push_back(point + rng.normal(0.0, sd));
	}
	auto m05 = fit_quantile_regression(x, y, 2, 0.05);
	auto m95 = fit_quantile_regression(x, y, 2, 0.95);
	int inside = 0;
	for (int i = 0; i < n; ++i) {
		const double lo = predict_quantile(m05, {1.0, points[i]});
		const double hi = predict_quantile(m95, {1.0, points[i]});
		if (y[i] >= lo && y[i] <= hi) ++inside;
	}
	const double coverage = static_cast<double>(inside) / n;
	CHECK(coverage == Approx(0.90).margin(0.03));
}
