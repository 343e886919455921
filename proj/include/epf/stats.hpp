#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

namespace detail {

inline double gamma_p_series(double a, double x) {
	double ap = a;
	double sum = 1.0 / a;
	double del = sum;
	for (int n = 0; n < 500; ++n) {
		ap += 1.0;
		del *= x / ap;
		sum += del;
		if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
	}
	return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
	// modified Lentz continued fraction for Q(a,x)
	const double tiny = 1e-300;
	double b = x + 1.0 - a;
	double c = 1.0 / tiny;
	double d = 1.0 / b;
	double h = d;
	for (int i = 1; i <= 500; ++i) {
		const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
		b += 2.0;
		d = an * d + b;
		if (std::fabs(d) < tiny) d = tiny;
		c = b + an / c;
		if (std::fabs(c) < tiny) c = tiny;
		d = 1.0 / d;
		const double del = d * c;
		h *= del;
		if (std::fabs(del - 1.0) < 1e-15) break;
	}
	return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
	if (x < 0.0 || a <= 0.0) throw OutOfRange("gamma_p: bad arguments");
	if (x == 0.0) return 0.0;
	if (x < a + 1.0) return detail::gamma_p_series(a, x);
	return 1.0 - detail::gamma_q_contfrac(a, x);
}

/// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_p(double statistic, int df) {
	if (df <= 0) throw OutOfRange("chi_square_p: df must be positive");
	if (statistic <= 0.0) return 1.0;
	return 1.0 - gamma_p(0.5 * df, 0.5 * statistic);
}

/// Chi-square uniformity test over pre-binned counts (equal expected mass).
inline double chi_square_uniformity_p(const std::vector<std::int64_t>& counts) {
	const int bins = static_cast<int>(counts.size());
	if (bins < 2) throw OutOfRange("need at least two bins");
	double total = 0.0;
	for (auto c : counts) total += static_cast<double>(c);
	if (total <= 0.0) return 1.0;
	const double expected = total / bins;
	double stat = 0.0;
	for (auto c : counts) {
		const double d = static_cast<double>(c) - expected;
		stat += d * d / expected;
	}
	return chi_square_p(stat, bins - 1);
}

/// Kolmogorov limiting distribution Q_KS(lambda) = P(D > observed).
inline double ks_q(double lambda) {
	if (lambda < 1e-8) return 1.0;
	double sum = 0.0;
	double sign = 1.0;
	for (int j = 1; j <= 100; ++j) {
		const double term = std::exp(-2.0 * j * j * lambda * lambda);
		sum += sign * term;
		sign = -sign;
		if (term < 1e-16) break;
	}
	return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test against Uniform(0,1); returns the asymptotic p-value.
inline double ks_uniform_p(std::vector<double> sample) {
	const std::size_t n = sample.size();
	if (n < 5) throw TooFewDays("ks_uniform_p: need at least 5 observations");
	std::sort(sample.begin(), sample.end());
	double d = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		const double u = std::clamp(sample[i], 0.0, 1.0);
		d = std::max(d, std::fabs(u - static_cast<double>(i) / n));
		d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - u));
	}
	const double sq = std::sqrt(static_cast<double>(n));
	return ks_q((sq + 0.12 + 0.11 / sq) * d);
}

inline double mean(const std::vector<double>& v) {
	double s = 0.0;
	for (double x : v) s += x;
	return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance_population(const std::vector<double>& v) {
	const double m = mean(v);
	double s = 0.0;
	for (double x : v) s += (x - m) * (x - m);
	return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Empirical quantile with linear interpolation (type-7).
inline double quantile(std::vector<double> v, double q) {
	if (v.empty()) throw OutOfRange("quantile of empty sample");
	std::sort(v.begin(), v.end());
	if (q <= 0.0) return v.front();
	if (q >= 1.0) return v.back();
	const double pos = q * static_cast<double>(v.size() - 1);
	const std::size_t lo = static_cast<std::size_t>(pos);
	const double frac = pos - static_cast<double>(lo);
	if (lo + 1 >= v.size()) return v.back();
	return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

} // namespace epf
