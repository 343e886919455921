#pragma once

#include <cstdint>
#include <random>

namespace epf {

/// Deterministic random source. The mt19937_64 stream is fully specified by
/// the standard and the transformations below are hand-rolled, so identical
/// seeds give identical draws on every platform.
class Rng {
public:
	explicit Rng(std::uint64_t seed = 1) : eng_(seed) {}

	std::uint64_t bits() { return eng_(); }

	double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Inclusive integer range.
	std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
		const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
		return lo + static_cast<std::int64_t>(eng_() % span);
	}

	double normal() {
		// Box-Muller, cached second deviate
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		double u1 = uniform();
		double u2 = uniform();
		while (u1 <= 1e-300) u1 = uniform();
		const double r = std::sqrt(-2.0 * std::log(u1));
		const double theta = 6.283185307179586476925286766559 * u2;
		spare_ = r * std::sin(theta);
		has_spare_ = true;
		return r * std::cos(theta);
	}

	double normal(double mean, double sd) { return mean + sd * normal(); }

private:
	std::mt19937_64 eng_;
	bool has_spare_ = false;
	double spare_ = 0.0;
};

} // namespace epf
