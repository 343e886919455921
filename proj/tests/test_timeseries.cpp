#include <catch2/catch.hpp>

#include "epf/rng.hpp"
#include "epf/timeseries.hpp"

using namespace epf;

namespace {

std::vector<CalendarFlags> week_flags(int first_weekday, int n_days,
                                      const std::vector<int>& holidays = {}) {
	std::vector<CalendarFlags> out;
	for (int d = 0; d < n_days; ++d) {
		CalendarFlags f;
		f.weekday = (first_weekday - 1 + d) % 7 + 1;
		f.is_holiday = std::find(holidays.begin(), holidays.end(), d) != holidays.end();
		out.push_back(f);
	}
	return out;
}

} // namespace

TEST_CASE("slice returns the requested sub-range", "[timeseries]") {
	std::vector<double> vals(48);
	for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = static_cast<double>(k + 1);
	auto s = HourlySeries::whole_days(1, vals, week_flags(1, 2));

	auto day1 = s.slice({1, 1}, {1, 24});
	REQUIRE(day1.size() == 24);
	CHECK(day1[0] == 1.0);
	CHECK(day1[23] == 24.0);

	auto point = s.slice({1, 5}, {1, 5});
	REQUIRE(point.size() == 1);
	CHECK(point[0] == 5.0);

	CHECK_THROWS_AS(s.slice({1, 9}, {1, 5}), OutOfRange);
	CHECK_THROWS_AS(s.slice({1, 1}, {3, 1}), OutOfRange);
}

TEST_CASE("daily slices concatenate back to the original", "[timeseries]") {
	Rng rng(7);
	std::vector<double> vals(24 * 9);
	for (auto& v : vals) v = rng.normal(100.0, 25.0);
	auto s = HourlySeries::whole_days(10, vals, week_flags(3, 9, {2, 5}), Unit::MWh);

	HourlySeries glued = s.slice({10, 1}, {10, 24});
	for (std::int64_t d = 11; d < 19; ++d) glued = concat(glued, s.slice({d, 1}, {d, 24}));
	REQUIRE(glued.size() == s.size());
	for (std::size_t k = 0; k < s.size(); ++k) CHECK(glued[k] == s[k]);
	for (std::int64_t d = 10; d < 19; ++d)
		CHECK(glued.flags_for_day(d).is_holiday == s.flags_for_day(d).is_holiday);
}

TEST_CASE("hour_of_week covers the weekly axis", "[timeseries]") {
	CHECK(hour_of_week({0, 1}, {1, false}) == 1);
	CHECK(hour_of_week({0, 24}, {7, false}) == 168);
	CHECK(hour_of_week({0, 5}, {3, true}) == 173);

	// bijection on the non-holiday domain
	std::vector<bool> seen(169, false);
	for (int wd = 1; wd <= 7; ++wd) {
		for (int h = 1; h <= 24; ++h) {
			const int slot = hour_of_week({0, h}, {wd, false});
			REQUIRE(slot >= 1);
			REQUIRE(slot <= 168);
			CHECK_FALSE(seen[slot]);
			seen[slot] = true;
		}
	}
	for (int slot = 1; slot <= 168; ++slot) CHECK(seen[slot]);
}

TEST_CASE("advancing a stamp by 24 hours shifts exactly one day", "[timeseries]") {
	for (int h = 1; h <= 24; ++h) {
		const HourStamp s{5, h};
		const HourStamp t = advance(s, 24);
		CHECK(t.day == 6);
		CHECK(t.hour == h);
	}
	CHECK(advance({5, 1}, -1).day == 4);
	CHECK(advance({5, 1}, -1).hour == 24);
	CHECK(hours_between({0, 1}, {1, 1}) == 24);
}

TEST_CASE("series construction rejects gaps and bad calendars", "[timeseries]") {
	CHECK_THROWS_AS(HourlySeries({0, 1}, {1.0, std::nan("")}, week_flags(1, 1)), OutOfRange);
	CHECK_THROWS_AS(HourlySeries::whole_days(0, std::vector<double>(24, 1.0), week_flags(1, 2)),
	                AlignmentError);
	// weekday sequence must advance cyclically
	auto flags = week_flags(1, 2);
	flags[1].weekday = 5;
	CHECK_THROWS_AS(HourlySeries::whole_days(0, std::vector<double>(48, 1.0), flags),
	                AlignmentError);
}

TEST_CASE("civil date round trip and weekday anchor", "[timeseries]") {
	// 2016-01-01 was a Friday
	const std::int64_t z = days_from_civil({2016, 1, 1});
	CHECK(weekday_from_days(z) == 5);
	for (std::int64_t d = z - 400; d < z + 400; d += 13) {
		const CivilDate c = civil_from_days(d);
		CHECK(days_from_civil(c) == d);
	}
	Calendar cal({2016, 1, 1}, {360});
	CHECK(cal.year_of(0) == 2016);
	CHECK(cal.year_of(366) == 2017); // 2016 is a leap year
	CHECK(cal.flags_of(0).weekday == 5);
	CHECK(cal.flags_of(360).is_holiday);
	CHECK_FALSE(cal.flags_of(359).is_holiday);
}
