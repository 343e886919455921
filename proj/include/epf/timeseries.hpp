#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

/// One hour of one day. Days count from an arbitrary dataset epoch; hours
/// run 1..24 (hour h covers the clock interval [h-1, h)).
struct HourStamp {
	std::int64_t day = 0;
	int hour = 1;

	friend bool operator==(const HourStamp& a, const HourStamp& b) {
		return a.day == b.day && a.hour == b.hour;
	}
	friend bool operator!=(const HourStamp& a, const HourStamp& b) { return !(a == b); }
	friend bool operator<(const HourStamp& a, const HourStamp& b) {
		return a.day < b.day || (a.day == b.day && a.hour < b.hour);
	}
	friend bool operator<=(const HourStamp& a, const HourStamp& b) { return a < b || a == b; }
};

inline void validate_stamp(const HourStamp& s) {
	if (s.hour < 1 || s.hour > 24) throw OutOfRange("HourStamp hour must be in [1,24]");
}

/// Stamp advanced by a (possibly negative) number of hours.
inline HourStamp advance(HourStamp s, std::int64_t hours) {
	validate_stamp(s);
	std::int64_t linear = s.day * 24 + (s.hour - 1) + hours;
	HourStamp out;
	// floor division so negative linear positions land on the right day
	out.day = linear >= 0 ? linear / 24 : -((-linear + 23) / 24);
	out.hour = static_cast<int>(linear - out.day * 24) + 1;
	return out;
}

/// Signed hour distance from a to b.
inline std::int64_t hours_between(const HourStamp& a, const HourStamp& b) {
	return (b.day - a.day) * 24 + (b.hour - a.hour);
}

/// Weekday (1 = Monday .. 7 = Sunday) plus public-holiday flag for one day.
struct CalendarFlags {
	int weekday = 1;
	bool is_holiday = false;
};

inline void validate_flags(const CalendarFlags& f) {
	if (f.weekday < 1 || f.weekday > 7) throw OutOfRange("weekday must be in [1,7]");
}

/// Slot of a stamp on the weekly axis: Monday h1 -> 1 ... Sunday h24 -> 168,
/// public holidays mapped to 168 + hour (169..192).
inline int hour_of_week(const HourStamp& stamp, const CalendarFlags& flags) {
	validate_stamp(stamp);
	validate_flags(flags);
	if (flags.is_holiday) return 168 + stamp.hour;
	return (flags.weekday - 1) * 24 + stamp.hour;
}

enum class Unit { None, MWh, EurPerMWh };

inline const char* unit_name(Unit u) {
	switch (u) {
		case Unit::MWh: return "MWh";
		case Unit::EurPerMWh: return "EUR/MWh";
		default: return "";
	}
}

/// Contiguous hourly series. Value k belongs to `start` advanced by k hours;
/// calendar flags are stored once per day touched by the range. Immutable
/// after construction.
class HourlySeries {
public:
	HourlySeries() = default;

	HourlySeries(HourStamp start, std::vector<double> values,
	             std::vector<CalendarFlags> day_flags, Unit unit = Unit::None)
	    : start_(start), values_(std::move(values)), days_(std::move(day_flags)), unit_(unit) {
		validate_stamp(start_);
		if (values_.empty()) throw OutOfRange("HourlySeries must not be empty");
		for (double v : values_) {
			if (!std::isfinite(v)) throw OutOfRange("HourlySeries values must be finite (no gaps)");
		}
		if (days_.size() != static_cast<std::size_t>(n_days()))
			throw AlignmentError("calendar flags must cover every day touched by the series");
		for (std::size_t k = 0; k < days_.size(); ++k) {
			validate_flags(days_[k]);
			if (k > 0 && days_[k].weekday != days_[k - 1].weekday % 7 + 1)
				throw AlignmentError("weekday must advance cyclically with day index");
		}
	}

	/// Convenience constructor for whole-day series starting at hour 1.
	static HourlySeries whole_days(std::int64_t first_day, std::vector<double> values,
	                               std::vector<CalendarFlags> day_flags, Unit unit = Unit::None) {
		if (values.size() % 24 != 0)
			throw AlignmentError("whole-day series length must be a multiple of 24");
		return HourlySeries({first_day, 1}, std::move(values), std::move(day_flags), unit);
	}

	const HourStamp& start() const { return start_; }
	HourStamp end() const { return advance(start_, static_cast<std::int64_t>(values_.size()) - 1); }
	std::size_t size() const { return values_.size(); }
	Unit unit() const { return unit_; }
	const std::vector<double>& values() const { return values_; }
	double operator[](std::size_t k) const { return values_[k]; }

	std::int64_t first_day() const { return start_.day; }
	std::int64_t n_days() const {
		return (start_.hour - 1 + static_cast<std::int64_t>(values_.size()) + 23) / 24;
	}

	HourStamp stamp_at(std::size_t k) const { return advance(start_, static_cast<std::int64_t>(k)); }

	bool contains(const HourStamp& s) const {
		std::int64_t k = hours_between(start_, s);
		return k >= 0 && k < static_cast<std::int64_t>(values_.size());
	}

	double value_at(const HourStamp& s) const {
		validate_stamp(s);
		std::int64_t k = hours_between(start_, s);
		if (k < 0 || k >= static_cast<std::int64_t>(values_.size()))
			throw OutOfRange("stamp outside series range");
		return values_[static_cast<std::size_t>(k)];
	}

	const CalendarFlags& flags_for_day(std::int64_t day) const {
		std::int64_t k = day - start_.day;
		if (k < 0 || k >= static_cast<std::int64_t>(days_.size()))
			throw OutOfRange("day outside series calendar");
		return days_[static_cast<std::size_t>(k)];
	}

	const CalendarFlags& flags_at(std::size_t k) const { return flags_for_day(stamp_at(k).day); }

	/// Inclusive sub-range copy; `from` and `to` must lie inside the series.
	HourlySeries slice(const HourStamp& from, const HourStamp& to) const {
		validate_stamp(from);
		validate_stamp(to);
		if (to < from) throw OutOfRange("slice: to < from");
		std::int64_t a = hours_between(start_, from);
		std::int64_t b = hours_between(start_, to);
		if (a < 0 || b >= static_cast<std::int64_t>(values_.size()))
			throw OutOfRange("slice bounds exceed series");
		std::vector<double> vals(values_.begin() + a, values_.begin() + b + 1);
		std::vector<CalendarFlags> flags(days_.begin() + (from.day - start_.day),
		                                 days_.begin() + (to.day - start_.day) + 1);
		return HourlySeries(from, std::move(vals), std::move(flags), unit_);
	}

	/// Units must match; ranges must be identical.
	friend HourlySeries operator+(const HourlySeries& a, const HourlySeries& b) {
		a.check_aligned(b);
		std::vector<double> v(a.values_);
		for (std::size_t k = 0; k < v.size(); ++k) v[k] += b.values_[k];
		return HourlySeries(a.start_, std::move(v), a.days_, a.unit_);
	}

	friend HourlySeries operator-(const HourlySeries& a, const HourlySeries& b) {
		a.check_aligned(b);
		std::vector<double> v(a.values_);
		for (std::size_t k = 0; k < v.size(); ++k) v[k] -= b.values_[k];
		return HourlySeries(a.start_, std::move(v), a.days_, a.unit_);
	}

	void check_aligned(const HourlySeries& other) const {
		if (!(start_ == other.start_) || values_.size() != other.values_.size())
			throw AlignmentError("series ranges differ");
	}

private:
	HourStamp start_;
	std::vector<double> values_;
	std::vector<CalendarFlags> days_; // one per day touched, starting at start_.day
	Unit unit_ = Unit::None;
};

/// Join two series where b starts exactly one hour after a ends.
inline HourlySeries concat(const HourlySeries& a, const HourlySeries& b) {
	if (!(advance(a.end(), 1) == b.start()))
		throw AlignmentError("concat: series are not contiguous");
	if (a.unit() != b.unit()) throw AlignmentError("concat: unit mismatch");
	std::vector<double> vals(a.values());
	vals.insert(vals.end(), b.values().begin(), b.values().end());
	std::vector<CalendarFlags> flags;
	for (std::int64_t d = a.first_day(); d < a.first_day() + a.n_days(); ++d)
		flags.push_back(a.flags_for_day(d));
	for (std::int64_t d = a.first_day() + a.n_days(); d <= b.end().day; ++d)
		flags.push_back(b.flags_for_day(d));
	return HourlySeries(a.start(), std::move(vals), std::move(flags), a.unit());
}

/// Rolling-window description; step is one day throughout this project.
struct WindowSpec {
	int length_days = 365;
	int step_days = 1;
};

inline void validate_window(const WindowSpec& w) {
	if (w.length_days < 1 || w.step_days < 1) throw OutOfRange("window lengths must be >= 1");
}

// ---------------------------------------------------------------------------
// Civil-date helpers for calendar-year slicing and CSV timestamps.
// Standard proleptic-Gregorian day counting relative to 1970-01-01.
// ---------------------------------------------------------------------------

struct CivilDate {
	int year = 1970;
	int month = 1;
	int day = 1;
};

inline std::int64_t days_from_civil(const CivilDate& c) {
	int y = c.year;
	const int m = c.month;
	const int d = c.day;
	y -= m <= 2;
	const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
	const unsigned yoe = static_cast<unsigned>(y - era * 400);
	const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
	                     static_cast<unsigned>(d) - 1u;
	const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
	return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
	z += 719468;
	const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
	const unsigned doe = static_cast<unsigned>(z - era * 146097);
	const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
	const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
	const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
	const unsigned mp = (5 * doy + 2) / 153;
	const unsigned d = doy - (153 * mp + 2) / 5 + 1;
	const unsigned m = mp + (mp < 10 ? 3 : -9);
	CivilDate out;
	out.year = static_cast<int>(y + (m <= 2));
	out.month = static_cast<int>(m);
	out.day = static_cast<int>(d);
	return out;
}

/// Weekday of a civil day count, 1 = Monday .. 7 = Sunday.
inline int weekday_from_days(std::int64_t z) {
	// 1970-01-01 was a Thursday (= 4)
	std::int64_t w = (z + 3) % 7;
	if (w < 0) w += 7;
	return static_cast<int>(w) + 1;
}

/// Maps dataset day indices to civil dates and holiday flags.
class Calendar {
public:
	Calendar() = default;
	Calendar(CivilDate epoch, std::vector<std::int64_t> holiday_days = {})
	    : epoch_days_(days_from_civil(epoch)), holidays_(std::move(holiday_days)) {
		std::sort(holidays_.begin(), holidays_.end());
	}

	CivilDate date_of(std::int64_t day_index) const { return civil_from_days(epoch_days_ + day_index); }
	int year_of(std::int64_t day_index) const { return date_of(day_index).year; }

	CalendarFlags flags_of(std::int64_t day_index) const {
		CalendarFlags f;
		f.weekday = weekday_from_days(epoch_days_ + day_index);
		f.is_holiday = std::binary_search(holidays_.begin(), holidays_.end(), day_index);
		return f;
	}

	std::vector<CalendarFlags> flags_range(std::int64_t first_day, std::int64_t n_days) const {
		std::vector<CalendarFlags> out;
		out.reserve(static_cast<std::size_t>(n_days));
		for (std::int64_t d = first_day; d < first_day + n_days; ++d) out.push_back(flags_of(d));
		return out;
	}

	std::int64_t day_index_of(const CivilDate& date) const { return days_from_civil(date) - epoch_days_; }

private:
	std::int64_t epoch_days_ = 0;
	std::vector<std::int64_t> holidays_; // day indices relative to epoch
};

inline std::string format_date(const CivilDate& c) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
	return buf;
}

inline CivilDate parse_date(const std::string& s) {
	CivilDate c;
	if (std::sscanf(s.c_str(), "%d-%d-%d", &c.year, &c.month, &c.day) != 3)
		throw SchemaError("bad date: " + s);
	if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31)
		throw SchemaError("bad date: " + s);
	return c;
}

} // namespace epf
