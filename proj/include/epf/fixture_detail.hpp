#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/load_preproc.hpp"
#include "epf/rng.hpp"
#include "epf/timeseries.hpp"

namespace epf::detail_fixture {

constexpr double kPi = 3.14159265358979323846;

struct ZoneWorld {
	std::string id;
	std::vector<double> load_actual; // per hour
	std::vector<double> load_tso;
	std::vector<double> wind_forecast;
};

struct FixtureWorld {
	Calendar calendar;
	CivilDate epoch;
	int n_days = 0;
	bool toy = false;
	std::vector<ZoneWorld> zones;
	std::vector<std::int64_t> holidays;
	std::vector<double> res_feedin_za; // wind cluster feed-in, MWh
	double wind_mean = 0.0, wind_sd = 1.0;
};

inline double daily_shape(int hour) { // hour 1..24
	return std::sin(2.0 * kPi * (hour - 7) / 24.0);
}

inline FixtureWorld build_world(const CivilDate& epoch, int n_days, bool toy, Rng& rng) {
	FixtureWorld w;
	w.epoch = epoch;
	w.n_days = n_days;
	w.toy = toy;
	for (int d = 0; d < n_days; ++d)
		if (d % 30 == 17) w.holidays.push_back(d);
	w.calendar = Calendar(epoch, w.holidays);

	const double base_load = toy ? 900.0 : 38000.0;
	const double daily_amp = toy ? 220.0 : 9000.0;
	const double weekly_dip = toy ? 120.0 : 5000.0;

	// focal-zone TSO forecast error: weekly profile + seasonal ARMA remainder
	SarmaParams err_law;
	err_law.phi1 = 0.55;
	err_law.phi24 = 0.2;
	err_law.omega1 = 0.25;
	err_law.omega24 = 0.1;
	std::vector<double> innov(static_cast<std::size_t>(n_days) * 24);
	const double err_sd = toy ? 14.0 : 450.0;
	for (auto& v : innov) v = rng.normal(0.0, err_sd);
	std::vector<double> rc = simulate_sarma(err_law, innov);

	// wind: slow mean-reverting process mapped into [0.05, 0.95] of capacity
	const double wind_cap = toy ? 400.0 : 22000.0;
	std::vector<double> wind_state(static_cast<std::size_t>(n_days) * 24);
	double ws = 0.0;
	for (auto& v : wind_state) {
		ws = 0.97 * ws + rng.normal(0.0, 0.25);
		v = ws;
	}

	ZoneWorld za;
	za.id = "ZA";
	for (int d = 0; d < n_days; ++d) {
		const CalendarFlags f = w.calendar.flags_of(d);
		const bool weekend = f.weekday >= 6 || f.is_holiday;
		for (int h = 1; h <= 24; ++h) {
			const std::size_t t = static_cast<std::size_t>(d) * 24 + h - 1;
			const double season = 1.0 + 0.08 * std::sin(2.0 * kPi * d / 365.0);
			const double load = season * (base_load + daily_amp * daily_shape(h) -
			                              (weekend ? weekly_dip : 0.0)) +
			                    rng.normal(0.0, toy ? 8.0 : 250.0);
			// error decomposes into a weekly profile plus the remainder
			const double profile = (toy ? 10.0 : 300.0) * daily_shape(h) +
			                       (toy ? 3.0 : 90.0) * (f.weekday - 4);
			const double eps = profile + rc[t];
			za.load_actual.push_back(load);
			za.load_tso.push_back(load - eps);
			const double frac = 0.05 + 0.9 / (1.0 + std::exp(-wind_state[t]));
			const double feedin = wind_cap * frac;
			w.res_feedin_za.push_back(feedin);
			za.wind_forecast.push_back(feedin + rng.normal(0.0, toy ? 4.0 : 150.0));
		}
	}
	w.zones.push_back(std::move(za));

	if (toy) {
		ZoneWorld zb;
		zb.id = "ZB";
		for (int d = 0; d < n_days; ++d) {
			for (int h = 1; h <= 24; ++h) {
				const double load = 350.0 + 70.0 * daily_shape(h) + rng.normal(0.0, 5.0);
				zb.load_actual.push_back(load);
				zb.load_tso.push_back(load + rng.normal(0.0, 6.0));
				zb.wind_forecast.push_back(0.0);
			}
		}
		w.zones.push_back(std::move(zb));
	}

	double sum = 0.0, sq = 0.0;
	for (double v : w.zones[0].wind_forecast) {
		sum += v;
		sq += v * v;
	}
	w.wind_mean = sum / static_cast<double>(w.zones[0].wind_forecast.size());
	w.wind_sd = std::sqrt(std::max(1e-9, sq / w.zones[0].wind_forecast.size() - w.wind_mean * w.wind_mean));
	return w;
}

inline std::string stamp(const Calendar& cal, std::int64_t day, int hour) {
	char buf[24];
	const CivilDate c = cal.date_of(day);
	std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00", c.year, c.month, c.day, hour - 1);
	return buf;
}

inline void write_input_files(const std::filesystem::path& dir, const FixtureWorld& w) {
	const Calendar& cal = w.calendar;
	const bool toy = w.toy;

	auto hourly_file = [&](const std::string& name, const std::string& key_col,
	                       const std::string& val_col,
	                       const std::function<void(CsvWriter&)>& body) {
		CsvWriter csv(dir / name);
		csv.row({"timestamp", key_col, val_col});
		body(csv);
	};

	hourly_file("load_actual.csv", "zone", "load_mwh", [&](CsvWriter& csv) {
		for (const auto& z : w.zones) {
			for (std::int64_t d = 0; d < w.n_days; ++d) {
				for (int h = 1; h <= 24; ++h) {
					const double v = z.load_actual[static_cast<std::size_t>(d) * 24 + h - 1];
					// one synthetic 25-hour day and one 23-hour day exercise
					// the normalisation path on the focal zone
					if (z.id == "ZA" && d == 1 && h == 3) {
						csv.row({stamp(cal, d, h), z.id, fmt_num(v - 2.0)});
						csv.row({stamp(cal, d, h), z.id, fmt_num(v + 2.0)});
						continue;
					}
					if (z.id == "ZA" && d == 2 && h == 4) continue; // missing hour
					csv.row({stamp(cal, d, h), z.id, fmt_num(v)});
				}
			}
		}
	});
	hourly_file("load_tso_forecast.csv", "zone", "load_mwh", [&](CsvWriter& csv) {
		for (const auto& z : w.zones)
			for (std::int64_t d = 0; d < w.n_days; ++d)
				for (int h = 1; h <= 24; ++h)
					csv.row({stamp(cal, d, h), z.id,
					         fmt_num(z.load_tso[static_cast<std::size_t>(d) * 24 + h - 1])});
	});
	hourly_file("wind_forecast.csv", "zone", "wind_mwh", [&](CsvWriter& csv) {
		for (const auto& z : w.zones)
			for (std::int64_t d = 0; d < w.n_days; ++d)
				for (int h = 1; h <= 24; ++h)
					csv.row({stamp(cal, d, h), z.id,
					         fmt_num(z.wind_forecast[static_cast<std::size_t>(d) * 24 + h - 1])});
	});
	hourly_file("res_forecast.csv", "cluster_id", "feedin_mwh", [&](CsvWriter& csv) {
		for (std::int64_t d = 0; d < w.n_days; ++d)
			for (int h = 1; h <= 24; ++h)
				csv.row({stamp(cal, d, h), "za_wind",
				         fmt_num(w.res_feedin_za[static_cast<std::size_t>(d) * 24 + h - 1])});
	});

	{
		CsvWriter csv(dir / "clusters.csv");
		csv.row({"cluster_id", "zone", "kind", "cap_mw", "g_min", "startup_cost_eur_mw",
		         "availability", "vc_full_eur_mwh", "vc_minload_eur_mwh", "efficiency_cycle",
		         "cer", "fuel", "co2_t_per_mwh_th", "efficiency_el", "efficiency_el_minload"});
		auto row = [&](const std::string& id, const std::string& zone, const std::string& kind,
		               double cap, double gmin, double sc, double vc, double vcml) {
			csv.row({id, zone, kind, fmt_num(cap), fmt_num(gmin), fmt_num(sc), "1",
			         vc >= 0.0 ? fmt_num(vc) : "", vcml >= 0.0 ? fmt_num(vcml) : "", "0.75", "9",
			         "", "", "", ""});
		};
		if (toy) {
			row("za_coal", "ZA", "thermal", 900.0, 0.35, 55.0, 36.0, 44.0);
			row("za_gas", "ZA", "thermal", 500.0, 0.3, 40.0, 70.0, 86.0);
			row("za_wind", "ZA", "renewable", 400.0, 0.0, 0.0, -1.0, -1.0);
			row("za_psp", "ZA", "storage_mid", 120.0, 0.0, 0.0, -1.0, -1.0);
			// the gas unit in ZB burns priced fuel so ingestion computes vc
			csv.row({"zb_gas", "ZB", "thermal", "600", "0.25", "35", "1", "", "", "", "", "gas",
			         "0.2", "0.5", "0.42"});
		} else {
			row("za_nuclear", "ZA", "thermal", 13000.0, 0.5, 18.0, 9.0, 11.0);
			row("za_lignite", "ZA", "thermal", 11000.0, 0.4, 50.0, 27.0, 33.0);
			row("za_coal", "ZA", "thermal", 9000.0, 0.35, 60.0, 46.0, 56.0);
			row("za_gas", "ZA", "thermal", 11000.0, 0.3, 45.0, 72.0, 88.0);
			row("za_wind", "ZA", "renewable", 22000.0, 0.0, 0.0, -1.0, -1.0);
			row("za_psp", "ZA", "storage_mid", 2200.0, 0.0, 0.0, -1.0, -1.0);
		}
	}

	if (toy) {
		CsvWriter csv(dir / "fuel_co2_prices.csv");
		csv.row({"date", "fuel", "fuel_eur_mwh_th", "co2_eur_t"});
		for (std::int64_t d = 0; d < w.n_days; d += 7)
			csv.row({format_date(cal.date_of(d)), "gas", fmt_num(22.0 + 0.02 * d), fmt_num(25.0)});
	}

	{
		CsvWriter csv(dir / "chp_mustrun.csv");
		csv.row({"timestamp", "zone", "chp_mw"});
		const double chp = toy ? 80.0 : 4000.0;
		for (std::int64_t d = 0; d < w.n_days; ++d)
			for (int h = 1; h <= 24; ++h) {
				const double v = chp * (1.0 + 0.15 * std::sin(2.0 * kPi * d / 365.0));
				csv.row({stamp(cal, d, h), "ZA", fmt_num(v)});
			}
	}

	{
		CsvWriter csv(dir / "reserves.csv");
		csv.row({"zone", "product", "mw"});
		if (toy) {
			csv.row({"ZA", "pr", "20"});
			csv.row({"ZA", "sr_pos", "25"});
			csv.row({"ZA", "sr_neg", "25"});
		} else {
			csv.row({"ZA", "pr", "300"});
			csv.row({"ZA", "sr_pos", "400"});
			csv.row({"ZA", "sr_neg", "400"});
		}
	}

	if (toy) {
		CsvWriter csv(dir / "ntc.csv");
		csv.row({"timestamp", "from_zone", "to_zone", "ntc_mw"});
		for (std::int64_t d = 0; d < w.n_days; ++d)
			for (int h = 1; h <= 24; ++h) {
				csv.row({stamp(cal, d, h), "ZA", "ZB", "150"});
				csv.row({stamp(cal, d, h), "ZB", "ZA", "150"});
			}
	}

	{
		CsvWriter csv(dir / "outages.csv");
		csv.row({"timestamp", "cluster_id", "outage_mw"});
		// a simple scheduled outage block on the largest thermal unit
		const std::string id = toy ? "za_coal" : "za_lignite";
		const double mw = toy ? 150.0 : 1500.0;
		for (std::int64_t d = w.n_days / 2; d < w.n_days / 2 + 5 && d < w.n_days; ++d)
			for (int h = 1; h <= 24; ++h) csv.row({stamp(cal, d, h), id, fmt_num(mw)});
	}

	{
		CsvWriter csv(dir / "holidays.csv");
		csv.row({"date"});
		for (std::int64_t d : w.holidays) csv.row({format_date(cal.date_of(d))});
	}
}

/// Actual prices: dispatch estimators plus an hourly-resolution ARX error.
/// Days before the dispatch span carry a smooth placeholder (they are never
/// evaluated). With no estimators at all, writes the placeholder everywhere.
inline void write_prices(const std::filesystem::path& dir, const FixtureWorld& w,
                         const std::map<std::int64_t, std::array<double, 24>>* p_hat, Rng* rng) {
	const Calendar& cal = w.calendar;
	std::vector<double> eps;
	if (p_hat && rng) {
		// error law: daily and weekly persistence, holiday and wind effects
		const double phi1 = 0.3, phi3 = 0.25, phi4 = 0.2, phi5 = 0.15;
		const double om_min = 0.05, om_max = -0.05, om_hol = 6.0, om_wind = 1.2;
		const double sd = w.toy ? 2.0 : 2.2;
		std::vector<double> psi;
		std::vector<double> dmin(w.n_days, 0.0), dmax(w.n_days, 0.0);
		for (std::int64_t d = 0; d < w.n_days; ++d) {
			double lo = 1e300, hi = -1e300;
			const CalendarFlags f = cal.flags_of(d);
			for (int h = 1; h <= 24; ++h) {
				const std::size_t t = eps.size();
				auto lag = [&](std::size_t back) { return t >= back ? eps[t - back] : 0.0; };
				const double wz =
				    (w.zones[0].wind_forecast[t] - w.wind_mean) / w.wind_sd;
				const double innov = rng->normal(0.0, sd);
				const double val = phi1 * lag(1) + phi3 * lag(24) + phi4 * lag(168) +
				                   phi5 * (t > 0 ? psi[t - 1] : 0.0) +
				                   om_min * (d > 0 ? dmin[d - 1] : 0.0) +
				                   om_max * (d > 0 ? dmax[d - 1] : 0.0) +
				                   om_hol * (f.is_holiday ? 1.0 : 0.0) + om_wind * wz + innov;
				eps.push_back(val);
				psi.push_back(innov);
				lo = std::min(lo, val);
				hi = std::max(hi, val);
			}
			dmin[d] = lo;
			dmax[d] = hi;
		}
	}

	CsvWriter csv(dir / "prices_actual.csv");
	csv.row({"timestamp", "zone", "price_eur_mwh"});
	for (const auto& z : w.zones) {
		for (std::int64_t d = 0; d < w.n_days; ++d) {
			for (int h = 1; h <= 24; ++h) {
				double price = 40.0 + 12.0 * daily_shape(h);
				if (z.id == "ZA" && p_hat && rng) {
					const auto it = p_hat->find(d);
					if (it != p_hat->end())
						price = it->second[h - 1] + eps[static_cast<std::size_t>(d) * 24 + h - 1];
				}
				csv.row({stamp(cal, d, h), z.id, fmt_num(price)});
			}
		}
	}
}

} // namespace epf::detail_fixture
