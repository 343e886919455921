#pragma once

// File bundle ingestion. One CSV per parameter class; hourly files carry
// ISO-8601 local timestamps. Daylight-saving days are normalised to strict
// 24-hour days here (duplicate hour averaged, missing hour interpolated), so
// everything downstream can assume 24 hours per day.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/dispatch.hpp"
#include "epf/errors.hpp"
#include "epf/timeseries.hpp"

namespace epf {

struct HourKey {
	std::int64_t civil_days = 0; // days since 1970-01-01
	int hour = 1;                // 1..24

	friend bool operator<(const HourKey& a, const HourKey& b) {
		return a.civil_days < b.civil_days || (a.civil_days == b.civil_days && a.hour < b.hour);
	}
};

inline HourKey parse_timestamp(const std::string& ts, const std::string& context) {
	int y = 0, mo = 0, d = 0, h = -1, mi = 0, se = 0;
	const int got = std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se);
	if (got < 4 || h < 0 || h > 23)
		throw SchemaError(context + ": bad timestamp '" + ts + "'");
	return {days_from_civil({y, mo, d}), h + 1};
}

/// Static cluster description straight from clusters.csv; hourly series are
/// joined later per rolling window.
struct ClusterSpec {
	std::string id;
	std::string zone;
	ClusterKind kind = ClusterKind::Thermal;
	double cap_mw = 0.0;
	double g_min = 0.0;
	double startup_cost = 0.0; // EUR/MW
	double availability = 1.0;
	double efficiency_el = 0.4;         // full-load electrical efficiency
	double efficiency_el_minload = 0.4; // part-load electrical efficiency
	std::string fuel;                   // key into the fuel price file
	double co2_t_per_mwh_th = 0.0;
	std::optional<double> vc_full;    // precomputed variable cost, EUR/MWh
	std::optional<double> vc_minload; // precomputed part-load cost, EUR/MWh
	double efficiency_cycle = 0.75;   // storage cycle (stm)
	double cer = 9.0;                 // stored energy hours per MW (stm)
};

struct ZoneReserves {
	double pr = 0.0;
	double sr_pos = 0.0;
	double sr_neg = 0.0;
};

struct WvStepSeries {
	int step = 0;
	double capacity_mw = 0.0;
	std::vector<double> wv; // per dataset hour
};

/// Fully ingested, DST-normalised dataset. All hourly vectors share the
/// same day range [0, n_days) relative to the dataset epoch.
struct Dataset {
	Calendar calendar;
	CivilDate epoch;
	std::int64_t n_days = 0;
	std::vector<std::string> zones;

	std::map<std::string, std::vector<double>> load_actual;  // per zone, MWh
	std::map<std::string, std::vector<double>> load_tso;     // per zone, MWh
	std::map<std::string, std::vector<double>> wind;         // per zone, MWh
	std::map<std::string, std::vector<double>> prices;       // per zone, EUR/MWh

	std::vector<ClusterSpec> clusters;
	std::map<std::string, std::vector<double>> vc_full;      // per thermal cluster
	std::map<std::string, std::vector<double>> vc_minload;
	std::map<std::string, std::vector<double>> res_feedin;   // per renewable cluster, MWh
	std::map<std::string, std::vector<double>> outages;      // per cluster, MW
	std::map<std::string, std::vector<double>> chp;          // per zone, MW
	std::map<std::string, ZoneReserves> reserves;            // per zone
	std::map<std::string, std::vector<WvStepSeries>> water;  // per stl/hr cluster
	std::vector<NtcEntry> ntc_pairs;                         // window-agnostic; see ntc_series
	std::map<std::pair<std::string, std::string>, std::vector<double>> ntc_series;

	std::vector<std::string> warnings;

	std::size_t hours() const { return static_cast<std::size_t>(n_days) * 24; }

	const ClusterSpec* cluster(const std::string& id) const {
		for (const auto& c : clusters)
			if (c.id == id) return &c;
		return nullptr;
	}

	std::vector<CalendarFlags> flags_range(std::int64_t first_day, std::int64_t days) const {
		return calendar.flags_range(first_day, days);
	}

	HourlySeries series(const std::vector<double>& values, std::int64_t first_day,
	                    std::int64_t days, Unit unit) const {
		std::vector<double> v(values.begin() + first_day * 24,
		                      values.begin() + (first_day + days) * 24);
		return HourlySeries::whole_days(first_day, std::move(v), flags_range(first_day, days), unit);
	}
};

namespace detail {

// (key, day, hour) -> list of raw values; duplicates come from the DST
// fall-back hour and are averaged, single gaps are interpolated
class HourlyAssembler {
public:
	void add(const std::string& key, const HourKey& when, double value) {
		cells_[key][when].push_back(value);
	}

	// zero-filled per-hour vector over [epoch_days, epoch_days + n_days)
	std::vector<double> sparse(const std::string& key, std::int64_t epoch_days,
	                           std::int64_t n_days) const {
		std::vector<double> out(static_cast<std::size_t>(n_days) * 24, 0.0);
		const auto it = cells_.find(key);
		if (it == cells_.end()) return out;
		for (const auto& [when, vals] : it->second) {
			const std::int64_t d = when.civil_days - epoch_days;
			if (d < 0 || d >= n_days) continue;
			double s = 0.0;
			for (double v : vals) s += v;
			out[static_cast<std::size_t>(d) * 24 + when.hour - 1] = s / static_cast<double>(vals.size());
		}
		return out;
	}

	// dense vector with gap audit: single missing hours (up to max_gap in a
	// row) are linearly interpolated, larger holes raise CoverageError
	std::vector<double> dense(const std::string& key, std::int64_t epoch_days, std::int64_t n_days,
	                          const std::string& file, int max_gap,
	                          std::vector<std::string>* warnings) const {
		const auto it = cells_.find(key);
		if (it == cells_.end())
			throw CoverageError(file + ": no rows for '" + key + "'");
		const std::size_t n = static_cast<std::size_t>(n_days) * 24;
		std::vector<double> out(n, 0.0);
		std::vector<bool> have(n, false);
		for (const auto& [when, vals] : it->second) {
			const std::int64_t d = when.civil_days - epoch_days;
			if (d < 0 || d >= n_days) continue;
			double s = 0.0;
			for (double v : vals) s += v;
			const std::size_t k = static_cast<std::size_t>(d) * 24 + when.hour - 1;
			out[k] = s / static_cast<double>(vals.size());
			have[k] = true;
			if (vals.size() > 1 && warnings)
				warnings->push_back(file + ": averaged " + std::to_string(vals.size()) +
				                    " duplicate rows for '" + key + "' (25-hour day)");
		}
		std::size_t k = 0;
		while (k < n) {
			if (have[k]) {
				++k;
				continue;
			}
			std::size_t gap_end = k;
			while (gap_end < n && !have[gap_end]) ++gap_end;
			const std::size_t gap = gap_end - k;
			if (k == 0 || gap_end == n || gap > static_cast<std::size_t>(max_gap))
				throw CoverageError(file + ": '" + key + "' has a " + std::to_string(gap) +
				                    "-hour gap beyond the interpolation limit");
			const double lo = out[k - 1];
			const double hi = out[gap_end];
			for (std::size_t j = 0; j < gap; ++j)
				out[k + j] = lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(gap + 1);
			if (warnings)
				warnings->push_back(file + ": interpolated a " + std::to_string(gap) +
				                    "-hour gap for '" + key + "'");
			k = gap_end;
		}
		return out;
	}

	bool empty() const { return cells_.empty(); }
	const std::map<std::string, std::map<HourKey, std::vector<double>>>& cells() const {
		return cells_;
	}

private:
	std::map<std::string, std::map<HourKey, std::vector<double>>> cells_;
};

inline ClusterKind parse_kind(const std::string& s, const std::string& context) {
	if (s == "thermal") return ClusterKind::Thermal;
	if (s == "renewable") return ClusterKind::Renewable;
	if (s == "storage_mid") return ClusterKind::StorageMid;
	if (s == "storage_long") return ClusterKind::StorageLong;
	if (s == "hydro_reservoir") return ClusterKind::HydroReservoir;
	if (s == "baseload") return ClusterKind::Baseload;
	throw SchemaError(context + ": unknown cluster kind '" + s + "'");
}

} // namespace detail

/// Reads and validates the whole bundle. Schema violations are collected
/// and reported together; coverage problems fail fast per series.
inline Dataset ingest(const std::filesystem::path& bundle_dir) {
	namespace fs = std::filesystem;
	std::vector<std::string> schema_errors;
	Dataset ds;

	auto load_table = [&](const std::string& name, bool required) -> std::optional<CsvTable> {
		const fs::path p = bundle_dir / name;
		if (!fs::exists(p)) {
			if (required) schema_errors.push_back(name + ": file missing");
			return std::nullopt;
		}
		try {
			return read_csv(p);
		} catch (const Error& e) {
			schema_errors.push_back(e.what());
			return std::nullopt;
		}
	};

	auto gather_hourly = [&](const CsvTable& t, const std::string& file,
	                         const std::string& key_col, const std::string& val_col,
	                         detail::HourlyAssembler& into) {
		const int c_ts = t.require_column("timestamp", file);
		const int c_key = t.require_column(key_col, file);
		const int c_val = t.require_column(val_col, file);
		for (const auto& row : t.rows)
			into.add(row[c_key], parse_timestamp(row[c_ts], file), parse_num(row[c_val], file));
	};

	detail::HourlyAssembler load_a, load_f, wind_a, price_a, res_a, out_a, chp_a, ntc_a;
	std::int64_t epoch_days = 0;

	try {
		auto t_load = load_table("load_actual.csv", true);
		if (!t_load) throw SchemaError("bundle unusable without load_actual.csv");
		gather_hourly(*t_load, "load_actual.csv", "zone", "load_mwh", load_a);
		if (load_a.empty()) throw SchemaError("load_actual.csv: no rows");

		// the actual-load range defines the dataset epoch and coverage
		std::int64_t lo = INT64_MAX, hi = INT64_MIN;
		std::set<std::string> zone_set;
		for (const auto& [zone, cells] : load_a.cells()) {
			zone_set.insert(zone);
			for (const auto& [when, vals] : cells) {
				lo = std::min(lo, when.civil_days);
				hi = std::max(hi, when.civil_days);
			}
		}
		epoch_days = lo;
		ds.epoch = civil_from_days(epoch_days);
		ds.n_days = hi - lo + 1;
		ds.zones.assign(zone_set.begin(), zone_set.end());

		if (auto t = load_table("load_tso_forecast.csv", true))
			gather_hourly(*t, "load_tso_forecast.csv", "zone", "load_mwh", load_f);
		if (auto t = load_table("wind_forecast.csv", true))
			gather_hourly(*t, "wind_forecast.csv", "zone", "wind_mwh", wind_a);
		if (auto t = load_table("prices_actual.csv", true))
			gather_hourly(*t, "prices_actual.csv", "zone", "price_eur_mwh", price_a);
		if (auto t = load_table("res_forecast.csv", false))
			gather_hourly(*t, "res_forecast.csv", "cluster_id", "feedin_mwh", res_a);
		if (auto t = load_table("outages.csv", false))
			gather_hourly(*t, "outages.csv", "cluster_id", "outage_mw", out_a);
		if (auto t = load_table("chp_mustrun.csv", false))
			gather_hourly(*t, "chp_mustrun.csv", "zone", "chp_mw", chp_a);

		// clusters
		if (auto t = load_table("clusters.csv", true)) {
			const std::string f = "clusters.csv";
			const int c_id = t->require_column("cluster_id", f);
			const int c_zone = t->require_column("zone", f);
			const int c_kind = t->require_column("kind", f);
			const int c_cap = t->require_column("cap_mw", f);
			const int c_gmin = t->column("g_min");
			const int c_sc = t->column("startup_cost_eur_mw");
			const int c_af = t->column("availability");
			const int c_eff = t->column("efficiency_el");
			const int c_effml = t->column("efficiency_el_minload");
			const int c_fuel = t->column("fuel");
			const int c_co2 = t->column("co2_t_per_mwh_th");
			const int c_vc = t->column("vc_full_eur_mwh");
			const int c_vcml = t->column("vc_minload_eur_mwh");
			const int c_eta = t->column("efficiency_cycle");
			const int c_cer = t->column("cer");
			for (const auto& row : t->rows) {
				try {
					ClusterSpec c;
					c.id = row[c_id];
					c.zone = row[c_zone];
					c.kind = detail::parse_kind(row[c_kind], f);
					c.cap_mw = parse_num(row[c_cap], f);
					if (c_gmin >= 0 && !row[c_gmin].empty()) c.g_min = parse_num(row[c_gmin], f);
					if (c_sc >= 0 && !row[c_sc].empty()) c.startup_cost = parse_num(row[c_sc], f);
					if (c_af >= 0 && !row[c_af].empty()) c.availability = parse_num(row[c_af], f);
					if (c_eff >= 0 && !row[c_eff].empty()) c.efficiency_el = parse_num(row[c_eff], f);
					c.efficiency_el_minload = c.efficiency_el;
					if (c_effml >= 0 && !row[c_effml].empty())
						c.efficiency_el_minload = parse_num(row[c_effml], f);
					if (c_fuel >= 0) c.fuel = row[c_fuel];
					if (c_co2 >= 0 && !row[c_co2].empty()) c.co2_t_per_mwh_th = parse_num(row[c_co2], f);
					if (c_vc >= 0 && !row[c_vc].empty()) c.vc_full = parse_num(row[c_vc], f);
					if (c_vcml >= 0 && !row[c_vcml].empty()) c.vc_minload = parse_num(row[c_vcml], f);
					if (c_eta >= 0 && !row[c_eta].empty()) c.efficiency_cycle = parse_num(row[c_eta], f);
					if (c_cer >= 0 && !row[c_cer].empty()) c.cer = parse_num(row[c_cer], f);
					ds.clusters.push_back(std::move(c));
				} catch (const Error& e) {
					schema_errors.push_back(e.what());
				}
			}
		}

		// reserves (static MW per block)
		if (auto t = load_table("reserves.csv", false)) {
			const std::string f = "reserves.csv";
			const int c_zone = t->require_column("zone", f);
			const int c_prod = t->require_column("product", f);
			const int c_mw = t->require_column("mw", f);
			for (const auto& row : t->rows) {
				auto& r = ds.reserves[row[c_zone]];
				const double mw = parse_num(row[c_mw], f);
				if (row[c_prod] == "pr") r.pr = mw;
				else if (row[c_prod] == "sr_pos") r.sr_pos = mw;
				else if (row[c_prod] == "sr_neg") r.sr_neg = mw;
				else schema_errors.push_back(f + ": unknown product '" + row[c_prod] + "'");
			}
		}

		// ntc
		if (auto t = load_table("ntc.csv", false)) {
			const std::string f = "ntc.csv";
			const int c_ts = t->require_column("timestamp", f);
			const int c_from = t->require_column("from_zone", f);
			const int c_to = t->require_column("to_zone", f);
			const int c_mw = t->require_column("ntc_mw", f);
			for (const auto& row : t->rows)
				ntc_a.add(row[c_from] + ">" + row[c_to], parse_timestamp(row[c_ts], f),
				          parse_num(row[c_mw], f));
		} else {
			ds.warnings.push_back("ntc.csv missing: zones treated as islanded (zero capacity)");
		}

		// water values
		if (auto t = load_table("water_values.csv", false)) {
			const std::string f = "water_values.csv";
			const int c_ts = t->require_column("timestamp", f);
			const int c_id = t->require_column("cluster_id", f);
			const int c_step = t->require_column("step", f);
			const int c_cap = t->require_column("capacity_mw", f);
			const int c_wv = t->require_column("wv_eur_mwh", f);
			detail::HourlyAssembler wv_a;
			std::map<std::pair<std::string, int>, double> step_cap;
			for (const auto& row : t->rows) {
				const int step = static_cast<int>(parse_num(row[c_step], f));
				wv_a.add(row[c_id] + "#" + std::to_string(step), parse_timestamp(row[c_ts], f),
				         parse_num(row[c_wv], f));
				step_cap[{row[c_id], step}] = parse_num(row[c_cap], f);
			}
			for (const auto& [key, cap] : step_cap) {
				WvStepSeries s;
				s.step = key.second;
				s.capacity_mw = cap;
				s.wv = wv_a.sparse(key.first + "#" + std::to_string(key.second), epoch_days, ds.n_days);
				ds.water[key.first].push_back(std::move(s));
			}
		}

		// holidays
		std::vector<std::int64_t> holiday_days;
		if (auto t = load_table("holidays.csv", false)) {
			const int c_date = t->require_column("date", "holidays.csv");
			for (const auto& row : t->rows)
				holiday_days.push_back(days_from_civil(parse_date(row[c_date])) - epoch_days);
		}
		ds.calendar = Calendar(ds.epoch, std::move(holiday_days));

		// fuel and CO2 prices -> per-cluster variable costs
		std::map<std::string, std::map<std::int64_t, std::pair<double, double>>> fuel_prices;
		if (auto t = load_table("fuel_co2_prices.csv", false)) {
			const std::string f = "fuel_co2_prices.csv";
			const int c_date = t->require_column("date", f);
			const int c_fuel = t->require_column("fuel", f);
			const int c_p = t->require_column("fuel_eur_mwh_th", f);
			const int c_co2 = t->require_column("co2_eur_t", f);
			for (const auto& row : t->rows) {
				const std::int64_t d = days_from_civil(parse_date(row[c_date])) - epoch_days;
				fuel_prices[row[c_fuel]][d] = {parse_num(row[c_p], f), parse_num(row[c_co2], f)};
			}
		}
		auto fuel_at = [&](const std::string& fuel, std::int64_t day) -> std::pair<double, double> {
			const auto fit = fuel_prices.find(fuel);
			if (fit == fuel_prices.end() || fit->second.empty())
				throw SchemaError("fuel_co2_prices.csv: no prices for fuel '" + fuel + "'");
			auto it = fit->second.upper_bound(day);
			if (it == fit->second.begin())
				return it->second; // before the first quote: use it
			--it;                   // forward-fill
			return it->second;
		};

		for (const auto& c : ds.clusters) {
			if (c.kind != ClusterKind::Thermal) continue;
			std::vector<double> vc(ds.hours()), vcml(ds.hours());
			for (std::int64_t d = 0; d < ds.n_days; ++d) {
				double full, part;
				if (c.vc_full) {
					full = *c.vc_full;
					part = c.vc_minload ? *c.vc_minload : full;
				} else {
					const auto [fp, co2p] = fuel_at(c.fuel, d);
					full = fp / c.efficiency_el + c.co2_t_per_mwh_th * co2p / c.efficiency_el;
					part = fp / c.efficiency_el_minload +
					       c.co2_t_per_mwh_th * co2p / c.efficiency_el_minload;
				}
				for (int h = 0; h < 24; ++h) {
					vc[static_cast<std::size_t>(d) * 24 + h] = full;
					vcml[static_cast<std::size_t>(d) * 24 + h] = part;
				}
			}
			ds.vc_full[c.id] = std::move(vc);
			ds.vc_minload[c.id] = std::move(vcml);
		}
	} catch (const SchemaError& e) {
		schema_errors.push_back(e.what());
	}

	if (!schema_errors.empty()) {
		std::string all = "bundle schema violations:";
		for (const auto& e : schema_errors) all += "\n  - " + e;
		throw SchemaError(all);
	}

	// dense series with DST normalisation and gap audit
	for (const auto& zone : ds.zones) {
		ds.load_actual[zone] = load_a.dense(zone, epoch_days, ds.n_days, "load_actual.csv", 3,
		                                    &ds.warnings);
		ds.load_tso[zone] = load_f.dense(zone, epoch_days, ds.n_days, "load_tso_forecast.csv", 3,
		                                 &ds.warnings);
		ds.wind[zone] = wind_a.dense(zone, epoch_days, ds.n_days, "wind_forecast.csv", 3,
		                             &ds.warnings);
		ds.prices[zone] = price_a.dense(zone, epoch_days, ds.n_days, "prices_actual.csv", 3,
		                                &ds.warnings);
		ds.chp[zone] = chp_a.sparse(zone, epoch_days, ds.n_days);
	}
	for (const auto& c : ds.clusters) {
		ds.outages[c.id] = out_a.sparse(c.id, epoch_days, ds.n_days);
		if (c.kind == ClusterKind::Renewable)
			ds.res_feedin[c.id] = res_a.dense(c.id, epoch_days, ds.n_days, "res_forecast.csv", 3,
			                                  &ds.warnings);
	}
	for (const auto& [key, cells] : ntc_a.cells()) {
		const auto sep = key.find('>');
		ds.ntc_series[{key.substr(0, sep), key.substr(sep + 1)}] =
		    ntc_a.sparse(key, epoch_days, ds.n_days);
	}
	return ds;
}

/// Assembles the dispatch cluster bundle for the three-day window starting
/// at `start_day` (all values copied out of the dataset's hourly vectors).
inline TechnologyCluster window_cluster(const Dataset& ds, const ClusterSpec& spec,
                                        std::int64_t start_day) {
	TechnologyCluster c;
	c.id = spec.id;
	c.zone = spec.zone;
	c.kind = spec.kind;
	c.g_min = spec.g_min;
	c.efficiency = spec.efficiency_cycle;
	c.cer = spec.cer;
	const std::size_t base = static_cast<std::size_t>(start_day) * 24;
	for (int t = 0; t < kWindowHours; ++t) {
		c.cap[t] = spec.cap_mw;
		c.availability[t] = spec.availability;
		c.startup_cost[t] = spec.startup_cost;
		const auto out_it = ds.outages.find(spec.id);
		c.outage[t] = out_it != ds.outages.end() ? out_it->second[base + t] : 0.0;
		if (spec.kind == ClusterKind::Thermal) {
			c.vc_full[t] = ds.vc_full.at(spec.id)[base + t];
			c.vc_minload[t] = ds.vc_minload.at(spec.id)[base + t];
		}
		if (spec.kind == ClusterKind::Renewable) {
			const double feedin = ds.res_feedin.at(spec.id)[base + t];
			c.res_profile[t] = spec.cap_mw > 0.0 ? std::clamp(feedin / spec.cap_mw, 0.0, 1.0) : 0.0;
		}
	}
	const auto wv_it = ds.water.find(spec.id);
	if (wv_it != ds.water.end()) {
		if (spec.kind == ClusterKind::HydroReservoir) {
			for (int t = 0; t < kWindowHours; ++t) c.water_value[t] = wv_it->second.front().wv[base + t];
		} else if (spec.kind == ClusterKind::StorageLong) {
			for (const auto& s : wv_it->second) {
				StlStep step;
				step.capacity_mw = s.capacity_mw;
				for (int t = 0; t < kWindowHours; ++t) step.water_value[t] = s.wv[base + t];
				c.wv_steps.push_back(step);
			}
		}
	}
	return c;
}

} // namespace epf
