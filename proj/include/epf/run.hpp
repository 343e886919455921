#pragma once

// End-to-end run directory handling: per-day artifact files, cached-day
// detection for idempotent re-runs, evaluation outputs and the manifest.

#include <chrono>
#include <filesystem>
#include <set>

#include "epf/pipeline.hpp"

namespace epf {

namespace fs = std::filesystem;

struct RunSummary {
	std::int64_t eval_days = 0;
	std::int64_t failed_days = 0;
	std::int64_t cached_dispatch_days = 0;
	int exit_code = 0;
	std::string manifest_path;
};

namespace detail {

inline std::string day_name(const Calendar& cal, std::int64_t day) {
	return format_date(cal.date_of(day));
}

inline std::vector<std::string> num_row(std::initializer_list<double> vals) {
	std::vector<std::string> out;
	for (double v : vals) out.push_back(fmt_num(v));
	return out;
}

} // namespace detail

// --- dispatch artifacts ----------------------------------------------------

inline fs::path dispatch_price_file(const fs::path& out_dir, const Calendar& cal,
                                    std::int64_t day) {
	return out_dir / "dispatch" / ("day_" + detail::day_name(cal, day) + "_prices.csv");
}

inline void write_dispatch_day(const fs::path& out_dir, const Calendar& cal, std::int64_t day,
                               const DispatchResult& res) {
	fs::create_directories(out_dir / "dispatch");
	{
		CsvWriter w(dispatch_price_file(out_dir, cal, day));
		std::vector<std::string> header{"hour"};
		for (const auto& z : res.zone_ids) header.push_back("price_" + z + "_eur_mwh");
		w.row(header);
		for (int h = 1; h <= 24; ++h) {
			std::vector<std::string> row{std::to_string(h)};
			// exact format: cached re-runs must reload these bit for bit
			for (const auto& p : res.prices) row.push_back(fmt_exact(p[h - 1]));
			w.row(row);
		}
	}
	{
		CsvWriter w(out_dir / "dispatch" / ("day_" + detail::day_name(cal, day) + "_summary.csv"));
		w.row({"series", "id", "hour", "value"});
		for (const auto& cs : res.clusters) {
			for (int h = 1; h <= 24; ++h)
				w.row({"generation_mwh", cs.cluster_id, std::to_string(h),
				       fmt_num(cs.generation[h - 1])});
			for (int h = 1; h <= 24; ++h)
				w.row({"startup_mw", cs.cluster_id, std::to_string(h), fmt_num(cs.startup[h - 1])});
		}
		for (std::size_t z = 0; z < res.zone_ids.size(); ++z) {
			for (int h = 1; h <= 24; ++h)
				w.row({"shed_mwh", res.zone_ids[z], std::to_string(h), fmt_num(res.shed[z][h - 1])});
			for (int h = 1; h <= 24; ++h)
				w.row({"curtailment_mwh", res.zone_ids[z], std::to_string(h),
				       fmt_num(res.curtailment[z][h - 1])});
		}
	}
}

/// Focal-zone prices re-read from a cached day file; empty when absent.
inline std::optional<std::array<double, 24>> read_dispatch_day(const fs::path& out_dir,
                                                               const Calendar& cal,
                                                               std::int64_t day,
                                                               const std::string& focal_zone) {
	const fs::path p = dispatch_price_file(out_dir, cal, day);
	if (!fs::exists(p)) return std::nullopt;
	try {
		CsvTable t = read_csv(p);
		const int c_hour = t.require_column("hour", p.string());
		const int c_price = t.require_column("price_" + focal_zone + "_eur_mwh", p.string());
		std::array<double, 24> out{};
		int seen = 0;
		for (const auto& row : t.rows) {
			const int h = static_cast<int>(parse_num(row[c_hour], "hour"));
			if (h < 1 || h > 24) continue;
			out[h - 1] = parse_num(row[c_price], "price");
			++seen;
		}
		if (seen != 24) return std::nullopt;
		return out;
	} catch (const Error&) {
		return std::nullopt;
	}
}

// --- load / density artifacts ----------------------------------------------

inline void write_load_stage(const fs::path& out_dir, const Dataset& ds,
                             const PipelineConfig& cfg, const LoadStageOut& load) {
	fs::create_directories(out_dir / "preproc");
	{
		CsvWriter w(out_dir / "preproc" / "improved_load.csv");
		w.row({"date", "hour", "tso_mwh", "eps_hat_mwh", "improved_mwh"});
		const auto& tso = ds.load_tso.at(cfg.focal_zone);
		for (const auto& [day, imp] : load.improved) {
			const auto eps_it = load.eps_hat.find(day);
			for (int h = 1; h <= 24; ++h) {
				w.row({detail::day_name(ds.calendar, day), std::to_string(h),
				       fmt_num(tso[static_cast<std::size_t>(day) * 24 + h - 1]),
				       fmt_num(eps_it != load.eps_hat.end() ? eps_it->second[h - 1] : 0.0),
				       fmt_num(imp[h - 1])});
			}
		}
	}
	{
		CsvWriter w(out_dir / "preproc" / "two_day_ahead.csv");
		w.row({"date", "hour", "load_mwh"});
		for (const auto& [day, fc] : load.two_da)
			for (int h = 1; h <= 24; ++h)
				w.row({detail::day_name(ds.calendar, day), std::to_string(h), fmt_num(fc[h - 1])});
	}
}

inline void write_density_stage(const fs::path& out_dir, const Dataset& ds,
                                const DensityStageOut& density) {
	fs::create_directories(out_dir / "density");
	CsvWriter w(out_dir / "density" / "scenarios.csv");
	w.row({"target_date", "scenario_date", "hour", "low_mwh", "expected_mwh", "high_mwh",
	       "crossing_repaired"});
	for (const auto& [target, tri] : density.scenarios) {
		for (int h = 1; h <= 24; ++h)
			w.row({detail::day_name(ds.calendar, target), detail::day_name(ds.calendar, target + 1),
			       std::to_string(h), fmt_num(tri.low[h - 1]), fmt_num(tri.expected[h - 1]),
			       fmt_num(tri.high[h - 1]), tri.crossing_repaired ? "1" : "0"});
	}
}

// --- postproc artifacts ------------------------------------------------------

inline void write_submodels(const fs::path& out_dir, const Dataset& ds,
                            const std::map<std::int64_t, std::array<double, 24>>& p_hat,
                            const PostprocStageOut& post) {
	fs::create_directories(out_dir / "postproc");
	CsvWriter w(out_dir / "postproc" / "submodels.csv");
	std::vector<std::string> header{"date", "hour", "p_hat"};
	for (auto m : kSubModels) header.push_back(submodel_name(m));
	header.push_back("p_star");
	w.row(header);
	for (const auto& [day, six] : post.submodels) {
		const auto base_it = p_hat.find(day);
		const auto comb_it = post.combined.find(day);
		for (int h = 1; h <= 24; ++h) {
			std::vector<std::string> row{detail::day_name(ds.calendar, day), std::to_string(h)};
			row.push_back(fmt_num(base_it != p_hat.end() ? base_it->second[h - 1] : 0.0));
			for (int m = 0; m < 6; ++m) row.push_back(fmt_num(six.price[m][h - 1]));
			row.push_back(fmt_num(comb_it != post.combined.end() ? comb_it->second[h - 1] : 0.0));
			w.row(row);
		}
	}
}

inline fs::path prob_file(const fs::path& out_dir, const Calendar& cal, std::int64_t day) {
	return out_dir / "postproc" / ("day_" + detail::day_name(cal, day) + ".csv");
}

inline void write_prob_day(const fs::path& out_dir, const Dataset& ds, std::int64_t day,
                           const ProbabilisticForecast& pf) {
	fs::create_directories(out_dir / "postproc");
	CsvWriter w(prob_file(out_dir, ds.calendar, day));
	std::vector<std::string> header{"hour", "point", "peak"};
	for (double q : pf.q_grid) {
		char buf[16];
		std::snprintf(buf, sizeof buf, "q%02d", static_cast<int>(q * 100 + 0.5));
		header.push_back(buf);
	}
	w.row(header);
	for (int h = 1; h <= 24; ++h) {
		std::vector<std::string> row{std::to_string(h), fmt_num(pf.point[h - 1]),
		                             pf.peak[h - 1] ? "1" : "0"};
		for (double v : pf.quantiles[h - 1]) row.push_back(fmt_num(v));
		w.row(row);
	}
}

// --- evaluation --------------------------------------------------------------

inline void write_evaluation(const fs::path& out_dir, const Dataset& ds,
                             const PipelineConfig& cfg, const RunPlan& plan,
                             const std::map<std::int64_t, std::array<double, 24>>& p_hat,
                             const PostprocStageOut& post) {
	fs::create_directories(out_dir / "evaluation");
	const auto& prices = ds.prices.at(cfg.focal_zone);

	std::vector<EvalHour> hours;
	std::vector<std::array<double, 24>> err_dispatch, err_combined;
	std::array<std::vector<std::array<double, 24>>, 6> err_sub;
	for (std::int64_t day = plan.eval_first; day <= plan.eval_last; ++day) {
		const auto comb_it = post.combined.find(day);
		const auto base_it = p_hat.find(day);
		if (comb_it == post.combined.end() || base_it == p_hat.end()) continue;
		const auto prob_it = post.prob.find(day);
		const auto six_it = post.submodels.find(day);
		std::array<double, 24> ed{}, ec{};
		for (int h = 1; h <= 24; ++h) {
			const double actual = prices[static_cast<std::size_t>(day) * 24 + h - 1];
			EvalHour e;
			e.day = day;
			e.hour = h;
			e.actual = actual;
			e.point = comb_it->second[h - 1];
			if (prob_it != post.prob.end()) e.quantiles = prob_it->second.quantiles[h - 1];
			hours.push_back(std::move(e));
			ed[h - 1] = actual - base_it->second[h - 1];
			ec[h - 1] = actual - comb_it->second[h - 1];
		}
		err_dispatch.push_back(ed);
		err_combined.push_back(ec);
		if (six_it != post.submodels.end()) {
			for (int m = 0; m < 6; ++m) {
				std::array<double, 24> es{};
				for (int h = 0; h < 24; ++h)
					es[h] = prices[static_cast<std::size_t>(day) * 24 + h] - six_it->second.price[m][h];
				err_sub[m].push_back(es);
			}
		}
	}
	if (hours.empty()) throw SolveFailed("no evaluable days in the requested range");

	EvalReport rep = slice_report(hours, ds.calendar, cfg.quantile_grid);

	{
		CsvWriter w(out_dir / "evaluation" / "rmse_mae.csv");
		w.row({"slice", "rmse_eur_mwh", "mae_eur_mwh", "hours"});
		auto put = [&w](const std::string& name, const ErrorStats& st) {
			w.row({name, fmt_num(st.rmse), fmt_num(st.mae), std::to_string(st.hours)});
		};
		put("base", rep.overall);
		for (const auto& [year, st] : rep.by_year) put("year_" + std::to_string(year), st);
		put("peak", rep.peak);
		put("offpeak", rep.offpeak);
		for (int g = 0; g < 5; ++g)
			put("price_q" + std::to_string(20 * g) + "_" + std::to_string(20 * (g + 1)),
			    rep.by_price_quantile[g]);
	}
	{
		CsvWriter w(out_dir / "evaluation" / "pinball.csv");
		w.row({"q", "mean_pinball_eur_mwh"});
		for (std::size_t i = 0; i < rep.pinball_by_q.size(); ++i)
			w.row({fmt_num(rep.q_grid[i]), fmt_num(rep.pinball_by_q[i])});
	}
	{
		CsvWriter w(out_dir / "evaluation" / "coverage.csv");
		w.row({"bin", "count", "count_peak", "count_offpeak"});
		for (std::size_t b = 0; b < rep.coverage.size(); ++b)
			w.row({std::to_string(b), std::to_string(rep.coverage[b]),
			       std::to_string(b < rep.coverage_peak.size() ? rep.coverage_peak[b] : 0),
			       std::to_string(b < rep.coverage_offpeak.size() ? rep.coverage_offpeak[b] : 0)});
	}
	{
		CsvWriter w(out_dir / "evaluation" / "interval_width_hour.csv");
		w.row({"hour", "mean", "min", "p25", "median", "p75", "max"});
		for (int h = 1; h <= 24; ++h) {
			auto& samples = rep.width_by_hour[h - 1];
			if (samples.empty()) {
				w.row({std::to_string(h), "0", "0", "0", "0", "0", "0"});
				continue;
			}
			const double m = mean(samples);
			w.row({std::to_string(h), fmt_num(m), fmt_num(quantile(samples, 0.0)),
			       fmt_num(quantile(samples, 0.25)), fmt_num(quantile(samples, 0.5)),
			       fmt_num(quantile(samples, 0.75)), fmt_num(quantile(samples, 1.0))});
		}
	}
	{
		CsvWriter w(out_dir / "evaluation" / "interval_width_how.csv");
		w.row({"hour_of_week", "mean_width", "hours"});
		for (int i = 0; i < 192; ++i)
			if (rep.how_counts[i] > 0)
				w.row({std::to_string(i + 1), fmt_num(rep.width_by_how[i]),
				       std::to_string(rep.how_counts[i])});
	}
	{
		CsvWriter w(out_dir / "evaluation" / "neg_price_prob_how.csv");
		w.row({"hour_of_week", "mean_probability"});
		for (int i = 0; i < 192; ++i)
			if (rep.how_counts[i] > 0) w.row({std::to_string(i + 1), fmt_num(rep.neg_prob_by_how[i])});
	}
	{
		CsvWriter w(out_dir / "evaluation" / "dm_tests.csv");
		w.row({"model_a", "model_b", "statistic", "p_value", "days", "zero_variance"});
		std::vector<std::pair<std::string, const std::vector<std::array<double, 24>>*>> models;
		models.push_back({"dispatch", &err_dispatch});
		for (int m = 0; m < 6; ++m)
			models.push_back({submodel_name(static_cast<SubModel>(m)), &err_sub[m]});
		models.push_back({"combined", &err_combined});
		for (const auto& [name_a, ea] : models) {
			for (const auto& [name_b, eb] : models) {
				if (name_a == name_b || ea->size() != eb->size() || ea->size() < 30) continue;
				const DmOutcome dm = dm_test(*ea, *eb);
				w.row({name_a, name_b, fmt_num(dm.statistic), fmt_num(dm.p_value),
				       std::to_string(dm.n_days), dm.zero_variance ? "1" : "0"});
			}
		}
	}
	{
		nlohmann::json j;
		j["hours_evaluated"] = rep.overall.hours;
		j["rmse"] = rep.overall.rmse;
		j["mae"] = rep.overall.mae;
		j["rmse_peak"] = rep.peak.rmse;
		j["rmse_offpeak"] = rep.offpeak.rmse;
		nlohmann::json py = nlohmann::json::object();
		for (const auto& [year, st] : rep.by_year) {
			py[std::to_string(year)] = {{"rmse", st.rmse}, {"mae", st.mae}, {"hours", st.hours}};
		}
		j["by_year"] = py;
		if (!rep.pinball_by_q.empty()) {
			double mean_pb = 0.0;
			for (double v : rep.pinball_by_q) mean_pb += v;
			j["mean_pinball"] = mean_pb / static_cast<double>(rep.pinball_by_q.size());
		}
		std::ofstream js(out_dir / "evaluation" / "summary.json");
		js << j.dump(2) << "\n";
	}
}

// --- the end-to-end run -------------------------------------------------------

inline RunSummary run_pipeline(const Dataset& ds, PipelineConfig cfg) {
	const auto t_start = std::chrono::steady_clock::now();
	const fs::path out_dir(cfg.out_dir);
	fs::create_directories(out_dir);
	const RunPlan plan = make_plan(ds, cfg);

	nlohmann::json manifest;
	manifest["config_hash"] = config_hash(cfg);
	manifest["bundle_epoch"] = format_date(ds.epoch);
	manifest["eval_start"] = cfg.eval_start;
	manifest["eval_end"] = cfg.eval_end;

	auto stage_seconds = [&t_start]() {
		return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
	};
	double t_prev = 0.0;
	auto lap = [&]() {
		const double now = stage_seconds();
		const double d = now - t_prev;
		t_prev = now;
		return d;
	};

	// stages 1 and 2
	LoadStageOut load = run_load_stage(ds, cfg, plan);
	manifest["timings"]["load_preproc_s"] = lap();
	DensityStageOut density = cfg.dispatch_only ? DensityStageOut{}
	                                            : run_density_stage(ds, cfg, plan, load);
	manifest["timings"]["density_s"] = lap();
	write_load_stage(out_dir, ds, cfg, load);
	if (!cfg.dispatch_only) write_density_stage(out_dir, ds, density);

	// stage 3 with cached-day reuse
	std::set<std::int64_t> cached;
	std::map<std::int64_t, std::array<double, 24>> p_hat;
	for (std::int64_t day = plan.dispatch_first; day <= plan.eval_last; ++day) {
		if (auto prices = read_dispatch_day(out_dir, ds.calendar, day, cfg.focal_zone)) {
			cached.insert(day);
			p_hat[day] = *prices;
		}
	}
	DispatchStageOut dispatch = run_dispatch_stage(ds, cfg, plan, load, density, cached);
	manifest["timings"]["dispatch_s"] = lap();
	for (const auto& [day, res] : dispatch.results) {
		write_dispatch_day(out_dir, ds.calendar, day, res);
		int zi = 0;
		for (std::size_t z = 0; z < res.zone_ids.size(); ++z)
			if (res.zone_ids[z] == cfg.focal_zone) zi = static_cast<int>(z);
		p_hat[day] = res.prices[zi];
	}

	// stage 4
	PostprocStageOut post = run_postproc_stage(ds, cfg, plan, p_hat);
	manifest["timings"]["postproc_s"] = lap();
	write_submodels(out_dir, ds, p_hat, post);
	for (const auto& [day, pf] : post.prob) write_prob_day(out_dir, ds, day, pf);

	// evaluation over the eval range
	std::string eval_error;
	try {
		write_evaluation(out_dir, ds, cfg, plan, p_hat, post);
	} catch (const Error& e) {
		eval_error = e.what();
	}
	manifest["timings"]["evaluation_s"] = lap();

	// per-day status
	nlohmann::json days = nlohmann::json::object();
	std::int64_t failed = 0;
	for (std::int64_t day = plan.eval_first; day <= plan.eval_last; ++day) {
		nlohmann::json st;
		if (cached.count(day)) st["dispatch"] = "cached";
		else if (dispatch.failures.count(day)) st["dispatch"] = "failed: " + dispatch.failures.at(day);
		else st["dispatch"] = "ok";
		const bool have_prob = post.prob.count(day) > 0;
		const bool have_point = post.combined.count(day) > 0;
		st["postproc"] = have_point && have_prob ? "ok" : "failed";
		if (!(have_point && have_prob) || (!cached.count(day) && dispatch.failures.count(day)))
			++failed;
		days[detail::day_name(ds.calendar, day)] = st;
	}
	manifest["days"] = days;
	manifest["warnings"] = nlohmann::json::array();
	for (const auto& w : ds.warnings) manifest["warnings"].push_back(w);
	for (const auto& w : load.failures) manifest["warnings"].push_back(w);
	for (const auto& w : density.failures) manifest["warnings"].push_back(w);
	for (const auto& w : post.failures) manifest["warnings"].push_back(w);
	for (const auto& w : post.warnings) manifest["warnings"].push_back(w);
	if (!eval_error.empty()) manifest["warnings"].push_back("evaluation: " + eval_error);
	manifest["outputs"] = {"preproc/improved_load.csv", "preproc/two_day_ahead.csv",
	                       "density/scenarios.csv", "dispatch/", "postproc/", "evaluation/"};

	RunSummary summary;
	summary.eval_days = plan.eval_last - plan.eval_first + 1;
	summary.failed_days = failed;
	summary.cached_dispatch_days = static_cast<std::int64_t>(cached.size());
	summary.exit_code = failed * 2 > summary.eval_days ? 2 : 0;
	manifest["failed_days"] = failed;
	manifest["exit_code"] = summary.exit_code;

	const fs::path mpath = out_dir / "manifest.json";
	std::ofstream mf(mpath);
	mf << manifest.dump(2) << "\n";
	summary.manifest_path = mpath.string();
	return summary;
}

inline RunSummary run_pipeline(PipelineConfig cfg) {
	Dataset ds = ingest(cfg.bundle_dir);
	return run_pipeline(ds, std::move(cfg));
}

} // namespace epf
