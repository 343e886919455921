#pragma once

// Stage orchestration over the rolling daily loop: load pre-processing,
// scenario construction, dispatch, post-processing and evaluation, plus the
// run directory layout, manifest and idempotent re-runs.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "epf/bundle.hpp"
#include "epf/density.hpp"
#include "epf/dispatch.hpp"
#include "epf/evaluation.hpp"
#include "epf/load_preproc.hpp"
#include "epf/postproc.hpp"

namespace epf {

struct PipelineConfig {
	std::string bundle_dir;
	std::string out_dir = "run";
	std::string focal_zone;
	std::string eval_start; // YYYY-MM-DD
	std::string eval_end;

	int load_window_days = 365;     // SARMA calibration
	int seasonal_window_days = 365; // weekly-profile averaging
	int qr_load_window_days = 365;  // load scenario quantile regressions
	std::array<int, 3> pp_windows_weeks{44, 48, 52};
	int qra_window_days = 365;
	int refit_interval_days = 1;
	int qra_refit_interval_days = 0; // 0 = follow refit_interval_days

	ScenarioWeights scenario_weights{};
	bool equal_scenario_weights = false;
	double voll = 3000.0;
	double curtc = 20.0;
	std::vector<double> quantile_grid = default_quantile_grid();

	double feas_tol = 1e-7;
	double opt_tol = 1e-7;
	int parallelism = 0; // 0 = hardware concurrency
	std::uint64_t seed = 1;

	bool dispatch_only = false;
	bool duplicate_shared_days = false;
	bool chain_startup = false;
	int blocks_per_day = 6;

	SolverOptions solver_options() const {
		SolverOptions o;
		o.feas_tol = feas_tol;
		o.opt_tol = opt_tol;
		return o;
	}

	std::vector<double> scenario_probs() const {
		if (equal_scenario_weights) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
		return {scenario_weights.low, scenario_weights.expected, scenario_weights.high};
	}

	int workers() const {
		if (parallelism > 0) return parallelism;
		const unsigned hw = std::thread::hardware_concurrency();
		return hw == 0 ? 1 : static_cast<int>(hw);
	}
};

// ---------------------------------------------------------------------------
// Config file: plain key=value lines, '#' comments.
// ---------------------------------------------------------------------------

inline PipelineConfig parse_config_text(const std::string& text) {
	PipelineConfig cfg;
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		const auto hash = line.find('#');
		if (hash != std::string::npos) line = line.substr(0, hash);
		auto trim = [](std::string s) {
			const auto a = s.find_first_not_of(" \t\r");
			const auto b = s.find_last_not_of(" \t\r");
			return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
		};
		line = trim(line);
		if (line.empty()) continue;
		const auto eq = line.find('=');
		if (eq == std::string::npos)
			throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
		const std::string key = trim(line.substr(0, eq));
		const std::string val = trim(line.substr(eq + 1));
		auto as_num = [&](const std::string& v) { return parse_num(v, "config " + key); };
		if (key == "bundle_dir") cfg.bundle_dir = val;
		else if (key == "out_dir") cfg.out_dir = val;
		else if (key == "focal_zone") cfg.focal_zone = val;
		else if (key == "eval_start") cfg.eval_start = val;
		else if (key == "eval_end") cfg.eval_end = val;
		else if (key == "load_window_days") cfg.load_window_days = static_cast<int>(as_num(val));
		else if (key == "seasonal_window_days") cfg.seasonal_window_days = static_cast<int>(as_num(val));
		else if (key == "qr_load_window_days") cfg.qr_load_window_days = static_cast<int>(as_num(val));
		else if (key == "pp_windows_weeks") {
			std::istringstream ss(val);
			std::string item;
			int i = 0;
			while (std::getline(ss, item, ',') && i < 3) cfg.pp_windows_weeks[i++] = static_cast<int>(as_num(item));
			if (i != 3) throw ConfigError("pp_windows_weeks needs three comma-separated values");
		} else if (key == "qra_window_days") cfg.qra_window_days = static_cast<int>(as_num(val));
		else if (key == "refit_interval_days") cfg.refit_interval_days = static_cast<int>(as_num(val));
		else if (key == "qra_refit_interval_days") cfg.qra_refit_interval_days = static_cast<int>(as_num(val));
		else if (key == "scenario_weights") {
			std::istringstream ss(val);
			std::string item;
			std::vector<double> w;
			while (std::getline(ss, item, ',')) w.push_back(as_num(item));
			if (w.size() != 3) throw ConfigError("scenario_weights needs three comma-separated values");
			cfg.scenario_weights = {w[0], w[1], w[2]};
		} else if (key == "equal_scenario_weights") cfg.equal_scenario_weights = val == "true" || val == "1";
		else if (key == "voll") cfg.voll = as_num(val);
		else if (key == "curtc") cfg.curtc = as_num(val);
		else if (key == "feas_tol") cfg.feas_tol = as_num(val);
		else if (key == "opt_tol") cfg.opt_tol = as_num(val);
		else if (key == "parallelism") cfg.parallelism = static_cast<int>(as_num(val));
		else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_num(val));
		else if (key == "dispatch_only") cfg.dispatch_only = val == "true" || val == "1";
		else if (key == "duplicate_shared_days") cfg.duplicate_shared_days = val == "true" || val == "1";
		else if (key == "chain_startup") cfg.chain_startup = val == "true" || val == "1";
		else if (key == "blocks_per_day") cfg.blocks_per_day = static_cast<int>(as_num(val));
		else throw ConfigError("unknown config key '" + key + "'");
	}
	return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) throw ConfigError("cannot open config " + path.string());
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_config_text(ss.str());
}

inline std::string config_canonical_text(const PipelineConfig& c) {
	std::string s;
	s += "bundle_dir=" + c.bundle_dir + "\n";
	s += "focal_zone=" + c.focal_zone + "\n";
	s += "eval_start=" + c.eval_start + "\neval_end=" + c.eval_end + "\n";
	s += "load_window_days=" + std::to_string(c.load_window_days) + "\n";
	s += "seasonal_window_days=" + std::to_string(c.seasonal_window_days) + "\n";
	s += "qr_load_window_days=" + std::to_string(c.qr_load_window_days) + "\n";
	s += "pp_windows_weeks=" + std::to_string(c.pp_windows_weeks[0]) + "," +
	     std::to_string(c.pp_windows_weeks[1]) + "," + std::to_string(c.pp_windows_weeks[2]) + "\n";
	s += "qra_window_days=" + std::to_string(c.qra_window_days) + "\n";
	s += "refit_interval_days=" + std::to_string(c.refit_interval_days) + "\n";
	s += "qra_refit_interval_days=" + std::to_string(c.qra_refit_interval_days) + "\n";
	s += "scenario_weights=" + fmt_num(c.scenario_weights.low) + "," +
	     fmt_num(c.scenario_weights.expected) + "," + fmt_num(c.scenario_weights.high) + "\n";
	s += "equal_scenario_weights=" + std::string(c.equal_scenario_weights ? "true" : "false") + "\n";
	s += "voll=" + fmt_num(c.voll) + "\ncurtc=" + fmt_num(c.curtc) + "\n";
	s += "seed=" + std::to_string(c.seed) + "\n";
	s += "dispatch_only=" + std::string(c.dispatch_only ? "true" : "false") + "\n";
	s += "duplicate_shared_days=" + std::string(c.duplicate_shared_days ? "true" : "false") + "\n";
	s += "chain_startup=" + std::string(c.chain_startup ? "true" : "false") + "\n";
	s += "blocks_per_day=" + std::to_string(c.blocks_per_day) + "\n";
	return s;
}

inline std::string config_hash(const PipelineConfig& c) {
	// FNV-1a
	std::uint64_t h = 1469598103934665603ull;
	for (char ch : config_canonical_text(c)) {
		h ^= static_cast<unsigned char>(ch);
		h *= 1099511628211ull;
	}
	char buf[20];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

// ---------------------------------------------------------------------------

inline void parallel_for_days(std::int64_t lo, std::int64_t hi, int workers,
                              const std::function<void(std::int64_t)>& fn) {
	if (hi < lo) return;
	const std::int64_t count = hi - lo + 1;
	const int n_threads = std::min<std::int64_t>(std::max(workers, 1), count);
	if (n_threads <= 1) {
		for (std::int64_t d = lo; d <= hi; ++d) fn(d);
		return;
	}
	std::vector<std::thread> pool;
	std::atomic<std::int64_t> next(lo);
	for (int w = 0; w < n_threads; ++w) {
		pool.emplace_back([&]() {
			while (true) {
				const std::int64_t d = next.fetch_add(1);
				if (d > hi) break;
				fn(d);
			}
		});
	}
	for (auto& t : pool) t.join();
}

/// Day-span bookkeeping for all sweeps of one run.
struct RunPlan {
	std::int64_t eval_first = 0, eval_last = 0; // evaluated targets
	std::int64_t dispatch_first = 0;            // includes post-processing warm-up
	std::int64_t submodel_first = 0;            // includes QRA warm-up
	std::int64_t improved_first = 0;            // day before the first window
	std::int64_t origin_first = 0;              // earliest two-day-ahead origin
	int max_pp_weeks = 52;
};

inline RunPlan make_plan(const Dataset& ds, const PipelineConfig& cfg) {
	RunPlan plan;
	plan.eval_first = ds.calendar.day_index_of(parse_date(cfg.eval_start));
	plan.eval_last = ds.calendar.day_index_of(parse_date(cfg.eval_end));
	if (plan.eval_last < plan.eval_first) throw ConfigError("eval_end before eval_start");
	plan.max_pp_weeks = std::max({cfg.pp_windows_weeks[0], cfg.pp_windows_weeks[1],
	                              cfg.pp_windows_weeks[2]});
	plan.submodel_first = plan.eval_first - cfg.qra_window_days;
	plan.dispatch_first = plan.submodel_first - plan.max_pp_weeks * 7 - 9;
	plan.improved_first = plan.dispatch_first - 1;
	plan.origin_first = plan.dispatch_first - cfg.qr_load_window_days - 3;

	const std::int64_t data_first_needed =
	    plan.origin_first - std::max(cfg.load_window_days, cfg.seasonal_window_days) - 2;
	if (data_first_needed < 0)
		throw ConfigError("evaluation range needs data starting " +
		                  std::to_string(-data_first_needed) + " days before the bundle begins");
	if (plan.eval_last + 1 > ds.n_days - 1)
		throw ConfigError("evaluation range runs past the end of the bundle (the last window "
		                  "needs day d+2)");
	if (!ds.load_actual.count(cfg.focal_zone))
		throw ConfigError("focal zone '" + cfg.focal_zone + "' not present in the bundle");
	return plan;
}

// ---------------------------------------------------------------------------
// Stage 1: load pre-processing sweeps.
// ---------------------------------------------------------------------------

struct LoadStageOut {
	std::map<std::int64_t, std::array<double, 24>> eps_hat;   // per target day
	std::map<std::int64_t, std::array<double, 24>> improved;  // per target day
	std::map<std::int64_t, std::array<double, 24>> two_da;    // per described day
	std::vector<std::string> failures;
};

namespace detail {

inline std::int64_t anchor_of(std::int64_t day, std::int64_t first, int interval) {
	if (interval <= 1) return day;
	return first + ((day - first) / interval) * interval;
}

template <typename T>
std::array<double, 24> day_slice(const std::vector<T>& hourly, std::int64_t day) {
	std::array<double, 24> out{};
	for (int h = 0; h < 24; ++h) out[h] = hourly[static_cast<std::size_t>(day) * 24 + h];
	return out;
}

} // namespace detail

inline LoadStageOut run_load_stage(const Dataset& ds, const PipelineConfig& cfg,
                                   const RunPlan& plan) {
	LoadStageOut out;
	const auto& actual = ds.load_actual.at(cfg.focal_zone);
	const auto& tso = ds.load_tso.at(cfg.focal_zone);
	std::vector<double> eps(actual.size());
	for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = actual[i] - tso[i];

	// SARMA anchors: coefficients fitted on data ending at anchor-2
	std::mutex mx;
	std::map<std::int64_t, SarmaParams> sarma_fits;
	std::vector<std::int64_t> anchors;
	for (std::int64_t t = plan.improved_first; t <= plan.eval_last; ++t) {
		const std::int64_t a = detail::anchor_of(t, plan.improved_first, cfg.refit_interval_days);
		if (anchors.empty() || anchors.back() != a) anchors.push_back(a);
	}
	parallel_for_days(0, static_cast<std::int64_t>(anchors.size()) - 1, cfg.workers(),
	                  [&](std::int64_t idx) {
		                  const std::int64_t a = anchors[static_cast<std::size_t>(idx)];
		                  const std::int64_t end_day = a - 2;
		                  const std::int64_t start_day = std::max<std::int64_t>(0, end_day - cfg.load_window_days + 1);
		                  // remainder = error minus the weekly profile over the window
		                  auto eps_win = ds.series(eps, start_day, end_day - start_day + 1, Unit::MWh);
		                  auto profile = fit_seasonal_profile(eps_win, {cfg.seasonal_window_days, 1});
		                  auto sc = seasonal_component(profile, eps_win);
		                  auto rc = eps_win - sc;
		                  SarmaParams fit = fit_sarma(rc.values(), 2500);
		                  std::lock_guard<std::mutex> lk(mx);
		                  sarma_fits[a] = fit;
	                  });

	// improved day-ahead forecast per target day
	parallel_for_days(plan.improved_first, plan.eval_last, cfg.workers(), [&](std::int64_t target) {
		try {
			const std::int64_t hist_end = target - 2;
			const std::int64_t hist_start = std::max<std::int64_t>(0, hist_end - cfg.seasonal_window_days + 1);
			auto hist = ds.series(eps, hist_start, hist_end - hist_start + 1, Unit::MWh);
			auto profile = fit_seasonal_profile(hist, {cfg.seasonal_window_days, 1});
			const SarmaParams& params =
			    sarma_fits.at(detail::anchor_of(target, plan.improved_first, cfg.refit_interval_days));
			auto target_flags = ds.flags_range(target - 1, 2);
			auto eps_fc = forecast_error_hours(params, profile, hist, target_flags, 48);
			std::array<double, 24> eh{}, imp{};
			for (int h = 0; h < 24; ++h) {
				eh[h] = eps_fc[24 + h];
				imp[h] = tso[static_cast<std::size_t>(target) * 24 + h] + eh[h];
			}
			std::lock_guard<std::mutex> lk(mx);
			out.eps_hat[target] = eh;
			out.improved[target] = imp;
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures.push_back("load day " + std::to_string(target) + ": " + e.what());
		}
	});

	// two-day-ahead sweep over origins
	std::map<std::int64_t, SarmaxParams> sarmax_fits;
	std::vector<std::int64_t> origins;
	for (std::int64_t o = plan.origin_first; o <= plan.eval_last - 1; ++o) origins.push_back(o);
	std::vector<std::int64_t> x_anchors;
	for (std::int64_t o : origins) {
		const std::int64_t a = detail::anchor_of(o, plan.origin_first, cfg.refit_interval_days);
		if (x_anchors.empty() || x_anchors.back() != a) x_anchors.push_back(a);
	}
	parallel_for_days(0, static_cast<std::int64_t>(x_anchors.size()) - 1, cfg.workers(),
	                  [&](std::int64_t idx) {
		                  const std::int64_t a = x_anchors[static_cast<std::size_t>(idx)];
		                  const std::int64_t end_day = a - 1;
		                  const std::int64_t start_day = std::max<std::int64_t>(0, end_day - cfg.load_window_days + 1);
		                  std::vector<double> hist(tso.begin() + start_day * 24,
		                                           tso.begin() + (end_day + 1) * 24);
		                  SarmaxParams fit = fit_sarmax_2da(hist, 2500);
		                  std::lock_guard<std::mutex> lk(mx);
		                  sarmax_fits[a] = fit;
	                  });
	parallel_for_days(plan.origin_first, plan.eval_last - 1, cfg.workers(), [&](std::int64_t origin) {
		try {
			const std::int64_t start_day = std::max<std::int64_t>(0, origin - cfg.load_window_days + 1);
			std::vector<double> hist(tso.begin() + start_day * 24, tso.begin() + (origin + 1) * 24);
			const SarmaxParams& params =
			    sarmax_fits.at(detail::anchor_of(origin, plan.origin_first, cfg.refit_interval_days));
			std::vector<double> fc = forecast_2da(params, hist);
			std::array<double, 24> arr{};
			for (int h = 0; h < 24; ++h) arr[h] = fc[h];
			std::lock_guard<std::mutex> lk(mx);
			out.two_da[origin + 2] = arr;
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures.push_back("two-day-ahead origin " + std::to_string(origin) + ": " + e.what());
		}
	});
	return out;
}

// ---------------------------------------------------------------------------
// Stage 2: load scenario construction.
// ---------------------------------------------------------------------------

struct ScenarioTriple {
	std::array<double, 24> low{}, expected{}, high{};
	bool crossing_repaired = false;
};

struct DensityStageOut {
	std::map<std::int64_t, ScenarioTriple> scenarios; // keyed by target day; describes day T+1
	std::vector<std::string> failures;
};

inline DensityStageOut run_density_stage(const Dataset& ds, const PipelineConfig& cfg,
                                         const RunPlan& plan, const LoadStageOut& load) {
	DensityStageOut out;
	const auto& actual = ds.load_actual.at(cfg.focal_zone);
	std::mutex mx;

	std::map<std::int64_t, std::pair<QuantileModel, QuantileModel>> qr_fits;
	std::vector<std::int64_t> anchors;
	for (std::int64_t t = plan.dispatch_first; t <= plan.eval_last; ++t) {
		const std::int64_t a = detail::anchor_of(t, plan.dispatch_first, cfg.refit_interval_days);
		if (anchors.empty() || anchors.back() != a) anchors.push_back(a);
	}
	parallel_for_days(0, static_cast<std::int64_t>(anchors.size()) - 1, cfg.workers(),
	                  [&](std::int64_t idx) {
		                  const std::int64_t a = anchors[static_cast<std::size_t>(idx)];
		                  std::vector<double> x, y;
		                  for (std::int64_t t = a - 1 - cfg.qr_load_window_days; t <= a - 2; ++t) {
			                  const auto it = load.two_da.find(t);
			                  if (it == load.two_da.end()) continue;
			                  for (int h = 0; h < 24; ++h) {
				                  x.push_back(1.0);
				                  x.push_back(it->second[h]);
				                  y.push_back(actual[static_cast<std::size_t>(t) * 24 + h]);
			                  }
		                  }
		                  if (y.size() < 48)
			                  throw TooFewDays("scenario quantile regression has too little history");
		                  QuantileModel lo = fit_quantile_regression(x, y, 2, 0.05, cfg.solver_options());
		                  QuantileModel hi = fit_quantile_regression(x, y, 2, 0.95, cfg.solver_options());
		                  std::lock_guard<std::mutex> lk(mx);
		                  qr_fits[a] = {lo, hi};
	                  });

	parallel_for_days(plan.dispatch_first, plan.eval_last, cfg.workers(), [&](std::int64_t target) {
		try {
			const auto exp_it = load.two_da.find(target + 1);
			if (exp_it == load.two_da.end())
				throw SolveFailed("no two-day-ahead forecast for day " + std::to_string(target + 1));
			const auto& [lo_model, hi_model] =
			    qr_fits.at(detail::anchor_of(target, plan.dispatch_first, cfg.refit_interval_days));
			ScenarioTriple tri;
			tri.expected = exp_it->second;
			for (int h = 0; h < 24; ++h) {
				double lo = predict_quantile(lo_model, {1.0, tri.expected[h]});
				double hi = predict_quantile(hi_model, {1.0, tri.expected[h]});
				if (lo > hi) {
					std::swap(lo, hi);
					tri.crossing_repaired = true;
				}
				tri.low[h] = std::max(0.0, lo);
				tri.high[h] = std::max(0.0, hi);
			}
			std::lock_guard<std::mutex> lk(mx);
			out.scenarios[target] = tri;
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures.push_back("density day " + std::to_string(target) + ": " + e.what());
		}
	});
	return out;
}

// ---------------------------------------------------------------------------
// Stage 3: dispatch sweep.
// ---------------------------------------------------------------------------

struct DispatchStageOut {
	std::map<std::int64_t, DispatchResult> results; // per target day
	std::map<std::int64_t, std::string> failures;
};

inline DispatchInstance assemble_instance(const Dataset& ds, const PipelineConfig& cfg,
                                          std::int64_t target, const LoadStageOut& load,
                                          const DensityStageOut& density) {
	DispatchInstance inst;
	inst.start_day = target - 1;
	inst.options.duplicate_shared_days = cfg.duplicate_shared_days;
	inst.options.blocks_per_day = cfg.blocks_per_day;
	const bool stochastic = !cfg.dispatch_only;
	inst.scenario_probs = stochastic ? cfg.scenario_probs() : std::vector<double>{1.0};

	const std::size_t base = static_cast<std::size_t>(target - 1) * 24;
	for (const auto& zone : ds.zones) {
		ZoneData z;
		z.id = zone;
		z.voll = cfg.voll;
		z.curtc = cfg.curtc;
		const auto rit = ds.reserves.find(zone);
		if (rit != ds.reserves.end()) {
			z.reserve_primary = rit->second.pr;
			z.reserve_sec_pos = rit->second.sr_pos;
			z.reserve_sec_neg = rit->second.sr_neg;
		}
		for (int t = 0; t < kWindowHours; ++t) z.chp_mustrun[t] = ds.chp.at(zone)[base + t];

		if (zone == cfg.focal_zone && !cfg.dispatch_only) {
			const auto d_it = load.improved.find(target - 1);
			const auto d1_it = load.improved.find(target);
			const auto sc_it = density.scenarios.find(target);
			if (d_it == load.improved.end() || d1_it == load.improved.end())
				throw SolveFailed("missing improved load forecast");
			if (sc_it == density.scenarios.end()) throw SolveFailed("missing load scenarios");
			for (int h = 0; h < 24; ++h) {
				z.demand_shared[h] = std::max(0.0, d_it->second[h]);
				z.demand_shared[24 + h] = std::max(0.0, d1_it->second[h]);
			}
			z.demand_d2 = {{}, {}, {}};
			for (int h = 0; h < 24; ++h) {
				z.demand_d2[0][h] = sc_it->second.low[h];
				z.demand_d2[1][h] = sc_it->second.expected[h];
				z.demand_d2[2][h] = sc_it->second.high[h];
			}
		} else if (zone == cfg.focal_zone) {
			// ablation mode: raw TSO forecast everywhere, single scenario
			const auto& tso = ds.load_tso.at(zone);
			for (int t = 0; t < 48; ++t) z.demand_shared[t] = tso[base + t];
			z.demand_d2.assign(1, {});
			for (int h = 0; h < 24; ++h) z.demand_d2[0][h] = tso[base + 48 + h];
		} else {
			// neighbours: published forecast for d and d+1, naive weekly
			// copy of the realised load for d+2
			const auto& tso = ds.load_tso.at(zone);
			const auto& act = ds.load_actual.at(zone);
			for (int t = 0; t < 48; ++t) z.demand_shared[t] = tso[base + t];
			z.demand_d2.assign(inst.scenario_probs.size(), {});
			for (auto& path : z.demand_d2)
				for (int h = 0; h < 24; ++h) path[h] = act[base + 48 + h - 168];
		}
		inst.zones.push_back(std::move(z));
	}

	for (const auto& spec : ds.clusters) inst.clusters.push_back(window_cluster(ds, spec, target - 1));

	for (const auto& [pair, series] : ds.ntc_series) {
		NtcEntry e;
		e.from = pair.first;
		e.to = pair.second;
		for (int t = 0; t < kWindowHours; ++t) e.ntc[t] = series[base + t];
		inst.ntc.push_back(std::move(e));
	}
	return inst;
}

inline DispatchStageOut run_dispatch_stage(const Dataset& ds, const PipelineConfig& cfg,
                                           const RunPlan& plan, const LoadStageOut& load,
                                           const DensityStageOut& density,
                                           const std::set<std::int64_t>& skip_days = {}) {
	DispatchStageOut out;
	std::mutex mx;
	const SolverOptions solver_opt = cfg.solver_options();
	if (cfg.chain_startup) {
		// sequential sweep so each window can seed the next day-boundary
		auto factory = [&](std::int64_t target) {
			return assemble_instance(ds, cfg, target, load, density);
		};
		RollingResult rr =
		    rolling_run(plan.dispatch_first, plan.eval_last, factory, solver_opt, true);
		for (auto& day : rr.days) {
			if (day.ok) out.results[day.target_day] = std::move(day.result);
			else out.failures[day.target_day] = day.error;
		}
		return out;
	}
	parallel_for_days(plan.dispatch_first, plan.eval_last, cfg.workers(), [&](std::int64_t target) {
		if (skip_days.count(target)) return;
		try {
			DispatchInstance inst = assemble_instance(ds, cfg, target, load, density);
			DispatchModel model = build_lp(inst);
			LPSolution sol = solve(model.lp, solver_opt);
			if (sol.status != LPStatus::Optimal)
				throw SolveFailed(std::string("dispatch LP ") + status_name(sol.status));
			DispatchResult res = extract_prices(inst, model, sol);
			std::lock_guard<std::mutex> lk(mx);
			out.results[target] = std::move(res);
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures[target] = e.what();
		}
	});
	return out;
}

// ---------------------------------------------------------------------------
// Stage 4: post-processing.
// ---------------------------------------------------------------------------

struct PostprocStageOut {
	std::map<std::int64_t, SubModelForecasts> submodels;      // per target day
	std::map<std::int64_t, std::array<double, 24>> combined;  // final point forecast
	std::map<std::int64_t, ProbabilisticForecast> prob;       // per target day
	std::vector<std::string> failures;
	std::vector<std::string> warnings;
};

inline PostprocStageOut run_postproc_stage(const Dataset& ds, const PipelineConfig& cfg,
                                           const RunPlan& plan,
                                           const std::map<std::int64_t, std::array<double, 24>>& p_hat) {
	PostprocStageOut out;
	std::mutex mx;
	const auto& prices = ds.prices.at(cfg.focal_zone);
	const auto& wind = ds.wind.at(cfg.focal_zone);

	// error panel over the dispatch span; failed days borrow last week's
	// error so lag indexing stays intact
	const std::int64_t panel_first = plan.dispatch_first;
	const std::int64_t panel_days = plan.eval_last - panel_first + 1;
	std::vector<double> eps(static_cast<std::size_t>(panel_days) * 24, 0.0);
	std::vector<double> wind_panel(eps.size());
	std::vector<CalendarFlags> flags;
	for (std::int64_t d = 0; d < panel_days; ++d) {
		const std::int64_t day = panel_first + d;
		flags.push_back(ds.calendar.flags_of(day));
		const auto it = p_hat.find(day);
		for (int h = 0; h < 24; ++h) {
			const std::size_t k = static_cast<std::size_t>(d) * 24 + h;
			wind_panel[k] = wind[static_cast<std::size_t>(day) * 24 + h];
			if (it != p_hat.end()) {
				eps[k] = prices[static_cast<std::size_t>(day) * 24 + h] - it->second[h];
			} else if (k >= 168) {
				eps[k] = eps[k - 168];
			} else {
				eps[k] = 0.0;
			}
		}
		if (it == p_hat.end()) {
			std::lock_guard<std::mutex> lk(mx);
			out.warnings.push_back("panel day " + std::to_string(day) +
			                       " missing dispatch prices; used week-lag errors");
		}
	}
	PriceErrorPanel panel(panel_first, eps, wind_panel, flags);

	// sub-model fits at anchors, forecasts per day
	struct SixFits {
		std::array<UvArxParams, 3> uv;
		std::array<MvArxParams, 3> mv;
	};
	std::map<std::int64_t, SixFits> fits;
	std::vector<std::int64_t> anchors;
	for (std::int64_t t = plan.submodel_first; t <= plan.eval_last; ++t) {
		const std::int64_t a = detail::anchor_of(t, plan.submodel_first, cfg.refit_interval_days);
		if (anchors.empty() || anchors.back() != a) anchors.push_back(a);
	}
	parallel_for_days(0, static_cast<std::int64_t>(anchors.size()) - 1, cfg.workers(),
	                  [&](std::int64_t idx) {
		                  const std::int64_t a = anchors[static_cast<std::size_t>(idx)];
		                  SixFits f;
		                  for (int wi = 0; wi < 3; ++wi) {
			                  f.uv[wi] = fit_uv(panel, cfg.pp_windows_weeks[wi], a - 1);
			                  f.mv[wi] = fit_mv(panel, cfg.pp_windows_weeks[wi], a - 1);
		                  }
		                  std::lock_guard<std::mutex> lk(mx);
		                  fits[a] = std::move(f);
	                  });

	parallel_for_days(plan.submodel_first, plan.eval_last, cfg.workers(), [&](std::int64_t target) {
		try {
			const auto base_it = p_hat.find(target);
			if (base_it == p_hat.end())
				throw SolveFailed("no dispatch prices for day " + std::to_string(target));
			const SixFits& f =
			    fits.at(detail::anchor_of(target, plan.submodel_first, cfg.refit_interval_days));
			TargetDayExog exog;
			exog.flags = ds.calendar.flags_of(target);
			for (int h = 0; h < 24; ++h)
				exog.wind[h] = wind[static_cast<std::size_t>(target) * 24 + h];
			SubModelForecasts six;
			for (int wi = 0; wi < 3; ++wi) {
				auto e_uv = forecast_uv(f.uv[wi], panel, target - 1, exog);
				auto e_mv = forecast_mv(f.mv[wi], panel, target - 1, exog);
				std::array<double, 24> pu{}, pm{};
				for (int h = 0; h < 24; ++h) {
					pu[h] = base_it->second[h] + e_uv[h];
					pm[h] = base_it->second[h] + e_mv[h];
				}
				six.set(static_cast<SubModel>(wi), pu);
				six.set(static_cast<SubModel>(3 + wi), pm);
			}
			auto combined = combine_point(six);
			std::lock_guard<std::mutex> lk(mx);
			out.submodels[target] = six;
			out.combined[target] = combined;
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures.push_back("postproc day " + std::to_string(target) + ": " + e.what());
		}
	});

	// quantile regression averaging at anchors, probabilistic output per day
	const int qra_interval =
	    cfg.qra_refit_interval_days > 0 ? cfg.qra_refit_interval_days : cfg.refit_interval_days;
	std::map<std::int64_t, std::map<std::pair<int, int>, QuantileModel>> qra_fits;
	std::vector<std::int64_t> qra_anchors;
	for (std::int64_t t = plan.eval_first; t <= plan.eval_last; ++t) {
		const std::int64_t a = detail::anchor_of(t, plan.eval_first, qra_interval);
		if (qra_anchors.empty() || qra_anchors.back() != a) qra_anchors.push_back(a);
	}
	parallel_for_days(0, static_cast<std::int64_t>(qra_anchors.size()) - 1, cfg.workers(),
	                  [&](std::int64_t idx) {
		                  const std::int64_t a = qra_anchors[static_cast<std::size_t>(idx)];
		                  std::vector<QraRow> rows;
		                  for (std::int64_t t = a - cfg.qra_window_days; t <= a - 1; ++t) {
			                  const auto s_it = out.submodels.find(t);
			                  if (s_it == out.submodels.end()) continue;
			                  const CalendarFlags tf = ds.calendar.flags_of(t);
			                  for (int h = 1; h <= 24; ++h) {
				                  QraRow row;
				                  for (int m = 0; m < 6; ++m) row.forecasts[m] = s_it->second.price[m][h - 1];
				                  row.actual = prices[static_cast<std::size_t>(t) * 24 + h - 1];
				                  row.peak = is_peak_hour(h, tf);
				                  rows.push_back(row);
			                  }
		                  }
		                  std::map<std::pair<int, int>, QuantileModel> models;
		                  for (std::size_t qi = 0; qi < cfg.quantile_grid.size(); ++qi) {
			                  models[{static_cast<int>(qi), 0}] =
			                      fit_price_qra(rows, cfg.quantile_grid[qi], Segment::Peak);
			                  models[{static_cast<int>(qi), 1}] =
			                      fit_price_qra(rows, cfg.quantile_grid[qi], Segment::OffPeak);
		                  }
		                  std::lock_guard<std::mutex> lk(mx);
		                  qra_fits[a] = std::move(models);
	                  });

	parallel_for_days(plan.eval_first, plan.eval_last, cfg.workers(), [&](std::int64_t target) {
		try {
			const auto s_it = out.submodels.find(target);
			if (s_it == out.submodels.end())
				throw SolveFailed("no sub-model forecasts for day " + std::to_string(target));
			const auto& models =
			    qra_fits.at(detail::anchor_of(target, plan.eval_first, qra_interval));
			ProbabilisticForecast pf = predict_probabilistic(models, cfg.quantile_grid, s_it->second,
			                                                 ds.calendar.flags_of(target));
			std::lock_guard<std::mutex> lk(mx);
			out.prob[target] = std::move(pf);
		} catch (const Error& e) {
			std::lock_guard<std::mutex> lk(mx);
			out.failures.push_back("probabilistic day " + std::to_string(target) + ": " + e.what());
		}
	});
	return out;
}

} // namespace epf
