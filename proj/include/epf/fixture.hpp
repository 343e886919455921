#pragma once

// Synthetic bundle generation. The generative laws are documented here and
// in the README: load follows a daily/weekly shape, the TSO forecast error
// carries a weekly profile plus a seasonal ARMA remainder, wind follows a
// slow autoregressive process, and actual prices are the engine's own
// dispatch estimators plus an hourly-resolution ARX error process. Given a
// seed, every file is reproduced byte for byte.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "epf/fixture_detail.hpp"
#include "epf/run.hpp"

namespace epf {

enum class FixturePreset { Toy, Pipeline };

struct FixtureSpec {
	FixturePreset preset = FixturePreset::Toy;
	int n_days = 0;       // 0 = preset default
	std::uint64_t seed = 42;
	int parallelism = 0;  // used for the internal price pass
};

/// Writes a complete bundle plus the matching pipeline config file and
/// returns the config path. When `p_hat_out` is given, the dispatch price
/// estimators computed during the price pass are copied there so callers
/// need not re-run the first three stages.
inline std::filesystem::path write_fixture(const std::filesystem::path& dir, FixtureSpec spec,
                                           std::map<std::int64_t, std::array<double, 24>>* p_hat_out
                                           = nullptr) {
	namespace fs = std::filesystem;
	fs::create_directories(dir);
	const bool toy = spec.preset == FixturePreset::Toy;
	const int n_days = spec.n_days > 0 ? spec.n_days : (toy ? 112 : 680);
	Rng rng(spec.seed);

	// epoch 2021-01-04 is a Monday, so weekday = day index mod 7 + 1
	const CivilDate epoch{2021, 1, 4};
	detail_fixture::FixtureWorld world =
	    detail_fixture::build_world(epoch, n_days, toy, rng);
	detail_fixture::write_input_files(dir, world);

	// pipeline config matching the fixture scale
	PipelineConfig cfg;
	cfg.bundle_dir = dir.string();
	cfg.focal_zone = "ZA";
	cfg.parallelism = spec.parallelism;
	cfg.seed = spec.seed;
	if (toy) {
		cfg.load_window_days = 21;
		cfg.seasonal_window_days = 21;
		cfg.qr_load_window_days = 14;
		cfg.pp_windows_weeks = {2, 3, 4};
		cfg.qra_window_days = 21;
		cfg.refit_interval_days = 7;
		cfg.eval_start = format_date(world.calendar.date_of(n_days - 12));
		cfg.eval_end = format_date(world.calendar.date_of(n_days - 3));
	} else {
		cfg.load_window_days = 120;
		cfg.seasonal_window_days = 120;
		cfg.qr_load_window_days = 100;
		cfg.pp_windows_weeks = {8, 10, 12};
		cfg.qra_window_days = 120;
		cfg.refit_interval_days = 7;
		cfg.qra_refit_interval_days = 21;
		const int eval_days = 215;
		cfg.eval_start = format_date(world.calendar.date_of(n_days - 2 - eval_days + 1));
		cfg.eval_end = format_date(world.calendar.date_of(n_days - 2));
	}
	const fs::path cfg_path = dir / (toy ? "toy_config.cfg" : "fixture_config.cfg");

	// placeholder prices so the bundle ingests, then the real price pass
	detail_fixture::write_prices(dir, world, nullptr, nullptr);
	{
		std::ofstream out(cfg_path);
		out << "# generated fixture configuration\n" << config_canonical_text(cfg);
		out << "out_dir=run\n";
	}

	Dataset ds = ingest(dir);
	PipelineConfig price_cfg = cfg;
	const RunPlan plan = make_plan(ds, price_cfg);
	LoadStageOut load = run_load_stage(ds, price_cfg, plan);
	DensityStageOut density = run_density_stage(ds, price_cfg, plan, load);
	DispatchStageOut dispatch = run_dispatch_stage(ds, price_cfg, plan, load, density);

	std::map<std::int64_t, std::array<double, 24>> p_hat;
	for (const auto& [day, res] : dispatch.results) {
		int zi = 0;
		for (std::size_t z = 0; z < res.zone_ids.size(); ++z)
			if (res.zone_ids[z] == "ZA") zi = static_cast<int>(z);
		p_hat[day] = res.prices[zi];
	}
	detail_fixture::write_prices(dir, world, &p_hat, &rng);
	if (p_hat_out) *p_hat_out = std::move(p_hat);
	return cfg_path;
}

} // namespace epf
