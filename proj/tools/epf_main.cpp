// Command-line surface: bundle validation, the individual pipeline stages,
// the end-to-end daily run and the synthetic fixture generator.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epf/fixture.hpp"
#include "epf/run.hpp"

namespace fs = std::filesystem;
using namespace epf;

namespace {

struct CommonOpts {
	std::string config_path;
	std::string bundle_dir;
	std::string out_dir;
	std::string focal_zone;
	std::string eval_start, eval_end;
	int parallelism = -1;
	bool dispatch_only = false;
	bool equal_weights = false;
	bool duplicate_shared = false;
	bool chain_startup = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
	cmd->add_option("--config", o.config_path, "pipeline config file (key=value lines)");
	cmd->add_option("--bundle", o.bundle_dir, "bundle directory (overrides config)");
	cmd->add_option("--out", o.out_dir, "run output directory (overrides config)");
	cmd->add_option("--focal-zone", o.focal_zone, "focal zone id (overrides config)");
	cmd->add_option("--eval-start", o.eval_start, "first evaluated day, YYYY-MM-DD");
	cmd->add_option("--eval-end", o.eval_end, "last evaluated day, YYYY-MM-DD");
	cmd->add_option("--parallelism", o.parallelism, "worker threads (0 = all cores)");
	cmd->add_flag("--dispatch-only", o.dispatch_only,
	              "skip load pre-processing and scenarios, use raw TSO forecasts");
	cmd->add_flag("--equal-weights", o.equal_weights, "weight the three scenarios equally");
	cmd->add_flag("--duplicate-shared-days", o.duplicate_shared,
	              "scenario-index all three days and sum the target-day duals");
	cmd->add_flag("--chain-startup", o.chain_startup,
	              "carry running capacity between consecutive windows (sequential sweep)");
}

PipelineConfig resolve_config(const CommonOpts& o) {
	PipelineConfig cfg;
	if (!o.config_path.empty()) cfg = load_config(o.config_path);
	if (!o.bundle_dir.empty()) cfg.bundle_dir = o.bundle_dir;
	if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
	if (!o.focal_zone.empty()) cfg.focal_zone = o.focal_zone;
	if (!o.eval_start.empty()) cfg.eval_start = o.eval_start;
	if (!o.eval_end.empty()) cfg.eval_end = o.eval_end;
	if (o.parallelism >= 0) cfg.parallelism = o.parallelism;
	if (o.dispatch_only) cfg.dispatch_only = true;
	if (o.equal_weights) cfg.equal_scenario_weights = true;
	if (o.duplicate_shared) cfg.duplicate_shared_days = true;
	if (o.chain_startup) cfg.chain_startup = true;
	if (cfg.bundle_dir.empty()) throw ConfigError("no bundle directory given");
	return cfg;
}

int exit_code_for(const Error& e) {
	if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
	    dynamic_cast<const CoverageError*>(&e))
		return 3;
	return 1;
}

std::map<std::int64_t, std::array<double, 24>> load_dispatch_outputs(const Dataset& ds,
                                                                     const PipelineConfig& cfg,
                                                                     const RunPlan& plan) {
	std::map<std::int64_t, std::array<double, 24>> p_hat;
	for (std::int64_t day = plan.dispatch_first; day <= plan.eval_last; ++day)
		if (auto p = read_dispatch_day(cfg.out_dir, ds.calendar, day, cfg.focal_zone))
			p_hat[day] = *p;
	if (p_hat.empty())
		throw ConfigError("no dispatch outputs under " + cfg.out_dir +
		                  "/dispatch; run the dispatch stage first");
	return p_hat;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"hourly day-ahead electricity price forecasting pipeline"};
	app.require_subcommand(1);

	CommonOpts opts;
	std::string fixture_out = "fixture";
	std::string fixture_preset = "toy";
	int fixture_days = 0;
	std::uint64_t fixture_seed = 42;
	int fixture_parallelism = 0;
	std::string dump_lp_dir;

	auto* c_ingest = app.add_subcommand("ingest-check", "validate a bundle and report warnings");
	auto* c_pre = app.add_subcommand("preprocess", "improved and two-day-ahead load forecasts");
	auto* c_density = app.add_subcommand("density", "load scenario construction");
	auto* c_dispatch = app.add_subcommand("dispatch", "rolling dispatch price estimators");
	auto* c_post = app.add_subcommand("postprocess", "price forecast post-processing");
	auto* c_eval = app.add_subcommand("evaluate", "write evaluation tables");
	auto* c_run = app.add_subcommand("run", "full pipeline over the evaluation range");
	auto* c_fix = app.add_subcommand("simulate-fixture", "generate a synthetic bundle");

	for (CLI::App* cmd : {c_ingest, c_pre, c_density, c_dispatch, c_post, c_eval, c_run})
		add_common(cmd, opts);
	c_dispatch->add_option("--dump-lp", dump_lp_dir,
	                       "also write each day's model in the plain-text LP grammar");
	c_fix->add_option("--out", fixture_out, "target directory")->required();
	c_fix->add_option("--preset", fixture_preset, "toy | pipeline");
	c_fix->add_option("--days", fixture_days, "override the preset day count");
	c_fix->add_option("--seed", fixture_seed, "random seed");
	c_fix->add_option("--parallelism", fixture_parallelism, "workers for the price pass");

	CLI11_PARSE(app, argc, argv);

	try {
		if (c_fix->parsed()) {
			FixtureSpec spec;
			spec.preset = fixture_preset == "pipeline" ? FixturePreset::Pipeline : FixturePreset::Toy;
			if (fixture_preset != "pipeline" && fixture_preset != "toy")
				throw ConfigError("unknown preset '" + fixture_preset + "'");
			spec.n_days = fixture_days;
			spec.seed = fixture_seed;
			spec.parallelism = fixture_parallelism;
			const fs::path cfg_path = write_fixture(fixture_out, spec);
			std::printf("fixture written to %s\nconfig: %s\n", fixture_out.c_str(),
			            cfg_path.string().c_str());
			return 0;
		}

		if (c_ingest->parsed()) {
			PipelineConfig cfg;
			if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
			if (!opts.bundle_dir.empty()) cfg.bundle_dir = opts.bundle_dir;
			if (cfg.bundle_dir.empty()) throw ConfigError("no bundle directory given");
			Dataset ds = ingest(cfg.bundle_dir);
			std::printf("bundle ok: %lld days from %s, %zu zones, %zu clusters\n",
			            static_cast<long long>(ds.n_days), format_date(ds.epoch).c_str(),
			            ds.zones.size(), ds.clusters.size());
			for (const auto& w : ds.warnings) std::printf("warning: %s\n", w.c_str());
			return 0;
		}

		PipelineConfig cfg = resolve_config(opts);
		if (c_run->parsed()) {
			RunSummary s = run_pipeline(cfg);
			std::printf("evaluated %lld days, %lld failed (%lld dispatch days cached)\n",
			            static_cast<long long>(s.eval_days), static_cast<long long>(s.failed_days),
			            static_cast<long long>(s.cached_dispatch_days));
			std::printf("manifest: %s\n", s.manifest_path.c_str());
			return s.exit_code;
		}

		Dataset ds = ingest(cfg.bundle_dir);
		const RunPlan plan = make_plan(ds, cfg);
		fs::create_directories(cfg.out_dir);

		if (c_pre->parsed()) {
			LoadStageOut load = run_load_stage(ds, cfg, plan);
			write_load_stage(cfg.out_dir, ds, cfg, load);
			std::printf("wrote %s/preproc (%zu improved days, %zu two-day-ahead days)\n",
			            cfg.out_dir.c_str(), load.improved.size(), load.two_da.size());
			return load.failures.empty() ? 0 : 2;
		}
		if (c_density->parsed()) {
			LoadStageOut load = run_load_stage(ds, cfg, plan);
			DensityStageOut density = run_density_stage(ds, cfg, plan, load);
			write_load_stage(cfg.out_dir, ds, cfg, load);
			write_density_stage(cfg.out_dir, ds, density);
			std::printf("wrote %s/density (%zu scenario days)\n", cfg.out_dir.c_str(),
			            density.scenarios.size());
			return density.failures.empty() ? 0 : 2;
		}
		if (c_dispatch->parsed()) {
			LoadStageOut load = run_load_stage(ds, cfg, plan);
			DensityStageOut density =
			    cfg.dispatch_only ? DensityStageOut{} : run_density_stage(ds, cfg, plan, load);
			DispatchStageOut dispatch = run_dispatch_stage(ds, cfg, plan, load, density);
			for (const auto& [day, res] : dispatch.results)
				write_dispatch_day(cfg.out_dir, ds.calendar, day, res);
			if (!dump_lp_dir.empty()) {
				fs::create_directories(dump_lp_dir);
				for (std::int64_t day = plan.dispatch_first; day <= plan.eval_last; ++day) {
					if (!dispatch.results.count(day)) continue;
					DispatchInstance inst = assemble_instance(ds, cfg, day, load, density);
					DispatchModel model = build_lp(inst);
					const std::string name = "day_" + format_date(ds.calendar.date_of(day));
					std::ofstream out(fs::path(dump_lp_dir) / (name + ".lp"));
					out << to_lp_format(model.lp, name);
				}
			}
			std::printf("wrote %s/dispatch (%zu days, %zu failed)\n", cfg.out_dir.c_str(),
			            dispatch.results.size(), dispatch.failures.size());
			const std::int64_t days = plan.eval_last - plan.dispatch_first + 1;
			return static_cast<std::int64_t>(dispatch.failures.size()) * 2 > days ? 2 : 0;
		}
		if (c_post->parsed()) {
			auto p_hat = load_dispatch_outputs(ds, cfg, plan);
			PostprocStageOut post = run_postproc_stage(ds, cfg, plan, p_hat);
			write_submodels(cfg.out_dir, ds, p_hat, post);
			for (const auto& [day, pf] : post.prob) write_prob_day(cfg.out_dir, ds, day, pf);
			std::printf("wrote %s/postproc (%zu forecast days)\n", cfg.out_dir.c_str(),
			            post.prob.size());
			return post.failures.empty() ? 0 : 2;
		}
		if (c_eval->parsed()) {
			auto p_hat = load_dispatch_outputs(ds, cfg, plan);
			PostprocStageOut post = run_postproc_stage(ds, cfg, plan, p_hat);
			write_evaluation(cfg.out_dir, ds, cfg, plan, p_hat, post);
			std::printf("wrote %s/evaluation\n", cfg.out_dir.c_str());
			return 0;
		}
	} catch (const Error& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return exit_code_for(e);
	} catch (const std::exception& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 1;
	}
	return 0;
}
