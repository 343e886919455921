// Acceptance suite: one checked criterion per line, non-zero exit when any
// fails. Oracles are independent of the implementation paths they check.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "epf/evaluation.hpp"
#include "epf/fixture.hpp"
#include "epf/run.hpp"

using namespace epf;
namespace fs = std::filesystem;

namespace {

struct Criterion {
	int id;
	std::string name;
	bool pass = false;
	std::string detail;
	double seconds = 0.0;
};

std::vector<Criterion> results;

template <typename Fn>
void check(int id, const std::string& name, Fn&& fn) {
	Criterion c;
	c.id = id;
	c.name = name;
	const auto t0 = std::chrono::steady_clock::now();
	try {
		c.pass = fn(c.detail);
	} catch (const std::exception& e) {
		c.pass = false;
		c.detail = std::string("exception: ") + e.what();
	}
	c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	std::printf("[%2d/10] %s  %-34s %s (%.1f s)\n", id, c.pass ? "PASS" : "FAIL", name.c_str(),
	            c.detail.c_str(), c.seconds);
	std::fflush(stdout);
	results.push_back(std::move(c));
}

TechnologyCluster thermal(const std::string& id, double cap, double vc, double g_min = 0.0,
                          double sc = 0.0, double vc_ml = -1.0) {
	TechnologyCluster c;
	c.id = id;
	c.zone = "Z";
	c.kind = ClusterKind::Thermal;
	c.cap = filled_hours(cap);
	c.vc_full = filled_hours(vc);
	c.vc_minload = filled_hours(vc_ml < 0.0 ? vc : vc_ml);
	c.g_min = g_min;
	c.startup_cost = filled_hours(sc);
	return c;
}

double merit_price(std::vector<std::pair<double, double>> vc_cap, double demand, double voll) {
	std::sort(vc_cap.begin(), vc_cap.end());
	double rest = demand;
	for (const auto& [vc, cap] : vc_cap) {
		if (rest <= cap + 1e-12) return vc;
		rest -= cap;
	}
	return voll;
}

// shared pipeline-fixture state for criteria 6 and 7
struct FixtureRun {
	bool ready = false;
	double rmse_dispatch = 0.0;
	double rmse_combined = 0.0;
	std::vector<std::int64_t> coverage;
	std::int64_t covered_hours = 0;
	double gen_seconds = 0.0;
	double run_seconds = 0.0;
	std::string error;
};

FixtureRun run_pipeline_fixture() {
	FixtureRun out;
	const fs::path dir = fs::temp_directory_path() / "epf_acceptance_fixture";
	try {
		const auto t0 = std::chrono::steady_clock::now();
		fs::remove_all(dir);
		FixtureSpec spec;
		spec.preset = FixturePreset::Pipeline;
		spec.seed = 20240815;
		spec.parallelism = 0;
		// the fixture's price pass already runs the first three stages on
		// exactly the shipped config, so their estimators are reused here
		std::map<std::int64_t, std::array<double, 24>> p_hat;
		const fs::path cfg_path = write_fixture(dir, spec, &p_hat);
		const auto t1 = std::chrono::steady_clock::now();
		out.gen_seconds = std::chrono::duration<double>(t1 - t0).count();

		PipelineConfig cfg = load_config(cfg_path);
		cfg.out_dir = (dir / "run").string();
		Dataset ds = ingest(dir);
		const RunPlan plan = make_plan(ds, cfg);
		PostprocStageOut post = run_postproc_stage(ds, cfg, plan, p_hat);
		out.run_seconds =
		    std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

		const auto& actual = ds.prices.at(cfg.focal_zone);
		double sq_d = 0.0, sq_c = 0.0;
		std::int64_t n = 0;
		std::vector<double> cov_actual;
		std::vector<std::vector<double>> cov_rows;
		for (std::int64_t day = plan.eval_first; day <= plan.eval_last; ++day) {
			const auto pit = p_hat.find(day);
			const auto cit = post.combined.find(day);
			if (pit == p_hat.end() || cit == post.combined.end()) continue;
			const auto prob_it = post.prob.find(day);
			for (int h = 0; h < 24; ++h) {
				const double a = actual[static_cast<std::size_t>(day) * 24 + h];
				sq_d += (a - pit->second[h]) * (a - pit->second[h]);
				sq_c += (a - cit->second[h]) * (a - cit->second[h]);
				++n;
				if (prob_it != post.prob.end()) {
					cov_actual.push_back(a);
					cov_rows.push_back(prob_it->second.quantiles[h]);
				}
			}
		}
		if (n == 0) throw SolveFailed("fixture run produced no evaluable days");
		out.rmse_dispatch = std::sqrt(sq_d / static_cast<double>(n));
		out.rmse_combined = std::sqrt(sq_c / static_cast<double>(n));
		out.coverage = coverage_histogram(cov_actual, cov_rows);
		out.covered_hours = static_cast<std::int64_t>(cov_actual.size());
		out.ready = true;
	} catch (const std::exception& e) {
		out.error = e.what();
	}
	return out;
}

LinearProgram random_small_lp(Rng& rng) {
	LinearProgram lp;
	const int n = static_cast<int>(rng.uniform_int(2, 12));
	std::vector<double> x0(n);
	for (int j = 0; j < n; ++j) {
		lp.add_var("x" + std::to_string(j), 0.0, rng.uniform() < 0.3 ? rng.uniform(2.0, 8.0) : kInf,
		           rng.uniform(0.5, 10.0));
		x0[j] = rng.uniform(0.0, 2.0);
	}
	const int n_eq = static_cast<int>(rng.uniform_int(1, std::max(1, n / 3)));
	const int n_ub = static_cast<int>(rng.uniform_int(1, std::max(1, n / 2)));
	for (int i = 0; i < n_eq; ++i) {
		std::vector<std::pair<int, double>> terms;
		double rhs = 0.0;
		for (int j = 0; j < n; ++j) {
			if (rng.uniform() < 0.5) continue;
			const double a = rng.uniform(-2.0, 2.0);
			terms.push_back({j, a});
			rhs += a * x0[j];
		}
		if (terms.empty()) {
			terms.push_back({0, 1.0});
			rhs = x0[0];
		}
		lp.add_eq(terms, rhs);
	}
	for (int i = 0; i < n_ub; ++i) {
		std::vector<std::pair<int, double>> terms;
		double act = 0.0;
		for (int j = 0; j < n; ++j) {
			if (rng.uniform() < 0.5) continue;
			const double a = rng.uniform(-2.0, 2.0);
			terms.push_back({j, a});
			act += a * x0[j];
		}
		if (terms.empty()) terms.push_back({0, 1.0});
		lp.add_ub(terms, act + rng.uniform(0.1, 3.0));
	}
	return lp;
}

} // namespace

int main() {
	std::printf("acceptance suite\n================\n");

	// 1. merit-order oracle on randomised single-zone thermal systems
	check(1, "merit-order oracle", [](std::string& detail) {
		Rng rng(11001);
		int checked_hours = 0;
		for (int inst_i = 0; inst_i < 50; ++inst_i) {
			const int n_cl = static_cast<int>(rng.uniform_int(2, 5));
			const int n_scen = rng.uniform() < 0.5 ? 1 : 3;
			DispatchInstance inst;
			inst.scenario_probs = n_scen == 1 ? std::vector<double>{1.0}
			                                  : std::vector<double>{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
			std::vector<std::pair<double, double>> vc_cap;
			double total = 0.0;
			for (int c = 0; c < n_cl; ++c) {
				const double cap = rng.uniform(30.0, 150.0);
				const double vc = rng.uniform(5.0, 95.0);
				inst.clusters.push_back(thermal("c" + std::to_string(c), cap, vc));
				vc_cap.push_back({vc, cap});
				total += cap;
			}
			ZoneData z;
			z.id = "Z";
			std::array<double, 72> demand{};
			auto clear_of_breakpoints = [&](double d) {
				double cum = 0.0;
				auto sorted = vc_cap;
				std::sort(sorted.begin(), sorted.end());
				for (const auto& [vc, cap] : sorted) {
					cum += cap;
					if (std::fabs(d - cum) < 1e-3 * total) return false;
				}
				return true;
			};
			for (int t = 0; t < 72; ++t) {
				double d;
				do d = rng.uniform(0.05, 0.95) * total;
				while (!clear_of_breakpoints(d));
				demand[t] = d;
			}
			for (int t = 0; t < 48; ++t) z.demand_shared[t] = demand[t];
			z.demand_d2.assign(n_scen, {});
			for (int s = 0; s < n_scen; ++s)
				for (int h = 0; h < 24; ++h) z.demand_d2[s][h] = demand[48 + h];
			inst.zones = {z};
			DispatchModel model = build_lp(inst);
			LPSolution sol = solve(model.lp);
			if (sol.status != LPStatus::Optimal) {
				detail = "instance " + std::to_string(inst_i) + " not optimal";
				return false;
			}
			DispatchResult res = extract_prices(inst, model, sol);
			for (int h = 0; h < 24; ++h) {
				const double oracle = merit_price(vc_cap, demand[24 + h], 3000.0);
				if (std::fabs(res.prices[0][h] - oracle) > 1e-6) {
					detail = "price mismatch " + fmt_num(res.prices[0][h]) + " vs " +
					         fmt_num(oracle);
					return false;
				}
				++checked_hours;
			}
		}
		detail = std::to_string(checked_hours) + " hourly prices matched to 1e-6";
		return true;
	});
	const bool c1_time = results.back().seconds < 10.0;
	if (!c1_time) {
		results.back().pass = false;
		std::printf("        (runtime bound exceeded: %.1f s >= 10 s)\n", results.back().seconds);
	}

	// 2. startup-cost loading onto the spike hour
	check(2, "startup loading", [](std::string& detail) {
		ZoneData z;
		z.id = "Z";
		z.demand_shared.fill(40.0);
		z.demand_d2.assign(1, {});
		z.demand_d2[0].fill(40.0);
		z.demand_shared[24 + 13] = 92.0; // single spike on the target day
		DispatchInstance inst;
		inst.scenario_probs = {1.0};
		inst.clusters = {thermal("base", 50.0, 20.0),
		                 thermal("peak", 100.0, 70.0, 0.4, 100.0, 70.0)};
		inst.zones = {z};
		DispatchModel model = build_lp(inst);
		LPSolution sol = solve(model.lp);
		if (sol.status != LPStatus::Optimal) {
			detail = "spike instance not optimal";
			return false;
		}
		DispatchResult res = extract_prices(inst, model, sol);
		const double premium = res.prices[0][13] - 70.0;
		double started = 0.0;
		for (const auto& cs : res.clusters)
			if (cs.cluster_id == "peak") started = cs.startup[13];
		// premium per MWh times the marginal megawatt equals the startup cost
		if (std::fabs(premium - 100.0) > 1e-4) {
			detail = "premium " + fmt_num(premium) + " != startup cost 100";
			return false;
		}
		if (std::fabs(started - 42.0) > 1e-6) {
			detail = "started capacity " + fmt_num(started);
			return false;
		}
		for (int h = 0; h < 24; ++h) {
			if (h == 13) continue;
			if (std::fabs(res.prices[0][h] - 20.0) > 1e-6) {
				detail = "off-spike hour " + std::to_string(h + 1) + " price " +
				         fmt_num(res.prices[0][h]);
				return false;
			}
		}
		detail = "spike premium equals the startup cost to 1e-4";
		return true;
	});
	if (results.back().seconds >= 5.0) {
		results.back().pass = false;
		std::printf("        (runtime bound exceeded)\n");
	}

	// 3. negative-price and scarcity mechanisms, exact values
	check(3, "curtailment and shedding prices", [](std::string& detail) {
		TechnologyCluster wind;
		wind.id = "wind";
		wind.zone = "Z";
		wind.kind = ClusterKind::Renewable;
		wind.cap = filled_hours(100.0);
		wind.res_profile = filled_hours(1.0);
		ZoneData z;
		z.id = "Z";
		z.demand_shared.fill(50.0);
		z.demand_d2.assign(1, {});
		z.demand_d2[0].fill(50.0);
		DispatchInstance surplus;
		surplus.scenario_probs = {1.0};
		surplus.clusters = {wind};
		surplus.zones = {z};
		DispatchModel m1 = build_lp(surplus);
		LPSolution s1 = solve(m1.lp);
		if (s1.status != LPStatus::Optimal) return false;
		DispatchResult r1 = extract_prices(surplus, m1, s1);
		for (int h = 0; h < 24; ++h)
			if (r1.prices[0][h] != -20.0) {
				detail = "surplus price " + fmt_num(r1.prices[0][h]) + " != -20";
				return false;
			}

		DispatchInstance scarce;
		scarce.scenario_probs = {1.0};
		scarce.clusters = {thermal("only", 100.0, 50.0)};
		ZoneData z2 = z;
		z2.demand_shared.fill(150.0);
		z2.demand_d2[0].fill(150.0);
		scarce.zones = {z2};
		DispatchModel m2 = build_lp(scarce);
		LPSolution s2 = solve(m2.lp);
		if (s2.status != LPStatus::Optimal) return false;
		DispatchResult r2 = extract_prices(scarce, m2, s2);
		for (int h = 0; h < 24; ++h)
			if (r2.prices[0][h] != 3000.0) {
				detail = "scarcity price " + fmt_num(r2.prices[0][h]) + " != 3000";
				return false;
			}
		detail = "-20 and +3000 reproduced exactly";
		return true;
	});

	// 4. LP duals as derivatives via re-solve
	check(4, "duals predict objective changes", [](std::string& detail) {
		Rng rng(778899);
		const double delta = 1e-4;
		int checked = 0;
		int attempts = 0;
		while (checked < 100 && attempts < 600) {
			++attempts;
			LinearProgram lp = random_small_lp(rng);
			LPSolution sol = solve(lp);
			if (sol.status != LPStatus::Optimal || sol.degenerate) continue;
			for (std::size_t i = 0; i < lp.eq_rows.size() && checked < 100; ++i) {
				LinearProgram bumped = lp;
				bumped.eq_rows[i].rhs += delta;
				LPSolution s2 = solve(bumped);
				if (s2.status != LPStatus::Optimal) continue;
				const double fd = s2.objective_value - sol.objective_value;
				if (std::fabs(fd - sol.duals_eq[i] * delta) > 1e-6) {
					detail = "finite difference " + fmt_num(fd) + " vs dual step " +
					         fmt_num(sol.duals_eq[i] * delta);
					return false;
				}
				++checked;
			}
		}
		if (checked < 100) {
			detail = "only " + std::to_string(checked) + " non-degenerate checks";
			return false;
		}
		detail = "100 finite-difference checks within 1e-6";
		return true;
	});

	// 5. parameter recovery for the four stochastic models
	check(5, "model parameter recovery", [](std::string& detail) {
		Rng rng(5050);
		const int n_hours = 365 * 24;
		int ok_sarma = 0, ok_sarmax = 0, ok_uv = 0, ok_mv = 0;
		for (int seed = 0; seed < 20; ++seed) {
			// hourly-load error remainder model
			{
				SarmaParams truth;
				truth.phi1 = 0.6;
				truth.phi24 = 0.3;
				truth.omega1 = 0.2;
				truth.omega24 = 0.1;
				std::vector<double> noise(n_hours);
				for (auto& v : noise) v = rng.normal();
				auto rc = simulate_sarma(truth, noise);
				auto fit = fit_sarma(rc, 2500);
				const bool ok = std::fabs(fit.phi0 - truth.phi0) <= 0.1 &&
				                std::fabs(fit.phi1 - truth.phi1) <= 0.1 &&
				                std::fabs(fit.phi24 - truth.phi24) <= 0.1 &&
				                std::fabs(fit.omega1 - truth.omega1) <= 0.1 &&
				                std::fabs(fit.omega24 - truth.omega24) <= 0.1;
				ok_sarma += ok ? 1 : 0;
			}
			// two-day-ahead model with the weekly exogenous lag
			{
				SarmaxParams truth;
				truth.phi0 = 0.5;
				truth.phi1 = 0.5;
				truth.phi24 = 0.2;
				truth.phi168 = 0.15;
				truth.omega1 = 0.3;
				truth.omega24 = 0.2;
				std::vector<double> noise(n_hours);
				for (auto& v : noise) v = rng.normal();
				auto y = simulate_sarmax(truth, noise);
				auto fit = fit_sarmax_2da(y, 2500);
				const bool ok = std::fabs(fit.phi0 - truth.phi0) <= 0.1 &&
				                std::fabs(fit.phi1 - truth.phi1) <= 0.1 &&
				                std::fabs(fit.phi24 - truth.phi24) <= 0.1 &&
				                std::fabs(fit.phi168 - truth.phi168) <= 0.1 &&
				                std::fabs(fit.omega1 - truth.omega1) <= 0.1 &&
				                std::fabs(fit.omega24 - truth.omega24) <= 0.1;
				ok_sarmax += ok ? 1 : 0;
			}
			// hourly and per-hour price-error models on one simulated panel
			{
				const int n_days = 365;
				std::vector<double> eps, wind, psi;
				std::vector<CalendarFlags> flags;
				std::vector<double> dmin(n_days, 0.0), dmax(n_days, 0.0);
				const double uv_truth[10] = {0.2, 0.35, -0.15, 0.2, 0.2, 0.25,
				                             0.1, -0.1, 2.0, 0.8};
				for (int d = 0; d < n_days; ++d) {
					CalendarFlags f{d % 7 + 1, d % 4 == 1};
					flags.push_back(f);
					double lo = 1e300, hi = -1e300;
					for (int h = 1; h <= 24; ++h) {
						const std::size_t t = eps.size();
						auto lag = [&](std::size_t b) { return t >= b ? eps[t - b] : 0.0; };
						const double x = rng.normal(0.0, 3.0);
						const double innov = rng.normal(0.0, 0.5);
						const double val =
						    uv_truth[0] + uv_truth[1] * lag(1) + uv_truth[2] * lag(2) +
						    uv_truth[3] * lag(24) + uv_truth[4] * lag(168) +
						    uv_truth[5] * (t > 0 ? psi[t - 1] : 0.0) +
						    uv_truth[6] * (d > 0 ? dmin[d - 1] : 0.0) +
						    uv_truth[7] * (d > 0 ? dmax[d - 1] : 0.0) +
						    uv_truth[8] * (f.is_holiday ? 1.0 : 0.0) + uv_truth[9] * x + innov;
						eps.push_back(val);
						wind.push_back(x);
						psi.push_back(innov);
						lo = std::min(lo, val);
						hi = std::max(hi, val);
					}
					dmin[d] = lo;
					dmax[d] = hi;
				}
				PriceErrorPanel panel(0, eps, wind, flags);
				auto uv = fit_uv(panel, 52, n_days - 1);
				const double uv_fit[10] = {uv.phi0, uv.phi1, uv.phi2, uv.phi3, uv.phi4,
				                           uv.phi5, uv.omega1, uv.omega2, uv.omega3, uv.omega4};
				bool uv_ok = true;
				for (int k = 0; k < 10; ++k) uv_ok = uv_ok && std::fabs(uv_fit[k] - uv_truth[k]) <= 0.1;
				ok_uv += uv_ok ? 1 : 0;

				// a separate per-hour panel with its own law
				std::vector<double> eps2, wind2;
				std::vector<double> dmin2(n_days, 0.0), dmax2(n_days, 0.0);
				const double mv_truth[7] = {0.3, 0.5, 0.2, 0.1, -0.1, 3.0, 0.7};
				for (int d = 0; d < n_days; ++d) {
					const CalendarFlags f = flags[d];
					double lo = 1e300, hi = -1e300;
					for (int h = 1; h <= 24; ++h) {
						auto prev = [&](int back) {
							const int dd = d - back;
							return dd >= 0 ? eps2[static_cast<std::size_t>(dd) * 24 + h - 1] : 0.0;
						};
						const double x = rng.normal(0.0, 3.0);
						// small innovation: the intercept's standard error is
						// inflated by the nonzero means of the min/max
						// regressors, so per-hour fits need a quiet design
						const double val = mv_truth[0] + mv_truth[1] * prev(1) +
						                   mv_truth[2] * prev(7) +
						                   mv_truth[3] * (d > 0 ? dmin2[d - 1] : 0.0) +
						                   mv_truth[4] * (d > 0 ? dmax2[d - 1] : 0.0) +
						                   mv_truth[5] * (f.is_holiday ? 1.0 : 0.0) +
						                   mv_truth[6] * x + rng.normal(0.0, 0.1);
						eps2.push_back(val);
						wind2.push_back(x);
						lo = std::min(lo, val);
						hi = std::max(hi, val);
					}
					dmin2[d] = lo;
					dmax2[d] = hi;
				}
				PriceErrorPanel panel2(0, eps2, wind2, flags);
				auto mv = fit_mv(panel2, 52, n_days - 1);
				bool mv_ok = true;
				for (int h = 0; h < 24; ++h) {
					const auto& hp = mv.hours[h];
					const double fit7[7] = {hp.phi0, hp.phi1, hp.phi2, hp.omega1,
					                        hp.omega2, hp.omega3, hp.omega4};
					for (int k = 0; k < 7; ++k) mv_ok = mv_ok && std::fabs(fit7[k] - mv_truth[k]) <= 0.1;
				}
				ok_mv += mv_ok ? 1 : 0;
			}
		}
		detail = "seeds in tolerance: sarma " + std::to_string(ok_sarma) + "/20, sarmax " +
		         std::to_string(ok_sarmax) + "/20, hourly " + std::to_string(ok_uv) +
		         "/20, per-hour " + std::to_string(ok_mv) + "/20";
		return ok_sarma >= 18 && ok_sarmax >= 18 && ok_uv >= 18 && ok_mv >= 18;
	});
	if (results.back().seconds >= 60.0) {
		results.back().pass = false;
		std::printf("        (runtime bound exceeded)\n");
	}

	// 6 and 7 share one end-to-end synthetic pipeline run
	FixtureRun fx = run_pipeline_fixture();

	check(6, "pipeline improvement", [&fx](std::string& detail) {
		if (!fx.ready) {
			detail = fx.error;
			return false;
		}
		const double gain = 1.0 - fx.rmse_combined / fx.rmse_dispatch;
		detail = "rmse " + fmt_num(fx.rmse_dispatch) + " -> " + fmt_num(fx.rmse_combined) +
		         " (" + fmt_num(gain * 100.0) + " %), fixture " + fmt_num(fx.gen_seconds) +
		         " s + run " + fmt_num(fx.run_seconds) + " s";
		return gain >= 0.15 && fx.gen_seconds + fx.run_seconds < 300.0;
	});

	check(7, "probabilistic calibration", [&fx](std::string& detail) {
		if (!fx.ready) {
			detail = fx.error;
			return false;
		}
		if (fx.covered_hours < 5000) {
			detail = "only " + std::to_string(fx.covered_hours) + " covered hours";
			return false;
		}
		const double p = chi_square_uniformity_p(fx.coverage);
		detail = std::to_string(fx.covered_hours) + " hours, chi-square p = " + fmt_num(p);
		return p > 0.01;
	});

	// 8. quantile regression against exhaustive search
	check(8, "quantile regression oracle", [](std::string& detail) {
		Rng rng(31415);
		auto loss_of = [](const std::vector<double>& x, const std::vector<double>& y,
		                  double icept, double slope, double q) {
			double loss = 0.0;
			for (std::size_t i = 0; i < y.size(); ++i)
				loss += pinball_loss(y[i] - icept - slope * x[i], q);
			return loss;
		};
		for (int trial = 0; trial < 40; ++trial) {
			const std::size_t n = 3 + trial % 4; // 3..6 points
			std::vector<double> xs, ys, design;
			for (std::size_t i = 0; i < n; ++i) {
				xs.push_back(rng.uniform(-4.0, 4.0));
				ys.push_back(rng.uniform(-9.0, 9.0));
				design.push_back(1.0);
				design.push_back(xs.back());
			}
			const double q = 0.05 + 0.09 * (trial % 10);
			QuantileModel m = fit_quantile_regression(design, ys, 2, q);
			double best = 1e300;
			for (std::size_t a = 0; a < n; ++a) {
				for (std::size_t b = 0; b < n; ++b) {
					if (a == b || std::fabs(xs[a] - xs[b]) < 1e-9) continue;
					const double slope = (ys[b] - ys[a]) / (xs[b] - xs[a]);
					best = std::min(best, loss_of(xs, ys, ys[a] - slope * xs[a], slope, q));
				}
				best = std::min(best, loss_of(xs, ys, ys[a], 0.0, q));
			}
			if (m.loss > best + 1e-6) {
				detail = "lp loss " + fmt_num(m.loss) + " vs grid " + fmt_num(best);
				return false;
			}
		}
		detail = "40 small fits matched exhaustive minimisers to 1e-6";
		return true;
	});

	// 9. Diebold-Mariano null behaviour
	check(9, "dm test null uniformity", [](std::string& detail) {
		Rng rng(909090);
		std::vector<double> pvals;
		for (int seed = 0; seed < 200; ++seed) {
			const int n = 180;
			std::vector<std::array<double, 24>> ea(n), eb(n);
			for (int d = 0; d < n; ++d)
				for (int h = 0; h < 24; ++h) {
					ea[d][h] = rng.normal();
					eb[d][h] = rng.normal();
				}
			const DmOutcome ab = dm_test(ea, eb);
			const DmOutcome ba = dm_test(eb, ea);
			if (ab.statistic != -ba.statistic) {
				detail = "antisymmetry violated";
				return false;
			}
			pvals.push_back(ab.p_value);
		}
		const double ks = ks_uniform_p(pvals);
		detail = "KS p = " + fmt_num(ks) + " over 200 seeds, antisymmetry exact";
		return ks > 0.01;
	});

	// 10. byte-identical toy pipeline runs
	check(10, "determinism", [](std::string& detail) {
		const fs::path dir = fs::temp_directory_path() / "epf_acceptance_toy";
		fs::remove_all(dir);
		FixtureSpec spec;
		spec.preset = FixturePreset::Toy;
		spec.seed = 99;
		spec.parallelism = 0;
		const fs::path cfg_path = write_fixture(dir, spec);
		Dataset ds = ingest(dir);
		PipelineConfig cfg = load_config(cfg_path);
		cfg.parallelism = 0;
		cfg.out_dir = (dir / "run_a").string();
		RunSummary a = run_pipeline(ds, cfg);
		cfg.out_dir = (dir / "run_b").string();
		RunSummary b = run_pipeline(ds, cfg);
		if (a.failed_days != 0 || b.failed_days != 0) {
			detail = "toy run had failing days";
			return false;
		}
		int compared = 0;
		for (const auto& entry : fs::recursive_directory_iterator(dir / "run_a")) {
			if (!entry.is_regular_file()) continue;
			if (entry.path().extension() != ".csv") continue;
			const fs::path rel = fs::relative(entry.path(), dir / "run_a");
			std::ifstream fa(entry.path(), std::ios::binary);
			std::ifstream fb(dir / "run_b" / rel, std::ios::binary);
			std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
			std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
			if (ca != cb || ca.empty()) {
				detail = "mismatch in " + rel.string();
				return false;
			}
			++compared;
		}
		detail = std::to_string(compared) + " numeric csv files byte-identical";
		return compared > 10;
	});

	int passed = 0;
	for (const auto& c : results) passed += c.pass ? 1 : 0;
	std::printf("================\nacceptance: %d/10 criteria passed\n", passed);
	return passed == 10 ? 0 : 1;
}
