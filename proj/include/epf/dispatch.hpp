#pragma once

// Three-day stochastic dispatch LP. Days d and d+1 share one set of
// variables across scenarios; only d+2 is scenario-indexed, so the d+1
// energy-balance dual is unique and read directly as the hourly price
// estimator. The alternative fully scenario-indexed form sits behind
// DispatchOptions::duplicate_shared_days.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "epf/errors.hpp"
#include "epf/lp.hpp"
#include "epf/timeseries.hpp"

namespace epf {

constexpr int kWindowDays = 3;
constexpr int kWindowHours = kWindowDays * 24;

inline std::array<double, kWindowHours> filled_hours(double v) {
	std::array<double, kWindowHours> a{};
	a.fill(v);
	return a;
}

enum class ClusterKind { Thermal, Renewable, StorageMid, StorageLong, HydroReservoir, Baseload };

inline const char* kind_name(ClusterKind k) {
	switch (k) {
		case ClusterKind::Thermal: return "thermal";
		case ClusterKind::Renewable: return "renewable";
		case ClusterKind::StorageMid: return "storage_mid";
		case ClusterKind::StorageLong: return "storage_long";
		case ClusterKind::HydroReservoir: return "hydro_reservoir";
		default: return "baseload";
	}
}

/// One step of the long-term storage merit order.
struct StlStep {
	double capacity_mw = 0.0;
	std::array<double, kWindowHours> water_value{};
};

/// Capacity cluster parameter bundle for one rolling window. Hour-indexed
/// arrays run over the 72 window hours (day*24 + hour - 1).
struct TechnologyCluster {
	std::string id;
	std::string zone;
	ClusterKind kind = ClusterKind::Thermal;
	std::array<double, kWindowHours> cap{};         // MW
	std::array<double, kWindowHours> vc_full{};     // EUR/MWh at full load
	std::array<double, kWindowHours> vc_minload{};  // EUR/MWh at minimum load
	double g_min = 0.0;                             // fraction of running capacity
	std::array<double, kWindowHours> startup_cost{}; // EUR/MW started
	std::array<double, kWindowHours> availability = filled_hours(1.0);
	std::array<double, kWindowHours> outage{};      // MW
	std::array<double, kWindowHours> water_value{}; // EUR/MWh (hydro, single-step stl)
	std::vector<StlStep> wv_steps;                  // optional stl merit-order steps
	double efficiency = 0.75;                       // storage cycle (stm)
	double cer = 9.0;                               // stored energy hours per MW (stm)
	std::array<double, kWindowHours> res_profile{}; // feed-in fraction (renewable)
};

/// Demand, must-run and reserve data for one zone. Demand on the shared
/// days is one path; day d+2 carries one path per scenario.
struct ZoneData {
	std::string id;
	std::array<double, 48> demand_shared{};       // MWh, days d and d+1
	std::vector<std::array<double, 24>> demand_d2; // MWh, one per scenario
	std::array<double, kWindowHours> chp_mustrun{}; // MW, aggregate across thermal clusters
	double reserve_primary = 0.0;                 // MW per block
	double reserve_sec_pos = 0.0;
	double reserve_sec_neg = 0.0;
	double voll = 3000.0;  // EUR/MWh
	double curtc = 20.0;   // EUR/MWh
};

struct NtcEntry {
	std::string from;
	std::string to;
	std::array<double, kWindowHours> ntc{}; // MW
};

struct DispatchOptions {
	bool duplicate_shared_days = false; // scenario-index every day
	int blocks_per_day = 6;             // reserve bidding blocks
};

/// Full parameter bundle for one three-day window starting at `start_day`.
struct DispatchInstance {
	std::int64_t start_day = 0; // absolute index of day d
	std::vector<double> scenario_probs{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
	std::vector<TechnologyCluster> clusters;
	std::vector<ZoneData> zones;
	std::vector<NtcEntry> ntc;
	std::map<std::string, double> p_on_init; // terminal running capacity of the previous window
	DispatchOptions options;
};

/// LP plus the variable/row bookkeeping needed to read the solution back.
class DispatchModel {
public:
	LinearProgram lp;

	int n_scenarios = 0;
	bool duplicated = false;
	int blocks_per_day = 6;

	int n_slots = 0;
	// variable indices, -1 where a variable does not exist
	std::vector<std::vector<int>> gen;     // [cluster][slot] (stl: first step)
	std::vector<std::vector<int>> p_on;    // thermal
	std::vector<std::vector<int>> startup; // thermal
	std::vector<std::vector<int>> curtail; // renewable
	std::vector<std::vector<int>> charge;  // stm CM / stl CL (first step)
	std::vector<std::vector<int>> level;   // stm SL
	std::vector<std::vector<std::vector<int>>> stl_gen;    // [cluster][step][slot]
	std::vector<std::vector<std::vector<int>>> stl_charge; // [cluster][step][slot]
	std::vector<std::vector<int>> shed;  // [zone][slot]
	std::vector<std::vector<int>> spill; // [zone][slot], -1 unless net demand < 0
	std::vector<std::vector<int>> balance_row; // [zone][slot] equality row index

	int slot(int day, int hour, int s) const {
		if (duplicated) return s * kWindowHours + day * 24 + hour - 1;
		return day < 2 ? day * 24 + hour - 1 : 48 + s * 24 + hour - 1;
	}
	int contexts(int day) const { return (duplicated || day == 2) ? n_scenarios : 1; }
	double slot_weight(int day, int s, const std::vector<double>& probs) const {
		return (duplicated || day == 2) ? probs[s] : 1.0;
	}
};

struct DispatchDiagnostics {
	bool degenerate = false;
	int iterations = 0;
	double max_primal_residual = 0.0;
	double objective = 0.0;
};

/// Day d+1 prices plus primal summaries for the target day.
struct DispatchResult {
	std::vector<std::string> zone_ids;
	std::vector<std::array<double, 24>> prices; // EUR/MWh per zone, day d+1

	struct ClusterSummary {
		std::string cluster_id;
		std::array<double, 24> generation{}; // day d+1, probability-weighted if duplicated
		std::array<double, 24> startup{};
	};
	std::vector<ClusterSummary> clusters;
	std::vector<std::array<double, 24>> shed;        // per zone, day d+1
	std::vector<std::array<double, 24>> curtailment; // per zone, day d+1
	DispatchDiagnostics diagnostics;
};

namespace detail {

inline void check_instance(const DispatchInstance& inst) {
	const int s_count = static_cast<int>(inst.scenario_probs.size());
	if (s_count < 1) throw ModelError("dispatch instance needs at least one scenario");
	double psum = 0.0;
	for (double p : inst.scenario_probs) {
		if (p < 0.0) throw ModelError("scenario probability negative");
		psum += p;
	}
	if (std::fabs(psum - 1.0) > 1e-9) throw ModelError("scenario probabilities must sum to 1");
	if (inst.zones.empty()) throw ModelError("dispatch instance has no zones");
	for (const auto& z : inst.zones) {
		if (static_cast<int>(z.demand_d2.size()) != s_count)
			throw ModelError("zone " + z.id + ": one d+2 demand path required per scenario");
		for (double v : z.demand_shared)
			if (v < 0.0) throw ModelError("zone " + z.id + ": negative demand");
		for (const auto& path : z.demand_d2)
			for (double v : path)
				if (v < 0.0) throw ModelError("zone " + z.id + ": negative demand");
		if (z.reserve_primary < 0.0 || z.reserve_sec_pos < 0.0 || z.reserve_sec_neg < 0.0)
			throw ModelError("zone " + z.id + ": negative reserve requirement");
	}
	for (const auto& c : inst.clusters) {
		if (c.g_min < 0.0 || c.g_min >= 1.0)
			throw ModelError("cluster " + c.id + ": g_min must lie in [0,1)");
		for (int t = 0; t < kWindowHours; ++t) {
			if (c.cap[t] < 0.0) throw ModelError("cluster " + c.id + ": negative capacity");
			if (c.outage[t] > c.cap[t] + 1e-9)
				throw ModelError("cluster " + c.id + ": outage exceeds capacity");
		}
		if (c.kind == ClusterKind::StorageMid) {
			if (c.efficiency <= 0.0 || c.efficiency > 1.0)
				throw ModelError("cluster " + c.id + ": cycle efficiency must lie in (0,1]");
			if (c.cer <= 0.0) throw ModelError("cluster " + c.id + ": cer must be positive");
		}
		bool zone_found = false;
		for (const auto& z : inst.zones) zone_found = zone_found || z.id == c.zone;
		if (!zone_found) throw ModelError("cluster " + c.id + ": unknown zone " + c.zone);
	}
	for (const auto& e : inst.ntc) {
		for (double v : e.ntc)
			if (v < 0.0) throw ModelError("ntc " + e.from + ">" + e.to + ": negative capacity");
	}
	if (24 % 6 != 0) throw ModelError("blocks_per_day must divide 24");
}

} // namespace detail

inline DispatchModel build_lp(const DispatchInstance& inst) {
	detail::check_instance(inst);
	const auto& opt = inst.options;
	if (opt.blocks_per_day < 1 || 24 % opt.blocks_per_day != 0)
		throw ModelError("blocks_per_day must divide 24");

	DispatchModel m;
	m.n_scenarios = static_cast<int>(inst.scenario_probs.size());
	m.duplicated = opt.duplicate_shared_days;
	m.blocks_per_day = opt.blocks_per_day;
	m.n_slots = m.duplicated ? m.n_scenarios * kWindowHours : 48 + 24 * m.n_scenarios;
	const int n_clusters = static_cast<int>(inst.clusters.size());
	const int n_zones = static_cast<int>(inst.zones.size());
	const int block_len = 24 / opt.blocks_per_day;

	auto zone_index = [&](const std::string& id) {
		for (int z = 0; z < n_zones; ++z)
			if (inst.zones[z].id == id) return z;
		throw ModelError("unknown zone " + id);
	};

	// block instance index, consistent with slot sharing
	const int blocks_total = m.duplicated ? m.n_scenarios * kWindowDays * opt.blocks_per_day
	                                      : 2 * opt.blocks_per_day + m.n_scenarios * opt.blocks_per_day;
	auto block_of = [&](int day, int hour, int s) {
		const int b = (hour - 1) / block_len;
		if (m.duplicated) return s * kWindowDays * opt.blocks_per_day + day * opt.blocks_per_day + b;
		return day < 2 ? day * opt.blocks_per_day + b
		               : 2 * opt.blocks_per_day + s * opt.blocks_per_day + b;
	};

	// effective baseload feed-in reduces demand before anything else runs
	std::vector<std::vector<double>> net_extra(n_zones, std::vector<double>(kWindowHours, 0.0));
	for (const auto& c : inst.clusters) {
		if (c.kind != ClusterKind::Baseload) continue;
		const int z = zone_index(c.zone);
		for (int t = 0; t < kWindowHours; ++t)
			net_extra[z][t] += c.cap[t] * c.availability[t];
	}

	auto net_demand = [&](int z, int day, int hour, int s) {
		const int t = day * 24 + hour - 1;
		const double raw = day < 2 ? inst.zones[z].demand_shared[t]
		                           : inst.zones[z].demand_d2[s][hour - 1];
		return raw - net_extra[z][t];
	};

	LinearProgram& lp = m.lp;
	m.gen.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.p_on.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.startup.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.curtail.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.charge.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.level.assign(n_clusters, std::vector<int>(m.n_slots, -1));
	m.stl_gen.assign(n_clusters, {});
	m.stl_charge.assign(n_clusters, {});
	m.shed.assign(n_zones, std::vector<int>(m.n_slots, -1));
	m.spill.assign(n_zones, std::vector<int>(m.n_slots, -1));
	m.balance_row.assign(n_zones, std::vector<int>(m.n_slots, -1));

	// reserve variables per (thermal cluster, product, block instance)
	std::vector<std::array<std::vector<int>, 3>> reserve(n_clusters);
	std::vector<std::array<bool, 3>> zone_needs(n_zones);
	for (int z = 0; z < n_zones; ++z)
		zone_needs[z] = {inst.zones[z].reserve_primary > 0.0, inst.zones[z].reserve_sec_pos > 0.0,
		                 inst.zones[z].reserve_sec_neg > 0.0};

	auto for_each_slot = [&](auto&& fn) {
		for (int day = 0; day < kWindowDays; ++day)
			for (int s = 0; s < m.contexts(day); ++s)
				for (int hour = 1; hour <= 24; ++hour) fn(day, hour, s);
	};

	// --- variables -------------------------------------------------------
	for (int ci = 0; ci < n_clusters; ++ci) {
		const auto& c = inst.clusters[ci];
		const int z = zone_index(c.zone);
		const bool needs_reserve = c.kind == ClusterKind::Thermal &&
		                           (zone_needs[z][0] || zone_needs[z][1] || zone_needs[z][2]);
		switch (c.kind) {
			case ClusterKind::Thermal: {
				for_each_slot([&](int day, int hour, int s) {
					const int t = day * 24 + hour - 1;
					const int sl = m.slot(day, hour, s);
					const double w = m.slot_weight(day, s, inst.scenario_probs);
					const double ml_adder =
					    (c.vc_minload[t] - c.vc_full[t]) * c.g_min / (1.0 - c.g_min);
					const std::string tag =
					    c.id + ":d" + std::to_string(day) + ":h" + std::to_string(hour) +
					    (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
					m.gen[ci][sl] = lp.add_var("G:" + tag, 0.0, kInf, w * (c.vc_full[t] - ml_adder));
					const double pon_cap = std::max(0.0, c.cap[t] * c.availability[t] - c.outage[t]);
					m.p_on[ci][sl] = lp.add_var("Pon:" + tag, 0.0, pon_cap, w * ml_adder);
					m.startup[ci][sl] = lp.add_var("SU:" + tag, 0.0, kInf, w * c.startup_cost[t]);
				});
				if (needs_reserve) {
					for (int p = 0; p < 3; ++p) {
						if (!zone_needs[z][p]) continue;
						reserve[ci][p].assign(blocks_total, -1);
						static const char* pname[3] = {"PCR", "SCRp", "SCRn"};
						for (int day = 0; day < kWindowDays; ++day)
							for (int s = 0; s < m.contexts(day); ++s)
								for (int b = 0; b < opt.blocks_per_day; ++b) {
									const int bk = block_of(day, b * block_len + 1, s);
									if (reserve[ci][p][bk] >= 0) continue;
									reserve[ci][p][bk] = lp.add_var(
									    std::string(pname[p]) + ":" + c.id + ":bk" + std::to_string(bk),
									    0.0, kInf, 0.0);
								}
					}
				}
				break;
			}
			case ClusterKind::Renewable: {
				for_each_slot([&](int day, int hour, int s) {
					const int sl = m.slot(day, hour, s);
					const double w = m.slot_weight(day, s, inst.scenario_probs);
					const std::string tag =
					    c.id + ":d" + std::to_string(day) + ":h" + std::to_string(hour) +
					    (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
					m.gen[ci][sl] = lp.add_var("G:" + tag, 0.0, kInf, 0.0);
					m.curtail[ci][sl] =
					    lp.add_var("CURT:" + tag, 0.0, kInf, w * inst.zones[z].curtc);
				});
				break;
			}
			case ClusterKind::StorageMid: {
				for_each_slot([&](int day, int hour, int s) {
					const int t = day * 24 + hour - 1;
					const int sl = m.slot(day, hour, s);
					const std::string tag =
					    c.id + ":d" + std::to_string(day) + ":h" + std::to_string(hour) +
					    (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
					m.gen[ci][sl] = lp.add_var("G:" + tag, 0.0, kInf, 0.0);
					m.charge[ci][sl] = lp.add_var("CM:" + tag, 0.0, kInf, 0.0);
					// terminal level pinned at the 30 % boundary
					const double e_cap = c.cap[t] * c.cer;
					const bool terminal = day == 2 && hour == 24;
					const double boundary = 0.3 * c.cap[t];
					m.level[ci][sl] = lp.add_var("SL:" + tag, terminal ? boundary : 0.0,
					                             terminal ? boundary : e_cap, 0.0);
				});
				break;
			}
			case ClusterKind::StorageLong: {
				std::vector<StlStep> steps = c.wv_steps;
				if (steps.empty()) steps.push_back({0.0, c.water_value});
				m.stl_gen[ci].assign(steps.size(), std::vector<int>(m.n_slots, -1));
				m.stl_charge[ci].assign(steps.size(), std::vector<int>(m.n_slots, -1));
				for (std::size_t st = 0; st < steps.size(); ++st) {
					for_each_slot([&](int day, int hour, int s) {
						const int t = day * 24 + hour - 1;
						const int sl = m.slot(day, hour, s);
						const double w = m.slot_weight(day, s, inst.scenario_probs);
						const double wv = steps[st].water_value[t];
						const std::string tag = c.id + ":st" + std::to_string(st) + ":d" +
						                        std::to_string(day) + ":h" + std::to_string(hour) +
						                        (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
						m.stl_gen[ci][st][sl] = lp.add_var("G:" + tag, 0.0, kInf, w * wv);
						m.stl_charge[ci][st][sl] = lp.add_var("CL:" + tag, 0.0, kInf, -w * wv);
					});
				}
				break;
			}
			case ClusterKind::HydroReservoir: {
				for_each_slot([&](int day, int hour, int s) {
					const int t = day * 24 + hour - 1;
					const int sl = m.slot(day, hour, s);
					const double w = m.slot_weight(day, s, inst.scenario_probs);
					const std::string tag =
					    c.id + ":d" + std::to_string(day) + ":h" + std::to_string(hour) +
					    (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
					const double hi = std::max(0.0, c.cap[t] * c.availability[t] - c.outage[t]);
					m.gen[ci][sl] = lp.add_var("G:" + tag, 0.0, hi, w * c.water_value[t]);
				});
				break;
			}
			case ClusterKind::Baseload:
				break; // folded into demand
		}
	}

	// shedding covers any deficit, spill absorbs any surplus (baseload or
	// must-run above load) at curtailment cost; together they make every
	// instance feasible and bound prices to [-curtc, voll]
	for (int z = 0; z < n_zones; ++z) {
		for_each_slot([&](int day, int hour, int s) {
			const int sl = m.slot(day, hour, s);
			const double w = m.slot_weight(day, s, inst.scenario_probs);
			const std::string tag = inst.zones[z].id + ":d" + std::to_string(day) + ":h" +
			                        std::to_string(hour) +
			                        (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
			m.shed[z][sl] = lp.add_var("SHED:" + tag, 0.0, kInf, w * inst.zones[z].voll);
			m.spill[z][sl] = lp.add_var("SPILL:" + tag, 0.0, kInf, w * inst.zones[z].curtc);
		});
	}
	std::vector<std::vector<int>> flow(inst.ntc.size(), std::vector<int>(m.n_slots, -1));
	for (std::size_t e = 0; e < inst.ntc.size(); ++e) {
		for_each_slot([&](int day, int hour, int s) {
			const int t = day * 24 + hour - 1;
			if (inst.ntc[e].ntc[t] <= 0.0) return;
			const int sl = m.slot(day, hour, s);
			const std::string tag = inst.ntc[e].from + ">" + inst.ntc[e].to + ":d" +
			                        std::to_string(day) + ":h" + std::to_string(hour) +
			                        (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
			flow[e][sl] = lp.add_var("FLOW:" + tag, 0.0, inst.ntc[e].ntc[t], 0.0);
		});
	}

	// --- constraints ------------------------------------------------------
	// energy balance per (zone, slot)
	for (int z = 0; z < n_zones; ++z) {
		for_each_slot([&](int day, int hour, int s) {
			const int sl = m.slot(day, hour, s);
			std::vector<std::pair<int, double>> terms;
			for (int ci = 0; ci < n_clusters; ++ci) {
				const auto& c = inst.clusters[ci];
				if (zone_index(c.zone) != z) continue;
				if (c.kind == ClusterKind::StorageLong) {
					for (std::size_t st = 0; st < m.stl_gen[ci].size(); ++st) {
						terms.push_back({m.stl_gen[ci][st][sl], 1.0});
						terms.push_back({m.stl_charge[ci][st][sl], -1.0});
					}
				} else if (c.kind != ClusterKind::Baseload) {
					terms.push_back({m.gen[ci][sl], 1.0});
					if (c.kind == ClusterKind::StorageMid) terms.push_back({m.charge[ci][sl], -1.0});
				}
			}
			for (std::size_t e = 0; e < inst.ntc.size(); ++e) {
				if (flow[e][sl] < 0) continue;
				if (inst.ntc[e].to == inst.zones[z].id) terms.push_back({flow[e][sl], 1.0});
				if (inst.ntc[e].from == inst.zones[z].id) terms.push_back({flow[e][sl], -1.0});
			}
			terms.push_back({m.shed[z][sl], 1.0});
			if (m.spill[z][sl] >= 0) terms.push_back({m.spill[z][sl], -1.0});
			const std::string label = "bal:" + inst.zones[z].id + ":d" + std::to_string(day) +
			                          ":h" + std::to_string(hour) +
			                          (m.contexts(day) > 1 ? ":s" + std::to_string(s) : "");
			m.balance_row[z][sl] = lp.add_eq(std::move(terms), net_demand(z, day, hour, s), label);
		});
	}

	// thermal commitment coupling
	for (int ci = 0; ci < n_clusters; ++ci) {
		const auto& c = inst.clusters[ci];
		if (c.kind != ClusterKind::Thermal) continue;
		for_each_slot([&](int day, int hour, int s) {
			const int sl = m.slot(day, hour, s);
			const int bk = block_of(day, hour, s);
			// generation inside the running band, minus reserved headroom
			{
				std::vector<std::pair<int, double>> terms{{m.gen[ci][sl], 1.0},
				                                          {m.p_on[ci][sl], -1.0}};
				if (!reserve[ci][0].empty() && reserve[ci][0][bk] >= 0)
					terms.push_back({reserve[ci][0][bk], 1.0});
				if (!reserve[ci][1].empty() && reserve[ci][1][bk] >= 0)
					terms.push_back({reserve[ci][1][bk], 1.0});
				lp.add_ub(std::move(terms), 0.0);
			}
			const bool any_down_reserve = (!reserve[ci][0].empty() && reserve[ci][0][bk] >= 0) ||
			                              (!reserve[ci][2].empty() && reserve[ci][2][bk] >= 0);
			if (c.g_min > 0.0 || any_down_reserve) {
				std::vector<std::pair<int, double>> terms{{m.p_on[ci][sl], c.g_min},
				                                          {m.gen[ci][sl], -1.0}};
				if (!reserve[ci][0].empty() && reserve[ci][0][bk] >= 0)
					terms.push_back({reserve[ci][0][bk], 1.0});
				if (!reserve[ci][2].empty() && reserve[ci][2][bk] >= 0)
					terms.push_back({reserve[ci][2][bk], 1.0});
				lp.add_ub(std::move(terms), 0.0);
			}
			// start-up tracking
			if (hour > 1) {
				const int prev = m.slot(day, hour - 1, s);
				lp.add_ub({{m.p_on[ci][sl], 1.0}, {m.p_on[ci][prev], -1.0}, {m.startup[ci][sl], -1.0}},
				          0.0);
			} else if (day > 0) {
				const int prev = m.slot(day - 1, 24, s);
				lp.add_ub({{m.p_on[ci][sl], 1.0}, {m.p_on[ci][prev], -1.0}, {m.startup[ci][sl], -1.0}},
				          0.0);
			} else if (auto it = inst.p_on_init.find(c.id); it != inst.p_on_init.end()) {
				lp.add_ub({{m.p_on[ci][sl], 1.0}, {m.startup[ci][sl], -1.0}}, it->second);
			}
		});
	}

	// renewable identity: available feed-in splits into generation and spill
	for (int ci = 0; ci < n_clusters; ++ci) {
		const auto& c = inst.clusters[ci];
		if (c.kind != ClusterKind::Renewable) continue;
		for_each_slot([&](int day, int hour, int s) {
			const int t = day * 24 + hour - 1;
			const int sl = m.slot(day, hour, s);
			lp.add_eq({{m.gen[ci][sl], 1.0}, {m.curtail[ci][sl], 1.0}}, c.cap[t] * c.res_profile[t]);
		});
	}

	// aggregate CHP must-run per zone
	for (int z = 0; z < n_zones; ++z) {
		for_each_slot([&](int day, int hour, int s) {
			const int t = day * 24 + hour - 1;
			if (inst.zones[z].chp_mustrun[t] <= 0.0) return;
			const int sl = m.slot(day, hour, s);
			std::vector<std::pair<int, double>> terms;
			for (int ci = 0; ci < n_clusters; ++ci)
				if (inst.clusters[ci].kind == ClusterKind::Thermal &&
				    inst.clusters[ci].zone == inst.zones[z].id)
					terms.push_back({m.gen[ci][sl], -1.0});
			if (terms.empty())
				throw ModelError("zone " + inst.zones[z].id + ": CHP must-run without thermal clusters");
			lp.add_ub(std::move(terms), -inst.zones[z].chp_mustrun[t]);
		});
	}

	// mid-term storage dynamics
	for (int ci = 0; ci < n_clusters; ++ci) {
		const auto& c = inst.clusters[ci];
		if (c.kind != ClusterKind::StorageMid) continue;
		for_each_slot([&](int day, int hour, int s) {
			const int t = day * 24 + hour - 1;
			const int sl = m.slot(day, hour, s);
			// level balance; hour 1 of the horizon starts from the 30 % boundary
			std::vector<std::pair<int, double>> terms{{m.level[ci][sl], 1.0},
			                                          {m.gen[ci][sl], 1.0},
			                                          {m.charge[ci][sl], -c.efficiency}};
			double rhs = 0.0;
			if (hour > 1) terms.push_back({m.level[ci][m.slot(day, hour - 1, s)], -1.0});
			else if (day > 0) terms.push_back({m.level[ci][m.slot(day - 1, 24, s)], -1.0});
			else rhs = 0.3 * c.cap[0];
			lp.add_eq(std::move(terms), rhs);
			// turbine and pump share the connection
			lp.add_ub({{m.gen[ci][sl], 1.0}, {m.charge[ci][sl], 1.1}}, c.cap[t]);
		});
	}

	// long-term storage steps share the step capacity
	for (int ci = 0; ci < n_clusters; ++ci) {
		const auto& c = inst.clusters[ci];
		if (c.kind != ClusterKind::StorageLong) continue;
		std::vector<double> step_caps;
		if (c.wv_steps.empty()) step_caps.push_back(0.0);
		else
			for (const auto& st : c.wv_steps) step_caps.push_back(st.capacity_mw);
		for (std::size_t st = 0; st < m.stl_gen[ci].size(); ++st) {
			for_each_slot([&](int day, int hour, int s) {
				const int t = day * 24 + hour - 1;
				const int sl = m.slot(day, hour, s);
				const double cap = c.wv_steps.empty() ? c.cap[t] : step_caps[st];
				lp.add_ub({{m.stl_gen[ci][st][sl], 1.0}, {m.stl_charge[ci][st][sl], 1.0}}, cap);
			});
		}
	}

	// reserve provision per zone, product and block
	static const char* product_label[3] = {"pr", "sr_pos", "sr_neg"};
	for (int z = 0; z < n_zones; ++z) {
		const double req[3] = {inst.zones[z].reserve_primary, inst.zones[z].reserve_sec_pos,
		                       inst.zones[z].reserve_sec_neg};
		for (int p = 0; p < 3; ++p) {
			if (req[p] <= 0.0) continue;
			for (int day = 0; day < kWindowDays; ++day)
				for (int s = 0; s < m.contexts(day); ++s)
					for (int b = 0; b < opt.blocks_per_day; ++b) {
						const int bk = block_of(day, b * block_len + 1, s);
						std::vector<std::pair<int, double>> terms;
						for (int ci = 0; ci < n_clusters; ++ci) {
							if (inst.clusters[ci].kind != ClusterKind::Thermal ||
							    inst.clusters[ci].zone != inst.zones[z].id)
								continue;
							if (!reserve[ci][p].empty() && reserve[ci][p][bk] >= 0)
								terms.push_back({reserve[ci][p][bk], 1.0});
						}
						if (terms.empty())
							throw ModelError("zone " + inst.zones[z].id + ": " + product_label[p] +
							                 " requirement without thermal clusters");
						lp.add_eq(std::move(terms), req[p]);
					}
		}
	}

	return m;
}

/// Reads day d+1 prices and primal summaries off an optimal solution.
inline DispatchResult extract_prices(const DispatchInstance& inst, const DispatchModel& m,
                                     const LPSolution& sol) {
	if (sol.status != LPStatus::Optimal)
		throw SolveFailed(std::string("dispatch LP ") + status_name(sol.status));
	DispatchResult out;
	out.diagnostics.degenerate = sol.degenerate;
	out.diagnostics.iterations = sol.iterations;
	out.diagnostics.max_primal_residual = sol.max_primal_residual;
	out.diagnostics.objective = sol.objective_value;

	const int n_zones = static_cast<int>(inst.zones.size());
	for (int z = 0; z < n_zones; ++z) {
		out.zone_ids.push_back(inst.zones[z].id);
		std::array<double, 24> p{};
		for (int hour = 1; hour <= 24; ++hour) {
			double dual = 0.0;
			for (int s = 0; s < m.contexts(1); ++s)
				dual += sol.duals_eq[m.balance_row[z][m.slot(1, hour, s)]];
			p[hour - 1] = dual;
		}
		out.prices.push_back(p);

		std::array<double, 24> shed{}, curt{};
		for (int hour = 1; hour <= 24; ++hour) {
			for (int s = 0; s < m.contexts(1); ++s) {
				const double w = m.duplicated ? inst.scenario_probs[s] : 1.0;
				const int sl = m.slot(1, hour, s);
				shed[hour - 1] += w * sol.x[m.shed[z][sl]];
				for (std::size_t ci = 0; ci < inst.clusters.size(); ++ci)
					if (inst.clusters[ci].kind == ClusterKind::Renewable &&
					    inst.clusters[ci].zone == inst.zones[z].id)
						curt[hour - 1] += w * sol.x[m.curtail[ci][sl]];
			}
		}
		out.shed.push_back(shed);
		out.curtailment.push_back(curt);
	}

	for (std::size_t ci = 0; ci < inst.clusters.size(); ++ci) {
		const auto& c = inst.clusters[ci];
		if (c.kind == ClusterKind::Baseload) continue;
		DispatchResult::ClusterSummary cs;
		cs.cluster_id = c.id;
		for (int hour = 1; hour <= 24; ++hour) {
			for (int s = 0; s < m.contexts(1); ++s) {
				const double w = m.duplicated ? inst.scenario_probs[s] : 1.0;
				const int sl = m.slot(1, hour, s);
				if (c.kind == ClusterKind::StorageLong) {
					for (std::size_t st = 0; st < m.stl_gen[ci].size(); ++st)
						cs.generation[hour - 1] += w * (sol.x[m.stl_gen[ci][st][sl]] -
						                                sol.x[m.stl_charge[ci][st][sl]]);
				} else {
					cs.generation[hour - 1] += w * sol.x[m.gen[ci][sl]];
					if (c.kind == ClusterKind::StorageMid)
						cs.generation[hour - 1] -= w * sol.x[m.charge[ci][sl]];
				}
				if (m.startup[ci][sl] >= 0) cs.startup[hour - 1] += w * sol.x[m.startup[ci][sl]];
			}
		}
		out.clusters.push_back(std::move(cs));
	}
	return out;
}

// ---------------------------------------------------------------------------
// Rolling sweep: one window per target day, failures isolated per day.
// ---------------------------------------------------------------------------

struct RollingDay {
	std::int64_t target_day = 0;
	bool ok = false;
	std::string error;
	DispatchResult result;
};

struct RollingResult {
	std::vector<RollingDay> days;

	int failures() const {
		int n = 0;
		for (const auto& d : days) n += d.ok ? 0 : 1;
		return n;
	}

	/// Contiguous price estimator series for one zone across the sweep;
	/// throws when any day in the range failed (gaps stay visible in
	/// `days` instead of being papered over).
	HourlySeries price_series(const std::string& zone_id,
	                          const std::vector<CalendarFlags>& day_flags) const {
		if (days.empty()) throw SolveFailed("empty rolling sweep");
		std::vector<double> vals;
		for (const auto& d : days) {
			if (!d.ok)
				throw SolveFailed("day " + std::to_string(d.target_day) + " failed: " + d.error);
			int zi = -1;
			for (std::size_t z = 0; z < d.result.zone_ids.size(); ++z)
				if (d.result.zone_ids[z] == zone_id) zi = static_cast<int>(z);
			if (zi < 0) throw UnknownLabel("zone " + zone_id + " not in dispatch result");
			for (int h = 0; h < 24; ++h) vals.push_back(d.result.prices[zi][h]);
		}
		return HourlySeries({days.front().target_day, 1}, std::move(vals), day_flags,
		                    Unit::EurPerMWh);
	}
};

/// Runs the window whose target (d+1) is each day in [first_target,
/// last_target]. The factory receives the target day and returns the
/// instance for the window starting at target-1. With chain_startup the
/// solved running capacity at (d+1, h24) seeds the next window's
/// day-boundary start-up condition.
inline RollingResult rolling_run(std::int64_t first_target, std::int64_t last_target,
                                 const std::function<DispatchInstance(std::int64_t)>& factory,
                                 const SolverOptions& solver_opt = {}, bool chain_startup = false) {
	RollingResult out;
	std::map<std::string, double> carry;
	for (std::int64_t day = first_target; day <= last_target; ++day) {
		RollingDay rd;
		rd.target_day = day;
		try {
			DispatchInstance inst = factory(day);
			if (chain_startup && !carry.empty() && inst.p_on_init.empty()) inst.p_on_init = carry;
			DispatchModel model = build_lp(inst);
			LPSolution sol = solve(model.lp, solver_opt);
			if (sol.status != LPStatus::Optimal)
				throw SolveFailed(std::string("dispatch LP ") + status_name(sol.status));
			rd.result = extract_prices(inst, model, sol);
			rd.ok = true;
			if (chain_startup) {
				carry.clear();
				for (std::size_t ci = 0; ci < inst.clusters.size(); ++ci) {
					if (inst.clusters[ci].kind != ClusterKind::Thermal) continue;
					double v = 0.0;
					for (int s = 0; s < model.contexts(1); ++s) {
						const double w = model.duplicated ? inst.scenario_probs[s] : 1.0;
						v += w * sol.x[model.p_on[ci][model.slot(1, 24, s)]];
					}
					carry[inst.clusters[ci].id] = v;
				}
			}
		} catch (const Error& e) {
			rd.ok = false;
			rd.error = e.what();
			if (chain_startup) carry.clear();
		}
		out.days.push_back(std::move(rd));
	}
	return out;
}

} // namespace epf
