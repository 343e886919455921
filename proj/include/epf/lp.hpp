#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse minimisation LP with equality rows, <= rows and per-variable
/// bounds (default [0, +inf)). Rows carry opaque labels for dual lookup.
struct LinearProgram {
	struct Row {
		std::vector<std::pair<int, double>> terms;
		double rhs = 0.0;
		std::string label;
	};

	int n_vars = 0;
	std::vector<double> cost;
	std::vector<double> lower;
	std::vector<double> upper;
	std::vector<std::string> var_names;
	std::vector<Row> eq_rows;
	std::vector<Row> ub_rows;

	int add_var(std::string name = "", double lo = 0.0, double hi = kInf, double c = 0.0) {
		if (lo > hi) throw ModelError("variable bounds crossed: " + name);
		cost.push_back(c);
		lower.push_back(lo);
		upper.push_back(hi);
		var_names.push_back(name.empty() ? "x" + std::to_string(n_vars) : std::move(name));
		return n_vars++;
	}

	void set_cost(int var, double c) { cost.at(var) = c; }
	void add_cost(int var, double c) { cost.at(var) += c; }

	void set_bounds(int var, double lo, double hi) {
		if (lo > hi) throw ModelError("variable bounds crossed");
		lower.at(var) = lo;
		upper.at(var) = hi;
	}

	int add_eq(std::vector<std::pair<int, double>> terms, double rhs, std::string label = "") {
		check_terms(terms);
		eq_rows.push_back({std::move(terms), rhs, std::move(label)});
		return static_cast<int>(eq_rows.size()) - 1;
	}

	int add_ub(std::vector<std::pair<int, double>> terms, double rhs, std::string label = "") {
		check_terms(terms);
		ub_rows.push_back({std::move(terms), rhs, std::move(label)});
		return static_cast<int>(ub_rows.size()) - 1;
	}

	void check_terms(const std::vector<std::pair<int, double>>& terms) const {
		for (const auto& [j, v] : terms) {
			if (j < 0 || j >= n_vars) throw ModelError("constraint references unknown variable");
			if (!std::isfinite(v)) throw ModelError("constraint coefficient not finite");
		}
	}
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* status_name(LPStatus s) {
	switch (s) {
		case LPStatus::Optimal: return "optimal";
		case LPStatus::Infeasible: return "infeasible";
		default: return "unbounded";
	}
}

struct LPSolution {
	LPStatus status = LPStatus::Infeasible;
	std::vector<double> x;
	double objective_value = 0.0;
	std::vector<double> duals_eq; // one per eq row, d(objective)/d(rhs)
	std::vector<double> duals_ub; // one per ub row, <= 0 at optimality
	bool degenerate = false;      // some basic variable sits on a bound
	int iterations = 0;
	double max_primal_residual = 0.0;
	double max_dual_violation = 0.0;
};

struct SolverOptions {
	double feas_tol = 1e-7;     // relative primal feasibility
	double opt_tol = 1e-7;      // reduced-cost tolerance
	int refactor_interval = 64; // product-form updates between refactorizations
	int dense_threshold = 200;  // LPs smaller than this use the dense basis path
	long max_iterations = 0;    // 0 = automatic cap
};

LPSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// Dual of the labelled row (searches eq rows, then ub rows).
inline double sensitivity(const LinearProgram& lp, const LPSolution& sol, const std::string& label) {
	if (sol.status != LPStatus::Optimal) throw SolveFailed("sensitivity: solution not optimal");
	for (std::size_t i = 0; i < lp.eq_rows.size(); ++i)
		if (lp.eq_rows[i].label == label) return sol.duals_eq[i];
	for (std::size_t i = 0; i < lp.ub_rows.size(); ++i)
		if (lp.ub_rows[i].label == label) return sol.duals_ub[i];
	throw UnknownLabel("no constraint labelled '" + label + "'");
}

// ---------------------------------------------------------------------------
// Plain-text dump in the fixed-format LP grammar documented in the README,
// for cross-checking models against external solvers.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string num_str(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline void append_terms(std::string& out, const LinearProgram& lp,
                         const std::vector<std::pair<int, double>>& terms) {
	bool first = true;
	for (const auto& [j, v] : terms) {
		if (v >= 0.0 && !first) out += " + ";
		else if (v < 0.0) out += first ? "- " : " - ";
		out += num_str(std::fabs(v));
		out += " ";
		out += lp.var_names[j];
		first = false;
	}
	if (first) out += "0";
}

} // namespace detail

inline std::string to_lp_format(const LinearProgram& lp, const std::string& name = "model") {
	std::string out = "\\ " + name + "\nMinimize\n obj:";
	bool any = false;
	for (int j = 0; j < lp.n_vars; ++j) {
		if (lp.cost[j] == 0.0) continue;
		out += lp.cost[j] >= 0.0 && any ? " + " : (lp.cost[j] < 0.0 ? " - " : " ");
		out += detail::num_str(std::fabs(lp.cost[j])) + " " + lp.var_names[j];
		any = true;
	}
	if (!any) out += " 0";
	out += "\nSubject To\n";
	int anon = 0;
	auto row_name = [&anon](const std::string& label, const char* prefix) {
		return label.empty() ? std::string(prefix) + std::to_string(anon++) : label;
	};
	for (const auto& r : lp.eq_rows) {
		out += " " + row_name(r.label, "e") + ": ";
		detail::append_terms(out, lp, r.terms);
		out += " = " + detail::num_str(r.rhs) + "\n";
	}
	for (const auto& r : lp.ub_rows) {
		out += " " + row_name(r.label, "c") + ": ";
		detail::append_terms(out, lp, r.terms);
		out += " <= " + detail::num_str(r.rhs) + "\n";
	}
	out += "Bounds\n";
	for (int j = 0; j < lp.n_vars; ++j) {
		const double lo = lp.lower[j];
		const double hi = lp.upper[j];
		if (lo == 0.0 && hi == kInf) continue;
		out += " ";
		if (lo == hi) {
			out += lp.var_names[j] + " = " + detail::num_str(lo);
		} else {
			out += (lo == -kInf ? "-inf" : detail::num_str(lo)) + " <= " + lp.var_names[j] +
			       " <= " + (hi == kInf ? "+inf" : detail::num_str(hi));
		}
		out += "\n";
	}
	out += "End\n";
	return out;
}

} // namespace epf

#include "epf/detail/simplex.hpp"
