#pragma once

// Bounded-variable revised simplex. Two phases with explicit artificials,
// Dantzig pricing with a permanent switch to Bland's rule after a run of
// degenerate steps, and a basis kept either as a dense inverse (small LPs)
// or as a sparse LU with product-form eta updates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace epf::detail {

struct ColMatrix {
	// CSC over merged row space: eq rows first, then ub rows
	std::vector<int> col_start;
	std::vector<int> row_index;
	std::vector<double> value;

	int nnz_of(int j) const { return col_start[j + 1] - col_start[j]; }
};

class BasisBackend {
public:
	virtual ~BasisBackend() = default;
	// Factorize the given basis columns; throws NumericalFailure when singular.
	virtual void refactor(const ColMatrix& cols, const std::vector<int>& basic) = 0;
	// w := B^-1 w  (input in row space, output indexed by basis position)
	virtual void ftran(std::vector<double>& w) = 0;
	// y := y B^-1  (input indexed by basis position, output in row space)
	virtual void btran(std::vector<double>& y) = 0;
	// Basis position r replaced by the column whose ftran image is w.
	// Returns false when the update pivot is too small to trust.
	virtual bool update(const std::vector<double>& w, int r) = 0;
	virtual int updates_since_refactor() const = 0;
};

class DenseBasis final : public BasisBackend {
public:
	void refactor(const ColMatrix& cols, const std::vector<int>& basic) override {
		m_ = static_cast<int>(basic.size());
		// Gauss-Jordan inversion of the basis matrix
		std::vector<double> a(static_cast<std::size_t>(m_) * m_, 0.0);
		inv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
		for (int p = 0; p < m_; ++p) {
			const int j = basic[p];
			for (int k = cols.col_start[j]; k < cols.col_start[j + 1]; ++k)
				a[static_cast<std::size_t>(cols.row_index[k]) * m_ + p] = cols.value[k];
			inv_[static_cast<std::size_t>(p) * m_ + p] = 1.0;
		}
		for (int k = 0; k < m_; ++k) {
			int piv = -1;
			double best = 1e-11;
			for (int i = k; i < m_; ++i) {
				const double v = std::fabs(a[static_cast<std::size_t>(i) * m_ + k]);
				if (v > best) {
					best = v;
					piv = i;
				}
			}
			if (piv < 0) throw NumericalFailure("dense basis refactor: singular basis");
			if (piv != k) {
				for (int j = 0; j < m_; ++j) {
					std::swap(a[static_cast<std::size_t>(piv) * m_ + j], a[static_cast<std::size_t>(k) * m_ + j]);
					std::swap(inv_[static_cast<std::size_t>(piv) * m_ + j], inv_[static_cast<std::size_t>(k) * m_ + j]);
				}
			}
			const double d = a[static_cast<std::size_t>(k) * m_ + k];
			for (int j = 0; j < m_; ++j) {
				a[static_cast<std::size_t>(k) * m_ + j] /= d;
				inv_[static_cast<std::size_t>(k) * m_ + j] /= d;
			}
			for (int i = 0; i < m_; ++i) {
				if (i == k) continue;
				const double f = a[static_cast<std::size_t>(i) * m_ + k];
				if (f == 0.0) continue;
				for (int j = 0; j < m_; ++j) {
					a[static_cast<std::size_t>(i) * m_ + j] -= f * a[static_cast<std::size_t>(k) * m_ + j];
					inv_[static_cast<std::size_t>(i) * m_ + j] -= f * inv_[static_cast<std::size_t>(k) * m_ + j];
				}
			}
		}
		updates_ = 0;
	}

	void ftran(std::vector<double>& w) override {
		std::vector<double> out(m_, 0.0);
		for (int col = 0; col < m_; ++col) {
			const double wc = w[col];
			if (wc == 0.0) continue;
			for (int i = 0; i < m_; ++i) out[i] += inv_[static_cast<std::size_t>(i) * m_ + col] * wc;
		}
		w.swap(out);
	}

	void btran(std::vector<double>& y) override {
		std::vector<double> out(m_, 0.0);
		for (int i = 0; i < m_; ++i) {
			const double yi = y[i];
			if (yi == 0.0) continue;
			const double* row = &inv_[static_cast<std::size_t>(i) * m_];
			for (int j = 0; j < m_; ++j) out[j] += yi * row[j];
		}
		y.swap(out);
	}

	bool update(const std::vector<double>& w, int r) override {
		const double piv = w[r];
		if (std::fabs(piv) < 1e-11) return false;
		double* rrow = &inv_[static_cast<std::size_t>(r) * m_];
		for (int i = 0; i < m_; ++i) {
			if (i == r) continue;
			const double f = w[i] / piv;
			if (f == 0.0) continue;
			double* irow = &inv_[static_cast<std::size_t>(i) * m_];
			for (int j = 0; j < m_; ++j) irow[j] -= f * rrow[j];
		}
		for (int j = 0; j < m_; ++j) rrow[j] /= piv;
		++updates_;
		return true;
	}

	int updates_since_refactor() const override { return updates_; }

private:
	int m_ = 0;
	int updates_ = 0;
	std::vector<double> inv_; // row i = e_i^T B^-1 ... stored position-major
};

class SparseLuBasis final : public BasisBackend {
public:
	void refactor(const ColMatrix& cols, const std::vector<int>& basic) override {
		m_ = static_cast<int>(basic.size());
		lcol_.assign(m_, {});
		ucol_.assign(m_, {});
		udiag_.assign(m_, 0.0);
		pivot_row_.assign(m_, -1);
		etas_.clear();
		std::vector<int> row_state(m_, -1); // -1 = unpivoted, else elimination step
		std::vector<double> w(m_, 0.0);
		std::vector<int> touched;
		touched.reserve(64);
		// min-heap over pending elimination steps; per-column seen stamps
		std::vector<int> heap;
		std::vector<int> seen(m_, -1);

		auto heap_push = [&](int step, int col) {
			if (seen[step] == col) return;
			seen[step] = col;
			heap.push_back(step);
			std::push_heap(heap.begin(), heap.end(), std::greater<int>());
		};

		for (int p = 0; p < m_; ++p) {
			const int j = basic[p];
			touched.clear();
			heap.clear();
			for (int k = cols.col_start[j]; k < cols.col_start[j + 1]; ++k) {
				const int row = cols.row_index[k];
				w[row] = cols.value[k];
				touched.push_back(row);
				if (row_state[row] >= 0) heap_push(row_state[row], p);
			}
			// eliminate pending steps in increasing order; fills only push
			// later steps, so each step is handled at most once
			while (!heap.empty()) {
				std::pop_heap(heap.begin(), heap.end(), std::greater<int>());
				const int k = heap.back();
				heap.pop_back();
				const int pr = pivot_row_[k];
				const double alpha = w[pr];
				w[pr] = 0.0;
				if (alpha == 0.0) continue; // cancelled exactly
				ucol_[p].push_back({k, alpha});
				for (const auto& [i, l] : lcol_[k]) {
					if (w[i] == 0.0) touched.push_back(i);
					w[i] -= alpha * l;
					if (row_state[i] >= 0) heap_push(row_state[i], p);
				}
			}
			// pick pivot: largest magnitude among unpivoted rows
			int piv_row = -1;
			double best = 0.0;
			for (int i : touched) {
				if (row_state[i] >= 0) continue;
				const double v = std::fabs(w[i]);
				if (v > best) {
					best = v;
					piv_row = i;
				}
			}
			if (piv_row < 0 || best < 1e-11)
				throw NumericalFailure("sparse basis refactor: singular basis (pivot " +
				                       std::to_string(best) + " at column " + std::to_string(p) + ")");
			const double piv = w[piv_row];
			udiag_[p] = piv;
			pivot_row_[p] = piv_row;
			row_state[piv_row] = p;
			w[piv_row] = 0.0;
			for (int i : touched) {
				if (w[i] == 0.0) continue;
				if (row_state[i] < 0) lcol_[p].push_back({i, w[i] / piv});
				w[i] = 0.0;
			}
		}
		updates_ = 0;
	}

	void ftran(std::vector<double>& w) override {
		// L pass in row space
		for (int k = 0; k < m_; ++k) {
			const double alpha = w[pivot_row_[k]];
			if (alpha == 0.0) continue;
			for (const auto& [i, l] : lcol_[k]) w[i] -= alpha * l;
		}
		// U backward pass into position space
		std::vector<double> z(m_, 0.0);
		for (int k = m_ - 1; k >= 0; --k) {
			const double zk = w[pivot_row_[k]] / udiag_[k];
			z[k] = zk;
			if (zk == 0.0) continue;
			for (const auto& [kk, u] : ucol_[k]) w[pivot_row_[kk]] -= zk * u;
		}
		w.swap(z);
		// eta chain in creation order
		for (const auto& e : etas_) {
			const double t = w[e.r];
			if (t == 0.0) continue;
			w[e.r] = 0.0;
			for (const auto& [i, v] : e.terms) w[i] += v * t;
		}
	}

	void btran(std::vector<double>& y) override {
		// eta chain transposed, reverse order
		for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
			double t = 0.0;
			for (const auto& [i, v] : it->terms) t += v * y[i];
			y[it->r] = t;
		}
		// U^T forward
		std::vector<double> v(m_, 0.0);
		for (int k = 0; k < m_; ++k) {
			double s = y[k];
			for (const auto& [kk, u] : ucol_[k]) s -= u * v[kk];
			v[k] = s / udiag_[k];
		}
		// L^T backward into row space
		std::vector<double> out(m_, 0.0);
		for (int k = m_ - 1; k >= 0; --k) {
			double s = v[k];
			for (const auto& [i, l] : lcol_[k]) s -= l * out[i];
			out[pivot_row_[k]] = s;
		}
		y.swap(out);
	}

	bool update(const std::vector<double>& w, int r) override {
		const double piv = w[r];
		if (std::fabs(piv) < 1e-11) return false;
		Eta e;
		e.r = r;
		e.terms.push_back({r, 1.0 / piv});
		for (int i = 0; i < m_; ++i) {
			if (i == r || w[i] == 0.0) continue;
			e.terms.push_back({i, -w[i] / piv});
		}
		etas_.push_back(std::move(e));
		++updates_;
		return true;
	}

	int updates_since_refactor() const override { return updates_; }

private:
	struct Eta {
		int r = 0;
		std::vector<std::pair<int, double>> terms; // includes (r, 1/piv)
	};

	int m_ = 0;
	int updates_ = 0;
	std::vector<std::vector<std::pair<int, double>>> lcol_; // per step: (row, multiplier)
	std::vector<std::vector<std::pair<int, double>>> ucol_; // per position: (step, value)
	std::vector<double> udiag_;
	std::vector<int> pivot_row_;
	std::vector<Eta> etas_;
};

class SimplexEngine {
public:
	SimplexEngine(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {
		n_ = lp.n_vars;
		me_ = static_cast<int>(lp.eq_rows.size());
		m_ = me_ + static_cast<int>(lp.ub_rows.size());
	}

	LPSolution run() {
		build_columns();
		init_point();
		if (m_ == 0) return bounds_only_solution();
		basis_ = make_backend();
		basis_->refactor(cols_, basic_);

		LPSolution sol;
		// phase 1: drive the artificial infeasibility measure to zero
		if (has_artificials_) {
			const double inf1 = iterate(/*phase1=*/true);
			if (inf1 > phase1_tol()) {
				sol.status = LPStatus::Infeasible;
				sol.iterations = iterations_;
				sol.objective_value = inf1;
				return sol;
			}
			// pin artificials at zero for phase 2
			for (int j = art_begin_; j < total_vars_; ++j) {
				lower_[j] = 0.0;
				upper_[j] = 0.0;
				if (basic_pos_[j] < 0) xval_[j] = 0.0;
			}
		}
		const double z = iterate(/*phase1=*/false);
		(void)z;
		return finish();
	}

private:
	enum Status : std::uint8_t { kAtLower, kAtUpper, kBasic, kFree };

	const LinearProgram& lp_;
	SolverOptions opt_;
	int n_ = 0, me_ = 0, m_ = 0;
	int total_vars_ = 0, art_begin_ = 0;
	bool has_artificials_ = false;
	bool unbounded_ = false;
	bool bland_ = false;
	int cursor_ = 0;
	long iterations_ = 0;
	long degenerate_run_ = 0;

	ColMatrix cols_;
	std::vector<double> cost_, lower_, upper_, xval_, rhs_;
	std::vector<std::uint8_t> vstat_;
	std::vector<int> basic_;     // variable at each basis position
	std::vector<int> basic_pos_; // position of variable, -1 when nonbasic
	std::unique_ptr<BasisBackend> basis_;

	std::unique_ptr<BasisBackend> make_backend() const {
		if (n_ + m_ < opt_.dense_threshold) return std::make_unique<DenseBasis>();
		return std::make_unique<SparseLuBasis>();
	}

	double phase1_tol() const { return opt_.feas_tol * (1.0 + rhs_scale_) * 10.0; }

	double rhs_scale_ = 0.0;

	void build_columns() {
		// structural columns from the row-wise input
		std::vector<std::vector<std::pair<int, double>>> by_col(n_);
		auto scatter = [&](const LinearProgram::Row& row, int ri) {
			for (const auto& [j, v] : row.terms)
				if (v != 0.0) by_col[j].push_back({ri, v});
		};
		for (int i = 0; i < me_; ++i) scatter(lp_.eq_rows[i], i);
		for (std::size_t i = 0; i < lp_.ub_rows.size(); ++i)
			scatter(lp_.ub_rows[i], me_ + static_cast<int>(i));

		rhs_.resize(m_);
		for (int i = 0; i < me_; ++i) rhs_[i] = lp_.eq_rows[i].rhs;
		for (std::size_t i = 0; i < lp_.ub_rows.size(); ++i) rhs_[me_ + i] = lp_.ub_rows[i].rhs;
		rhs_scale_ = 0.0;
		for (double b : rhs_) rhs_scale_ = std::max(rhs_scale_, std::fabs(b));

		// merge duplicate coefficients on the same (row, var)
		cols_.col_start.assign(1, 0);
		for (int j = 0; j < n_; ++j) {
			auto& entries = by_col[j];
			std::sort(entries.begin(), entries.end());
			int out = -1;
			std::vector<std::pair<int, double>> merged;
			for (const auto& [ri, v] : entries) {
				if (out >= 0 && merged[out].first == ri) merged[out].second += v;
				else {
					merged.push_back({ri, v});
					++out;
				}
			}
			for (const auto& [ri, v] : merged) {
				if (std::fabs(v) < 1e-13) continue;
				cols_.row_index.push_back(ri);
				cols_.value.push_back(v);
			}
			cols_.col_start.push_back(static_cast<int>(cols_.row_index.size()));
		}
		// logical columns: eq rows get fixed slacks, ub rows get [0, inf) slacks
		cost_ = lp_.cost;
		lower_ = lp_.lower;
		upper_ = lp_.upper;
		for (int i = 0; i < m_; ++i) {
			cols_.row_index.push_back(i);
			cols_.value.push_back(1.0);
			cols_.col_start.push_back(static_cast<int>(cols_.row_index.size()));
			cost_.push_back(0.0);
			lower_.push_back(0.0);
			upper_.push_back(i < me_ ? 0.0 : kInf);
		}
		total_vars_ = n_ + m_;
		art_begin_ = total_vars_;
	}

	void init_point() {
		xval_.assign(total_vars_, 0.0);
		vstat_.assign(total_vars_, kAtLower);
		for (int j = 0; j < n_; ++j) {
			if (lower_[j] == -kInf && upper_[j] == kInf) {
				vstat_[j] = kFree;
				xval_[j] = 0.0;
			} else if (lower_[j] == -kInf) {
				vstat_[j] = kAtUpper;
				xval_[j] = upper_[j];
			} else if (upper_[j] == kInf || std::fabs(lower_[j]) <= std::fabs(upper_[j])) {
				vstat_[j] = kAtLower;
				xval_[j] = lower_[j];
			} else {
				vstat_[j] = kAtUpper;
				xval_[j] = upper_[j];
			}
		}
		// structural singleton columns can stand in for infeasible slacks
		std::vector<std::vector<int>> singletons(m_);
		for (int j = 0; j < n_; ++j)
			if (cols_.nnz_of(j) == 1) singletons[cols_.row_index[cols_.col_start[j]]].push_back(j);

		// residuals decide which rows need an artificial
		std::vector<double> act(m_, 0.0);
		for (int j = 0; j < n_; ++j) {
			if (xval_[j] == 0.0) continue;
			for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
				act[cols_.row_index[k]] += cols_.value[k] * xval_[j];
		}
		basic_.assign(m_, -1);
		basic_pos_.assign(total_vars_, -1);
		for (int i = 0; i < m_; ++i) {
			const double resid = rhs_[i] - act[i];
			const int slack = n_ + i;
			const bool slack_ok = resid >= lower_[slack] - 1e-12 && resid <= upper_[slack] + 1e-12;
			if (slack_ok) {
				basic_[i] = slack;
				basic_pos_[slack] = i;
				vstat_[slack] = kBasic;
				xval_[slack] = resid;
			} else if (int crash = crash_candidate(singletons[i], resid); crash >= 0) {
				const double a = cols_.value[cols_.col_start[crash]];
				xval_[crash] += resid / a;
				vstat_[crash] = kBasic;
				basic_[i] = crash;
				basic_pos_[crash] = i;
			} else {
				// artificial column e_i, signed bounds so |value| is minimised
				cols_.row_index.push_back(i);
				cols_.value.push_back(1.0);
				cols_.col_start.push_back(static_cast<int>(cols_.row_index.size()));
				cost_.push_back(0.0);
				if (resid > 0.0) {
					lower_.push_back(0.0);
					upper_.push_back(kInf);
				} else {
					lower_.push_back(-kInf);
					upper_.push_back(0.0);
				}
				const int art = total_vars_++;
				vstat_.push_back(kBasic);
				xval_.push_back(resid);
				basic_[i] = art;
				basic_pos_.push_back(i);
				has_artificials_ = true;
				// slack stays nonbasic at its bound nearest the residual
				vstat_[slack] = kAtLower;
				xval_[slack] = lower_[slack];
			}
		}
	}

	// First singleton column whose implied basic value respects its bounds.
	int crash_candidate(const std::vector<int>& cands, double resid) const {
		for (int j : cands) {
			if (vstat_[j] == kBasic) continue;
			const double a = cols_.value[cols_.col_start[j]];
			if (std::fabs(a) < 1e-9) continue;
			const double v = xval_[j] + resid / a;
			if (v >= lower_[j] - 1e-12 && v <= upper_[j] + 1e-12) return j;
		}
		return -1;
	}

	double phase_cost(int j, bool phase1) const {
		if (!phase1) return j < art_begin_ ? cost_[j] : 0.0;
		if (j < art_begin_) return 0.0;
		return upper_[j] == 0.0 ? -1.0 : 1.0; // minimise |artificial|
	}

	// Main loop; returns the terminal objective of the phase.
	double iterate(bool phase1) {
		const long cap = opt_.max_iterations > 0
		                     ? opt_.max_iterations
		                     : 20000L + 50L * static_cast<long>(m_ + n_);
		std::vector<double> y(m_), w;
		long local_iters = 0;
		while (true) {
			if (++local_iters > cap)
				throw NumericalFailure("simplex iteration limit exceeded (" + std::to_string(cap) + ")");
			// duals for current phase costs
			for (int i = 0; i < m_; ++i) y[i] = phase_cost(basic_[i], phase1);
			basis_->btran(y);

			const int q = price(y, phase1);
			if (q < 0) break; // phase optimal
			const double dq = reduced_cost(q, y, phase1);
			const int dir = entering_direction(q, dq);

			w.assign(m_, 0.0);
			for (int k = cols_.col_start[q]; k < cols_.col_start[q + 1]; ++k)
				w[cols_.row_index[k]] = cols_.value[k];
			basis_->ftran(w);

			if (!step(q, dir, w)) {
				if (phase1) throw NumericalFailure("phase-1 ray detected");
				unbounded_ = true;
				break;
			}
			++iterations_;
			if (basis_->updates_since_refactor() >= opt_.refactor_interval) reload_basis();
		}
		if (unbounded_) return 0.0;
		reload_basis(); // clean values before measuring the phase objective
		if (phase1) {
			double inf = 0.0;
			for (int j = art_begin_; j < total_vars_; ++j) inf += std::fabs(xval_[j]);
			return inf;
		}
		double z = 0.0;
		for (int j = 0; j < n_; ++j) z += cost_[j] * xval_[j];
		return z;
	}

	double reduced_cost(int j, const std::vector<double>& y, bool phase1) const {
		double d = phase_cost(j, phase1);
		for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
			d -= y[cols_.row_index[k]] * cols_.value[k];
		return d;
	}

	// Returns entering variable index or -1 at phase optimality. Partial
	// pricing: round-robin scan from a moving cursor, stopping once enough
	// improving candidates have been seen. Bland mode scans from zero and
	// takes the first improving index.
	int price(const std::vector<double>& y, bool phase1) {
		const double tol = opt_.opt_tol * (1.0 + cost_scale(phase1));
		const int budget = 64;
		int best = -1;
		double best_score = tol;
		int candidates = 0;
		for (int step = 0; step < total_vars_; ++step) {
			int j = bland_ ? step : cursor_ + step;
			if (j >= total_vars_) j -= total_vars_;
			if (vstat_[j] == kBasic) continue;
			if (lower_[j] == upper_[j]) continue; // fixed
			const double d = reduced_cost(j, y, phase1);
			double score = 0.0;
			if (vstat_[j] == kAtLower && d < -tol) score = -d;
			else if (vstat_[j] == kAtUpper && d > tol) score = d;
			else if (vstat_[j] == kFree && std::fabs(d) > tol) score = std::fabs(d);
			if (score <= 0.0) continue;
			if (bland_) return j; // first improving index
			++candidates;
			if (score > best_score) {
				best_score = score;
				best = j;
			}
			if (candidates >= budget) {
				cursor_ = j + 1 >= total_vars_ ? 0 : j + 1;
				return best;
			}
		}
		cursor_ = 0;
		return best;
	}

	double cost_scale(bool phase1) const {
		if (phase1) return 1.0;
		double s = 0.0;
		for (int j = 0; j < n_; ++j) s = std::max(s, std::fabs(cost_[j]));
		return s;
	}

	static int entering_direction(int, double d) { return d < 0.0 ? +1 : -1; }

	// One ratio-test step. Returns false on an unbounded ray.
	bool step(int q, int dir, std::vector<double>& w) {
		const double piv_tol = 1e-9;
		double t_limit = kInf;
		// entering variable's own span
		if (lower_[q] > -kInf && upper_[q] < kInf) t_limit = upper_[q] - lower_[q];

		double t_min = t_limit;
		int blocker = -1; // basis position
		for (int p = 0; p < m_; ++p) {
			const double wp = w[p];
			if (std::fabs(wp) < piv_tol) continue;
			const int b = basic_[p];
			const double delta = -dir * wp; // movement of basic b per unit t
			double room;
			if (delta > 0.0) {
				if (upper_[b] == kInf) continue;
				room = upper_[b] - xval_[b];
			} else {
				if (lower_[b] == -kInf) continue;
				room = xval_[b] - lower_[b];
			}
			const double t = std::max(room, 0.0) / std::fabs(delta);
			if (t < t_min - 1e-12) {
				t_min = t;
				blocker = p;
			}
		}
		if (t_min == kInf) return false; // unbounded

		// among near-minimal blockers prefer the largest pivot (stability)
		if (blocker >= 0) {
			const double window = t_min + 1e-10 + 1e-7 * t_min;
			double best_piv = std::fabs(w[blocker]);
			for (int p = 0; p < m_; ++p) {
				const double wp = w[p];
				if (std::fabs(wp) < piv_tol || p == blocker) continue;
				const int b = basic_[p];
				const double delta = -dir * wp;
				double room;
				if (delta > 0.0) {
					if (upper_[b] == kInf) continue;
					room = upper_[b] - xval_[b];
				} else {
					if (lower_[b] == -kInf) continue;
					room = xval_[b] - lower_[b];
				}
				const double t = std::max(room, 0.0) / std::fabs(delta);
				if (t <= window && std::fabs(wp) > best_piv) {
					best_piv = std::fabs(wp);
					blocker = p;
				}
			}
		}

		const double t = std::max(t_min, 0.0);
		degenerate_run_ = t <= 1e-10 ? degenerate_run_ + 1 : 0;
		if (!bland_ && degenerate_run_ > 200 + m_) bland_ = true;

		// apply the move
		for (int p = 0; p < m_; ++p) {
			if (w[p] == 0.0) continue;
			xval_[basic_[p]] -= dir * t * w[p];
		}
		xval_[q] += dir * t;

		if (blocker < 0) {
			// bound flip, no basis change
			vstat_[q] = vstat_[q] == kAtLower ? kAtUpper : kAtLower;
			xval_[q] = vstat_[q] == kAtLower ? lower_[q] : upper_[q];
			return true;
		}

		const int leaving = basic_[blocker];
		const double delta = -dir * w[blocker];
		vstat_[leaving] = delta > 0.0 ? kAtUpper : kAtLower;
		xval_[leaving] = delta > 0.0 ? upper_[leaving] : lower_[leaving];
		basic_pos_[leaving] = -1;

		basic_[blocker] = q;
		basic_pos_[q] = blocker;
		vstat_[q] = kBasic;

		if (!basis_->update(w, blocker)) {
			reload_basis();
			// basis reloaded from scratch; nothing else to fix
		}
		return true;
	}

	void reload_basis() {
		basis_->refactor(cols_, basic_);
		recompute_basics();
	}

	void recompute_basics() {
		std::vector<double> r = rhs_;
		for (int j = 0; j < total_vars_; ++j) {
			if (vstat_[j] == kBasic || xval_[j] == 0.0) continue;
			for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
				r[cols_.row_index[k]] -= cols_.value[k] * xval_[j];
		}
		basis_->ftran(r);
		for (int p = 0; p < m_; ++p) xval_[basic_[p]] = r[p];
	}

	LPSolution bounds_only_solution() {
		// no rows: each variable sits at its cheapest bound
		LPSolution sol;
		sol.x.assign(n_, 0.0);
		for (int j = 0; j < n_; ++j) {
			if (cost_[j] > 0.0) {
				if (lower_[j] == -kInf) {
					sol.status = LPStatus::Unbounded;
					return sol;
				}
				sol.x[j] = lower_[j];
			} else if (cost_[j] < 0.0) {
				if (upper_[j] == kInf) {
					sol.status = LPStatus::Unbounded;
					return sol;
				}
				sol.x[j] = upper_[j];
			} else {
				sol.x[j] = lower_[j] > -kInf ? lower_[j] : (upper_[j] < kInf ? upper_[j] : 0.0);
			}
			sol.objective_value += cost_[j] * sol.x[j];
		}
		sol.status = LPStatus::Optimal;
		return sol;
	}

	LPSolution finish() {
		LPSolution sol;
		if (unbounded_) {
			sol.status = LPStatus::Unbounded;
			sol.iterations = iterations_;
			return sol;
		}
		sol.status = LPStatus::Optimal;
		sol.iterations = iterations_;
		sol.x.assign(n_, 0.0);
		for (int j = 0; j < n_; ++j) sol.x[j] = xval_[j];
		sol.objective_value = 0.0;
		for (int j = 0; j < n_; ++j) sol.objective_value += lp_.cost[j] * sol.x[j];

		std::vector<double> y(m_);
		for (int i = 0; i < m_; ++i) y[i] = phase_cost(basic_[i], false);
		basis_->btran(y);
		sol.duals_eq.assign(y.begin(), y.begin() + me_);
		sol.duals_ub.assign(y.begin() + me_, y.end());
		// round sign-convention noise on <= rows
		for (double& d : sol.duals_ub)
			if (d > 0.0 && d < opt_.opt_tol * (1.0 + cost_scale(false))) d = 0.0;

		// diagnostics: primal residuals, dual violations, degeneracy
		std::vector<double> act(m_, 0.0);
		for (int j = 0; j < total_vars_; ++j) {
			if (xval_[j] == 0.0) continue;
			for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
				act[cols_.row_index[k]] += cols_.value[k] * xval_[j];
		}
		for (int i = 0; i < m_; ++i) {
			const double resid = i < me_ ? std::fabs(act[i] - rhs_[i]) : std::max(0.0, act[i] - rhs_[i]);
			sol.max_primal_residual = std::max(sol.max_primal_residual, resid);
		}
		if (sol.max_primal_residual > 1e-4 * (1.0 + rhs_scale_))
			throw NumericalFailure("terminal basis numerically inconsistent (residual " +
			                       std::to_string(sol.max_primal_residual) + ")");
		for (int j = 0; j < total_vars_; ++j) {
			if (vstat_[j] == kBasic || lower_[j] == upper_[j]) continue;
			const double d = reduced_cost(j, y, false);
			double viol = 0.0;
			if (vstat_[j] == kAtLower) viol = std::max(0.0, -d);
			else if (vstat_[j] == kAtUpper) viol = std::max(0.0, d);
			else viol = std::fabs(d);
			sol.max_dual_violation = std::max(sol.max_dual_violation, viol);
		}
		const double bound_eps = 1e-9 * (1.0 + rhs_scale_);
		for (int p = 0; p < m_; ++p) {
			const int b = basic_[p];
			if ((lower_[b] > -kInf && std::fabs(xval_[b] - lower_[b]) <= bound_eps) ||
			    (upper_[b] < kInf && std::fabs(xval_[b] - upper_[b]) <= bound_eps)) {
				sol.degenerate = true;
				break;
			}
		}
		return sol;
	}
};

} // namespace epf::detail

namespace epf {

inline LPSolution solve(const LinearProgram& lp, const SolverOptions& options) {
	for (int j = 0; j < lp.n_vars; ++j)
		if (lp.lower[j] > lp.upper[j]) throw ModelError("variable bounds crossed");
	detail::SimplexEngine engine(lp, options);
	return engine.run();
}

} // namespace epf
