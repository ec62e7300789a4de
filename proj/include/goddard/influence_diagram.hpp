#pragma once

// The segmented decision model: one chance/decision block per altitude
// segment, transition tables built by stepping every (cell, control) pair
// once, and backward induction maximizing expected terminal mass. Successor
// distributions factor into two two-point marginals, so a row has at most
// four cells.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "goddard/grids.hpp"
#include "goddard/steppers.hpp"

namespace goddard {

struct SegmentPlan {
    int n_segments = 1;
    double dh = 0.0;
    double h0 = 1.0;

    double h_of(int i) const { return h0 + i * dh; }

    void validate(const ModelParams& p) const {
        if (n_segments < 1)
            throw std::invalid_argument("SegmentPlan: need at least one segment");
        if (!(dh > 0.0))
            throw std::invalid_argument("SegmentPlan: dh must be positive");
        if (h0 != p.h0)
            throw std::invalid_argument("SegmentPlan: plan starts away from h0");
        if (std::abs(h_of(n_segments) - p.hT) > 1e-12)
            throw std::invalid_argument(
                "SegmentPlan: dh = " + std::to_string(dh) +
                " does not divide the altitude span [h0, hT]");
    }
};

// Derives the segment count from dh; throws when dh does not tile [h0, hT].
inline SegmentPlan segment_plan(const ModelParams& p, double dh) {
    if (!(dh > 0.0))
        throw std::invalid_argument("segment_plan: dh must be positive");
    SegmentPlan plan{static_cast<int>(std::llround((p.hT - p.h0) / dh)), dh, p.h0};
    plan.validate(p);
    return plan;
}

// One (segment, cell, control) row: the factored successor distribution and
// the expected fuel burned. v_lo < 0 marks a masked (infeasible) pair.
struct TransitionEntry {
    std::int32_t v_lo = -1;
    std::int32_t m_lo = -1;
    double pv_hi = 0.0;
    double pm_hi = 0.0;
    double fuel = 0.0;

    bool feasible() const { return v_lo >= 0; }
};

struct Successor {
    int cell = 0;
    double prob = 0.0;
};

class TransitionModel {
public:
    TransitionModel(int n_segments, int nv, int nm, int nu)
        : n_segments_(n_segments), nv_(nv), nm_(nm), nu_(nu),
          entries_(static_cast<std::size_t>(n_segments) * nv * nm * nu) {
        if (n_segments < 1 || nv < 2 || nm < 2 || nu < 1)
            throw std::invalid_argument("TransitionModel: bad dimensions");
    }

    int n_segments() const { return n_segments_; }
    int nv() const { return nv_; }
    int nm() const { return nm_; }
    int nu() const { return nu_; }
    int n_cells() const { return nv_ * nm_; }

    int cell_index(int v_idx, int m_idx) const { return v_idx * nm_ + m_idx; }
    int v_of(int cell) const { return cell / nm_; }
    int m_of(int cell) const { return cell % nm_; }

    const TransitionEntry& entry(int seg, int cell, int u_idx) const {
        return entries_[flat(seg, cell, u_idx)];
    }
    void set_entry(int seg, int cell, int u_idx, const TransitionEntry& e) {
        entries_[flat(seg, cell, u_idx)] = e;
    }

    // Expands the factored row into concrete successors, dropping zero-weight
    // cells. Order: (lo,lo), (lo,hi), (hi,lo), (hi,hi).
    int successors(const TransitionEntry& e, Successor out[4]) const {
        const double pv = e.pv_hi;
        const double pm = e.pm_hi;
        const double w[4] = {(1.0 - pv) * (1.0 - pm), (1.0 - pv) * pm,
                             pv * (1.0 - pm), pv * pm};
        const int cells[4] = {cell_index(e.v_lo, e.m_lo), cell_index(e.v_lo, e.m_lo + 1),
                              cell_index(e.v_lo + 1, e.m_lo), cell_index(e.v_lo + 1, e.m_lo + 1)};
        int n = 0;
        for (int i = 0; i < 4; ++i)
            if (w[i] > 0.0) out[n++] = Successor{cells[i], w[i]};
        return n;
    }

private:
    std::size_t flat(int seg, int cell, int u_idx) const {
        return (static_cast<std::size_t>(seg) * (nv_ * nm_) + cell) * nu_ + u_idx;
    }

    int n_segments_, nv_, nm_, nu_;
    std::vector<TransitionEntry> entries_;
};

inline TransitionModel build_transitions(const SegmentPlan& plan, const GridSet& grids,
                                         const Stepper& stepper, const ModelParams& p) {
    plan.validate(p);
    TransitionModel tm(plan.n_segments, grids.speed.size(), grids.mass.size(),
                       grids.control.size());
    for (int seg = 0; seg < plan.n_segments; ++seg) {
        const double h = plan.h_of(seg);
        const bool terminal = seg == plan.n_segments - 1;
        for (int v_idx = 0; v_idx < tm.nv(); ++v_idx) {
            for (int m_idx = 0; m_idx < tm.nm(); ++m_idx) {
                const RocketState s{h, grids.mass.point(m_idx), grids.speed.point(v_idx)};
                const int cell = tm.cell_index(v_idx, m_idx);
                for (int u_idx = 0; u_idx < tm.nu(); ++u_idx) {
                    auto r = constrained_step(stepper, s, grids.control.point(u_idx),
                                              plan.dh, terminal, p);
                    if (!r) continue;  // masked: infeasibility is data here
                    GridWeights wv = locate(grids.speed, r->v_next);
                    GridWeights wm = locate(grids.mass, r->m_next);
                    tm.set_entry(seg, cell, u_idx,
                                 TransitionEntry{wv.idx_lo, wm.idx_lo, wv.p_hi, wm.p_hi,
                                                 s.m - wm.expected_value(grids.mass)});
                }
            }
        }
    }
    return tm;
}

// Value per (layer, cell); dead cells carry an explicit marker instead of a
// sentinel number so they cannot leak into arithmetic.
class ValueTable {
public:
    ValueTable(int n_layers, int n_cells)
        : n_cells_(n_cells), value_(static_cast<std::size_t>(n_layers) * n_cells, 0.0),
          alive_(static_cast<std::size_t>(n_layers) * n_cells, 0) {}

    int n_layers() const { return static_cast<int>(alive_.size()) / n_cells_; }
    int n_cells() const { return n_cells_; }

    bool alive(int layer, int cell) const { return alive_[flat(layer, cell)] != 0; }
    double value(int layer, int cell) const {
        if (!alive(layer, cell))
            throw std::logic_error("ValueTable: reading a dead cell");
        return value_[flat(layer, cell)];
    }
    void set(int layer, int cell, double value) {
        value_[flat(layer, cell)] = value;
        alive_[flat(layer, cell)] = 1;
    }

private:
    std::size_t flat(int layer, int cell) const {
        return static_cast<std::size_t>(layer) * n_cells_ + cell;
    }

    int n_cells_;
    std::vector<double> value_;
    std::vector<char> alive_;
};

// Chosen control index per (segment, cell); -1 marks a dead cell.
class Policy {
public:
    Policy(int n_segments, int n_cells)
        : n_cells_(n_cells),
          u_idx_(static_cast<std::size_t>(n_segments) * n_cells, -1) {}

    int n_segments() const { return static_cast<int>(u_idx_.size()) / n_cells_; }
    int n_cells() const { return n_cells_; }

    int control_index(int seg, int cell) const {
        return u_idx_[static_cast<std::size_t>(seg) * n_cells_ + cell];
    }
    void set(int seg, int cell, int u_idx) {
        u_idx_[static_cast<std::size_t>(seg) * n_cells_ + cell] = u_idx;
    }

private:
    int n_cells_;
    std::vector<std::int32_t> u_idx_;
};

class InfeasibleProblemError : public std::runtime_error {
public:
    explicit InfeasibleProblemError(const std::string& what) : std::runtime_error(what) {}
};

struct Solution {
    ValueTable values;
    Policy policy;
};

// Backward induction. A control whose row reaches any dead successor is
// excluded; a cell with no surviving control is dead. Ties at the argmax go
// to the smaller thrust magnitude, then the lower control index.
inline Solution solve(const TransitionModel& tm, const GridSet& grids,
                      const SegmentPlan& plan) {
    const int N = tm.n_segments();
    const int n_cells = tm.n_cells();
    ValueTable vt(N + 1, n_cells);
    Policy pol(N, n_cells);

    for (int cell = 0; cell < n_cells; ++cell)
        vt.set(N, cell, grids.mass.point(tm.m_of(cell)));

    for (int i = N - 1; i >= 0; --i) {
        for (int cell = 0; cell < n_cells; ++cell) {
            bool have_best = false;
            double best_val = 0.0;
            int best_u = -1;
            for (int u_idx = 0; u_idx < tm.nu(); ++u_idx) {
                const TransitionEntry& e = tm.entry(i, cell, u_idx);
                if (!e.feasible()) continue;
                Successor succ[4];
                const int n = tm.successors(e, succ);
                double val = 0.0;
                bool dead_branch = false;
                for (int k = 0; k < n; ++k) {
                    if (!vt.alive(i + 1, succ[k].cell)) {
                        dead_branch = true;
                        break;
                    }
                    val += succ[k].prob * vt.value(i + 1, succ[k].cell);
                }
                if (dead_branch) continue;
                bool take = !have_best;
                if (have_best) {
                    const double au = std::abs(grids.control.point(u_idx));
                    const double ab = std::abs(grids.control.point(best_u));
                    take = val > best_val ||
                           (val == best_val && (au < ab || (au == ab && u_idx < best_u)));
                }
                if (take) {
                    have_best = true;
                    best_val = val;
                    best_u = u_idx;
                }
            }
            if (have_best) {
                vt.set(i, cell, best_val);
                pol.set(i, cell, best_u);
            }
        }
    }

    bool any_alive = false;
    for (int cell = 0; cell < n_cells && !any_alive; ++cell)
        any_alive = vt.alive(0, cell);
    if (!any_alive)
        throw InfeasibleProblemError("problem infeasible at this discretization: "
                                     "every initial cell is dead");
    return Solution{std::move(vt), std::move(pol)};
}

// Expected fuel burned per segment under the solved policy, starting from
// one initial cell: f_i = E[M_i - M_{i+1}] under the policy-induced cell
// distribution. Telescopes to m_start - E[M_N].
inline std::vector<double> segment_utilities(const TransitionModel& tm, const ValueTable& vt,
                                             const Policy& pol, int start_cell) {
    const int N = tm.n_segments();
    if (!vt.alive(0, start_cell))
        throw std::invalid_argument("segment_utilities: start cell is dead");

    std::vector<double> dist(tm.n_cells(), 0.0), next(tm.n_cells(), 0.0);
    dist[start_cell] = 1.0;
    std::vector<double> f(N, 0.0);
    for (int i = 0; i < N; ++i) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int cell = 0; cell < tm.n_cells(); ++cell) {
            if (dist[cell] == 0.0) continue;
            const int u_idx = pol.control_index(i, cell);
            if (u_idx < 0)
                throw std::logic_error("segment_utilities: policy reached a dead cell");
            const TransitionEntry& e = tm.entry(i, cell, u_idx);
            f[i] += dist[cell] * e.fuel;
            Successor succ[4];
            const int n = tm.successors(e, succ);
            for (int k = 0; k < n; ++k) next[succ[k].cell] += dist[cell] * succ[k].prob;
        }
        dist.swap(next);
    }
    return f;
}

} // namespace goddard
