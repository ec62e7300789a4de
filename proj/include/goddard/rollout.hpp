#pragma once

// Executes a solved policy on the continuous model: one stepper application
// per segment, control chosen by nearest-cell policy lookup. The stochastic
// transition tables are never sampled here; their randomness is a
// discretization device, not process noise.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "goddard/influence_diagram.hpp"

namespace goddard {

struct TrajectorySample {
    double h = 0.0;
    double u = 0.0;  // control applied on the segment starting at h; the
                     // final sample repeats the last segment's control
    double v = 0.0;
    double m = 0.0;
};

struct Trajectory {
    std::string label;
    std::vector<TrajectorySample> samples;

    double terminal_mass() const { return samples.back().m; }
    double terminal_speed() const { return samples.back().v; }
    double total_fuel() const { return samples.front().m - samples.back().m; }
};

class RolloutError : public std::runtime_error {
public:
    RolloutError(int segment, const std::string& what)
        : std::runtime_error("segment " + std::to_string(segment) + ": " + what),
          segment_(segment) {}
    int segment() const { return segment_; }

private:
    int segment_;
};

inline Trajectory simulate(const Policy& pol, const GridSet& grids, const SegmentPlan& plan,
                           const Stepper& stepper, const ModelParams& p,
                           const RocketState& start) {
    if (start.h != plan.h0)
        throw std::invalid_argument("simulate: start altitude must equal h0");
    const int nm = grids.mass.size();
    Trajectory t;
    t.samples.reserve(plan.n_segments + 1);

    RocketState s = start;
    double u = 0.0;
    for (int seg = 0; seg < plan.n_segments; ++seg) {
        const int cell = grids.speed.nearest_index(s.v) * nm + grids.mass.nearest_index(s.m);
        const int u_idx = pol.control_index(seg, cell);
        if (u_idx < 0)
            throw RolloutError(seg, "trajectory entered a dead policy cell");
        u = grids.control.point(u_idx);

        StepResult r;
        try {
            r = stepper.step(s, u, plan.dh, p);
        } catch (const InfeasibleStepError& e) {
            throw RolloutError(seg, e.what());
        } catch (const ImplicitSolveError& e) {
            throw RolloutError(seg, e.what());
        }
        const bool terminal = seg == plan.n_segments - 1;
        if (terminal ? r.v_next < 0.0 : r.v_next <= 0.0)
            throw RolloutError(seg, "speed left the feasible region");
        if (r.m_next < p.m_payload)
            throw RolloutError(seg, "mass dropped below the payload floor");
        if (r.v_next > grids.speed.hi())
            throw RolloutError(seg, "speed exceeded the grid cap");

        t.samples.push_back({s.h, u, s.v, s.m});
        s = RocketState{plan.h_of(seg + 1), r.m_next, r.v_next};
    }
    t.samples.push_back({s.h, u, s.v, s.m});
    return t;
}

struct ProfileDeviation {
    double max_abs = 0.0;
    double rms = 0.0;
};

struct ComparisonReport {
    std::string run_label;
    std::string reference_label;
    ProfileDeviation control;
    ProfileDeviation speed;
    ProfileDeviation mass;
    double terminal_mass_diff = 0.0;  // run minus reference
};

namespace detail {

// Linear interpolation of a reference profile at altitude h; exact at knots.
inline TrajectorySample resample(const std::vector<TrajectorySample>& ref, double h) {
    auto hi = std::upper_bound(ref.begin(), ref.end(), h,
                               [](double x, const TrajectorySample& s) { return x < s.h; });
    if (hi == ref.begin()) return ref.front();
    if (hi == ref.end()) {
        const TrajectorySample& last = ref.back();
        if (h > last.h) return last;
        hi = ref.end() - 1;
    }
    const TrajectorySample& b = *hi;
    const TrajectorySample& a = *(hi - 1);
    if (h == a.h) return a;
    const double t = (h - a.h) / (b.h - a.h);
    return {h, a.u + t * (b.u - a.u), a.v + t * (b.v - a.v), a.m + t * (b.m - a.m)};
}

}  // namespace detail

inline ComparisonReport compare(const Trajectory& run, const Trajectory& reference) {
    if (run.samples.empty() || reference.samples.empty())
        throw std::invalid_argument("compare: empty trajectory");
    const double span_tol = 1e-9;
    const double r_lo = run.samples.front().h, r_hi = run.samples.back().h;
    const double f_lo = reference.samples.front().h, f_hi = reference.samples.back().h;
    if (f_lo > r_lo + span_tol || f_hi < r_hi - span_tol)
        throw std::invalid_argument(
            "compare: reference altitude span [" + std::to_string(f_lo) + ", " +
            std::to_string(f_hi) + "] does not cover the run span [" +
            std::to_string(r_lo) + ", " + std::to_string(r_hi) + "]");

    ComparisonReport rep;
    rep.run_label = run.label;
    rep.reference_label = reference.label;
    double s2u = 0.0, s2v = 0.0, s2m = 0.0;
    for (const TrajectorySample& s : run.samples) {
        const TrajectorySample r = detail::resample(reference.samples, s.h);
        const double du = std::abs(s.u - r.u);
        const double dv = std::abs(s.v - r.v);
        const double dm = std::abs(s.m - r.m);
        rep.control.max_abs = std::max(rep.control.max_abs, du);
        rep.speed.max_abs = std::max(rep.speed.max_abs, dv);
        rep.mass.max_abs = std::max(rep.mass.max_abs, dm);
        s2u += du * du;
        s2v += dv * dv;
        s2m += dm * dm;
    }
    const double n = static_cast<double>(run.samples.size());
    rep.control.rms = std::sqrt(s2u / n);
    rep.speed.rms = std::sqrt(s2v / n);
    rep.mass.rms = std::sqrt(s2m / n);
    rep.terminal_mass_diff =
        run.samples.back().m - detail::resample(reference.samples, r_hi).m;
    return rep;
}

enum class SubarcKind { MaxThrust, Variable, Coast };

struct Subarc {
    SubarcKind kind = SubarcKind::Coast;
    double h_begin = 0.0;
    double h_end = 0.0;
};

inline const char* subarc_name(SubarcKind k) {
    switch (k) {
        case SubarcKind::MaxThrust: return "max-thrust";
        case SubarcKind::Variable: return "variable";
        case SubarcKind::Coast: return "coast";
    }
    return "?";
}

// Partitions the segments into maximal runs by thrust level. Classification
// order follows the labels' precedence: a control within tol of u_min is
// max-thrust, within tol of zero is coast, anything else variable.
inline std::vector<Subarc> subarc_classify(const Trajectory& t, double tol,
                                           double u_min = -3.5) {
    if (!(tol > 0.0))
        throw std::invalid_argument("subarc_classify: tol must be positive");
    std::vector<Subarc> out;
    const std::size_t n_segments = t.samples.size() < 2 ? 0 : t.samples.size() - 1;
    for (std::size_t i = 0; i < n_segments; ++i) {
        const double u = t.samples[i].u;
        SubarcKind kind = SubarcKind::Variable;
        if (std::abs(u - u_min) <= tol)
            kind = SubarcKind::MaxThrust;
        else if (std::abs(u) <= tol)
            kind = SubarcKind::Coast;
        if (!out.empty() && out.back().kind == kind)
            out.back().h_end = t.samples[i + 1].h;
        else
            out.push_back({kind, t.samples[i].h, t.samples[i + 1].h});
    }
    return out;
}

} // namespace goddard
