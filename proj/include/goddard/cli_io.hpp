#pragma once

// Run naming, reference CSV ingestion, profile CSV emission, and the
// build -> solve -> rollout -> compare pipeline behind the command line tool.
// Files are written to a temp name and renamed so failures never leave a
// partial file behind.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "goddard/rollout.hpp"

namespace goddard {

// Run name grammar: <nv>.<nu>.<nm>.<METHOD>.<dh> where METHOD is one of
// E, RK, G and dh keeps its own decimal point.
struct RunSpec {
    int nv = 2;
    int nu = 2;
    int nm = 2;
    Method method = Method::Euler;
    double dh = 1e-3;
};

inline void validate_runspec(const RunSpec& spec) {
    if (spec.nv < 2) throw std::invalid_argument("speed-state count must be at least 2");
    if (spec.nu < 2) throw std::invalid_argument("control-state count must be at least 2");
    if (spec.nm < 2) throw std::invalid_argument("mass-state count must be at least 2");
    if (!(spec.dh > 0.0)) throw std::invalid_argument("segment length must be positive");
}

namespace detail {

// Shortest digit string that parses back to exactly x.
inline std::string format_double_shortest(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

// Run names keep dh in plain decimal; still the shortest exact round trip.
inline std::string format_dh(double x) {
    char buf[352];
    auto r = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed);
    return std::string(buf, r.ptr);
}

// 17 significant digits guarantee a bit-exact round trip through CSV.
inline std::string format_double_17(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            return out;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
}

inline double parse_double_field(std::string_view s, const std::string& where) {
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::runtime_error(where + ": bad value \"" + std::string(s) + "\"");
    return x;
}

}  // namespace detail

inline std::string format_runspec(const RunSpec& spec) {
    validate_runspec(spec);
    return std::to_string(spec.nv) + "." + std::to_string(spec.nu) + "." +
           std::to_string(spec.nm) + "." + method_key(spec.method) + "." +
           detail::format_dh(spec.dh);
}

inline RunSpec parse_runspec(const std::string& name) {
    auto fail = [&](const std::string& what) -> void {
        throw std::invalid_argument("run name \"" + name + "\": " + what);
    };
    std::size_t pos = 0;
    auto take_int = [&](const char* field) {
        std::size_t dot = name.find('.', pos);
        if (dot == std::string::npos) fail(std::string("missing ") + field);
        int value = 0;
        auto r = std::from_chars(name.data() + pos, name.data() + dot, value);
        if (r.ec != std::errc{} || r.ptr != name.data() + dot)
            fail(std::string("bad ") + field + " \"" + name.substr(pos, dot - pos) + "\"");
        pos = dot + 1;
        return value;
    };

    RunSpec spec;
    spec.nv = take_int("speed-state count");
    spec.nu = take_int("control-state count");
    spec.nm = take_int("mass-state count");

    std::size_t dot = name.find('.', pos);
    if (dot == std::string::npos) fail("missing segment length");
    const std::string key = name.substr(pos, dot - pos);
    if (key != "E" && key != "RK" && key != "G") fail("unknown method " + key);
    spec.method = parse_method(key);
    pos = dot + 1;

    const std::string tail = name.substr(pos);
    auto r = std::from_chars(tail.data(), tail.data() + tail.size(), spec.dh);
    if (tail.empty() || r.ec != std::errc{} || r.ptr != tail.data() + tail.size())
        fail("bad segment length \"" + tail + "\"");

    try {
        validate_runspec(spec);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return spec;
}

struct ReferenceProfile {
    Trajectory trajectory;
    std::string label;
};

// CSV with a header naming at least h,u,v,m in any order; extra columns are
// ignored. Row numbers in errors count data rows from 1.
inline ReferenceProfile load_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reference file \"" + path + "\"");

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    std::vector<std::string_view> header = detail::split_fields(line);
    int col[4] = {-1, -1, -1, -1};
    const std::string_view names[4] = {"h", "u", "v", "m"};
    for (int c = 0; c < static_cast<int>(header.size()); ++c)
        for (int k = 0; k < 4; ++k)
            if (header[c] == names[k]) col[k] = c;
    for (int k = 0; k < 4; ++k)
        if (col[k] < 0)
            throw std::runtime_error(path + ": missing column \"" + std::string(names[k]) + "\"");

    ReferenceProfile out;
    out.label = path;
    int row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        const std::string where = path + ": row " + std::to_string(row);
        std::vector<std::string_view> fields = detail::split_fields(line);
        double vals[4];
        for (int k = 0; k < 4; ++k) {
            if (col[k] >= static_cast<int>(fields.size()))
                throw std::runtime_error(where + ": too few fields");
            vals[k] = detail::parse_double_field(fields[col[k]], where);
        }
        if (!out.trajectory.samples.empty() && vals[0] <= out.trajectory.samples.back().h)
            throw std::runtime_error(where + ": altitude not increasing");
        out.trajectory.samples.push_back({vals[0], vals[1], vals[2], vals[3]});
    }
    if (out.trajectory.samples.empty())
        throw std::runtime_error(path + ": no data rows");
    out.trajectory.label = path;
    return out;
}

namespace detail {

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write \"" + tmp.string() + "\"");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for \"" + tmp.string() + "\"");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::string trajectory_csv(const Trajectory& t) {
    std::string s = "h,u,v,m\n";
    for (const TrajectorySample& x : t.samples) {
        s += detail::format_double_17(x.h) + "," + detail::format_double_17(x.u) + "," +
             detail::format_double_17(x.v) + "," + detail::format_double_17(x.m) + "\n";
    }
    return s;
}

// One row per alive (segment, cell) decision; dead cells carry no control.
inline std::string policy_csv(const Policy& pol, const GridSet& grids, int n_segments) {
    const int nm = grids.mass.size();
    std::string s = "segment,v_idx,m_idx,u\n";
    for (int seg = 0; seg < n_segments; ++seg)
        for (int v_idx = 0; v_idx < grids.speed.size(); ++v_idx)
            for (int m_idx = 0; m_idx < nm; ++m_idx) {
                const int u_idx = pol.control_index(seg, v_idx * nm + m_idx);
                if (u_idx < 0) continue;
                s += std::to_string(seg) + "," + std::to_string(v_idx) + "," +
                     std::to_string(m_idx) + "," +
                     detail::format_double_17(grids.control.point(u_idx)) + "\n";
            }
    return s;
}

inline std::string comparison_csv(const ComparisonReport& rep) {
    std::string s = "profile,max_abs_dev,rms_dev\n";
    auto row = [&](const char* profile, const ProfileDeviation& d) {
        s += std::string(profile) + "," + detail::format_double_17(d.max_abs) + "," +
             detail::format_double_17(d.rms) + "\n";
    };
    row("control", rep.control);
    row("speed", rep.speed);
    row("mass", rep.mass);
    return s;
}

struct SolvedRun {
    RunSpec spec;
    ModelParams params;
    GridSet grids;
    SegmentPlan plan;
    TransitionModel tm;
    Solution sol;
    Stepper stepper;
    double solve_seconds = 0.0;
};

inline SolvedRun solve_run(const RunSpec& spec, const ModelParams& p, double v_eps = 1e-3,
                           double v_max = 0.2) {
    validate_runspec(spec);
    p.validate();
    GridSet grids = default_grids(p, spec.nv, spec.nm, spec.nu, v_eps, v_max);
    SegmentPlan plan = segment_plan(p, spec.dh);
    Stepper stepper = Stepper::make(spec.method);

    const auto t0 = std::chrono::steady_clock::now();
    TransitionModel tm = build_transitions(plan, grids, stepper, p);
    Solution sol = solve(tm, grids, plan);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    return {spec, p, grids, plan, std::move(tm), std::move(sol), stepper, secs};
}

// The v0 = 0 boundary condition enters the grid world as the v_eps node.
inline RocketState launch_state(const SolvedRun& run) {
    return {run.params.h0, run.params.m0, run.grids.speed.lo()};
}

inline Trajectory rollout(const SolvedRun& run) {
    Trajectory t = simulate(run.sol.policy, run.grids, run.plan, run.stepper, run.params,
                            launch_state(run));
    t.label = format_runspec(run.spec);
    return t;
}

constexpr double kSubarcTol = 1e-9;

inline std::string summary_text(const SolvedRun& run, const Trajectory& t,
                                const ComparisonReport* rep) {
    std::string s;
    s += "run: " + format_runspec(run.spec) + "\n";
    s += "segments: " + std::to_string(run.plan.n_segments) + "\n";
    s += "terminal mass: " + detail::format_double_17(t.terminal_mass()) + "\n";
    s += "terminal speed: " + detail::format_double_17(t.terminal_speed()) + "\n";
    s += "fuel burned: " + detail::format_double_17(t.total_fuel()) + "\n";
    for (const Subarc& arc : subarc_classify(t, kSubarcTol)) {
        s += "subarc: " + std::string(subarc_name(arc.kind)) + " " +
             detail::format_double_shortest(arc.h_begin) + " " +
             detail::format_double_shortest(arc.h_end) + "\n";
    }
    if (rep) {
        s += "reference: " + rep->reference_label + "\n";
        s += "terminal mass diff: " + detail::format_double_17(rep->terminal_mass_diff) + "\n";
    }
    s += "solve time: " + detail::format_double_shortest(run.solve_seconds) + " s\n";
    return s;
}

struct RunOptions {
    ModelParams params;
    double v_eps = 1e-3;
    double v_max = 0.2;
    std::string reference_path;  // empty = no comparison
    std::string out_dir = ".";
};

// Exit codes: 0 success, 1 usage, 2 infeasible at this discretization,
// 3 IO or reference trouble.
inline int run_pipeline(const RunSpec& spec, const RunOptions& opt, std::ostream& out,
                        std::ostream& err) {
    std::optional<ReferenceProfile> ref;
    if (!opt.reference_path.empty()) {
        try {
            ref = load_reference(opt.reference_path);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return 3;
        }
    }

    std::optional<SolvedRun> run;
    try {
        run = solve_run(spec, opt.params, opt.v_eps, opt.v_max);
    } catch (const InfeasibleProblemError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    Trajectory traj;
    try {
        traj = rollout(*run);
    } catch (const RolloutError& e) {
        err << "error: rollout failed at " << e.what() << "\n";
        return 2;
    }

    std::optional<ComparisonReport> rep;
    if (ref) {
        try {
            rep = compare(traj, ref->trajectory);
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << "\n";
            return 3;
        }
    }

    const std::string name = format_runspec(spec);
    try {
        const std::filesystem::path dir(opt.out_dir);
        std::filesystem::create_directories(dir);
        detail::atomic_write(dir / (name + ".trajectory.csv"), trajectory_csv(traj));
        detail::atomic_write(dir / (name + ".policy.csv"),
                             policy_csv(run->sol.policy, run->grids, run->plan.n_segments));
        if (rep) detail::atomic_write(dir / (name + ".compare.csv"), comparison_csv(*rep));
        detail::atomic_write(dir / (name + ".summary.txt"),
                             summary_text(*run, traj, rep ? &*rep : nullptr));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }

    out << summary_text(*run, traj, rep ? &*rep : nullptr);
    return 0;
}

// Order-of-convergence probe on one smooth segment: refine the step on a
// fixed interval and fit the log-log error slope against a fine RK4 anchor.
struct ConvergenceRow {
    int n_steps = 0;
    double dh = 0.0;
    double err = 0.0;
};

struct ConvergenceStudy {
    Method method = Method::Euler;
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;
};

inline ConvergenceStudy convergence_study(Method method, const ModelParams& p = ModelParams{}) {
    const RocketState start{1.001, 0.9, 0.05};
    const double u = -1.0;
    const double H = 2e-3;

    auto integrate = [&](const Stepper& st, int n) {
        RocketState s = start;
        const double dh = H / n;
        for (int i = 0; i < n; ++i) {
            StepResult r = st.step(s, u, dh, p);
            s = RocketState{s.h + dh, r.m_next, r.v_next};
        }
        return s;
    };

    const RocketState anchor = integrate(Stepper::make(Method::RK4), 256);

    // the implicit solve must sit well below the finest discretization error
    ImplicitSolveConfig tight;
    tight.tol = 1e-14;
    tight.max_iter = 500;
    const Stepper st = Stepper::make(method, tight);

    ConvergenceStudy out;
    out.method = method;
    for (int n : {2, 4, 8, 16}) {
        const RocketState s = integrate(st, n);
        const double err = std::max(std::abs(s.m - anchor.m), std::abs(s.v - anchor.v));
        out.rows.push_back({n, H / n, err});
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const ConvergenceRow& r : out.rows) {
        if (!(r.err > 0.0)) continue;
        const double x = std::log(r.dh), y = std::log(r.err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2) out.slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    return out;
}

} // namespace goddard
