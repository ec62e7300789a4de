#pragma once

// Segment integrators: advance (m, v) across one altitude segment of length
// dh under a constant control u. Explicit tableaus run their stages in
// order; the Gauss-Legendre tableau is solved by damped fixed-point
// iteration on the stage slope vector. Stage masses are recovered from the
// stage speeds (l_i = u / (c v_i)), so only the k vector is iterated.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "goddard/butcher.hpp"
#include "goddard/dynamics.hpp"

namespace goddard {

struct StepResult {
    double m_next = 0.0;
    double v_next = 0.0;
    int stages_used = 0;  // fixed-point iterations; 0 for explicit tableaus
};

struct ImplicitSolveConfig {
    double tol = 1e-12;
    int max_iter = 100;
    double damping = 1.0;  // relaxation factor in (0, 1]

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("ImplicitSolveConfig: tol must be > 0");
        if (max_iter < 1) throw std::invalid_argument("ImplicitSolveConfig: max_iter must be >= 1");
        if (!(damping > 0.0) || damping > 1.0)
            throw std::invalid_argument("ImplicitSolveConfig: damping must be in (0, 1]");
    }
};

// A stage landed on v <= 0 or m < m_p: the control is disallowed at this
// state, which is data for the caller, not a fault.
class InfeasibleStepError : public std::runtime_error {
public:
    explicit InfeasibleStepError(const std::string& what) : std::runtime_error(what) {}
};

class ImplicitSolveError : public std::runtime_error {
public:
    ImplicitSolveError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Damped fixed-point iteration k <- k + damping*(phi(k) - k) until the
// max-norm residual |phi(k) - k| drops below cfg.tol. phi(in, out) writes the
// mapped vector into out and may throw InfeasibleStepError. Returns the
// iteration count; throws ImplicitSolveError when max_iter is exhausted.
template <typename Phi>
int fixed_point_iterate(std::vector<double>& k, const ImplicitSolveConfig& cfg, Phi&& phi) {
    std::vector<double> next(k.size());
    double residual = 0.0;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        phi(k, next);
        residual = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i)
            residual = std::max(residual, std::abs(next[i] - k[i]));
        for (std::size_t i = 0; i < k.size(); ++i)
            k[i] += cfg.damping * (next[i] - k[i]);
        if (residual < cfg.tol) return it;
    }
    throw ImplicitSolveError("implicit stage solve did not converge", residual);
}

// One Runge-Kutta step on a scalar ODE y' = f(t, y): the same stage logic as
// the rocket step, on a caller-supplied field. Lets fields with closed-form
// behavior exercise the tableau coefficients and the implicit solve loop.
template <typename F>
double scalar_rk_step(double t0, double y0, double dt, const ButcherTableau& tab, F&& f,
                      const ImplicitSolveConfig& cfg = {}) {
    const int s = tab.s;
    std::vector<double> k(s);
    if (tab.is_explicit()) {
        for (int i = 0; i < s; ++i) {
            double yi = y0;
            for (int j = 0; j < i; ++j) yi += dt * tab.at(i, j) * k[j];
            k[i] = f(t0 + tab.z[i] * dt, yi);
        }
    } else {
        auto phi = [&](const std::vector<double>& kin, std::vector<double>& kout) {
            for (int i = 0; i < s; ++i) {
                double yi = y0;
                for (int j = 0; j < s; ++j) yi += dt * tab.at(i, j) * kin[j];
                kout[i] = f(t0 + tab.z[i] * dt, yi);
            }
        };
        k.assign(s, f(t0, y0));
        fixed_point_iterate(k, cfg, phi);
    }
    double dy = 0.0;
    for (int i = 0; i < s; ++i) dy += tab.w[i] * k[i];
    return y0 + dt * dy;
}

inline StepResult euler_step(const RocketState& start, double u, double dh,
                             const ModelParams& p) {
    const double l = mass_rate(u, start.v, p);
    const double k = speed_rate(start.h, start.m, u, start.v, p);
    return StepResult{start.m + dh * l, start.v + dh * k, 0};
}

inline StepResult rk_step(const RocketState& start, double u, double dh,
                          const ButcherTableau& tab, const ModelParams& p,
                          const ImplicitSolveConfig& cfg = {}) {
    const int s = tab.s;
    std::vector<double> k(s), l(s);
    int iterations = 0;

    if (tab.is_explicit()) {
        for (int i = 0; i < s; ++i) {
            double vi = start.v;
            double mi = start.m;
            for (int j = 0; j < i; ++j) {
                vi += dh * tab.at(i, j) * k[j];
                mi += dh * tab.at(i, j) * l[j];
            }
            // Stage 0 is the segment start itself; its validity is the
            // caller's precondition, so only perturbed stages are screened.
            if (i > 0) {
                if (vi <= 0.0)
                    throw InfeasibleStepError("stage speed dropped to zero inside the step");
                if (mi < p.m_payload)
                    throw InfeasibleStepError("stage mass dropped below the payload floor");
            }
            l[i] = mass_rate(u, vi, p);
            k[i] = speed_rate(start.h + tab.z[i] * dh, mi, u, vi, p);
        }
    } else {
        // Evaluates the stage map: speeds from the current k iterate, stage
        // masses from the induced l values, then the refreshed slopes.
        std::vector<double> v_stage(s), m_stage(s);
        auto stage_states = [&](const std::vector<double>& kin) {
            for (int i = 0; i < s; ++i) {
                double vi = start.v;
                for (int j = 0; j < s; ++j) vi += dh * tab.at(i, j) * kin[j];
                if (vi <= 0.0)
                    throw InfeasibleStepError("stage speed dropped to zero inside the step");
                v_stage[i] = vi;
                l[i] = mass_rate(u, vi, p);
            }
            for (int i = 0; i < s; ++i) {
                double mi = start.m;
                for (int j = 0; j < s; ++j) mi += dh * tab.at(i, j) * l[j];
                if (mi < p.m_payload)
                    throw InfeasibleStepError("stage mass dropped below the payload floor");
                m_stage[i] = mi;
            }
        };
        auto phi = [&](const std::vector<double>& kin, std::vector<double>& kout) {
            stage_states(kin);
            for (int i = 0; i < s; ++i)
                kout[i] = speed_rate(start.h + tab.z[i] * dh, m_stage[i], u, v_stage[i], p);
        };

        const double k0 = speed_rate(start.h, start.m, u, start.v, p);
        k.assign(s, k0);
        iterations = fixed_point_iterate(k, cfg, phi);
        stage_states(k);  // refresh l from the converged iterate
    }

    double dm = 0.0;
    double dv = 0.0;
    for (int i = 0; i < s; ++i) {
        dm += tab.w[i] * l[i];
        dv += tab.w[i] * k[i];
    }
    return StepResult{start.m + dh * dm, start.v + dh * dv, iterations};
}

enum class Method { Euler, RK4, GaussLegendre };

inline Method parse_method(std::string_view key) {
    if (key == "E") return Method::Euler;
    if (key == "RK") return Method::RK4;
    if (key == "G") return Method::GaussLegendre;
    throw std::invalid_argument("unknown method key '" + std::string(key) +
                                "' (expected E, RK, or G)");
}

inline std::string method_key(Method m) {
    switch (m) {
        case Method::Euler: return "E";
        case Method::RK4: return "RK";
        case Method::GaussLegendre: return "G";
    }
    throw std::logic_error("unreachable method");
}

struct Stepper {
    Method method = Method::Euler;
    ButcherTableau tableau = euler_tableau();
    ImplicitSolveConfig cfg;

    static Stepper make(Method m, ImplicitSolveConfig cfg = {}) {
        switch (m) {
            case Method::Euler: return {m, euler_tableau(), cfg};
            case Method::RK4: return {m, rk4_tableau(), cfg};
            case Method::GaussLegendre: return {m, gauss_legendre2_tableau(), cfg};
        }
        throw std::logic_error("unreachable method");
    }

    StepResult step(const RocketState& start, double u, double dh, const ModelParams& p) const {
        if (method == Method::Euler) return euler_step(start, u, dh, p);
        return rk_step(start, u, dh, tableau, p, cfg);
    }
};

// One stepper application with the path constraints applied to the result:
// nullopt when this control is disallowed at this state (a stage went
// infeasible, the implicit solve failed, m_next < m_p, or v_next reached the
// forbidden region; v_next >= 0 is accepted on the terminal segment only).
inline std::optional<StepResult> constrained_step(const Stepper& stepper,
                                                 const RocketState& start, double u,
                                                 double dh, bool terminal,
                                                 const ModelParams& p) {
    StepResult r;
    try {
        r = stepper.step(start, u, dh, p);
    } catch (const InfeasibleStepError&) {
        return std::nullopt;
    } catch (const ImplicitSolveError&) {
        return std::nullopt;
    }
    if (r.m_next < p.m_payload) return std::nullopt;
    if (terminal ? r.v_next < 0.0 : r.v_next <= 0.0) return std::nullopt;
    return r;
}

inline std::vector<double> feasible_controls(const RocketState& start, double dh,
                                             const std::vector<double>& candidates,
                                             bool terminal, const Stepper& stepper,
                                             const ModelParams& p) {
    std::vector<double> kept;
    kept.reserve(candidates.size());
    for (double u : candidates)
        if (constrained_step(stepper, start, u, dh, terminal, p)) kept.push_back(u);
    return kept;
}

} // namespace goddard
