#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "goddard/grids.hpp"
#include "goddard/steppers.hpp"

using namespace goddard;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("tableau instances match the published coefficients") {
    ButcherTableau e = euler_tableau();
    CHECK(e.s == 1);
    CHECK(e.z == std::vector<double>{0.0});
    CHECK(e.a == std::vector<double>{0.0});
    CHECK(e.w == std::vector<double>{1.0});
    CHECK(e.is_explicit());
    CHECK_NOTHROW(e.validate());

    ButcherTableau rk = rk4_tableau();
    CHECK(rk.s == 4);
    CHECK(rk.z == std::vector<double>{0.0, 0.5, 0.5, 1.0});
    CHECK(rk.w == std::vector<double>{1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0});
    CHECK(rk.at(1, 0) == 0.5);
    CHECK(rk.at(2, 1) == 0.5);
    CHECK(rk.at(3, 2) == 1.0);
    CHECK(rk.at(1, 1) == 0.0);
    CHECK(rk.at(3, 0) == 0.0);
    CHECK(rk.is_explicit());
    CHECK_NOTHROW(rk.validate());

    const double r = std::sqrt(3.0) / 6.0;
    ButcherTableau gl = gauss_legendre2_tableau();
    CHECK(gl.s == 2);
    CHECK(gl.z == std::vector<double>{0.5 - r, 0.5 + r});
    CHECK(gl.a == std::vector<double>{0.25, 0.25 - r, 0.25 + r, 0.25});
    CHECK(gl.w == std::vector<double>{0.5, 0.5});
    CHECK_FALSE(gl.is_explicit());
    CHECK_NOTHROW(gl.validate());

    // row-sum consistency: each stage's matrix row sums to its node
    for (const ButcherTableau& t : {e, rk, gl}) {
        for (int i = 0; i < t.s; ++i) {
            double row = 0.0;
            for (int j = 0; j < t.s; ++j) row += t.at(i, j);
            CHECK_THAT(row, WithinAbs(t.z[i], 1e-15));
        }
    }
}

TEST_CASE("tableau validation rejects inconsistent weights and sizes") {
    ButcherTableau bad = rk4_tableau();
    bad.w[0] = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = rk4_tableau();
    bad.z.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = ButcherTableau{};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("euler_step reproduces the hand-evaluated burn") {
    ModelParams p;
    StepResult r = euler_step({1.0, 1.0, 0.05}, -3.5, 1e-4, p);
    CHECK_THAT(r.m_next, WithinRel(0.986, 1e-13));
    CHECK_THAT(r.v_next, WithinRel(0.05345, 1e-12));
    CHECK(r.stages_used == 0);
}

TEST_CASE("zero-length and coasting steps leave mass alone") {
    ModelParams p;
    StepResult r = euler_step({1.0, 0.8, 0.07}, 0.0, 0.0, p);
    CHECK(r.m_next == 0.8);
    CHECK(r.v_next == 0.07);

    r = euler_step({1.0, 0.8, 0.07}, 0.0, 1e-4, p);
    CHECK(r.m_next == 0.8);
    CHECK(r.v_next < 0.07);
}

TEST_CASE("coasting burns no fuel under any tableau") {
    ModelParams p;
    RocketState s{1.002, 0.85, 0.09};
    for (Method m : {Method::Euler, Method::RK4, Method::GaussLegendre}) {
        StepResult r = Stepper::make(m).step(s, 0.0, 5e-4, p);
        CHECK(r.m_next == 0.85);
        CHECK(r.v_next < s.v);
    }
}

TEST_CASE("the Euler tableau run through the generic engine is euler_step") {
    ModelParams p;
    ButcherTableau e = euler_tableau();
    const RocketState states[] = {{1.0, 1.0, 0.05}, {1.003, 0.74, 0.12}, {1.009, 0.61, 0.02}};
    for (const RocketState& s : states) {
        for (double u : {0.0, -1.0, -3.5}) {
            for (double dh : {1e-5, 2.5e-4, 1e-3}) {
                StepResult a = euler_step(s, u, dh, p);
                StepResult b = rk_step(s, u, dh, e, p);
                CHECK(a.m_next == b.m_next);
                CHECK(a.v_next == b.v_next);
            }
        }
    }
}

TEST_CASE("fuel only decreases for admissible controls") {
    ModelParams p;
    for (Method m : {Method::Euler, Method::RK4, Method::GaussLegendre}) {
        Stepper st = Stepper::make(m);
        for (double v : {0.05, 0.1, 0.2})
            for (double u : {0.0, -0.7, -2.0}) {
                StepResult r = st.step({1.001, 0.9, v}, u, 2e-4, p);
                CHECK(r.m_next <= 0.9);
                CHECK(std::isfinite(r.v_next));
            }
    }
}

TEST_CASE("a constant-slope field reduces every tableau to one Euler step") {
    auto field = [](double, double) { return 2.75; };
    for (const ButcherTableau& t : {euler_tableau(), rk4_tableau(), gauss_legendre2_tableau()}) {
        double y = scalar_rk_step(0.3, 1.2, 0.01, t, field);
        CHECK_THAT(y, WithinAbs(1.2 + 0.01 * 2.75, 1e-14));
    }
}

TEST_CASE("the implicit Gauss-Legendre step is the (2,2) Pade approximant") {
    ImplicitSolveConfig cfg;
    ButcherTableau gl = gauss_legendre2_tableau();
    for (double lambda : {-3.0, 1.7, -40.0}) {
        for (double dt : {0.01, 0.005}) {
            auto field = [lambda](double, double y) { return lambda * y; };
            double got = scalar_rk_step(0.0, 1.0, dt, gl, field, cfg);
            double z = lambda * dt;
            double pade = (1.0 + z / 2.0 + z * z / 12.0) / (1.0 - z / 2.0 + z * z / 12.0);
            CHECK_THAT(got, WithinAbs(pade, cfg.tol));
        }
    }
}

TEST_CASE("halving the RK4 step cuts the segment error about sixteenfold") {
    ModelParams p;
    const RocketState s0{1.001, 0.9, 0.05};
    const double u = -1.0;
    const double H = 1e-3;
    ButcherTableau rk = rk4_tableau();

    auto integrate = [&](int n) {
        RocketState s = s0;
        double dh = H / n;
        for (int i = 0; i < n; ++i) {
            StepResult r = rk_step(s, u, dh, rk, p);
            s = RocketState{s.h + dh, r.m_next, r.v_next};
        }
        return s;
    };

    RocketState ref = integrate(256);
    RocketState one = integrate(1);
    RocketState two = integrate(2);
    double e1 = std::max(std::abs(one.v - ref.v), std::abs(one.m - ref.m));
    double e2 = std::max(std::abs(two.v - ref.v), std::abs(two.m - ref.m));
    double ratio = e1 / e2;
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("implicit stage solve converges quickly across the working range") {
    ModelParams p;
    ImplicitSolveConfig cfg;
    ButcherTableau gl = gauss_legendre2_tableau();
    int converged = 0;
    int infeasible = 0;
    for (double v : {0.1, 0.14, 0.2})
        for (double m : {0.62, 0.8, 1.0})
            for (double h : {1.0, 1.005})
                for (double u : {0.0, -1.0, -3.5})
                    for (double dh : {2.5e-4, 5e-4, 1e-3}) {
                        try {
                            StepResult r = rk_step({h, m, v}, u, dh, gl, p, cfg);
                            CHECK(r.stages_used <= 50);
                            ++converged;
                        } catch (const InfeasibleStepError&) {
                            ++infeasible;  // burns that would cross the payload floor
                        }
                    }
    CHECK(converged >= 100);
    CHECK(converged + infeasible == 162);
}

TEST_CASE("a stage crossing v = 0 raises the infeasible-step error") {
    ModelParams p;
    // coasting from near-stall: the half-step stage alone loses far more
    // speed than the state has
    CHECK_THROWS_AS(rk_step({1.0, 1.0, 0.001}, 0.0, 1e-3, rk4_tableau(), p),
                    InfeasibleStepError);
}

TEST_CASE("an exhausted iteration budget raises the implicit-solve error") {
    ModelParams p;
    ImplicitSolveConfig cfg;
    cfg.max_iter = 1;
    ButcherTableau gl = gauss_legendre2_tableau();
    try {
        rk_step({1.0, 0.9, 0.05}, -1.0, 1e-3, gl, p, cfg);
        FAIL("expected ImplicitSolveError");
    } catch (const ImplicitSolveError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("implicit solve config validation") {
    ImplicitSolveConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ImplicitSolveConfig{};
    cfg.max_iter = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ImplicitSolveConfig{};
    cfg.damping = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("method keys round trip and reject junk") {
    CHECK(parse_method("E") == Method::Euler);
    CHECK(parse_method("RK") == Method::RK4);
    CHECK(parse_method("G") == Method::GaussLegendre);
    for (Method m : {Method::Euler, Method::RK4, Method::GaussLegendre})
        CHECK(parse_method(method_key(m)) == m);
    CHECK_THROWS_AS(parse_method("X"), std::invalid_argument);
    CHECK_THROWS_AS(parse_method(""), std::invalid_argument);
}

TEST_CASE("stepper dispatch selects the matching tableau") {
    CHECK(Stepper::make(Method::Euler).tableau.s == 1);
    CHECK(Stepper::make(Method::RK4).tableau.s == 4);
    CHECK(Stepper::make(Method::GaussLegendre).tableau.s == 2);

    ModelParams p;
    RocketState s{1.0, 1.0, 0.05};
    StepResult via = Stepper::make(Method::Euler).step(s, -3.5, 1e-4, p);
    StepResult direct = euler_step(s, -3.5, 1e-4, p);
    CHECK(via.m_next == direct.m_next);
    CHECK(via.v_next == direct.v_next);
}

TEST_CASE("the payload floor forbids burning at empty tanks") {
    ModelParams p;
    GridSet gs = default_grids(p, 5, 5, 11);
    std::vector<double> candidates;
    for (int k = 0; k < gs.control.size(); ++k) candidates.push_back(gs.control.point(k));

    Stepper st = Stepper::make(Method::Euler);
    std::vector<double> kept =
        feasible_controls({1.0, p.m_payload, 0.05}, 1e-4, candidates, false, st, p);
    CHECK(kept == std::vector<double>{0.0});
}

TEST_CASE("a fast heavy rocket admits the whole control range") {
    ModelParams p;
    std::vector<double> candidates{-3.5, -2.8, -2.1, -1.4, -0.7, 0.0};
    for (Method m : {Method::Euler, Method::RK4, Method::GaussLegendre}) {
        Stepper st = Stepper::make(m);
        std::vector<double> kept =
            feasible_controls({1.0, 1.0, 0.2}, 1e-4, candidates, false, st, p);
        CHECK(kept == candidates);
    }
}

TEST_CASE("mass feasibility excludes controls as an upper interval") {
    ModelParams p;
    std::vector<double> candidates{-3.5, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0};
    Stepper st = Stepper::make(Method::Euler);
    // at m = 0.608 and dh = 1e-3, burning u costs |u|/100 in mass: the floor
    // cuts the set at |u| = 0.8, and the survivors are the weakest burns
    std::vector<double> kept =
        feasible_controls({1.0, 0.608, 0.2}, 1e-3, candidates, false, st, p);
    CHECK(kept == std::vector<double>{-0.5, 0.0});
}

TEST_CASE("the terminal segment admits an exact stop") {
    ModelParams p;
    p.s_rho0 = 0.0;  // drag-free variant keeps the arithmetic exact
    // with v = 2^-6, h = 1 and dh = v^2, the coast lands on v_next = 0 exactly
    RocketState s{1.0, 1.0, 0.015625};
    double dh = s.v * s.v;
    Stepper st = Stepper::make(Method::Euler);
    StepResult r = euler_step(s, 0.0, dh, p);
    REQUIRE(r.v_next == 0.0);

    std::vector<double> candidates{0.0};
    CHECK(feasible_controls(s, dh, candidates, true, st, p) == candidates);
    CHECK(feasible_controls(s, dh, candidates, false, st, p).empty());
}
