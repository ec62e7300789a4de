#pragma once

// Normalized vertical-ascent rocket model in the altitude domain.
//
// All quantities are nondimensional: altitude in Earth radii (h = 1 is the
// surface), mass in launch-mass units, speed scaled so that surface gravity
// equals 1. The working ODE system, with altitude h as the independent
// variable, is
//
//   dm/dh = u / (c * v)
//   dv/dh = -u/(m*v) - (1/(2m)) * s_rho0 * c_d * exp(beta*(1-h)) * v - 1/(v*h^2)
//
// where the control u <= 0 is the thrust expressed as mass rate times exhaust
// velocity. The dynamics are singular at v = 0; callers must keep v > 0.

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace goddard {

// Normalized model constants and boundary values. Plain aggregate; call
// validate() at pipeline boundaries. Defaults reproduce the SA-2-like
// vehicle this problem is usually stated with.
struct ModelParams {
    double beta = 500.0;     // drag decay constant
    double s_rho0 = 12400.0; // cross-section times surface air density (fused)
    double c_d = 0.05;       // drag constant
    double c = 0.5;          // exhaust velocity

    double u_min = -3.5;     // control lower bound; controls live in [u_min, 0]

    double h0 = 1.0;         // initial altitude
    double hT = 1.01;        // terminal altitude
    double m0 = 1.0;         // initial mass
    double v0 = 0.0;         // initial speed (boundary condition; the grid
                             // layer realizes it as a small positive speed)
    double m_payload = 0.6;  // payload mass floor m_p

    void validate() const {
        if (!(beta > 0.0) || !(s_rho0 > 0.0) || !(c_d > 0.0) || !(c > 0.0))
            throw std::invalid_argument("ModelParams: beta, s_rho0, c_d, c must be positive");
        if (!(u_min <= 0.0))
            throw std::invalid_argument("ModelParams: u_min must be <= 0");
        if (!(h0 < hT))
            throw std::invalid_argument("ModelParams: h0 must be below hT");
        if (!(m_payload > 0.0) || !(m_payload < m0))
            throw std::invalid_argument("ModelParams: need 0 < m_payload < m0");
    }
};

// Instantaneous state at altitude h.
struct RocketState {
    double h = 1.0; // altitude
    double m = 1.0; // mass
    double v = 0.0; // speed
};

// Dimensional constants used only by the unit-conversion helpers.
struct DimensionalConstants {
    double R = 6.371e6;     // Earth radius [m]
    double g0 = 9.81;       // surface gravity [m/s^2]
    double m0_dim = 1.0;    // launch mass [kg]

    double G() const { return g0 * R * R; }
};

enum class Quantity { Altitude, Mass, Time, Speed, Acceleration };

// Maps a dimensional quantity to its normalized counterpart.
inline double nondimensionalize(double value, Quantity kind, const DimensionalConstants& dc) {
    switch (kind) {
        case Quantity::Altitude: return value / dc.R;
        case Quantity::Mass: return value / dc.m0_dim;
        case Quantity::Time: return value * std::sqrt(dc.G() / (dc.R * dc.R * dc.R));
        case Quantity::Speed: return value * std::sqrt(dc.R / dc.G());
        case Quantity::Acceleration: return value * (dc.R * dc.R) / dc.G();
    }
    throw std::invalid_argument("nondimensionalize: unknown quantity kind");
}

// Inverse of nondimensionalize; the round trip is the identity to machine
// precision.
inline double dimensionalize(double value, Quantity kind, const DimensionalConstants& dc) {
    switch (kind) {
        case Quantity::Altitude: return value * dc.R;
        case Quantity::Mass: return value * dc.m0_dim;
        case Quantity::Time: return value / std::sqrt(dc.G() / (dc.R * dc.R * dc.R));
        case Quantity::Speed: return value / std::sqrt(dc.R / dc.G());
        case Quantity::Acceleration: return value / ((dc.R * dc.R) / dc.G());
    }
    throw std::invalid_argument("dimensionalize: unknown quantity kind");
}

// Aerodynamic drag force at speed v and altitude h >= 1. With beta = 500 and
// h in [1, 1.01] the exponent stays in [-5, 0], so no overflow guard is
// needed.
inline double drag(double v, double h, const ModelParams& p) {
    assert(h >= 1.0);
    return 0.5 * p.s_rho0 * p.c_d * std::exp(p.beta * (1.0 - h)) * v * v;
}

// Gravitational acceleration, normalized to 1 at the surface.
inline double gravity(double h) {
    assert(h > 0.0);
    return 1.0 / (h * h);
}

// dm/dh under control u at speed v. Singular at v = 0; the caller must
// enforce the v > 0 constraint.
inline double mass_rate(double u, double v, const ModelParams& p) {
    if (!(v > 0.0))
        throw std::domain_error("mass_rate: speed must be positive (singular dynamics at v = 0)");
    return u / (p.c * v);
}

// dv/dh: thrust acceleration, drag deceleration, gravity loss, all divided
// through by the climb rate.
inline double speed_rate(double h, double m, double u, double v, const ModelParams& p) {
    assert(h >= 1.0);
    if (!(v > 0.0))
        throw std::domain_error("speed_rate: speed must be positive (singular dynamics at v = 0)");
    if (!(m > 0.0))
        throw std::domain_error("speed_rate: mass must be positive");
    return -u / (m * v)
           - (0.5 / m) * p.s_rho0 * p.c_d * std::exp(p.beta * (1.0 - h)) * v
           - 1.0 / (v * h * h);
}

} // namespace goddard
