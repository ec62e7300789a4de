#pragma once

// Uniform discretizations of speed, mass, and control, plus the
// expectation-preserving interpolation weights that turn a continuous
// stepper output into a sparse distribution over grid cells.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "goddard/dynamics.hpp"

namespace goddard {

class UniformGrid {
public:
    UniformGrid() = default;

    UniformGrid(double lo, double hi, int n) : lo_(lo), hi_(hi), n_(n) {
        if (!(lo < hi))
            throw std::invalid_argument("UniformGrid: lo must be below hi");
        if (n < 2)
            throw std::invalid_argument("UniformGrid: need at least 2 points");
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int size() const { return n_; }
    double spacing() const { return (hi_ - lo_) / (n_ - 1); }

    // point(n-1) returns hi exactly; intermediate points are lo + k*spacing.
    double point(int k) const {
        return k == n_ - 1 ? hi_ : lo_ + k * spacing();
    }

    // Index of the grid point nearest to x (in cell units), clamped to range.
    int nearest_index(double x) const {
        double t = (x - lo_) / spacing();
        int k = static_cast<int>(std::lround(t));
        return std::clamp(k, 0, n_ - 1);
    }

    bool contains(double x) const { return x >= lo_ && x <= hi_; }

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    int n_ = 2;
};

// Two-point distribution over a bracketing cell: weight p_hi on point
// idx_lo + 1, weight 1 - p_hi on point idx_lo. For in-range x the expected
// grid value reproduces x; out-of-range x collapses to the boundary point.
struct GridWeights {
    int idx_lo = 0;
    double p_hi = 0.0;

    double expected_value(const UniformGrid& g) const {
        return (1.0 - p_hi) * g.point(idx_lo) + p_hi * g.point(idx_lo + 1);
    }
};

inline GridWeights locate(const UniformGrid& g, double x) {
    if (x <= g.lo())
        return {0, 0.0};
    if (x >= g.hi())
        return {g.size() - 2, 1.0};
    double t = (x - g.lo()) / g.spacing();
    // a bit-exact grid point gets the whole mass even when t rounded badly
    int near = static_cast<int>(std::lround(t));
    if (near < g.size() && x == g.point(near))
        return {near, 0.0};
    int k = std::min(static_cast<int>(t), g.size() - 2);
    double p = (x - g.point(k)) / g.spacing();
    return {k, std::clamp(p, 0.0, 1.0)};
}

// The three discretizations of one problem instance.
struct GridSet {
    UniformGrid speed;
    UniformGrid mass;
    UniformGrid control;
};

// The model boundary values fix the mass range [m_p, m0] and the control
// range [u_min, 0]. The speed range is a solver choice: the altitude-
// domain dynamics are singular at v = 0, so the grid starts at a small
// positive v_eps; v_max caps the fastest trajectory the discretization can
// represent (the rollout refuses to produce speeds above it).
inline GridSet default_grids(const ModelParams& p, int nv, int nm, int nu,
                             double v_eps = 1e-3, double v_max = 0.2) {
    if (nv < 2 || nm < 2 || nu < 2)
        throw std::invalid_argument("default_grids: state and control counts must be >= 2");
    if (!(v_eps > 0.0) || !(v_eps < v_max))
        throw std::invalid_argument("default_grids: need 0 < v_eps < v_max");
    return GridSet{
        UniformGrid(v_eps, v_max, nv),
        UniformGrid(p.m_payload, p.m0, nm),
        UniformGrid(p.u_min, 0.0, nu),
    };
}

} // namespace goddard
