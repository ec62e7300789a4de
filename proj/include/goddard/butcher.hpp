#pragma once

// Butcher tableaus: the coefficient arrays (z, a, w) that define an order-s
// Runge-Kutta stepper. A strictly lower triangular stage matrix means the
// stages can be evaluated explicitly in order.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace goddard {

struct ButcherTableau {
    int s = 0;              // stage count
    std::vector<double> z;  // nodes, size s
    std::vector<double> a;  // stage matrix, row-major s*s
    std::vector<double> w;  // weights, size s

    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * s + j]; }

    bool is_explicit() const {
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j)
                if (at(i, j) != 0.0) return false;
        return true;
    }

    void validate() const {
        if (s < 1) throw std::invalid_argument("ButcherTableau: need at least one stage");
        if (z.size() != static_cast<std::size_t>(s) || w.size() != static_cast<std::size_t>(s) ||
            a.size() != static_cast<std::size_t>(s) * s)
            throw std::invalid_argument("ButcherTableau: inconsistent array sizes");
        double sum = 0.0;
        for (double wi : w) sum += wi;
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("ButcherTableau: weights must sum to 1");
    }
};

// Explicit Euler as a degenerate one-stage tableau.
inline ButcherTableau euler_tableau() {
    return ButcherTableau{1, {0.0}, {0.0}, {1.0}};
}

// The classical fourth-order Runge-Kutta method.
inline ButcherTableau rk4_tableau() {
    ButcherTableau t;
    t.s = 4;
    t.z = {0.0, 0.5, 0.5, 1.0};
    t.a = {0.0, 0.0, 0.0, 0.0,
           0.5, 0.0, 0.0, 0.0,
           0.0, 0.5, 0.0, 0.0,
           0.0, 0.0, 1.0, 0.0};
    t.w = {1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0};
    return t;
}

// Two-stage Gauss-Legendre: implicit, A-stable, order 4.
inline ButcherTableau gauss_legendre2_tableau() {
    const double r = std::sqrt(3.0) / 6.0;
    ButcherTableau t;
    t.s = 2;
    t.z = {0.5 - r, 0.5 + r};
    t.a = {0.25, 0.25 - r,
           0.25 + r, 0.25};
    t.w = {0.5, 0.5};
    return t;
}

} // namespace goddard
