#pragma once

#include "qdyn/errors.hpp"

namespace qdyn {

/// Uniform sampling of a time window [t0, t1], t0 >= 0, at least two points.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    int n = 2;

    static TimeGrid uniform(double t0, double t1, int n) {
        TimeGrid g{t0, t1, n};
        g.validate();
        return g;
    }

    void validate() const {
        if (!(t0 >= 0.0)) throw DomainError("time grid starts before 0");
        if (!(t1 > t0)) throw DomainError("time grid must be increasing");
        if (n < 2) throw DomainError("time grid needs at least 2 points");
    }

    int size() const { return n; }
    double dt() const { return (t1 - t0) / (n - 1); }
    double at(int k) const { return t0 + (t1 - t0) * k / (n - 1); }
};

}  // namespace qdyn
