#pragma once

#include "types.hpp"

namespace mfg {

// Uniform grid t_j = j*dt on [0, T] with n_steps intervals.
struct TimeGrid {
    double horizon = 1.0;
    int n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, int steps) : horizon(T), n_steps(steps) {
        if (!(T > 0.0) || steps < 1)
            throw InvalidArgument("TimeGrid requires T > 0 and n_steps >= 1");
    }

    double dt() const { return horizon / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double node(int j) const { return horizon * j / n_steps; }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && n_steps == o.n_steps;
    }
};

} // namespace mfg
