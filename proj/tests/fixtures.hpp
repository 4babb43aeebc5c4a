#pragma once

#include "eqrestore/problem.hpp"

#include <vector>

namespace eqr::fixture {

// Sioux Falls with a handful of the default damaged links, small enough for
// exhaustive search on a coarse grid.
inline Problem small_problem(double budget, double mu, PenaltyMode penalty = PenaltyMode::OneSided,
                             std::vector<int> links = {38, 43, 47, 59})
{
    const Network net = builtin_sioux_falls();
    const Scenario def = default_sioux_falls_scenario(budget);
    Scenario sc = def;
    sc.damaged.clear();
    for (int id : links)
        for (const DamagedLink& d : def.damaged)
            if (d.link == id)
                sc.damaged.push_back(d);
    sc.mu = mu;
    ProblemOptions opts;
    opts.objective.penalty = penalty;
    return Problem(net, default_sioux_falls_demand(), sc, opts);
}

}  // namespace eqr::fixture
