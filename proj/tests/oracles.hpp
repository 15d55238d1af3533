#pragma once

// Independent test oracles. Everything here recomputes results by brute
// force, deliberately avoiding the implementation paths it is used to check.

#include <cstdint>
#include <vector>

#include "cubepersist/diagram.hpp"
#include "cubepersist/rng.hpp"

namespace cubepersist::testing {

/// Exhaustive bottleneck distance for one degree: enumerate every injective
/// partial matching between the finite points, diagonal for the rest,
/// essential points paired by sorted births.
double brute_force_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b,
                              int degree);

/// Degree-0 sublevel persistence of a 1D sequence of top cells by a plain
/// threshold sweep with union-find over segments.
PersistenceDiagram sweep_diagram_1d(const std::vector<double>& values);

/// Random diagram with at most max_finite finite points and at most
/// max_essential essential points per degree in {0, ..., degrees-1}.
PersistenceDiagram random_diagram(Rng& rng, int degrees, int max_finite,
                                  int max_essential);

}  // namespace cubepersist::testing
