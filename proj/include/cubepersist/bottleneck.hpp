#pragma once

#include <optional>
#include <vector>

#include "cubepersist/diagram.hpp"

namespace cubepersist {

/// One realized optimal matching for a single degree. A pair with one side
/// absent matches the other side to the diagonal.
struct Matching {
  struct Pair {
    std::optional<DiagramPoint> from;
    std::optional<DiagramPoint> to;
  };
  std::vector<Pair> pairs;
  double cost = 0.0;
};

/// Exact bottleneck distance between the degree-s parts of two diagrams.
/// Finite points match finite points or the diagonal; essential points match
/// essential points of the same degree by birth, and a mismatch in essential
/// counts makes the distance infinite.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b,
                           int degree);

/// Max over all degrees present in either diagram.
double bottleneck_all_degrees(const PersistenceDiagram& a, const PersistenceDiagram& b);

/// Distance plus one optimal matching (finite part and essential part).
Matching bottleneck_matching(const PersistenceDiagram& a, const PersistenceDiagram& b,
                             int degree);

}  // namespace cubepersist
