#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cubepersist {

/// Exact squared Euclidean distance (in index units) from every grid node to
/// the set of nodes marked true, by per-axis lower-envelope passes. Nodes in
/// the set get 0; if the set is empty every entry is +infinity.
std::vector<double> squared_distance_field(const std::vector<std::uint8_t>& set_mask,
                                           std::span<const int> shape);

/// Mask of nodes within Euclidean distance `radius` (index units) of the set.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& set_mask,
                                 std::span<const int> shape, double radius);

/// Mask of nodes at Euclidean distance > `radius` from the complement.
std::vector<std::uint8_t> erode(const std::vector<std::uint8_t>& set_mask,
                                std::span<const int> shape, double radius);

}  // namespace cubepersist
