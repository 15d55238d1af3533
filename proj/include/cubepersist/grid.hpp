#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace cubepersist {

// Dimensions above 3 are rejected everywhere: full cubical complexes in
// d >= 4 are out of reach memory-wise and nothing downstream supports them.
inline constexpr int kMaxDim = 3;

using MultiIndex = std::array<int, kMaxDim>;
using Point = std::array<double, kMaxDim>;

/// Regular grid over [0,1]^d with points at (k_1/N, ..., k_d/N),
/// k_j in {1,...,N}. Linear storage is row-major with k_1 slowest.
struct GridSpec {
  int dim = 1;
  int points_per_axis = 2;

  GridSpec() = default;
  GridSpec(int d, int n);

  std::int64_t sample_count() const;
  double step() const { return 1.0 / points_per_axis; }

  std::int64_t linear_index(const MultiIndex& k) const;
  MultiIndex multi_index(std::int64_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

Point index_to_point(const GridSpec& grid, const MultiIndex& k);
MultiIndex point_to_nearest_index(const GridSpec& grid, const Point& x);

/// Immutable array of samples on a GridSpec. Construction rejects
/// non-finite values.
class ScalarField {
 public:
  ScalarField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::int64_t flat) const { return values_[flat]; }
  double at(const MultiIndex& k) const { return values_[grid_.linear_index(k)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

}  // namespace cubepersist
