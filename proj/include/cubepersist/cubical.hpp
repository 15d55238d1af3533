#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cubepersist/diagram.hpp"
#include "cubepersist/grid.hpp"

namespace cubepersist {

/// Full cubical complex over a box of top-dimensional cells, filtered by the
/// T-construction: every top cell carries its field value, every lower cell
/// the minimum over its incident top cells. The sublevel subcomplex at any
/// threshold then has the homotopy type of the union of the closed top cubes
/// at or below that threshold; in particular two cubes sharing only a corner
/// are connected, which is what a union of closed hypercubes requires.
class CubicalFiltration {
 public:
  /// values: row-major (first axis slowest), one value per top cell.
  static CubicalFiltration from_top_cells(std::span<const double> values,
                                          std::span<const int> shape);

  int dim() const { return dim_; }
  std::int64_t num_cells() const { return static_cast<std::int64_t>(values_.size()); }
  double cell_value(std::int64_t cell) const { return values_[cell]; }
  int cell_dim(std::int64_t cell) const { return dims_[cell]; }
  /// Cells in filtration order: value asc, dimension asc, linear index asc.
  const std::vector<std::int64_t>& order() const { return order_; }

  /// Faces of a cell (2 per axis of extent). Returns the count written.
  int boundary(std::int64_t cell, std::array<std::int64_t, 6>& out) const;

  struct Result {
    PersistenceDiagram diagram;
    /// pair_of[cell] = cell it is paired with, or -1 (essential / unpaired).
    std::vector<std::int64_t> pair_of;
  };

  /// Degree 0 via union-find over vertices and edges, degrees >= 1 via
  /// boundary-matrix reduction over Z/2 with the clearing optimization.
  Result persistence_with_pairs(bool h0_via_reduction = false) const;
  PersistenceDiagram persistence(bool h0_via_reduction = false) const;

  /// Betti numbers of the sublevel subcomplex at lambda, computed from
  /// GF(2) boundary ranks and union-find, independently of the diagram.
  std::vector<std::int64_t> betti_at(double lambda) const;

 private:
  int dim_ = 0;
  std::array<int, 3> shape_{};        // top cells per axis
  std::array<int, 3> cells_shape_{};  // 2*shape+1 coordinates per axis
  std::array<std::int64_t, 3> stride_{};
  std::vector<double> values_;
  std::vector<std::uint8_t> dims_;
  std::vector<std::int64_t> order_;
  std::vector<std::int64_t> rank_;  // inverse of order_

  void decode(std::int64_t cell, std::array<int, 3>& c) const;
};

/// Convenience: filtration of a scalar field's samples taken as top cells.
CubicalFiltration build_filtration(const ScalarField& field);
CubicalFiltration build_filtration(std::span<const double> values,
                                   std::span<const int> shape);

}  // namespace cubepersist
