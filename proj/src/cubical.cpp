#include "cubepersist/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cubepersist {

namespace {

// Union-find with birth tracking; births compared by filtration rank.
struct ComponentForest {
  std::vector<std::int64_t> parent;
  std::vector<std::int64_t> birth_rank;

  explicit ComponentForest(std::int64_t n) : parent(n, -1), birth_rank(n, -1) {}

  void activate(std::int64_t v, std::int64_t rank) {
    parent[v] = v;
    birth_rank[v] = rank;
  }
  bool active(std::int64_t v) const { return parent[v] >= 0; }

  std::int64_t find(std::int64_t v) {
    std::int64_t root = v;
    while (parent[root] != root) root = parent[root];
    while (parent[v] != root) {
      std::int64_t next = parent[v];
      parent[v] = root;
      v = next;
    }
    return root;
  }
};

std::vector<std::int64_t> symmetric_difference(const std::vector<std::int64_t>& a,
                                               const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) out.push_back(a[i++]);
    else if (b[j] < a[i]) out.push_back(b[j++]);
    else { ++i; ++j; }
  }
  out.insert(out.end(), a.begin() + i, a.end());
  out.insert(out.end(), b.begin() + j, b.end());
  return out;
}

// Rank of a GF(2) matrix given as columns of sorted row ids.
std::int64_t gf2_rank(std::vector<std::vector<std::int64_t>> cols, std::int64_t max_row) {
  std::vector<std::int64_t> owner(max_row, -1);
  std::int64_t rank = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto& col = cols[c];
    while (!col.empty()) {
      std::int64_t low = col.back();
      std::int64_t o = owner[low];
      if (o < 0) break;
      col = symmetric_difference(col, cols[o]);
    }
    if (!col.empty()) {
      owner[col.back()] = static_cast<std::int64_t>(c);
      ++rank;
    }
  }
  return rank;
}

}  // namespace

void CubicalFiltration::decode(std::int64_t cell, std::array<int, 3>& c) const {
  for (int j = dim_ - 1; j >= 0; --j) {
    c[j] = static_cast<int>(cell % cells_shape_[j]);
    cell /= cells_shape_[j];
  }
}

CubicalFiltration CubicalFiltration::from_top_cells(std::span<const double> values,
                                                    std::span<const int> shape) {
  CubicalFiltration f;
  f.dim_ = static_cast<int>(shape.size());
  if (f.dim_ < 1 || f.dim_ > 3)
    throw std::invalid_argument("CubicalFiltration: dim must be 1, 2 or 3");
  std::int64_t tops = 1;
  for (int j = 0; j < f.dim_; ++j) {
    if (shape[j] < 1) throw std::invalid_argument("CubicalFiltration: empty axis");
    f.shape_[j] = shape[j];
    f.cells_shape_[j] = 2 * shape[j] + 1;
    tops *= shape[j];
  }
  if (static_cast<std::int64_t>(values.size()) != tops)
    throw std::invalid_argument("CubicalFiltration: value count does not match shape");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("CubicalFiltration: non-finite value");

  f.stride_[f.dim_ - 1] = 1;
  for (int j = f.dim_ - 2; j >= 0; --j)
    f.stride_[j] = f.stride_[j + 1] * f.cells_shape_[j + 1];

  std::int64_t num_cells = 1;
  for (int j = 0; j < f.dim_; ++j) num_cells *= f.cells_shape_[j];
  f.values_.resize(num_cells);
  f.dims_.resize(num_cells);

  // Top-cell linear strides over the shape_ grid.
  std::array<std::int64_t, 3> top_stride{};
  top_stride[f.dim_ - 1] = 1;
  for (int j = f.dim_ - 2; j >= 0; --j)
    top_stride[j] = top_stride[j + 1] * f.shape_[j + 1];

  std::array<int, 3> c{};
  for (std::int64_t cell = 0; cell < num_cells; ++cell) {
    f.decode(cell, c);
    int d = 0;
    // Per axis the incident top cells have index c/2 (odd) or {c/2-1, c/2}
    // (even), clipped to the box.
    std::array<std::array<int, 2>, 3> choice{};
    std::array<int, 3> n_choice{};
    for (int j = 0; j < f.dim_; ++j) {
      if (c[j] & 1) {
        ++d;
        choice[j][0] = c[j] / 2;
        n_choice[j] = 1;
      } else {
        int k = 0;
        if (c[j] / 2 - 1 >= 0) choice[j][k++] = c[j] / 2 - 1;
        if (c[j] / 2 < f.shape_[j]) choice[j][k++] = c[j] / 2;
        n_choice[j] = k;
      }
    }
    double best = std::numeric_limits<double>::infinity();
    std::array<int, 3> pick{};
    int combos = 1;
    for (int j = 0; j < f.dim_; ++j) combos *= n_choice[j];
    for (int m = 0; m < combos; ++m) {
      int rem = m;
      std::int64_t t = 0;
      for (int j = 0; j < f.dim_; ++j) {
        pick[j] = choice[j][rem % n_choice[j]];
        rem /= n_choice[j];
        t += pick[j] * top_stride[j];
      }
      best = std::min(best, values[t]);
    }
    f.values_[cell] = best;
    f.dims_[cell] = static_cast<std::uint8_t>(d);
  }

  f.order_.resize(num_cells);
  std::iota(f.order_.begin(), f.order_.end(), std::int64_t{0});
  std::sort(f.order_.begin(), f.order_.end(), [&f](std::int64_t a, std::int64_t b) {
    if (f.values_[a] != f.values_[b]) return f.values_[a] < f.values_[b];
    if (f.dims_[a] != f.dims_[b]) return f.dims_[a] < f.dims_[b];
    return a < b;
  });
  f.rank_.resize(num_cells);
  for (std::int64_t r = 0; r < num_cells; ++r) f.rank_[f.order_[r]] = r;
  return f;
}

int CubicalFiltration::boundary(std::int64_t cell, std::array<std::int64_t, 6>& out) const {
  std::array<int, 3> c{};
  decode(cell, c);
  int n = 0;
  for (int j = 0; j < dim_; ++j) {
    if (c[j] & 1) {
      out[n++] = cell - stride_[j];
      out[n++] = cell + stride_[j];
    }
  }
  return n;
}

CubicalFiltration::Result CubicalFiltration::persistence_with_pairs(
    bool h0_via_reduction) const {
  const std::int64_t m = num_cells();
  Result res;
  res.pair_of.assign(m, -1);
  PersistenceDiagram& dgm = res.diagram;

  std::vector<std::uint8_t> cleared(m, 0);
  std::vector<std::uint8_t> edge_negative;  // filled by union-find pass

  if (!h0_via_reduction) {
    // Union-find sweep over vertices and edges in filtration order.
    edge_negative.assign(m, 0);
    ComponentForest forest(m);
    for (std::int64_t r = 0; r < m; ++r) {
      std::int64_t cell = order_[r];
      int d = dims_[cell];
      if (d == 0) {
        forest.activate(cell, r);
      } else if (d == 1) {
        std::array<std::int64_t, 6> bd;
        boundary(cell, bd);
        std::int64_t ra = forest.find(bd[0]);
        std::int64_t rb = forest.find(bd[1]);
        if (ra == rb) continue;  // positive edge
        edge_negative[cell] = 1;
        std::int64_t elder = ra, young = rb;
        if (forest.birth_rank[young] < forest.birth_rank[elder]) std::swap(elder, young);
        std::int64_t young_vertex = order_[forest.birth_rank[young]];
        res.pair_of[young_vertex] = cell;
        res.pair_of[cell] = young_vertex;
        if (values_[young_vertex] != values_[cell])
          dgm.add({0, values_[young_vertex], values_[cell]});
        forest.parent[young] = elder;
      }
    }
    for (std::int64_t v = 0; v < m; ++v) {
      if (dims_[v] != 0 || !forest.active(v)) continue;
      if (forest.find(v) == v) {
        std::int64_t birth_vertex = order_[forest.birth_rank[v]];
        dgm.add({0, values_[birth_vertex], kInfiniteDeath});
      }
    }
  }

  // Column reduction, highest dimension first (twist/clearing).
  int q_lo = h0_via_reduction ? 1 : 2;
  std::vector<std::int64_t> pivot_col_of_row(m, -1);
  std::vector<std::uint8_t> positive(m, 0);
  for (int q = dim_; q >= q_lo; --q) {
    std::fill(pivot_col_of_row.begin(), pivot_col_of_row.end(), std::int64_t{-1});
    std::vector<std::vector<std::int64_t>> arena;
    std::array<std::int64_t, 6> bd;
    for (std::int64_t r = 0; r < m; ++r) {
      std::int64_t cell = order_[r];
      if (dims_[cell] != q) continue;
      if (cleared[cell]) continue;  // paired as a birth by dimension q+1
      int nb = boundary(cell, bd);
      std::vector<std::int64_t> col(nb);
      for (int i = 0; i < nb; ++i) col[i] = rank_[bd[i]];
      std::sort(col.begin(), col.end());
      while (!col.empty()) {
        std::int64_t low = col.back();
        std::int64_t owner = pivot_col_of_row[low];
        if (owner < 0) break;
        col = symmetric_difference(col, arena[owner]);
      }
      if (col.empty()) {
        positive[cell] = 1;  // unpaired birth in degree q -> essential
        continue;
      }
      std::int64_t low = col.back();
      std::int64_t birth_cell = order_[low];
      pivot_col_of_row[low] = static_cast<std::int64_t>(arena.size());
      arena.push_back(std::move(col));
      cleared[birth_cell] = 1;
      res.pair_of[birth_cell] = cell;
      res.pair_of[cell] = birth_cell;
      if (values_[birth_cell] != values_[cell])
        dgm.add({q - 1, values_[birth_cell], values_[cell]});
    }
  }

  if (h0_via_reduction) {
    // Vertices have empty boundary; unpaired ones are the essential classes.
    for (std::int64_t v = 0; v < m; ++v)
      if (dims_[v] == 0 && !cleared[v]) dgm.add({0, values_[v], kInfiniteDeath});
  } else {
    // Essential classes in degree 1: positive edges never paired by a 2-cell.
    for (std::int64_t e = 0; e < m; ++e)
      if (dims_[e] == 1 && !edge_negative[e] && !cleared[e])
        dgm.add({1, values_[e], kInfiniteDeath});
  }
  // Essential classes in degrees >= 2 (never arise for full boxes, but the
  // reduction detects them anyway).
  for (std::int64_t cell = 0; cell < m; ++cell)
    if (positive[cell] && !cleared[cell] && dims_[cell] >= 2)
      dgm.add({dims_[cell], values_[cell], kInfiniteDeath});

  dgm.sort();
  return res;
}

PersistenceDiagram CubicalFiltration::persistence(bool h0_via_reduction) const {
  return persistence_with_pairs(h0_via_reduction).diagram;
}

std::vector<std::int64_t> CubicalFiltration::betti_at(double lambda) const {
  const std::int64_t m = num_cells();
  std::vector<std::uint8_t> present(m, 0);
  for (std::int64_t cell = 0; cell < m; ++cell) present[cell] = values_[cell] <= lambda;

  std::vector<std::int64_t> betti(dim_ + 1, 0);

  // beta_0 by union-find over present vertices and edges.
  ComponentForest forest(m);
  std::array<std::int64_t, 6> bd;
  for (std::int64_t cell = 0; cell < m; ++cell)
    if (dims_[cell] == 0 && present[cell]) forest.activate(cell, cell);
  for (std::int64_t cell = 0; cell < m; ++cell) {
    if (dims_[cell] != 1 || !present[cell]) continue;
    boundary(cell, bd);
    std::int64_t ra = forest.find(bd[0]);
    std::int64_t rb = forest.find(bd[1]);
    if (ra != rb) forest.parent[ra] = rb;
  }
  for (std::int64_t v = 0; v < m; ++v)
    if (dims_[v] == 0 && forest.active(v) && forest.find(v) == v) ++betti[0];

  // beta_s = n_s - rank d_s - rank d_{s+1} over the present cells.
  std::vector<std::int64_t> count(dim_ + 1, 0);
  for (std::int64_t cell = 0; cell < m; ++cell)
    if (present[cell]) ++count[dims_[cell]];
  std::vector<std::int64_t> rank_d(dim_ + 2, 0);
  for (int s = 1; s <= dim_; ++s) {
    std::vector<std::vector<std::int64_t>> cols;
    for (std::int64_t cell = 0; cell < m; ++cell) {
      if (dims_[cell] != s || !present[cell]) continue;
      int nb = boundary(cell, bd);
      std::vector<std::int64_t> col(bd.begin(), bd.begin() + nb);
      std::sort(col.begin(), col.end());
      cols.push_back(std::move(col));
    }
    rank_d[s] = gf2_rank(std::move(cols), m);
  }
  for (int s = 1; s <= dim_; ++s) betti[s] = count[s] - rank_d[s] - rank_d[s + 1];
  return betti;
}

CubicalFiltration build_filtration(std::span<const double> values,
                                   std::span<const int> shape) {
  return CubicalFiltration::from_top_cells(values, shape);
}

CubicalFiltration build_filtration(const ScalarField& field) {
  std::vector<int> shape(field.grid().dim, field.grid().points_per_axis);
  return CubicalFiltration::from_top_cells(field.values(), shape);
}

}  // namespace cubepersist
