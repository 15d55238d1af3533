#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cubepersist::testing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linf(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double to_diagonal(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

// Recursively assign each point of `a` to an unused point of `b` or to the
// diagonal, then send the remaining b-points to the diagonal.
void enumerate(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
               std::size_t i, std::vector<char>& used, double current, double& best) {
  if (current >= best) return;
  if (i == a.size()) {
    double cost = current;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j]) cost = std::max(cost, to_diagonal(b[j]));
    best = std::min(best, cost);
    return;
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (used[j]) continue;
    used[j] = 1;
    enumerate(a, b, i + 1, used, std::max(current, linf(a[i], b[j])), best);
    used[j] = 0;
  }
  enumerate(a, b, i + 1, used, std::max(current, to_diagonal(a[i])), best);
}

}  // namespace

double brute_force_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b,
                              int degree) {
  auto ess_a = a.essential_births(degree);
  auto ess_b = b.essential_births(degree);
  if (ess_a.size() != ess_b.size()) return kInf;
  double cost = 0.0;
  for (std::size_t i = 0; i < ess_a.size(); ++i)
    cost = std::max(cost, std::abs(ess_a[i] - ess_b[i]));
  auto fa = a.finite_points(degree);
  auto fb = b.finite_points(degree);
  double best = kInf;
  std::vector<char> used(fb.size(), 0);
  enumerate(fa, fb, 0, used, 0.0, best);
  return std::max(cost, best);
}

PersistenceDiagram sweep_diagram_1d(const std::vector<double>& values) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  std::vector<std::int64_t> order(n);
  for (std::int64_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::int64_t x, std::int64_t y) {
    if (values[x] != values[y]) return values[x] < values[y];
    return x < y;
  });
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::pair<double, std::int64_t>> birth(n);
  auto find = [&](std::int64_t v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };
  PersistenceDiagram dgm;
  for (std::int64_t i : order) {
    parent[i] = i;
    birth[i] = {values[i], i};
    for (std::int64_t j : {i - 1, i + 1}) {
      if (j < 0 || j >= n || parent[j] < 0) continue;
      std::int64_t ri = find(i), rj = find(j);
      if (ri == rj) continue;
      std::int64_t elder = ri, young = rj;
      if (birth[young] < birth[elder]) std::swap(elder, young);
      if (birth[young].first != values[i]) dgm.add({0, birth[young].first, values[i]});
      parent[young] = elder;
    }
  }
  for (std::int64_t i = 0; i < n; ++i)
    if (parent[i] == i) dgm.add({0, birth[i].first, kInfiniteDeath});
  dgm.sort();
  return dgm;
}

PersistenceDiagram random_diagram(Rng& rng, int degrees, int max_finite,
                                  int max_essential) {
  PersistenceDiagram dgm;
  for (int s = 0; s < degrees; ++s) {
    int finite = static_cast<int>(rng.uniform01() * (max_finite + 1));
    finite = std::min(finite, max_finite);
    for (int i = 0; i < finite; ++i) {
      double birth = -1.0 + 2.0 * rng.uniform01();
      double pers = 0.05 + 2.0 * rng.uniform01();
      dgm.add({s, birth, birth + pers});
    }
    int essential = static_cast<int>(rng.uniform01() * (max_essential + 1));
    essential = std::min(essential, max_essential);
    for (int i = 0; i < essential; ++i)
      dgm.add({s, -1.0 + 2.0 * rng.uniform01(), kInfiniteDeath});
  }
  dgm.sort();
  return dgm;
}

}  // namespace cubepersist::testing
