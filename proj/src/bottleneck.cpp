#include "cubepersist/bottleneck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace cubepersist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linf(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double half_persistence(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

// Max-cardinality bipartite matching (Hopcroft-Karp).
struct HopcroftKarp {
  const std::vector<std::vector<int>>& adj;
  int n_left, n_right;
  std::vector<int> match_left, match_right, dist;

  HopcroftKarp(const std::vector<std::vector<int>>& a, int nr)
      : adj(a), n_left(static_cast<int>(a.size())), n_right(nr),
        match_left(n_left, -1), match_right(n_right, -1), dist(n_left, 0) {}

  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (int u = 0; u < n_left; ++u) {
      if (match_left[u] < 0) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = -1;
      }
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        int w = match_right[v];
        if (w < 0) found = true;
        else if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (int v : adj[u]) {
      int w = match_right[v];
      if (w < 0 || (dist[w] == dist[u] + 1 && dfs(w))) {
        match_left[u] = v;
        match_right[v] = u;
        return true;
      }
    }
    dist[u] = -1;
    return false;
  }

  int run() {
    int matched = 0;
    while (bfs())
      for (int u = 0; u < n_left; ++u)
        if (match_left[u] < 0 && dfs(u)) ++matched;
    return matched;
  }
};

// Finite-point part of one degree. d_b <= r iff there is an injective partial
// matching (edges of L-inf length <= r) covering every point of persistence
// > 2r on both sides; everything else can take the diagonal at cost <= r.
// By Mendelsohn-Dulmage a matching covering both required sets exists as soon
// as each side can be covered on its own, so feasibility is two one-sided
// Hopcroft-Karp runs.
struct FinitePart {
  std::vector<DiagramPoint> a, b;

  std::vector<int> required(const std::vector<DiagramPoint>& side, double r) const {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(side.size()); ++i)
      if (half_persistence(side[i]) > r) idx.push_back(i);
    return idx;
  }

  // Matching of {from points with pers > 2r} into {to} with edges <= r,
  // covering all of the former. Returns the assignment or nullopt.
  std::optional<std::vector<int>> cover(const std::vector<DiagramPoint>& from,
                                        const std::vector<DiagramPoint>& to,
                                        double r) const {
    std::vector<int> need = required(from, r);
    std::vector<int> assign(from.size(), -1);
    if (need.empty()) return assign;
    std::vector<std::vector<int>> adj(need.size());
    for (std::size_t i = 0; i < need.size(); ++i) {
      const DiagramPoint& p = from[need[i]];
      for (int j = 0; j < static_cast<int>(to.size()); ++j)
        if (linf(p, to[j]) <= r) adj[i].push_back(j);
      if (adj[i].empty()) return std::nullopt;
    }
    HopcroftKarp hk(adj, static_cast<int>(to.size()));
    if (hk.run() != static_cast<int>(need.size())) return std::nullopt;
    for (std::size_t i = 0; i < need.size(); ++i) assign[need[i]] = hk.match_left[i];
    return assign;
  }

  bool feasible(double r) const {
    return cover(a, b, r).has_value() && cover(b, a, r).has_value();
  }

  double solve() const {
    if (a.empty() && b.empty()) return 0.0;

    // Diagonal candidates (half-persistences, plus 0 for identical diagrams).
    std::vector<double> diag{0.0};
    for (const auto& p : a) diag.push_back(half_persistence(p));
    for (const auto& p : b) diag.push_back(half_persistence(p));
    std::sort(diag.begin(), diag.end());
    diag.erase(std::unique(diag.begin(), diag.end()), diag.end());
    if (!feasible(diag.back()))
      throw std::logic_error("bottleneck: max diagonal threshold must be feasible");

    // First feasible diagonal candidate (feasibility is monotone in r).
    std::size_t lo = 0, hi = diag.size() - 1;
    if (feasible(diag[0])) {
      hi = 0;
    } else {
      while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (feasible(diag[mid])) hi = mid;
        else lo = mid;
      }
    }
    if (hi == 0) return diag[0];
    double upper = diag[hi];
    double lower = diag[hi - 1];  // infeasible

    // The optimum is either `upper` or a cross-pair distance in
    // (lower, upper). In some optimal matching every pair attaining the max
    // has an endpoint of persistence > 2*lower (otherwise both ends move to
    // the diagonal at cost <= lower, contradicting infeasibility of lower),
    // so this restricted candidate set is exact.
    std::vector<double> cross;
    auto add_pairs = [&](const std::vector<DiagramPoint>& from,
                         const std::vector<DiagramPoint>& to) {
      for (const auto& p : from) {
        if (half_persistence(p) <= lower) continue;
        for (const auto& q : to) {
          double d = linf(p, q);
          if (d > lower && d < upper) cross.push_back(d);
        }
      }
    };
    add_pairs(a, b);
    add_pairs(b, a);
    std::sort(cross.begin(), cross.end());
    cross.erase(std::unique(cross.begin(), cross.end()), cross.end());

    std::size_t l = 0, h = cross.size();
    while (l < h) {
      std::size_t mid = (l + h) / 2;
      if (feasible(cross[mid])) h = mid;
      else l = mid + 1;
    }
    return (l < cross.size()) ? cross[l] : upper;
  }

  // Combine the two one-sided covers into one matching covering both required
  // sets (Mendelsohn-Dulmage construction): start from the A-cover and flip
  // alternating paths towards unmatched required B points.
  std::vector<int> combined_assignment(double r) const {
    auto m1opt = cover(a, b, r);
    auto m2opt = cover(b, a, r);
    if (!m1opt || !m2opt)
      throw std::logic_error("bottleneck: assignment requested at infeasible radius");
    std::vector<int> m1 = *m1opt;             // a index -> b index
    std::vector<int> m2_ba = *m2opt;          // b index -> a index
    std::vector<int> m1_rev(b.size(), -1);
    for (int i = 0; i < static_cast<int>(a.size()); ++i)
      if (m1[i] >= 0) m1_rev[m1[i]] = i;
    for (int bj = 0; bj < static_cast<int>(b.size()); ++bj) {
      if (half_persistence(b[bj]) <= r) continue;  // not required
      if (m1_rev[bj] >= 0) continue;               // already covered
      // Alternating walk: M2 edge, then M1 edge, flipping M2 edges in.
      int cur_b = bj;
      while (true) {
        int ai = m2_ba[cur_b];
        if (ai < 0)
          throw std::logic_error("bottleneck: required point uncovered by its own side");
        int next_b = m1[ai];
        m1[ai] = cur_b;
        m1_rev[cur_b] = ai;
        if (next_b < 0) break;
        m1_rev[next_b] = -1;
        cur_b = next_b;
        if (m2_ba[cur_b] < 0) break;  // cur_b loses its match; it is not required
      }
    }
    return m1;
  }
};

double essential_cost(const std::vector<double>& births_a,
                      const std::vector<double>& births_b) {
  if (births_a.size() != births_b.size()) return kInf;
  double cost = 0.0;
  for (std::size_t i = 0; i < births_a.size(); ++i)
    cost = std::max(cost, std::abs(births_a[i] - births_b[i]));
  return cost;
}

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b,
                           int degree) {
  double ess = essential_cost(a.essential_births(degree), b.essential_births(degree));
  if (ess == kInf) return kInf;
  FinitePart fp{a.finite_points(degree), b.finite_points(degree)};
  return std::max(ess, fp.solve());
}

double bottleneck_all_degrees(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  int top = std::max(a.max_degree(), b.max_degree());
  double out = 0.0;
  for (int s = 0; s <= top; ++s) out = std::max(out, bottleneck_distance(a, b, s));
  return out;
}

Matching bottleneck_matching(const PersistenceDiagram& a, const PersistenceDiagram& b,
                             int degree) {
  Matching m;
  m.cost = bottleneck_distance(a, b, degree);
  if (m.cost == kInf) return m;

  auto ess_a = a.essential_births(degree);
  auto ess_b = b.essential_births(degree);
  for (std::size_t i = 0; i < ess_a.size(); ++i)
    m.pairs.push_back({DiagramPoint{degree, ess_a[i], kInfiniteDeath},
                       DiagramPoint{degree, ess_b[i], kInfiniteDeath}});

  FinitePart fp{a.finite_points(degree), b.finite_points(degree)};
  if (fp.a.empty() && fp.b.empty()) return m;
  std::vector<int> assign = fp.combined_assignment(m.cost);
  std::vector<char> used_b(fp.b.size(), 0);
  for (int i = 0; i < static_cast<int>(fp.a.size()); ++i) {
    if (assign[i] >= 0) {
      used_b[assign[i]] = 1;
      m.pairs.push_back({fp.a[i], fp.b[assign[i]]});
    } else {
      m.pairs.push_back({fp.a[i], std::nullopt});
    }
  }
  for (int j = 0; j < static_cast<int>(fp.b.size()); ++j)
    if (!used_b[j]) m.pairs.push_back({std::nullopt, fp.b[j]});
  return m;
}

}  // namespace cubepersist
