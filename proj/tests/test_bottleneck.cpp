#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "cubepersist/bottleneck.hpp"
#include "oracles.hpp"

using namespace cubepersist;

namespace {

PersistenceDiagram make(std::initializer_list<DiagramPoint> pts) {
  PersistenceDiagram d;
  for (const auto& p : pts) d.add(p);
  d.sort();
  return d;
}

}  // namespace

TEST_CASE("bottleneck distance on pinned examples") {
  PersistenceDiagram d1 = make({{0, 0.0, 2.0}});
  CHECK(bottleneck_distance(d1, d1, 0) == 0.0);
  CHECK(bottleneck_distance(d1, PersistenceDiagram{}, 0) == doctest::Approx(1.0));

  PersistenceDiagram d2 = make({{0, 0.0, 1.0}, {0, 0.0, 2.0}});
  PersistenceDiagram d3 = make({{0, 0.0, 2.0}});
  CHECK(bottleneck_distance(d2, d3, 0) == doctest::Approx(0.5));

  PersistenceDiagram e1 = make({{0, 0.0, kInfiniteDeath}});
  PersistenceDiagram e2 = make({{0, 0.3, kInfiniteDeath}});
  CHECK(bottleneck_distance(e1, e2, 0) == doctest::Approx(0.3));

  // mismatched essential counts
  PersistenceDiagram e3 = make({{0, 0.0, kInfiniteDeath}, {0, 0.1, kInfiniteDeath}});
  CHECK(std::isinf(bottleneck_distance(e1, e3, 0)));
}

TEST_CASE("degree filtering and the max over degrees") {
  PersistenceDiagram a = make({{0, 0.0, 1.0}, {1, 0.0, 3.0}});
  PersistenceDiagram b = make({{0, 0.0, 1.0}, {1, 0.0, 1.0}});
  CHECK(bottleneck_distance(a, b, 0) == 0.0);
  // degree 1: pairing costs 2, sending both to the diagonal costs 1.5
  CHECK(bottleneck_distance(a, b, 1) == doctest::Approx(1.5));
  CHECK(bottleneck_all_degrees(a, b) == doctest::Approx(1.5));
  CHECK(bottleneck_all_degrees(PersistenceDiagram{}, PersistenceDiagram{}) == 0.0);
}

TEST_CASE("exact distance equals exhaustive enumeration on random diagrams") {
  Rng rng(2025);
  for (int trial = 0; trial < 300; ++trial) {
    PersistenceDiagram a = testing::random_diagram(rng, 2, 5, 2);
    PersistenceDiagram b = testing::random_diagram(rng, 2, 5, 2);
    for (int s = 0; s < 2; ++s) {
      double fast = bottleneck_distance(a, b, s);
      double slow = testing::brute_force_bottleneck(a, b, s);
      if (std::isinf(slow)) CHECK(std::isinf(fast));
      else CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
  }
}

TEST_CASE("bottleneck is a pseudometric on random triples") {
  Rng rng(515);
  for (int trial = 0; trial < 60; ++trial) {
    PersistenceDiagram a = testing::random_diagram(rng, 1, 6, 1);
    PersistenceDiagram b = testing::random_diagram(rng, 1, 6, 1);
    PersistenceDiagram c = testing::random_diagram(rng, 1, 6, 1);
    double ab = bottleneck_distance(a, b, 0);
    double ba = bottleneck_distance(b, a, 0);
    double ac = bottleneck_distance(a, c, 0);
    double cb = bottleneck_distance(c, b, 0);
    if (std::isinf(ab) || std::isinf(ba))
      CHECK(std::isinf(ab) == std::isinf(ba));
    else
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(bottleneck_distance(a, a, 0) == 0.0);
    if (std::isfinite(ab) && std::isfinite(ac) && std::isfinite(cb))
      CHECK(ab <= ac + cb + 1e-9);
  }
}

TEST_CASE("pruned candidate search agrees with an unpruned reference") {
  // Mid-size diagrams where exhaustive enumeration is hopeless but the full
  // pairwise candidate set is still cheap: bisect feasibility over every
  // half-persistence and every cross distance, with a fresh matcher.
  Rng rng(737373);
  auto reference = [](const PersistenceDiagram& a, const PersistenceDiagram& b,
                      int degree) {
    auto fa = a.finite_points(degree);
    auto fb = b.finite_points(degree);
    std::vector<double> cand{0.0};
    for (const auto& p : fa) cand.push_back(p.persistence() / 2.0);
    for (const auto& p : fb) cand.push_back(p.persistence() / 2.0);
    for (const auto& p : fa)
      for (const auto& q : fb)
        cand.push_back(std::max(std::abs(p.birth - q.birth),
                                std::abs(p.death - q.death)));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    // greedy-free feasibility via augmenting paths over required points
    auto feasible = [&](double r) {
      auto covers = [&](const std::vector<DiagramPoint>& from,
                        const std::vector<DiagramPoint>& to) {
        std::vector<int> need;
        for (int i = 0; i < (int)from.size(); ++i)
          if (from[i].persistence() / 2.0 > r) need.push_back(i);
        std::vector<int> match_to(to.size(), -1);
        std::vector<char> seen;
        std::function<bool(int)> augment = [&](int u) -> bool {
          for (int v = 0; v < (int)to.size(); ++v) {
            if (seen[v]) continue;
            double d = std::max(std::abs(from[need[u]].birth - to[v].birth),
                                std::abs(from[need[u]].death - to[v].death));
            if (d > r) continue;
            seen[v] = 1;
            if (match_to[v] < 0 || augment(match_to[v])) {
              match_to[v] = u;
              return true;
            }
          }
          return false;
        };
        for (int u = 0; u < (int)need.size(); ++u) {
          seen.assign(to.size(), 0);
          if (!augment(u)) return false;
        }
        return true;
      };
      return covers(fa, fb) && covers(fb, fa);
    };
    std::size_t lo = 0, hi = cand.size() - 1;
    if (feasible(cand[0])) return cand[0];
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (feasible(cand[mid])) hi = mid;
      else lo = mid;
    }
    return cand[hi];
  };
  for (int trial = 0; trial < 12; ++trial) {
    // clustered births/deaths so that many near-ties and shared coordinates occur
    auto gen = [&](int points) {
      PersistenceDiagram d;
      for (int i = 0; i < points; ++i) {
        double birth = std::floor(rng.uniform01() * 8.0) / 8.0;
        double pers = (1 + std::floor(rng.uniform01() * 6.0)) / 8.0;
        d.add({0, birth, birth + pers});
      }
      d.sort();
      return d;
    };
    PersistenceDiagram a = gen(40 + trial);
    PersistenceDiagram b = gen(35 + trial);
    double fast = bottleneck_distance(a, b, 0);
    double slow = reference(a, b, 0);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("matching extraction realizes the distance") {
  Rng rng(626);
  for (int trial = 0; trial < 50; ++trial) {
    PersistenceDiagram a = testing::random_diagram(rng, 1, 6, 1);
    PersistenceDiagram b = testing::random_diagram(rng, 1, 6, 1);
    double d = bottleneck_distance(a, b, 0);
    if (std::isinf(d)) continue;
    Matching m = bottleneck_matching(a, b, 0);
    CHECK(m.cost == doctest::Approx(d));
    double worst = 0.0;
    std::size_t from_count = 0, to_count = 0;
    for (const auto& pair : m.pairs) {
      REQUIRE((pair.from.has_value() || pair.to.has_value()));
      if (pair.from && pair.to) {
        // essential matches essential, finite matches finite
        CHECK(pair.from->essential() == pair.to->essential());
        if (pair.from->essential())
          worst = std::max(worst, std::abs(pair.from->birth - pair.to->birth));
        else
          worst = std::max(worst,
                           std::max(std::abs(pair.from->birth - pair.to->birth),
                                    std::abs(pair.from->death - pair.to->death)));
      } else if (pair.from) {
        CHECK_FALSE(pair.from->essential());
        worst = std::max(worst, pair.from->persistence() / 2.0);
      } else {
        CHECK_FALSE(pair.to->essential());
        worst = std::max(worst, pair.to->persistence() / 2.0);
      }
      from_count += pair.from.has_value();
      to_count += pair.to.has_value();
    }
    CHECK(from_count == a.points_in_degree(0).size());
    CHECK(to_count == b.points_in_degree(0).size());
    CHECK(worst <= d + 1e-12);
  }
}
