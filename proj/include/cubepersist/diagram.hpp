#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace cubepersist {

inline constexpr double kInfiniteDeath = std::numeric_limits<double>::infinity();

struct DiagramPoint {
  int degree = 0;
  double birth = 0.0;
  double death = kInfiniteDeath;

  bool essential() const { return death == kInfiniteDeath; }
  double persistence() const { return death - birth; }
  bool operator==(const DiagramPoint&) const = default;
};

/// Multiset of (birth, death) pairs over all homology degrees.
/// Zero-persistence pairs are dropped at extraction time and must not appear.
class PersistenceDiagram {
 public:
  PersistenceDiagram() = default;
  explicit PersistenceDiagram(std::vector<DiagramPoint> points);

  const std::vector<DiagramPoint>& points() const { return points_; }
  std::vector<DiagramPoint> points_in_degree(int degree) const;
  std::vector<double> essential_births(int degree) const;
  std::vector<DiagramPoint> finite_points(int degree) const;
  int max_degree() const;
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  void add(DiagramPoint p);
  /// Canonical order: (degree, birth, death).
  void sort();

  std::string to_csv() const;
  void write_csv(const std::string& path) const;
  static PersistenceDiagram from_csv_text(const std::string& text);
  static PersistenceDiagram read_csv(const std::string& path);

 private:
  std::vector<DiagramPoint> points_;
};

}  // namespace cubepersist
