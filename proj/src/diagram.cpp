#include "cubepersist/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cubepersist {

namespace {

std::string format_value(double v) {
  if (v == kInfiniteDeath) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_value(const std::string& tok) {
  if (tok == "inf" || tok == "+inf" || tok == "Inf") return kInfiniteDeath;
  std::size_t pos = 0;
  double v = std::stod(tok, &pos);
  if (pos != tok.size()) throw std::invalid_argument("diagram csv: bad number '" + tok + "'");
  return v;
}

}  // namespace

PersistenceDiagram::PersistenceDiagram(std::vector<DiagramPoint> points)
    : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!(p.birth < p.death))
      throw std::invalid_argument("PersistenceDiagram: birth must be < death");
    if (p.degree < 0) throw std::invalid_argument("PersistenceDiagram: negative degree");
  }
  sort();
}

void PersistenceDiagram::add(DiagramPoint p) {
  if (!(p.birth < p.death))
    throw std::invalid_argument("PersistenceDiagram: birth must be < death");
  points_.push_back(p);
}

void PersistenceDiagram::sort() {
  std::sort(points_.begin(), points_.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
}

std::vector<DiagramPoint> PersistenceDiagram::points_in_degree(int degree) const {
  std::vector<DiagramPoint> out;
  for (const auto& p : points_)
    if (p.degree == degree) out.push_back(p);
  return out;
}

std::vector<double> PersistenceDiagram::essential_births(int degree) const {
  std::vector<double> out;
  for (const auto& p : points_)
    if (p.degree == degree && p.essential()) out.push_back(p.birth);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<DiagramPoint> PersistenceDiagram::finite_points(int degree) const {
  std::vector<DiagramPoint> out;
  for (const auto& p : points_)
    if (p.degree == degree && !p.essential()) out.push_back(p);
  return out;
}

int PersistenceDiagram::max_degree() const {
  int d = -1;
  for (const auto& p : points_) d = std::max(d, p.degree);
  return d;
}

std::string PersistenceDiagram::to_csv() const {
  std::ostringstream os;
  os << "degree,birth,death\n";
  for (const auto& p : points_)
    os << p.degree << ',' << format_value(p.birth) << ',' << format_value(p.death) << '\n';
  return os.str();
}

void PersistenceDiagram::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << to_csv();
}

PersistenceDiagram PersistenceDiagram::from_csv_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("diagram csv: empty");
  // tolerate \r\n
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "degree,birth,death")
    throw std::invalid_argument("diagram csv: bad header '" + line + "'");
  PersistenceDiagram dgm;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string deg, birth, death;
    if (!std::getline(ls, deg, ',') || !std::getline(ls, birth, ',') ||
        !std::getline(ls, death, ','))
      throw std::invalid_argument("diagram csv: bad row '" + line + "'");
    dgm.add({std::stoi(deg), parse_value(birth), parse_value(death)});
  }
  dgm.sort();
  return dgm;
}

PersistenceDiagram PersistenceDiagram::read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_csv_text(buf.str());
}

}  // namespace cubepersist
