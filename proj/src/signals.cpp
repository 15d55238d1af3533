#include "cubepersist/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cubepersist/cubical.hpp"

namespace cubepersist {

namespace {

double sq(double v) { return v * v; }

double disc_sign(int one_based_index) { return (one_based_index % 2 == 0) ? 1.0 : -1.0; }

double eval_disc_bumps(const DiscBumps& s, const double* x) {
  for (int i = 0; i < static_cast<int>(s.discs.size()); ++i) {
    const auto& d = s.discs[i];
    double rho = std::sqrt(sq(x[0] - d.cx) + sq(x[1] - d.cy));
    double sign = disc_sign(i + 1);
    if (rho < d.radius) return sign * (2.0 - std::pow(rho / d.radius, s.alpha));
    if (rho == d.radius) return std::min(sign * 1.0, 0.0);
  }
  return 0.0;
}

double eval_nested_discs(const NestedDiscs& s, const double* x) {
  double rho = std::sqrt(sq(x[0] - s.cx) + sq(x[1] - s.cy));
  int p = static_cast<int>(s.radii.size());
  auto ring_value = [&](int i, double r) {
    // value of region i (1-based; p+1 = outside) at distance r
    if (i == 1) return -std::pow(r / s.radii[0], s.alpha);
    if (i <= p) return disc_sign(i) * std::pow(r / s.radii[i - 1], s.alpha);
    return std::pow(r, s.alpha);
  };
  for (int i = 0; i < p; ++i) {
    if (rho < s.radii[i]) return ring_value(i + 1, rho);
    if (rho == s.radii[i])
      return std::min(ring_value(i + 1, rho), ring_value(i + 2, rho));
  }
  return ring_value(p + 1, rho);
}

double lb_scale(double amplitude, double lipschitz, int dim) {
  return std::min(amplitude, lipschitz) / (2.0 * std::sqrt(static_cast<double>(dim)));
}

double eval_lower_bound_base(const LowerBoundBase& s, const double* x) {
  return lb_scale(s.amplitude, s.lipschitz, s.dim) * std::pow(std::abs(x[0]), s.alpha);
}

double eval_lower_bound_bump(const LowerBoundBump& s, const double* x) {
  double base = lb_scale(s.amplitude, s.lipschitz, s.dim) *
                std::pow(std::abs(x[0]), s.alpha);
  double center = static_cast<double>(s.bump_index) / window_count(s.window);
  double sup = 0.0;
  for (int j = 0; j < s.dim; ++j) sup = std::max(sup, std::abs(x[j] - center));
  double dip = std::pow(s.window, s.alpha) - std::pow(sup, s.alpha);
  if (dip <= 0.0) return base;
  double depth = std::min(s.amplitude, s.lipschitz) / std::sqrt(static_cast<double>(s.dim));
  return base - depth * dip;
}

double eval_cos_sine_disc(const double* x) {
  double trig = std::cos(2.0 * std::numbers::pi * x[0]) *
                std::sin(2.0 * std::numbers::pi * x[0]);
  double r2 = sq(x[0] - 0.5) + sq(x[1] - 0.5);
  if (r2 < 0.125) return trig + 1.0;
  return trig;  // boundary takes the outside limit, the smaller one
}

double eval_one_dim_cos(const double* x) {
  return x[0] * std::cos(8.0 * std::numbers::pi * x[0]);
}

void validate(const SignalSpec& spec) {
  if (const auto* s = std::get_if<DiscBumps>(&spec)) {
    if (s->alpha <= 0.0 || s->alpha > 1.0)
      throw std::invalid_argument("DiscBumps: alpha must be in (0,1]");
    for (std::size_t i = 0; i < s->discs.size(); ++i) {
      const auto& a = s->discs[i];
      if (a.radius <= 0.0) throw std::invalid_argument("DiscBumps: radius must be > 0");
      if (std::min(std::min(a.cx, a.cy), std::min(1.0 - a.cx, 1.0 - a.cy)) - a.radius <=
          0.0)
        throw std::invalid_argument("DiscBumps: disc touches the frame");
      for (std::size_t j = 0; j < i; ++j) {
        const auto& b = s->discs[j];
        if (std::sqrt(sq(a.cx - b.cx) + sq(a.cy - b.cy)) <= a.radius + b.radius)
          throw std::invalid_argument("DiscBumps: discs intersect");
      }
    }
  } else if (const auto* s = std::get_if<NestedDiscs>(&spec)) {
    if (s->alpha <= 0.0 || s->alpha > 1.0)
      throw std::invalid_argument("NestedDiscs: alpha must be in (0,1]");
    if (s->radii.empty()) throw std::invalid_argument("NestedDiscs: no radii");
    for (std::size_t i = 0; i < s->radii.size(); ++i) {
      if (s->radii[i] <= 0.0 || s->radii[i] >= 0.5)
        throw std::invalid_argument("NestedDiscs: radii must lie in (0, 1/2)");
      if (i > 0 && s->radii[i] <= s->radii[i - 1])
        throw std::invalid_argument("NestedDiscs: radii must increase strictly");
    }
  } else if (const auto* s = std::get_if<LowerBoundBump>(&spec)) {
    int count = window_count(s->window);
    if (s->bump_index <= 0 || s->bump_index >= count)
      throw std::invalid_argument("LowerBoundBump: need 0 < m < floor(1/h)");
  }
}

}  // namespace

int window_count(double window) {
  if (!(window > 0.0) || !(window < 1.0))
    throw std::invalid_argument("window must be in (0,1)");
  double inv = 1.0 / window;
  double snapped = std::floor(inv + 1e-9);
  return static_cast<int>(snapped);
}

int dimension(const SignalSpec& spec) {
  struct {
    int operator()(const DiscBumps&) const { return 2; }
    int operator()(const NestedDiscs&) const { return 2; }
    int operator()(const LowerBoundBase& s) const { return s.dim; }
    int operator()(const LowerBoundBump& s) const { return s.dim; }
    int operator()(const CosSineDisc&) const { return 2; }
    int operator()(const OneDimCos&) const { return 1; }
  } v;
  return std::visit(v, spec);
}

double eval_exact(const SignalSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != dimension(spec))
    throw std::invalid_argument("eval_exact: dimension mismatch");
  const double* p = x.data();
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiscBumps>) return eval_disc_bumps(s, p);
        else if constexpr (std::is_same_v<T, NestedDiscs>) return eval_nested_discs(s, p);
        else if constexpr (std::is_same_v<T, LowerBoundBase>)
          return eval_lower_bound_base(s, p);
        else if constexpr (std::is_same_v<T, LowerBoundBump>)
          return eval_lower_bound_bump(s, p);
        else if constexpr (std::is_same_v<T, CosSineDisc>) return eval_cos_sine_disc(p);
        else return eval_one_dim_cos(p);
      },
      spec);
}

double eval_exact(const SignalSpec& spec, const Point& x, int dim) {
  return eval_exact(spec, std::span<const double>(x.data(), dim));
}

ScalarField sample_on_grid(const SignalSpec& spec, const GridSpec& grid) {
  validate(spec);
  if (grid.dim != dimension(spec))
    throw std::invalid_argument("sample_on_grid: dimension mismatch");
  std::vector<double> values(grid.sample_count());
  const std::int64_t n = grid.sample_count();
  for (std::int64_t flat = 0; flat < n; ++flat) {
    Point x = index_to_point(grid, grid.multi_index(flat));
    values[flat] = eval_exact(spec, std::span<const double>(x.data(), grid.dim));
  }
  return ScalarField(grid, std::move(values));
}

ScalarField add_noise(const ScalarField& field, const NoiseModel& noise, Rng& rng) {
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma))
    throw std::invalid_argument("NoiseModel: sigma must be finite and >= 0");
  std::vector<double> values = field.values();
  for (double& v : values) v += noise.sigma * rng.normal();
  return ScalarField(field.grid(), std::move(values));
}

PersistenceDiagram true_diagram_closed_form(const SignalSpec& spec) {
  if (std::holds_alternative<LowerBoundBase>(spec)) {
    PersistenceDiagram dgm;
    dgm.add({0, 0.0, kInfiniteDeath});
    return dgm;
  }
  const auto* s = std::get_if<LowerBoundBump>(&spec);
  if (!s)
    throw std::invalid_argument(
        "true_diagram_closed_form: only the lower-bound families have closed forms");
  validate(spec);
  double c = lb_scale(s->amplitude, s->lipschitz, s->dim);
  double depth = 2.0 * c;  // min(M,L)/sqrt(d)
  double h = s->window;
  double alpha = s->alpha;
  int count = window_count(h);
  double center = static_cast<double>(s->bump_index) / count;
  double bump_min = c * std::pow(center, alpha) - depth * std::pow(h, alpha);

  // Merge level of the bump basin with the basin flowing from x_1 = 0: the
  // max of f along the first axis between them. Along that segment
  // g(t) = c (center - t)^alpha + depth t^alpha - depth h^alpha for t in
  // [0, h] (t the sup-norm distance to the bump center) with the base value
  // c (center - h)^alpha on the remaining stretch. g has a single critical
  // point at t = center K/(1+K), K = 2^{1/(1-alpha)}; for bumps at least two
  // spacings from the origin it lies past the box face, so the face value is
  // the saddle. alpha = 1 is the K -> infinity limit.
  double saddle;
  double t_star = alpha < 1.0
                      ? center / (1.0 + std::pow(2.0, -1.0 / (1.0 - alpha)))
                      : center;
  if (t_star >= h) {
    saddle = c * std::pow(center - h, alpha);
  } else {
    saddle = c * std::pow(center - t_star, alpha) + depth * std::pow(t_star, alpha) -
             depth * std::pow(h, alpha);
  }

  PersistenceDiagram dgm;
  if (bump_min >= 0.0) {
    dgm.add({0, 0.0, kInfiniteDeath});
    if (bump_min < saddle) dgm.add({0, bump_min, saddle});
  } else {
    // Bump deeper than the base minimum: it carries the essential class and
    // the basin at the origin dies at the saddle.
    dgm.add({0, bump_min, kInfiniteDeath});
    if (saddle > 0.0) dgm.add({0, 0.0, saddle});
  }
  dgm.sort();
  return dgm;
}

PersistenceDiagram true_diagram_oracle(const SignalSpec& spec, int oracle_n) {
  if (oracle_n < 2) throw std::invalid_argument("true_diagram_oracle: oracle_n too small");
  GridSpec grid(dimension(spec), oracle_n);
  ScalarField field = sample_on_grid(spec, grid);
  return build_filtration(field).persistence();
}

DiscBumps make_random_disc_bumps(int k, double alpha, Rng& rng, double margin) {
  DiscBumps out;
  out.alpha = alpha;
  const double r_lo = 0.06, r_hi = 0.13;
  for (int attempt = 0; attempt < 100000 && static_cast<int>(out.discs.size()) < k;
       ++attempt) {
    DiscBumps::Disc d;
    d.radius = r_lo + (r_hi - r_lo) * rng.uniform01();
    d.cx = 0.5 + (rng.uniform01() - 0.5) * (1.0 - 2.0 * (d.radius + margin) - 1e-6);
    d.cy = 0.5 + (rng.uniform01() - 0.5) * (1.0 - 2.0 * (d.radius + margin) - 1e-6);
    bool ok = true;
    for (const auto& e : out.discs)
      if (std::sqrt(sq(d.cx - e.cx) + sq(d.cy - e.cy)) < d.radius + e.radius + margin)
        ok = false;
    if (ok) out.discs.push_back(d);
  }
  if (static_cast<int>(out.discs.size()) != k)
    throw std::runtime_error("make_random_disc_bumps: could not place discs");
  return out;
}

DiscBumps shipped_disc_bumps(double alpha) {
  Rng rng(SeedStream(1729).derived({8}).leaf_seed());
  return make_random_disc_bumps(8, alpha, rng, 0.02);
}

NestedDiscs default_nested_discs(double alpha) {
  NestedDiscs s;
  s.alpha = alpha;
  s.radii = {1.0 / 12.0, 1.0 / 6.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.2};
  return s;
}

void set_alpha(SignalSpec& spec, double alpha) {
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (!std::is_same_v<T, CosSineDisc> && !std::is_same_v<T, OneDimCos>)
          s.alpha = alpha;
      },
      spec);
}

double get_alpha(const SignalSpec& spec) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CosSineDisc> || std::is_same_v<T, OneDimCos>)
          return 1.0;
        else
          return s.alpha;
      },
      spec);
}

nlohmann::json signal_to_json(const SignalSpec& spec) {
  nlohmann::json j;
  if (const auto* s = std::get_if<DiscBumps>(&spec)) {
    j["variant"] = "disc_bumps";
    j["alpha"] = s->alpha;
    nlohmann::json discs = nlohmann::json::array();
    for (const auto& d : s->discs) discs.push_back({{"cx", d.cx}, {"cy", d.cy}, {"r", d.radius}});
    j["discs"] = discs;
  } else if (const auto* s = std::get_if<NestedDiscs>(&spec)) {
    j["variant"] = "nested_discs";
    j["alpha"] = s->alpha;
    j["radii"] = s->radii;
    j["center"] = {s->cx, s->cy};
  } else if (const auto* s = std::get_if<LowerBoundBase>(&spec)) {
    j["variant"] = "lower_bound_base";
    j["amplitude"] = s->amplitude;
    j["lipschitz"] = s->lipschitz;
    j["alpha"] = s->alpha;
    j["dim"] = s->dim;
  } else if (const auto* s = std::get_if<LowerBoundBump>(&spec)) {
    j["variant"] = "lower_bound_bump";
    j["amplitude"] = s->amplitude;
    j["lipschitz"] = s->lipschitz;
    j["alpha"] = s->alpha;
    j["dim"] = s->dim;
    j["window"] = s->window;
    j["m"] = s->bump_index;
  } else if (std::holds_alternative<CosSineDisc>(spec)) {
    j["variant"] = "cos_sine_disc";
  } else {
    j["variant"] = "one_dim_cos";
  }
  return j;
}

SignalSpec signal_from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "disc_bumps") {
    DiscBumps s;
    s.alpha = j.value("alpha", 1.0);
    if (j.contains("discs")) {
      for (const auto& d : j.at("discs"))
        s.discs.push_back({d.at("cx").get<double>(), d.at("cy").get<double>(),
                           d.at("r").get<double>()});
    } else {
      s = shipped_disc_bumps(s.alpha);
    }
    validate(SignalSpec(s));
    return s;
  }
  if (variant == "disc_bumps_random") {
    Rng rng(SeedStream(j.value("seed", std::uint64_t{1729})).derived({8}).leaf_seed());
    return make_random_disc_bumps(j.value("k", 8), j.value("alpha", 1.0), rng);
  }
  if (variant == "nested_discs") {
    NestedDiscs s = default_nested_discs(j.value("alpha", 1.0));
    if (j.contains("radii")) s.radii = j.at("radii").get<std::vector<double>>();
    if (j.contains("center")) {
      s.cx = j.at("center").at(0).get<double>();
      s.cy = j.at("center").at(1).get<double>();
    }
    validate(SignalSpec(s));
    return s;
  }
  if (variant == "lower_bound_base") {
    LowerBoundBase s;
    s.amplitude = j.value("amplitude", 1.0);
    s.lipschitz = j.value("lipschitz", 1.0);
    s.alpha = j.value("alpha", 1.0);
    s.dim = j.value("dim", 1);
    return s;
  }
  if (variant == "lower_bound_bump") {
    LowerBoundBump s;
    s.amplitude = j.value("amplitude", 1.0);
    s.lipschitz = j.value("lipschitz", 1.0);
    s.alpha = j.value("alpha", 1.0);
    s.dim = j.value("dim", 1);
    s.window = j.at("window").get<double>();
    s.bump_index = j.at("m").get<int>();
    validate(SignalSpec(s));
    return s;
  }
  if (variant == "cos_sine_disc") return CosSineDisc{};
  if (variant == "one_dim_cos") return OneDimCos{};
  throw std::invalid_argument("unknown signal variant: " + variant);
}

}  // namespace cubepersist
