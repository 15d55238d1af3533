#pragma once

#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cubepersist/diagram.hpp"
#include "cubepersist/grid.hpp"
#include "cubepersist/rng.hpp"

namespace cubepersist {

/// Disjoint discs in (0,1)^2 carrying alternating-sign bumps of exponent
/// alpha; the background is 0. Disc i (1-based) has sign (-1)^i, so the
/// first disc is negative. Values jump at the disc boundaries; boundary
/// points take the lower one-sided limit.
struct DiscBumps {
  struct Disc {
    double cx, cy, radius;
  };
  std::vector<Disc> discs;
  double alpha = 1.0;
};

/// Nested discs around a common center with alternating-sign radial powers;
/// outside the largest disc the value is the distance to the center raised
/// to alpha.
struct NestedDiscs {
  std::vector<double> radii;  // strictly increasing, < 1/2
  double alpha = 1.0;
  double cx = 0.5, cy = 0.5;
};

/// min(M,L)/(2 sqrt(d)) * |x_1|^alpha.
struct LowerBoundBase {
  double amplitude = 1.0;  // M
  double lipschitz = 1.0;  // L
  double alpha = 1.0;
  int dim = 1;
};

/// LowerBoundBase minus a sup-norm cone bump of radius `window` centered at
/// (m/floor(1/window)) * (1,...,1).
struct LowerBoundBump {
  double amplitude = 1.0;
  double lipschitz = 1.0;
  double alpha = 1.0;
  int dim = 1;
  double window = 0.1;  // h
  int bump_index = 1;   // m, 0 < m < floor(1/h)
};

/// cos(2 pi x) sin(2 pi x) + indicator of the disc (x-1/2)^2+(y-1/2)^2 < 1/8.
struct CosSineDisc {};

/// x * cos(8 pi x) on [0,1].
struct OneDimCos {};

using SignalSpec =
    std::variant<DiscBumps, NestedDiscs, LowerBoundBase, LowerBoundBump, CosSineDisc,
                 OneDimCos>;

struct NoiseModel {
  double sigma = 0.1;
};

int dimension(const SignalSpec& spec);

/// Exact value at a point; piece boundaries return the lower one-sided limit
/// (the liminf over approaching interior points).
double eval_exact(const SignalSpec& spec, std::span<const double> x);
double eval_exact(const SignalSpec& spec, const Point& x, int dim);

ScalarField sample_on_grid(const SignalSpec& spec, const GridSpec& grid);
ScalarField add_noise(const ScalarField& field, const NoiseModel& noise, Rng& rng);

/// floor(1/h), snapped to the nearest integer when 1/h is within 1e-9 of it
/// so that h = 0.1 style inputs give 10 rather than 9.
int window_count(double window);

/// True diagram where a closed form exists (the lower-bound families only).
/// Throws std::invalid_argument for other variants.
PersistenceDiagram true_diagram_closed_form(const SignalSpec& spec);

/// Ground truth up to discretization: sample noiselessly at oracle_n per axis
/// and run cubical persistence.
PersistenceDiagram true_diagram_oracle(const SignalSpec& spec, int oracle_n);

/// Rejection-sample a DiscBumps layout with certified margins: pairwise gaps
/// and the gap to the frame are at least `margin`.
DiscBumps make_random_disc_bumps(int k, double alpha, Rng& rng, double margin = 0.02);

/// The fixed seed-derived 8-disc layout used by the shipped experiment
/// configurations.
DiscBumps shipped_disc_bumps(double alpha);

/// Paper defaults for the nested-disc family: radii 1/12, 1/6, 1/4, 1/3,
/// 1/2.2 around (1/2, 1/2).
NestedDiscs default_nested_discs(double alpha);

nlohmann::json signal_to_json(const SignalSpec& spec);
SignalSpec signal_from_json(const nlohmann::json& j);
void set_alpha(SignalSpec& spec, double alpha);
double get_alpha(const SignalSpec& spec);

}  // namespace cubepersist
