#pragma once

#include <array>

namespace udw {

// Trajectory families for a pointlike detector in 1+1 Minkowski (y = z = 0).
// Everything is expressed in acceleration units: taubar = a*tau, coordinates
// are a*t and a*x. `alpha` = 1/a carries the physical scale for callers that
// want dimensionful output; it never enters the geometry here.
enum class PathKind {
  inertial,              // static at x = 1
  eternal_acceleration,  // the full hyperbola x^2 - t^2 = 1
  switch_on,             // static for taubar <= 0, hyperbolic after
  reversed_stop          // hyperbolic past, static for taubar > 0
};

struct Worldline {
  PathKind kind = PathKind::switch_on;
  double alpha = 1.0;

  std::array<double, 4> position(double taubar) const;  // (t, x, y, z)
  std::array<double, 4> velocity(double taubar) const;  // d(position)/dtaubar
};

// Squared interval (x - x')^2 - (t - t')^2 between the detector point at
// proper time taubar and the earlier point at taubar - sbar, in forms that
// stay accurate when the naive difference of hyperbolic functions cancels.
// Negative values mean timelike separation.
//
// Switch-on path, taubar > 0:
//   sbar <= taubar: both points accelerated, depends on sbar only.
//   sbar >= taubar: earlier point is on the static branch.
double dx2_less(double sbar);
double dx2_greater(double taubar, double sbar);

// Reversed profile (acceleration ends at taubar = 0), taubar > 0:
//   sbar <= taubar: both points static, interval -sbar^2.
//   sbar >= taubar: earlier point is on the hyperbola.
double dx2_reversed_less(double sbar);
double dx2_reversed_greater(double taubar, double sbar);

}  // namespace udw
