#include "udw/worldline.hpp"

#include <cmath>

namespace udw {

std::array<double, 4> Worldline::position(double taubar) const {
  switch (kind) {
    case PathKind::inertial:
      return {taubar, 1.0, 0.0, 0.0};
    case PathKind::eternal_acceleration:
      return {std::sinh(taubar), std::cosh(taubar), 0.0, 0.0};
    case PathKind::switch_on:
      if (taubar <= 0.0) return {taubar, 1.0, 0.0, 0.0};
      return {std::sinh(taubar), std::cosh(taubar), 0.0, 0.0};
    case PathKind::reversed_stop:
      if (taubar <= 0.0) return {std::sinh(taubar), std::cosh(taubar), 0.0, 0.0};
      return {taubar, 1.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0, 0.0};
}

std::array<double, 4> Worldline::velocity(double taubar) const {
  switch (kind) {
    case PathKind::inertial:
      return {1.0, 0.0, 0.0, 0.0};
    case PathKind::eternal_acceleration:
      return {std::cosh(taubar), std::sinh(taubar), 0.0, 0.0};
    case PathKind::switch_on:
      if (taubar <= 0.0) return {1.0, 0.0, 0.0, 0.0};
      return {std::cosh(taubar), std::sinh(taubar), 0.0, 0.0};
    case PathKind::reversed_stop:
      if (taubar <= 0.0) return {std::cosh(taubar), std::sinh(taubar), 0.0, 0.0};
      return {1.0, 0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0, 0.0};
}

double dx2_less(double sbar) {
  const double sh = std::sinh(0.5 * sbar);
  return -4.0 * sh * sh;
}

// (sinh(taubar) + delta)^2 - (cosh(taubar) - 1)^2 with delta = sbar - taubar,
// expanded so no large terms cancel: the interval stays O(delta^2) near the
// coincidence limit instead of being a difference of O(e^taubar) quantities.
double dx2_greater(double taubar, double sbar) {
  const double delta = sbar - taubar;
  const double sh = std::sinh(0.5 * taubar);
  return -(4.0 * sh * sh + delta * (2.0 * std::sinh(taubar) + delta));
}

double dx2_reversed_less(double sbar) { return -sbar * sbar; }

double dx2_reversed_greater(double taubar, double sbar) {
  const double xi = sbar - taubar;
  const double sh = std::sinh(0.5 * xi);
  return -(taubar * taubar + 2.0 * taubar * std::sinh(xi) + 4.0 * sh * sh);
}

}  // namespace udw
