#pragma once

#include <vector>

#include "udw/numerics.hpp"
#include "udw/parallel.hpp"
#include "udw/worldline.hpp"

namespace udw {

// Stationary (eternally accelerated) response density wbar/(e^{2 pi wbar}-1),
// continued through wbar = 0 where it equals 1/(2 pi).
double planck_term(double wbar);

// Integrand of the finite-time correction for the switch-on path: difference
// of inverse squared intervals between the actual trajectory and its eternal
// continuation, at separation sbar >= taubar. Nonpositive for taubar >= 0;
// evaluated in a fused form near sbar = taubar where the naive difference
// cancels.
double bracket_forward(double taubar, double sbar);

// Reversed profile analogue: inverse interval to the accelerated past plus
// the inverse of the (timelike) static-epoch interval. Both terms carry the
// same sign, so no fused form is needed.
double bracket_reversed(double taubar, double sbar);

// Response-function derivative, 2 pi alpha Fdot, for the switch-on path.
// taubar <= 0 gives the static-detector value -wbar * theta(-wbar).
double fdot(double taubar, double wbar, const QuadratureSpec& spec = {});

// Finite-time correction fdot - planck_term for taubar > 0; even in wbar.
double delta_fdot(double taubar, double wbar, const QuadratureSpec& spec = {});

// Same quantity for the reversed profile: static baseline plus the memory of
// the accelerated past. taubar <= 0 gives the stationary value.
double fdot_reversed(double taubar, double wbar, const QuadratureSpec& spec = {});

// Closed form of the dephasing entry fdot(taubar, 0) on the switch-on path.
double g3_closed_form(double taubar);

struct RateParams {
  PathKind kind = PathKind::switch_on;
  double wbar = 1.0;
  double taubar_max = 15.0;
  int n_samples = 320;
  QuadratureSpec quad;
  Exec exec = Exec::parallel;
};

// One row of master-equation rates in pi*alpha*gamma units:
//   g1 = 2 fdot(taubar, -wbar), g2 = 2 fdot(taubar, +wbar), g3 = fdot(taubar, 0).
struct RateTriple {
  double g1, g2, g3;
};

// Sampled rate columns with spline interpolation between rows. The grid for
// the switch-on path is {0} + geometric(1e-3 .. 0.5) + uniform(0.5 ..
// taubar_max); the boundary row holds the static-detector values. The
// reversed grid drops the zero row (its rates diverge logarithmically there).
class RateTable {
 public:
  RateTable(RateParams params, std::vector<double> grid, std::vector<double> g1,
            std::vector<double> g2, std::vector<double> g3);

  const RateParams& params() const { return params_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& col_g1() const { return g1_; }
  const std::vector<double>& col_g2() const { return g2_; }
  const std::vector<double>& col_g3() const { return g3_; }

  RateTriple triple(double taubar) const;  // spline, clamped to the grid span
  RateTriple row(std::size_t i) const { return {g1_[i], g2_[i], g3_[i]}; }

 private:
  RateParams params_;
  std::vector<double> grid_, g1_, g2_, g3_;
  CubicSpline s1_, s2_, s3_;
};

std::vector<double> rate_grid(const RateParams& params);
RateTable build_rate_table(const RateParams& params);

// Direct route to the same quantity through the regulated two-point function
// of the field, for cross-checking fdot: the pole prescription displaces the
// trajectory by i*eps times the local velocity, and the exact value is the
// eps -> 0 extrapolation.
struct WightmanSpec {
  std::vector<double> epsilons = {1e-2, 5e-3, 2.5e-3};
  double head_pad = 1.0;  // plain quadrature out to max(taubar, 0) + head_pad
  QuadratureSpec quad;
};

double fdot_wightman(const Worldline& path, double taubar, double wbar,
                     double eps, const WightmanSpec& spec = {});
double fdot_wightman_extrapolated(const Worldline& path, double taubar,
                                  double wbar, const WightmanSpec& spec = {});

}  // namespace udw
