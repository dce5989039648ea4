#pragma once

#include "udw/dynamics.hpp"

namespace udw {

// Closed-form evolution data on the table grid. With per-taubar rates a_i,
//   Gamma  = Int (a1 + a2)/2            (population relaxation exponent)
//   Lambda = Int ((a1 + a2)/4 + a3)     (coherence decay exponent)
//   G      = Int e^{Gamma} a2 / 2
// and the populations of |1> from the two corner initial states are
//   P0 = e^{-Gamma} G        (ground start)
//   P1 = e^{-Gamma} (G + 1)  (excited start).
// zeta = 1 - P0 - P1 is the affine shift of the z coordinate. P0 < 0 is
// exactly the loss of complete positivity of the time-evolution map.
struct PositivityCurves {
  std::vector<double> grid;
  std::vector<double> Gamma, Lambda, G;
  std::vector<double> P0, P1, zeta;
  double min_P0 = 0.0, argmin_taubar = 0.0, max_P1 = 1.0;
};

PositivityCurves population_curves(const RateTable& table);

// The same populations through the scalar rate equation
// P' = -P Gamma' + a2/2, for cross-checking the closed form.
struct OdePopulations {
  std::vector<double> P0, P1;  // on the table grid
};
OdePopulations population_curves_ode(const RateTable& table,
                                     const OdeSpec& spec = {});

struct CpReport {
  bool cp_satisfied;
  double min_P0, argmin_taubar, max_P1, tol;
};
CpReport cp_check(const PositivityCurves& curves, double tol = 1e-8);

struct ScanOptions {
  double taubar_max = 15.0;
  int n_samples = 320;
  double resolution = 0.01;     // width of the final bracket in wbar
  double violation_tol = 1e-6;  // CP counts as violated when min P0 < -this
  QuadratureSpec quad;
  Exec exec = Exec::parallel;
};

struct ThresholdScan {
  std::vector<double> wbar_grid;  // every gap value evaluated, in order
  std::vector<double> witness;    // min P0 (cp) or min gamma2 (gamma2) there
  double threshold, bracket_lo, bracket_hi;
  double min_witness, argmin_taubar;  // at bracket_hi
  double tolerance;
};

// Locates the gap value where min P0 first drops below -violation_tol.
// Throws std::invalid_argument on a degenerate range and NumericsError when
// the range contains no onset.
ThresholdScan cp_threshold_scan(double wbar_lo, double wbar_hi,
                                const ScanOptions& opts = {});

// Locates the sign change of min_{taubar > 0} g2(taubar; wbar).
ThresholdScan gamma2_threshold_scan(double wbar_lo, double wbar_hi,
                                    const ScanOptions& opts = {});

struct ReversedCheck {
  std::vector<double> probes, P0_at_probes;
  bool all_negative;
};

// P0 for the reversed profile at the probe times. The cumulative integrals
// start at the grid floor 1e-3; the true P0 diverges to -infinity as the
// start approaches the stop, so magnitudes are floor-dependent but signs are
// not.
ReversedCheck reversed_path_check(double wbar,
                                  std::vector<double> probes = {0.01, 0.1, 1.0},
                                  const ScanOptions& opts = {});

}  // namespace udw
