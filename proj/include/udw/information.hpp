#pragma once

#include <cstdint>

#include "udw/positivity.hpp"

namespace udw {

struct StatePair {
  QubitState rho1, rho2;
  double p1 = 0.5, p2 = 0.5;
};

// Half trace norm of the difference. For qubits this is half the Euclidean
// Bloch distance.
double trace_distance(const QubitState& a, const QubitState& b);
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// d/dtaubar of the trace distance along two evolved trajectories, by a
// fourth-order centered stencil of width h. Positive values signal
// information flowing back to the detector.
double info_flow(const StateTrajectory& t1, const StateTrajectory& t2,
                 double taubar, double h = 1e-3);

// Spline view of the closed-form channel: x,y scale by e^{-Lambda}, z maps to
// e^{-Gamma} z + zeta. Built once from the curves, evaluated anywhere on the
// grid span.
class ChannelCurves {
 public:
  explicit ChannelCurves(const PositivityCurves& curves);
  struct At {
    double damp_xy, damp_z, zeta;
  };
  At at(double taubar) const;
  double t0() const { return s_gamma_.x_front(); }
  double t1() const { return s_gamma_.x_back(); }

 private:
  CubicSpline s_gamma_, s_lambda_, s_zeta_;
};

// Inputs for the ancilla-assisted distinguishability probes, on
// C^2 (x) C^ancilla_dim with system-major indexing.
struct ExtendedPair {
  Eigen::MatrixXcd rho1, rho2;
  double p1 = 0.5, p2 = 0.5;
  int ancilla_dim = 2;
};

enum class ExtendedInput {
  product,        // rho_i (x) |0><0|
  max_entangled,  // orthogonal maximally entangled pair on levels {0,1}
  spare_level     // Phi+ on levels {0,1} vs a pole state parked on level 2
};

// `variant` selects among the deterministic members of each family (the two
// Bell pairs, or which pole sits on the spare level).
ExtendedPair extend_pair(const StatePair& pair, int ancilla_dim,
                         ExtendedInput kind, int variant = 0);

// Deterministic witnesses first, then seeded random orthogonal pure pairs.
// For ancilla_dim = 3 the leading entries are the spare-level pairs; random
// sampling alone essentially never finds the backflow-carrying direction.
std::vector<ExtendedPair> sampled_extended_pairs(int ancilla_dim, int n_pairs,
                                                 std::uint64_t seed);

// Helstrom bias || p1 rho1 - p2 rho2 ||_1 after the channel acts on the
// system factor only.
double helstrom_norm(const ExtendedPair& pair, const ChannelCurves& channel,
                     double taubar);
double helstrom_norm(const StatePair& pair, const RateTable& table,
                     double taubar, int ancilla_dim, ExtendedInput kind);

std::vector<double> helstrom_curve(const ExtendedPair& pair,
                                   const ChannelCurves& channel,
                                   const std::vector<double>& grid);

// Trace-distance backflow measure: positive variation of D(t) over the grid,
// maximized over a deterministic antipodal sweep plus seeded random pairs.
struct BlpResult {
  double measure = 0.0;
  StatePair witness;
  int n_pairs = 0;
};
BlpResult blp_sample(const RateTable& table, int n_pairs, std::uint64_t seed);

struct DivisibilityInterval {
  double t0, t1;
  double min_rate;  // most negative of (g1, g2, g3) sampled on the interval
  double choi_min;  // smallest Choi eigenvalue of the intermediate map
  bool cp;
};

struct DivisibilityReport {
  std::vector<DivisibilityInterval> intervals;
  int n_noncp = 0;
  double first_noncp_taubar = -1.0;
};

DivisibilityReport divisibility_report(const RateTable& table,
                                       const std::vector<double>& grid,
                                       const OdeSpec& spec = {},
                                       double cp_tol = 1e-8);

}  // namespace udw
