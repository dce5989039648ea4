#pragma once

#include <Eigen/Dense>

#include "udw/rates.hpp"

namespace udw {

// Conversion from the stored pi*alpha*gamma columns to per-taubar
// master-equation rates: a_i = k_rate_scale * g_i. The value fixes the time
// normalization of the dissipator against the rate tables; it is what places
// the loss of complete positivity at gap values just above 1.5.
inline constexpr double k_rate_scale = 0.5;

// Bloch vector; the computational basis state |1> sits at z = -1.
struct QubitState {
  double x = 0.0, y = 0.0, z = 0.0;

  Eigen::Matrix2cd density() const;
  static QubitState from_density(const Eigen::Matrix2cd& rho);
};

struct BlochRhsParams {
  bool include_hamiltonian = false;  // free precession about z at rate wbar
  double wbar = 0.0;
};

// Time-local generator in Bloch form, for rates given in pi*alpha*gamma
// units (converted internally):
//   dz = (a1 - a2)/2 - z (a1 + a2)/2
//   dx = -x ((a1 + a2)/4 + a3),  dy likewise (plus optional rotation).
void dissipator_rhs(const RateTriple& g, const QubitState& s, double out[3],
                    const BlochRhsParams& params = {});

// Affine map on (1, x, y, z); the first row is identically (1, 0, 0, 0).
struct TransferMap {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

  QubitState apply(const QubitState& s) const;
};

class StateTrajectory {
 public:
  StateTrajectory(OdeSolution sol) : sol_(std::move(sol)) {}
  QubitState eval(double taubar) const;
  double t0() const { return sol_.t0(); }
  double t1() const { return sol_.t1(); }

 private:
  OdeSolution sol_;
};

StateTrajectory evolve_state(const QubitState& rho0, const RateTable& table,
                             double t0, double t1, const OdeSpec& spec = {},
                             const BlochRhsParams& params = {});

// Propagator from the table's first grid point to taubar, integrating the
// affine generator with the four canonical initial conditions (the columns
// of the identity map).
TransferMap propagator(const RateTable& table, double taubar,
                       const OdeSpec& spec = {});

// Propagators at every grid point from one dense integration pass.
std::vector<TransferMap> propagator_curve(const RateTable& table,
                                          const std::vector<double>& grid,
                                          const OdeSpec& spec = {});

// Phi_t composed with the inverse of Phi_s. Throws NumericsError when Phi_s
// is too ill-conditioned to invert meaningfully (the two-parameter family of
// maps stops being bijective in that regime).
TransferMap intermediate_map(const TransferMap& phi_s, const TransferMap& phi_t,
                             double cond_limit = 1e10);
TransferMap intermediate_map(const RateTable& table, double s, double t,
                             const OdeSpec& spec = {}, double cond_limit = 1e10);

// Choi matrix of the (complex-linearly extended) qubit map: the map applied
// to the computational operator basis tensored with the ancilla copy. The
// identity channel gives eigenvalues {2, 0, 0, 0}.
Eigen::Matrix4cd choi(const TransferMap& map);

struct CpVerdict {
  bool cp;
  double min_eigenvalue;
};

CpVerdict is_cp(const Eigen::Matrix4cd& choi_matrix, double tol = 1e-10);

}  // namespace udw
