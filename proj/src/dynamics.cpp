#include "udw/dynamics.hpp"

#include <cmath>

namespace udw {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

Eigen::Matrix2cd QubitState::density() const {
  Eigen::Matrix2cd rho;
  rho << 0.5 * (1.0 + z), 0.5 * (x - kI * y), 0.5 * (x + kI * y),
      0.5 * (1.0 - z);
  return rho;
}

QubitState QubitState::from_density(const Eigen::Matrix2cd& rho) {
  QubitState s;
  s.x = 2.0 * rho(0, 1).real();
  s.y = -2.0 * rho(0, 1).imag();
  s.z = (rho(0, 0) - rho(1, 1)).real();
  return s;
}

void dissipator_rhs(const RateTriple& g, const QubitState& s, double out[3],
                    const BlochRhsParams& params) {
  const double a1 = k_rate_scale * g.g1;
  const double a2 = k_rate_scale * g.g2;
  const double a3 = k_rate_scale * g.g3;
  const double transverse = 0.25 * (a1 + a2) + a3;
  out[0] = -transverse * s.x;
  out[1] = -transverse * s.y;
  out[2] = 0.5 * (a1 - a2) - 0.5 * (a1 + a2) * s.z;
  if (params.include_hamiltonian) {
    out[0] -= params.wbar * s.y;
    out[1] += params.wbar * s.x;
  }
}

QubitState TransferMap::apply(const QubitState& s) const {
  const Eigen::Vector4d v = m * Eigen::Vector4d(1.0, s.x, s.y, s.z);
  return {v(1), v(2), v(3)};
}

namespace {

// Right-hand side of M' = A(taubar) M for the 4x4 affine representation,
// flattened row-major. Row zero of A vanishes, so the (1,0,0,0) row of M is
// preserved exactly.
OdeRhs transfer_rhs(const RateTable& table, const BlochRhsParams& params) {
  return [&table, params](double t, const std::vector<double>& m,
                          std::vector<double>& dm) {
    const RateTriple g = table.triple(t);
    const double a1 = k_rate_scale * g.g1;
    const double a2 = k_rate_scale * g.g2;
    const double a3 = k_rate_scale * g.g3;
    const double transverse = 0.25 * (a1 + a2) + a3;
    const double gain = 0.5 * (a1 - a2);
    const double loss = 0.5 * (a1 + a2);
    const double w = params.include_hamiltonian ? params.wbar : 0.0;
    for (int col = 0; col < 4; ++col) {
      const double m0 = m[0 * 4 + col];
      const double mx = m[1 * 4 + col];
      const double my = m[2 * 4 + col];
      const double mz = m[3 * 4 + col];
      dm[0 * 4 + col] = 0.0;
      dm[1 * 4 + col] = -transverse * mx - w * my;
      dm[2 * 4 + col] = -transverse * my + w * mx;
      dm[3 * 4 + col] = gain * m0 - loss * mz;
    }
  };
}

TransferMap map_from_flat(const std::vector<double>& m) {
  TransferMap out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.m(r, c) = m[r * 4 + c];
  return out;
}

}  // namespace

StateTrajectory evolve_state(const QubitState& rho0, const RateTable& table,
                             double t0, double t1, const OdeSpec& spec,
                             const BlochRhsParams& params) {
  const OdeRhs rhs = [&table, params](double t, const std::vector<double>& y,
                                      std::vector<double>& dy) {
    const QubitState s{y[0], y[1], y[2]};
    double out[3];
    dissipator_rhs(table.triple(t), s, out, params);
    dy[0] = out[0];
    dy[1] = out[1];
    dy[2] = out[2];
  };
  return StateTrajectory(
      ode_solve(rhs, {rho0.x, rho0.y, rho0.z}, t0, t1, spec));
}

QubitState StateTrajectory::eval(double taubar) const {
  const std::vector<double> y = sol_.eval(taubar);
  return {y[0], y[1], y[2]};
}

TransferMap propagator(const RateTable& table, double taubar,
                       const OdeSpec& spec) {
  const double t0 = table.grid().front();
  std::vector<double> m0(16, 0.0);
  for (int i = 0; i < 4; ++i) m0[i * 4 + i] = 1.0;
  if (taubar <= t0) return TransferMap{};
  const OdeSolution sol =
      ode_solve(transfer_rhs(table, {}), std::move(m0), t0, taubar, spec);
  return map_from_flat(sol.eval(taubar));
}

std::vector<TransferMap> propagator_curve(const RateTable& table,
                                          const std::vector<double>& grid,
                                          const OdeSpec& spec) {
  const double t0 = table.grid().front();
  std::vector<double> m0(16, 0.0);
  for (int i = 0; i < 4; ++i) m0[i * 4 + i] = 1.0;
  const double t_end = grid.empty() ? t0 : grid.back();
  const OdeSolution sol =
      ode_solve(transfer_rhs(table, {}), std::move(m0), t0, t_end, spec);
  std::vector<TransferMap> maps;
  maps.reserve(grid.size());
  std::vector<double> buf;
  for (double t : grid) {
    if (t <= t0) {
      maps.push_back(TransferMap{});
      continue;
    }
    sol.eval_into(t, buf);
    maps.push_back(map_from_flat(buf));
  }
  return maps;
}

TransferMap intermediate_map(const TransferMap& phi_s, const TransferMap& phi_t,
                             double cond_limit) {
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(phi_s.m);
  const double smin = svd.singularValues()(3);
  const double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > cond_limit)
    throw NumericsError("intermediate_map: earlier map not invertible "
                        "(condition number above limit)",
                        smin > 0.0 ? smax / smin : 0.0);
  TransferMap v;
  v.m = phi_t.m * phi_s.m.inverse();
  return v;
}

TransferMap intermediate_map(const RateTable& table, double s, double t,
                             const OdeSpec& spec, double cond_limit) {
  if (t < s) throw std::invalid_argument("intermediate_map: t < s");
  return intermediate_map(propagator(table, s, spec),
                          propagator(table, t, spec), cond_limit);
}

Eigen::Matrix4cd choi(const TransferMap& map) {
  const auto& m = map.m;
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
  // Apply the map to E_aa' = |a><a'| by complex-linear extension of the
  // Bloch action: coefficients t = tr S, w = tr(sigma S).
  for (int a = 0; a < 2; ++a) {
    for (int ap = 0; ap < 2; ++ap) {
      const std::complex<double> t = (a == ap) ? 1.0 : 0.0;
      const std::complex<double> wx = (a != ap) ? 1.0 : 0.0;
      const std::complex<double> wy = (a == 0 && ap == 1)   ? kI
                                      : (a == 1 && ap == 0) ? -kI
                                                            : 0.0;
      const std::complex<double> wz = (a == ap) ? (a == 0 ? 1.0 : -1.0) : 0.0;
      const std::complex<double> ox = m(1, 0) * t + m(1, 1) * wx + m(1, 2) * wy + m(1, 3) * wz;
      const std::complex<double> oy = m(2, 0) * t + m(2, 1) * wx + m(2, 2) * wy + m(2, 3) * wz;
      const std::complex<double> oz = m(3, 0) * t + m(3, 1) * wx + m(3, 2) * wy + m(3, 3) * wz;
      Eigen::Matrix2cd block;
      block << 0.5 * (t + oz), 0.5 * (ox - kI * oy), 0.5 * (ox + kI * oy),
          0.5 * (t - oz);
      for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) c(2 * s + a, 2 * sp + ap) = block(s, sp);
    }
  }
  return c;
}

CpVerdict is_cp(const Eigen::Matrix4cd& choi_matrix, double tol) {
  const Eigen::Matrix4cd h = 0.5 * (choi_matrix + choi_matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h,
                                                     Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  return {min_eig >= -tol, min_eig};
}

}  // namespace udw
