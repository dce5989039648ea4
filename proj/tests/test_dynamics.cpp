#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "udw/dynamics.hpp"
#include "udw/positivity.hpp"

using namespace udw;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Literal generator: d rho = sum_i (a_i/2) L_i[rho] with
// L_1 = E rho E^+ - {E^+ E, rho}/2 for the de-exciting jump E = |0><1|,
// L_2 the same for the exciting jump |1><0|, and L_3 = sz rho sz - rho.
Eigen::Matrix2cd gksl_rhs(const RateTriple& g, const Eigen::Matrix2cd& rho,
                          bool hamiltonian, double wbar) {
  using cd = std::complex<double>;
  Eigen::Matrix2cd down, up, sz;
  down << cd(0, 0), cd(1, 0), cd(0, 0), cd(0, 0);  // |0><1|
  up = down.adjoint();
  sz << cd(1, 0), cd(0, 0), cd(0, 0), cd(-1, 0);
  const double a1 = k_rate_scale * g.g1;
  const double a2 = k_rate_scale * g.g2;
  const double a3 = k_rate_scale * g.g3;
  const auto dissipate = [&](const Eigen::Matrix2cd& L,
                             double a) -> Eigen::Matrix2cd {
    const Eigen::Matrix2cd LdL = L.adjoint() * L;
    return (0.5 * a) *
           (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  };
  Eigen::Matrix2cd out = dissipate(down, a1) + dissipate(up, a2);
  out += (0.5 * a3) * (sz * rho * sz - rho).eval();
  if (hamiltonian) {
    const Eigen::Matrix2cd h = (0.5 * wbar) * sz;
    out += cd(0, -1) * (h * rho - rho * h);
  }
  return out;
}

}  // namespace

TEST_CASE("bloch rhs matches the literal dissipator") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> up(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    QubitState s;
    do {
      s.x = u(rng);
      s.y = u(rng);
      s.z = u(rng);
    } while (s.x * s.x + s.y * s.y + s.z * s.z > 1.0);
    RateTriple g{up(rng), up(rng), up(rng)};
    const bool ham = trial % 3 == 0;
    BlochRhsParams params;
    params.include_hamiltonian = ham;
    params.wbar = 1.3;

    double dot[3];
    dissipator_rhs(g, s, dot, params);

    const Eigen::Matrix2cd drho = gksl_rhs(g, s.density(), ham, params.wbar);
    // x = 2 Re rho01, y = -2 Im rho01, z = rho00 - rho11.
    CHECK(dot[0] == doctest::Approx(2.0 * drho(0, 1).real()).epsilon(1e-12));
    CHECK(dot[1] == doctest::Approx(-2.0 * drho(0, 1).imag()).epsilon(1e-12));
    CHECK(dot[2] ==
          doctest::Approx((drho(0, 0) - drho(1, 1)).real()).epsilon(1e-12));
    CHECK(std::abs((drho(0, 0) + drho(1, 1)).real()) < 1e-14);  // trace frozen
  }
}

TEST_CASE("density matrix round trip") {
  QubitState s{0.3, -0.5, 0.4};
  const QubitState back = QubitState::from_density(s.density());
  CHECK(back.x == doctest::Approx(s.x).epsilon(1e-15));
  CHECK(back.y == doctest::Approx(s.y).epsilon(1e-15));
  CHECK(back.z == doctest::Approx(s.z).epsilon(1e-15));
  // z = +1 is the lower level |0>.
  QubitState ground{0.0, 0.0, 1.0};
  CHECK(ground.density()(0, 0).real() == doctest::Approx(1.0));
  CHECK(ground.density()(1, 1).real() == doctest::Approx(0.0));
}

TEST_CASE("propagator matches the closed-form channel") {
  RateParams p;
  p.wbar = 2.0;
  p.taubar_max = 6.0;
  p.n_samples = 200;
  p.exec = Exec::serial;
  const RateTable table = build_rate_table(p);
  const PositivityCurves curves = population_curves(table);
  const CubicSpline gamma_s(curves.grid, curves.Gamma);
  const CubicSpline lambda_s(curves.grid, curves.Lambda);
  const CubicSpline zeta_s(curves.grid, curves.zeta);

  for (double t : {0.5, 2.0, 5.0}) {
    const TransferMap m = propagator(table, t);
    CHECK(m.m(0, 0) == 1.0);
    CHECK(m.m(0, 1) == 0.0);
    CHECK(m.m(1, 1) == doctest::Approx(std::exp(-lambda_s(t))).epsilon(1e-7));
    CHECK(m.m(2, 2) == doctest::Approx(std::exp(-lambda_s(t))).epsilon(1e-7));
    CHECK(m.m(3, 3) == doctest::Approx(std::exp(-gamma_s(t))).epsilon(1e-7));
    CHECK(m.m(3, 0) == doctest::Approx(zeta_s(t)).epsilon(1e-7));
    CHECK(std::abs(m.m(1, 2)) < 1e-10);
    CHECK(std::abs(m.m(2, 1)) < 1e-10);
  }
}

TEST_CASE("choi matrix conventions") {
  TransferMap id;
  const Eigen::Matrix4cd c = choi(id);
  // Identity channel: rank one, trace 2, eigenvalues {2, 0, 0, 0}.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(c);
  CHECK(es.eigenvalues()(3) == doctest::Approx(2.0).epsilon(1e-14));
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(es.eigenvalues()(i)) < 1e-14);
  CHECK(std::abs(c.trace().real() - 2.0) < 1e-14);

  // Fully depolarizing map (Bloch part zero): maximally mixed Choi state.
  TransferMap depol;
  depol.m.setZero();
  depol.m(0, 0) = 1.0;
  const Eigen::Matrix4cd cd_ = choi(depol);
  for (int i = 0; i < 4; ++i)
    CHECK(cd_(i, i).real() == doctest::Approx(0.5).epsilon(1e-14));

  const CpVerdict v = is_cp(c);
  CHECK(v.cp);
  CHECK(v.min_eigenvalue > -1e-14);
}

TEST_CASE("choi eigenvalues of the evolved channel match the closed set") {
  RateParams p;
  p.wbar = 2.0;
  p.taubar_max = 6.0;
  p.n_samples = 200;
  p.exec = Exec::serial;
  const RateTable table = build_rate_table(p);
  const PositivityCurves curves = population_curves(table);
  const CubicSpline gamma_s(curves.grid, curves.Gamma);
  const CubicSpline lambda_s(curves.grid, curves.Lambda);
  const CubicSpline p0_s(curves.grid, curves.P0);
  const CubicSpline p1_s(curves.grid, curves.P1);

  for (double t : {0.5, 2.0, 5.0}) {
    const Eigen::Matrix4cd c = choi(propagator(table, t));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(c);
    const double eg = std::exp(-gamma_s(t));
    const double el = std::exp(-lambda_s(t));
    const double zeta = 1.0 - p0_s(t) - p1_s(t);
    const double disc = std::sqrt(zeta * zeta + 4.0 * el * el);
    std::array<double, 4> expect = {p0_s(t), 1.0 - p1_s(t),
                                    0.5 * (1.0 + eg - disc),
                                    0.5 * (1.0 + eg + disc)};
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 4; ++i)
      CHECK(es.eigenvalues()(i) == doctest::Approx(expect[i]).epsilon(1e-6));
    // Smallest Choi eigenvalue of the full map is exactly P0.
    CHECK(es.eigenvalues()(0) == doctest::Approx(p0_s(t)).epsilon(1e-6));
  }
}

TEST_CASE("intermediate maps flag divisibility loss") {
  // Stationary rates are positive: every intermediate map is CP.
  RateParams p;
  p.kind = PathKind::eternal_acceleration;
  p.wbar = 1.6;
  p.taubar_max = 5.0;
  p.n_samples = 64;
  p.exec = Exec::serial;
  const RateTable eternal = build_rate_table(p);
  for (double s : {0.5, 2.0}) {
    const TransferMap step = intermediate_map(eternal, s, s + 0.7);
    const CpVerdict v = is_cp(choi(step));
    CHECK(v.cp);
  }

  // The switch-on profile at wbar = 1.6 has a window of negative g2: the
  // short-step intermediate map there must fail CP.
  RateParams q;
  q.wbar = 1.6;
  q.taubar_max = 6.0;
  q.n_samples = 200;
  q.exec = Exec::serial;
  const RateTable kicked = build_rate_table(q);
  double worst = 1.0;
  double worst_t = 0.0;
  for (std::size_t i = 0; i + 1 < kicked.grid().size(); ++i) {
    if (kicked.row(i).g2 < -1e-3) {
      const double t = kicked.grid()[i];
      const CpVerdict v =
          is_cp(choi(intermediate_map(kicked, t, t + 1e-3)));
      if (v.min_eigenvalue < worst) {
        worst = v.min_eigenvalue;
        worst_t = t;
      }
    }
  }
  CHECK(worst < -1e-7);
  CHECK(worst_t > 1.0);  // the window opens after the transient peak
}

TEST_CASE("intermediate map condition guard") {
  TransferMap nearly_singular;
  nearly_singular.m.setIdentity();
  nearly_singular.m(1, 1) = 1e-14;
  TransferMap target;
  CHECK_THROWS_AS(intermediate_map(nearly_singular, target, 1e10),
                  NumericsError);
}

TEST_CASE("state evolution reaches the thermal fixed point") {
  RateParams p;
  p.kind = PathKind::eternal_acceleration;
  p.wbar = 1.0;
  p.taubar_max = 40.0;
  p.n_samples = 64;
  p.exec = Exec::serial;
  const RateTable table = build_rate_table(p);
  const QubitState init{0.6, 0.0, -0.8};
  const StateTrajectory traj = evolve_state(init, table, 0.0, 40.0);
  const QubitState end = traj.eval(40.0);
  CHECK(end.z == doctest::Approx(std::tanh(kPi * p.wbar)).epsilon(1e-8));
  // x decays as exp(-Lambda) with Lambda' ~ 0.33 here, so ~1e-6 at 40.
  const double a1 = k_rate_scale * 2.0 * planck_term(-p.wbar);
  const double a2 = k_rate_scale * 2.0 * planck_term(p.wbar);
  const double a3 = k_rate_scale * planck_term(0.0);
  const double lambda_rate = 0.25 * (a1 + a2) + a3;
  CHECK(std::abs(end.x - 0.6 * std::exp(-40.0 * lambda_rate)) < 1e-8);
  // Populations stay inside [0, 1] along the way.
  for (double t = 0.0; t <= 40.0; t += 2.5) {
    const double pop1 = 0.5 * (1.0 - traj.eval(t).z);
    CHECK(pop1 >= -1e-10);
    CHECK(pop1 <= 1.0 + 1e-10);
  }
}
