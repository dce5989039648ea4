#include "udw/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace udw {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

double trace_distance(const QubitState& a, const QubitState& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd d = a - b;
  const Eigen::MatrixXcd h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double info_flow(const StateTrajectory& t1, const StateTrajectory& t2,
                 double taubar, double h) {
  const auto d = [&](double t) {
    return trace_distance(t1.eval(t), t2.eval(t));
  };
  return (d(taubar - 2.0 * h) - 8.0 * d(taubar - h) + 8.0 * d(taubar + h) -
          d(taubar + 2.0 * h)) /
         (12.0 * h);
}

ChannelCurves::ChannelCurves(const PositivityCurves& c)
    : s_gamma_(c.grid, c.Gamma),
      s_lambda_(c.grid, c.Lambda),
      s_zeta_(c.grid, c.zeta) {}

ChannelCurves::At ChannelCurves::at(double taubar) const {
  return {std::exp(-s_lambda_(taubar)), std::exp(-s_gamma_(taubar)),
          s_zeta_(taubar)};
}

namespace {

// (Phi (x) Id) on a Hermitian operator of C^2 (x) C^d, system-major indexing:
// every ancilla block transforms through the complex-linear extension of the
// Bloch action.
Eigen::MatrixXcd apply_extended(const Eigen::MatrixXcd& op,
                                const ChannelCurves::At& ch, int d) {
  Eigen::MatrixXcd out(2 * d, 2 * d);
  for (int a = 0; a < d; ++a) {
    for (int ap = 0; ap < d; ++ap) {
      const std::complex<double> s00 = op(a, ap);
      const std::complex<double> s01 = op(a, d + ap);
      const std::complex<double> s10 = op(d + a, ap);
      const std::complex<double> s11 = op(d + a, d + ap);
      const std::complex<double> t = s00 + s11;
      const std::complex<double> wx = s01 + s10;
      const std::complex<double> wy = kI * (s01 - s10);
      const std::complex<double> wz = s00 - s11;
      const std::complex<double> ox = ch.damp_xy * wx;
      const std::complex<double> oy = ch.damp_xy * wy;
      const std::complex<double> oz = ch.damp_z * wz + ch.zeta * t;
      out(a, ap) = 0.5 * (t + oz);
      out(a, d + ap) = 0.5 * (ox - kI * oy);
      out(d + a, ap) = 0.5 * (ox + kI * oy);
      out(d + a, d + ap) = 0.5 * (t - oz);
    }
  }
  return out;
}

Eigen::MatrixXcd pure(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

Eigen::VectorXcd bell_vector(int d, int which) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * d);
  const double r = 1.0 / std::sqrt(2.0);
  switch (which) {
    case 0:  // (|00> + |11>)/sqrt2
      v(0) = r;
      v(d + 1) = r;
      break;
    case 1:  // (|00> - |11>)/sqrt2
      v(0) = r;
      v(d + 1) = -r;
      break;
    case 2:  // (|01> + |10>)/sqrt2
      v(1) = r;
      v(d) = r;
      break;
    default:  // (|01> - |10>)/sqrt2
      v(1) = r;
      v(d) = -r;
      break;
  }
  return v;
}

}  // namespace

ExtendedPair extend_pair(const StatePair& pair, int ancilla_dim,
                         ExtendedInput kind, int variant) {
  if (ancilla_dim != 2 && ancilla_dim != 3)
    throw std::invalid_argument("extend_pair: ancilla_dim must be 2 or 3");
  const int d = ancilla_dim;
  ExtendedPair out;
  out.p1 = pair.p1;
  out.p2 = pair.p2;
  out.ancilla_dim = d;
  switch (kind) {
    case ExtendedInput::product: {
      const Eigen::Matrix2cd r1 = pair.rho1.density();
      const Eigen::Matrix2cd r2 = pair.rho2.density();
      out.rho1 = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
      out.rho2 = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
      for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
          out.rho1(s * d, sp * d) = r1(s, sp);
          out.rho2(s * d, sp * d) = r2(s, sp);
        }
      }
      break;
    }
    case ExtendedInput::max_entangled:
      out.rho1 = pure(bell_vector(d, variant == 0 ? 0 : 2));
      out.rho2 = pure(bell_vector(d, variant == 0 ? 1 : 3));
      break;
    case ExtendedInput::spare_level: {
      if (d != 3)
        throw std::invalid_argument(
            "extend_pair: spare_level needs ancilla_dim = 3");
      out.rho1 = pure(bell_vector(d, 0));
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * d);
      // Pole state parked on the unused ancilla level: orthogonal to rho1 for
      // free, and its image stays a product state, so the Helstrom bias picks
      // up the channel's positivity defect directly.
      v(variant == 0 ? 2 : d + 2) = 1.0;
      out.rho2 = pure(v);
      break;
    }
  }
  return out;
}

std::vector<ExtendedPair> sampled_extended_pairs(int ancilla_dim, int n_pairs,
                                                 std::uint64_t seed) {
  if (ancilla_dim != 2 && ancilla_dim != 3)
    throw std::invalid_argument("sampled_extended_pairs: ancilla_dim must be 2 or 3");
  std::vector<ExtendedPair> pairs;
  const StatePair priors{};  // equal priors throughout
  if (ancilla_dim == 3) {
    pairs.push_back(extend_pair(priors, 3, ExtendedInput::spare_level, 0));
    pairs.push_back(extend_pair(priors, 3, ExtendedInput::spare_level, 1));
    pairs.push_back(extend_pair(priors, 3, ExtendedInput::max_entangled, 0));
  } else {
    pairs.push_back(extend_pair(priors, 2, ExtendedInput::max_entangled, 0));
    pairs.push_back(extend_pair(priors, 2, ExtendedInput::max_entangled, 1));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dim = 2 * ancilla_dim;
  const auto random_unit = [&]() {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = std::complex<double>(gauss(rng), gauss(rng));
    v.normalize();
    return v;
  };
  while (static_cast<int>(pairs.size()) < n_pairs) {
    const Eigen::VectorXcd v1 = random_unit();
    Eigen::VectorXcd v2 = random_unit();
    v2 -= v1.dot(v2) * v1;
    if (v2.norm() < 1e-8) continue;
    v2.normalize();
    ExtendedPair p;
    p.ancilla_dim = ancilla_dim;
    p.rho1 = pure(v1);
    p.rho2 = pure(v2);
    pairs.push_back(std::move(p));
  }
  pairs.resize(n_pairs);
  return pairs;
}

double helstrom_norm(const ExtendedPair& pair, const ChannelCurves& channel,
                     double taubar) {
  const Eigen::MatrixXcd bias = pair.p1 * pair.rho1 - pair.p2 * pair.rho2;
  const Eigen::MatrixXcd evolved =
      apply_extended(bias, channel.at(taubar), pair.ancilla_dim);
  const Eigen::MatrixXcd h = 0.5 * (evolved + evolved.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double helstrom_norm(const StatePair& pair, const RateTable& table,
                     double taubar, int ancilla_dim, ExtendedInput kind) {
  const ChannelCurves channel(population_curves(table));
  return helstrom_norm(extend_pair(pair, ancilla_dim, kind), channel, taubar);
}

std::vector<double> helstrom_curve(const ExtendedPair& pair,
                                   const ChannelCurves& channel,
                                   const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(helstrom_norm(pair, channel, t));
  return out;
}

BlpResult blp_sample(const RateTable& table, int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("blp_sample: n_pairs < 1");
  const PositivityCurves curves = population_curves(table);
  const std::size_t n = curves.grid.size();
  std::vector<double> damp_xy(n), damp_z(n);
  for (std::size_t i = 0; i < n; ++i) {
    damp_xy[i] = std::exp(-curves.Lambda[i]);
    damp_z[i] = std::exp(-curves.Gamma[i]);
  }

  // Affine shifts cancel in differences, so D(t) depends only on the decay
  // factors and the initial Bloch separation.
  const auto positive_variation = [&](const QubitState& a, const QubitState& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    const double dxy2 = dx * dx + dy * dy;
    double total = 0.0;
    double prev = 0.5 * std::sqrt(dxy2 + dz * dz);
    for (std::size_t i = 1; i < n; ++i) {
      const double cur =
          0.5 * std::sqrt(damp_xy[i] * damp_xy[i] * dxy2 +
                          damp_z[i] * damp_z[i] * dz * dz);
      if (cur > prev) total += cur - prev;
      prev = cur;
    }
    return total;
  };

  BlpResult result;
  result.n_pairs = n_pairs;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  constexpr int kAxes = 20;
  constexpr double kGolden = 2.39996322972865332;  // pi (3 - sqrt 5)
  for (int k = 0; k < n_pairs; ++k) {
    StatePair pair;
    if (k < kAxes) {
      // Antipodal sweep over a spiral of directions.
      const double z = 1.0 - 2.0 * (k + 0.5) / kAxes;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = kGolden * k;
      pair.rho1 = {r * std::cos(phi), r * std::sin(phi), z};
      pair.rho2 = {-pair.rho1.x, -pair.rho1.y, -pair.rho1.z};
    } else {
      const auto random_state = [&]() {
        const double z = 1.0 - 2.0 * uni(rng);
        const double phi = 2.0 * 3.14159265358979323846 * uni(rng);
        const double radius = std::cbrt(uni(rng));
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return QubitState{radius * r * std::cos(phi), radius * r * std::sin(phi),
                          radius * z};
      };
      pair.rho1 = random_state();
      pair.rho2 = random_state();
    }
    const double v = positive_variation(pair.rho1, pair.rho2);
    if (v > result.measure) {
      result.measure = v;
      result.witness = pair;
    }
  }
  return result;
}

DivisibilityReport divisibility_report(const RateTable& table,
                                       const std::vector<double>& grid,
                                       const OdeSpec& spec, double cp_tol) {
  if (grid.size() < 2)
    throw std::invalid_argument("divisibility_report: need >= 2 grid points");
  const std::vector<TransferMap> maps = propagator_curve(table, grid, spec);
  DivisibilityReport report;
  report.intervals.reserve(grid.size() - 1);
  constexpr int kRateSamples = 9;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    DivisibilityInterval iv;
    iv.t0 = grid[i];
    iv.t1 = grid[i + 1];
    iv.min_rate = std::numeric_limits<double>::infinity();
    for (int s = 0; s < kRateSamples; ++s) {
      const double t =
          iv.t0 + (iv.t1 - iv.t0) * static_cast<double>(s) / (kRateSamples - 1);
      const RateTriple g = table.triple(t);
      iv.min_rate = std::min({iv.min_rate, g.g1, g.g2, g.g3});
    }
    const TransferMap v = intermediate_map(maps[i], maps[i + 1]);
    iv.choi_min = is_cp(choi(v), cp_tol).min_eigenvalue;
    iv.cp = iv.choi_min >= -cp_tol;
    if (!iv.cp) {
      ++report.n_noncp;
      if (report.first_noncp_taubar < 0.0) report.first_noncp_taubar = iv.t1;
    }
    report.intervals.push_back(iv);
  }
  return report;
}

}  // namespace udw
