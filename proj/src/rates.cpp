#include "udw/rates.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace udw {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Static-detector response derivative: spontaneous excitation only below the
// gap, -wbar * theta(-wbar).
double static_response(double wbar) { return wbar < 0.0 ? -wbar : 0.0; }
}  // namespace

double planck_term(double wbar) {
  const double x = 2.0 * kPi * wbar;
  if (std::abs(x) < 1e-3) {
    // x/(e^x - 1) = 1 - x/2 + x^2/12 + O(x^4)
    return (1.0 - 0.5 * x + x * x / 12.0) / (2.0 * kPi);
  }
  return wbar / std::expm1(x);
}

double bracket_forward(double taubar, double sbar) {
  const double delta = sbar - taubar;
  if (delta < 0.0) return 0.0;
  const double d_g = dx2_greater(taubar, sbar);
  const double d_l = dx2_less(sbar);
  if (delta < 1e-3) {
    // 1/d_g - 1/d_l = (d_l - d_g)/(d_g d_l); the numerator expanded about
    // delta = 0 keeps every term one-signed, so the coincidence limit loses
    // no precision. All three groups are <= 0 for taubar >= 0.
    const double sh = std::sinh(0.5 * taubar);
    const double d2 = delta * delta;
    const double num =
        -(2.0 * d2 * sh * sh +
          d2 * d2 * std::cosh(taubar) / 12.0 * (1.0 + d2 / 30.0) +
          d2 * delta * std::sinh(taubar) / 3.0 *
              (1.0 + d2 / 20.0 + d2 * d2 / 840.0));
    return num / (d_g * d_l);
  }
  return 1.0 / d_g - 1.0 / d_l;
}

double bracket_reversed(double taubar, double sbar) {
  if (sbar < taubar) return 0.0;
  // Both inverse intervals are negative, so the terms reinforce instead of
  // cancelling; no fused form is needed anywhere in the domain.
  return 1.0 / dx2_reversed_greater(taubar, sbar) - 1.0 / (sbar * sbar);
}

double delta_fdot(double taubar, double wbar, const QuadratureSpec& spec) {
  if (taubar < 0.0)
    throw std::invalid_argument("delta_fdot: taubar must be >= 0");
  const auto f = [taubar](double s) { return bracket_forward(taubar, s); };
  return integrate_oscillatory(f, taubar, wbar, Phase::cos, spec).value / kPi;
}

double fdot(double taubar, double wbar, const QuadratureSpec& spec) {
  if (taubar <= 0.0) return static_response(wbar);
  return planck_term(wbar) + delta_fdot(taubar, wbar, spec);
}

double fdot_reversed(double taubar, double wbar, const QuadratureSpec& spec) {
  if (taubar <= 0.0) return planck_term(wbar);
  // The subtraction kernel continues the thermal correlator, so the thermal
  // response stays as the baseline after the stop as well.
  const auto f = [taubar](double s) { return bracket_reversed(taubar, s); };
  return planck_term(wbar) +
         integrate_oscillatory(f, taubar, wbar, Phase::cos, spec).value / kPi;
}

double g3_closed_form(double taubar) {
  if (taubar <= 0.0) return 0.0;
  if (taubar < 1e-4) {
    return taubar / 3.0 * (1.0 - taubar * taubar / 30.0) / (2.0 * kPi);
  }
  return (taubar - std::sinh(taubar)) / (1.0 - std::cosh(taubar)) / (2.0 * kPi);
}

std::vector<double> rate_grid(const RateParams& p) {
  if (p.n_samples < 16)
    throw std::invalid_argument("rate_grid: n_samples must be >= 16");
  if (!(p.taubar_max > 0.5))
    throw std::invalid_argument("rate_grid: taubar_max must exceed 0.5");
  const int n = p.n_samples;
  std::vector<double> grid;
  grid.reserve(n);
  if (p.kind == PathKind::switch_on || p.kind == PathKind::reversed_stop) {
    // Geometric refinement toward the kick resolves the fast transient; the
    // reversed profile has no finite boundary row (its rates diverge at the
    // stop), so its grid starts at the floor.
    const double floor = 1e-3, knee = 0.5;
    const int n_geo = n / 3;
    const bool with_zero = p.kind == PathKind::switch_on;
    if (with_zero) grid.push_back(0.0);
    for (int i = 0; i < n_geo; ++i) {
      grid.push_back(i + 1 == n_geo
                         ? knee
                         : floor * std::pow(knee / floor,
                                            static_cast<double>(i) / (n_geo - 1)));
    }
    const int n_uni = n - static_cast<int>(grid.size());
    const double step = (p.taubar_max - knee) / n_uni;
    for (int j = 1; j <= n_uni; ++j) grid.push_back(knee + step * j);
    grid.back() = p.taubar_max;
  } else {
    for (int i = 0; i < n; ++i)
      grid.push_back(p.taubar_max * static_cast<double>(i) / (n - 1));
  }
  return grid;
}

RateTable::RateTable(RateParams params, std::vector<double> grid,
                     std::vector<double> g1, std::vector<double> g2,
                     std::vector<double> g3)
    : params_(std::move(params)),
      grid_(std::move(grid)),
      g1_(std::move(g1)),
      g2_(std::move(g2)),
      g3_(std::move(g3)),
      s1_(grid_, g1_),
      s2_(grid_, g2_),
      s3_(grid_, g3_) {}

RateTriple RateTable::triple(double taubar) const {
  return {s1_(taubar), s2_(taubar), s3_(taubar)};
}

RateTable build_rate_table(const RateParams& p) {
  const std::vector<double> grid = rate_grid(p);
  const std::size_t n = grid.size();
  std::vector<double> g1(n), g2(n), g3(n);
  std::vector<std::string> failures(n);
  const double w = p.wbar;

  parallel_for(p.exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
    const double tb = grid[static_cast<std::size_t>(i)];
    try {
      switch (p.kind) {
        case PathKind::inertial:
          g1[i] = 2.0 * static_response(-w);
          g2[i] = 2.0 * static_response(w);
          g3[i] = 0.0;
          break;
        case PathKind::eternal_acceleration:
          g1[i] = 2.0 * planck_term(-w);
          g2[i] = 2.0 * planck_term(w);
          g3[i] = planck_term(0.0);
          break;
        case PathKind::switch_on: {
          if (tb == 0.0) {  // boundary row: still static
            g1[i] = 2.0 * static_response(-w);
            g2[i] = 2.0 * static_response(w);
            g3[i] = 0.0;
            break;
          }
          // The correction is even in the gap (cosine transform of a real
          // kernel), so one integral serves both signs.
          const double dfp = delta_fdot(tb, w, p.quad);
          g1[i] = 2.0 * (planck_term(-w) + dfp);
          g2[i] = 2.0 * (planck_term(w) + dfp);
          g3[i] = fdot(tb, 0.0, p.quad);
          break;
        }
        case PathKind::reversed_stop: {
          const auto f = [tb](double s) { return bracket_reversed(tb, s); };
          const double corr =
              integrate_oscillatory(f, tb, w, Phase::cos, p.quad).value / kPi;
          const double corr0 =
              integrate_oscillatory(f, tb, 0.0, Phase::cos, p.quad).value / kPi;
          g1[i] = 2.0 * (planck_term(-w) + corr);
          g2[i] = 2.0 * (planck_term(w) + corr);
          g3[i] = planck_term(0.0) + corr0;
          break;
        }
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty())
      throw NumericsError("rate table row at taubar = " + std::to_string(grid[i]) +
                          " failed: " + failures[i]);
  }
  return RateTable(p, grid, std::move(g1), std::move(g2), std::move(g3));
}

// --- regulated two-point-function route -------------------------------------

namespace {

std::complex<double> inv_reg_interval(const Worldline& path, double taubar,
                                      double sbar, double eps) {
  const auto p1 = path.position(taubar);
  const auto p2 = path.position(taubar - sbar);
  const auto v1 = path.velocity(taubar);
  const auto v2 = path.velocity(taubar - sbar);
  // The cutoff displaces both endpoints along their local velocities; summing
  // the velocities keeps the prescription regulating at the coincidence limit
  // on every segment of a piecewise trajectory.
  const std::complex<double> dt(p1[0] - p2[0], -eps * (v1[0] + v2[0]));
  const std::complex<double> dx(p1[1] - p2[1], -eps * (v1[1] + v2[1]));
  return 1.0 / (dt * dt - dx * dx);
}

}  // namespace

double fdot_wightman(const Worldline& path, double taubar, double wbar,
                     double eps, const WightmanSpec& spec) {
  const double head_end = std::max(taubar, 0.0) + spec.head_pad;
  const auto re_part = [&](double s) {
    return inv_reg_interval(path, taubar, s, eps).real();
  };
  const auto im_part = [&](double s) {
    return inv_reg_interval(path, taubar, s, eps).imag();
  };
  const auto head_fn = [&](double s) {
    const std::complex<double> v = inv_reg_interval(path, taubar, s, eps);
    return std::cos(wbar * s) * v.real() + std::sin(wbar * s) * v.imag();
  };

  std::vector<double> cuts = {0.0};
  const bool kinked =
      path.kind == PathKind::switch_on || path.kind == PathKind::reversed_stop;
  if (kinked && taubar > 0.0 && taubar < head_end) cuts.push_back(taubar);
  cuts.push_back(head_end);

  double head = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    head += integrate(head_fn, cuts[i], cuts[i + 1], spec.quad).value;

  double tail = integrate_oscillatory(re_part, head_end, wbar, Phase::cos,
                                      spec.quad).value;
  if (wbar != 0.0)
    tail += integrate_oscillatory(im_part, head_end, wbar, Phase::sin,
                                  spec.quad).value;
  return -(head + tail) / kPi;
}

double fdot_wightman_extrapolated(const Worldline& path, double taubar,
                                  double wbar, const WightmanSpec& spec) {
  const auto& es = spec.epsilons;
  if (es.size() < 2)
    throw std::invalid_argument("fdot_wightman_extrapolated: need >= 2 epsilons");
  std::vector<double> vals(es.size());
  for (std::size_t i = 0; i < es.size(); ++i)
    vals[i] = fdot_wightman(path, taubar, wbar, es[i], spec);
  // Polynomial extrapolation to eps = 0 (Lagrange evaluated at zero).
  double out = 0.0;
  for (std::size_t i = 0; i < es.size(); ++i) {
    double basis = 1.0;
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (j == i) continue;
      basis *= (0.0 - es[j]) / (es[i] - es[j]);
    }
    out += vals[i] * basis;
  }
  return out;
}

}  // namespace udw
