#include "udw/positivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace udw {

PositivityCurves population_curves(const RateTable& table) {
  PositivityCurves c;
  c.grid = table.grid();
  const std::size_t n = c.grid.size();
  const auto& g1 = table.col_g1();
  const auto& g2 = table.col_g2();
  const auto& g3 = table.col_g3();

  std::vector<double> gamma_rate(n), lambda_rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = k_rate_scale * g1[i];
    const double a2 = k_rate_scale * g2[i];
    const double a3 = k_rate_scale * g3[i];
    gamma_rate[i] = 0.5 * (a1 + a2);
    lambda_rate[i] = 0.25 * (a1 + a2) + a3;
  }
  c.Gamma = cumulative_integral(c.grid, gamma_rate);
  c.Lambda = cumulative_integral(c.grid, lambda_rate);

  std::vector<double> growth(n);
  for (std::size_t i = 0; i < n; ++i)
    growth[i] = std::exp(c.Gamma[i]) * 0.5 * k_rate_scale * g2[i];
  c.G = cumulative_integral(c.grid, growth);

  c.P0.resize(n);
  c.P1.resize(n);
  c.zeta.resize(n);
  c.min_P0 = 0.0;
  c.argmin_taubar = c.grid.front();
  c.max_P1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double damp = std::exp(-c.Gamma[i]);
    c.P0[i] = damp * c.G[i];
    c.P1[i] = damp * (c.G[i] + 1.0);
    c.zeta[i] = 1.0 - c.P0[i] - c.P1[i];
    if (c.P0[i] < c.min_P0) {
      c.min_P0 = c.P0[i];
      c.argmin_taubar = c.grid[i];
    }
    c.max_P1 = std::max(c.max_P1, c.P1[i]);
  }
  return c;
}

OdePopulations population_curves_ode(const RateTable& table,
                                     const OdeSpec& spec) {
  const auto& grid = table.grid();
  const auto rhs = [&table](double t, const std::vector<double>& y,
                            std::vector<double>& dy) {
    const RateTriple g = table.triple(t);
    const double a1 = k_rate_scale * g.g1;
    const double a2 = k_rate_scale * g.g2;
    const double loss = 0.5 * (a1 + a2);
    dy[0] = -loss * y[0] + 0.5 * a2;
    dy[1] = -loss * y[1] + 0.5 * a2;
  };
  const OdeSolution sol =
      ode_solve(rhs, {0.0, 1.0}, grid.front(), grid.back(), spec);
  OdePopulations out;
  out.P0.resize(grid.size());
  out.P1.resize(grid.size());
  std::vector<double> y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sol.eval_into(grid[i], y);
    out.P0[i] = y[0];
    out.P1[i] = y[1];
  }
  return out;
}

CpReport cp_check(const PositivityCurves& c, double tol) {
  return {c.min_P0 >= -tol && c.max_P1 <= 1.0 + tol, c.min_P0, c.argmin_taubar,
          c.max_P1, tol};
}

namespace {

struct WitnessPoint {
  double value;          // scan objective at this gap
  double argmin_taubar;  // where the extremum sits
};

// Shared bracketing driver: h must cross from >0 to <=0 somewhere inside
// [lo, hi]. Evaluations are cached so the result records every gap probed.
ThresholdScan scan_for_onset(double lo, double hi, const ScanOptions& opts,
                             const std::function<WitnessPoint(double)>& witness,
                             double shift) {
  if (!(hi > lo))
    throw std::invalid_argument("threshold scan: degenerate gap range");
  std::map<double, WitnessPoint> cache;
  const auto h = [&](double w) {
    auto it = cache.find(w);
    if (it == cache.end()) it = cache.emplace(w, witness(w)).first;
    return it->second.value + shift;
  };

  constexpr int kCoarse = 6;
  double flip_lo = lo, flip_hi = hi;
  bool found = false;
  double prev_w = lo, prev_h = h(lo);
  if (prev_h <= 0.0)
    throw NumericsError("threshold scan: already violated at range start",
                        prev_h);
  for (int i = 1; i < kCoarse; ++i) {
    const double w = lo + (hi - lo) * static_cast<double>(i) / (kCoarse - 1);
    const double hw = h(w);
    if (!found && prev_h > 0.0 && hw <= 0.0) {
      flip_lo = prev_w;
      flip_hi = w;
      found = true;
    }
    prev_w = w;
    prev_h = hw;
  }
  if (!found)
    throw NumericsError("threshold scan: no onset inside the gap range");

  const RootBracket root =
      find_sign_change(h, flip_lo, flip_hi, opts.resolution);

  ThresholdScan out;
  out.threshold = root.root;
  out.bracket_lo = root.lo;
  out.bracket_hi = root.hi;
  out.tolerance = shift;
  const WitnessPoint at_hi = cache.count(root.hi) ? cache.at(root.hi)
                                                  : witness(root.hi);
  out.min_witness = at_hi.value;
  out.argmin_taubar = at_hi.argmin_taubar;
  for (const auto& [w, wp] : cache) {
    out.wbar_grid.push_back(w);
    out.witness.push_back(wp.value);
  }
  return out;
}

RateParams scan_params(double wbar, const ScanOptions& opts) {
  RateParams p;
  p.kind = PathKind::switch_on;
  p.wbar = wbar;
  p.taubar_max = opts.taubar_max;
  p.n_samples = opts.n_samples;
  p.quad = opts.quad;
  p.exec = opts.exec;
  return p;
}

}  // namespace

ThresholdScan cp_threshold_scan(double wbar_lo, double wbar_hi,
                                const ScanOptions& opts) {
  const auto witness = [&](double w) {
    const PositivityCurves c = population_curves(
        build_rate_table(scan_params(w, opts)));
    return WitnessPoint{c.min_P0, c.argmin_taubar};
  };
  return scan_for_onset(wbar_lo, wbar_hi, opts, witness, opts.violation_tol);
}

ThresholdScan gamma2_threshold_scan(double wbar_lo, double wbar_hi,
                                    const ScanOptions& opts) {
  const auto witness = [&](double w) {
    const RateTable table = build_rate_table(scan_params(w, opts));
    const auto& grid = table.grid();
    const auto& g2 = table.col_g2();
    // The boundary row is pinned at zero; the extremum of interest is the
    // interior one.
    WitnessPoint wp{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] <= 0.0) continue;
      if (g2[i] < wp.value) {
        wp.value = g2[i];
        wp.argmin_taubar = grid[i];
      }
    }
    return wp;
  };
  return scan_for_onset(wbar_lo, wbar_hi, opts, witness, 0.0);
}

ReversedCheck reversed_path_check(double wbar, std::vector<double> probes,
                                  const ScanOptions& opts) {
  if (probes.empty())
    throw std::invalid_argument("reversed_path_check: no probes");
  std::sort(probes.begin(), probes.end());
  if (probes.front() <= 1e-3)
    throw std::invalid_argument(
        "reversed_path_check: probes must lie above the 1e-3 grid floor");
  RateParams p = scan_params(wbar, opts);
  p.kind = PathKind::reversed_stop;
  p.taubar_max = std::max(1.5 * probes.back(), 0.6);
  const PositivityCurves c = population_curves(build_rate_table(p));
  const CubicSpline p0_spline(c.grid, c.P0);

  ReversedCheck out;
  out.probes = probes;
  out.all_negative = true;
  for (double t : probes) {
    const double v = p0_spline(t);
    out.P0_at_probes.push_back(v);
    if (!(v < 0.0)) out.all_negative = false;
  }
  return out;
}

}  // namespace udw
