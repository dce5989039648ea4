// Acceptance gate for the finite-time detector simulator. Each criterion
// prints exactly one [PASS]/[FAIL] line; the exit code is the failure count.
// Tolerances are pinned here on purpose: loosening them is a design change,
// not a test fix.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "udw/information.hpp"

using namespace udw;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;
std::string g_cli_bin;

void report(int id, const std::string& label, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %2d (%s): %s  [%.1fs]\n", pass ? "PASS" : "FAIL",
              id, label.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void criterion(int id, const std::string& label,
               const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = body();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(id, label, pass, detail, seconds);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RateTable make_table(double wbar, double tau_max, int n,
                     PathKind kind = PathKind::switch_on) {
  RateParams p;
  p.kind = kind;
  p.wbar = wbar;
  p.taubar_max = tau_max;
  p.n_samples = n;
  return build_rate_table(p);
}

struct CliRun {
  int exit_code;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  CliRun r{-1, {}};
  const std::string cmd = g_cli_bin + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// --- criteria ---------------------------------------------------------------

// 1. The dephasing channel from quadrature matches its closed form.
std::pair<bool, std::string> c1_dephasing_closed_form() {
  double worst = 0.0;
  double worst_t = 0.0;
  RateParams p;
  p.wbar = 1.0;
  p.taubar_max = 12.0;
  p.n_samples = 160;
  const RateTable table = build_rate_table(p);
  for (std::size_t i = 1; i < table.grid().size(); ++i) {
    const double t = table.grid()[i];
    const double diff = std::abs(table.row(i).g3 - g3_closed_form(t));
    if (diff > worst) {
      worst = diff;
      worst_t = t;
    }
  }
  return {worst < 1e-6,
          "max |g3_quad - g3_closed| = " + fmt(worst) + " at taubar = " +
              fmt(worst_t) + " (tol 1e-6)"};
}

// 2. Late-time rates relax to the thermal values and obey detailed balance.
std::pair<bool, std::string> c2_late_time_thermalization() {
  double worst = 0.0;
  for (double w : {0.5, 1.0, 2.0}) {
    const double diff = std::abs(delta_fdot(20.0, w));
    worst = std::max(worst, diff);
  }
  // Detailed balance of the stationary response at the boost temperature.
  double kms = 0.0;
  for (double w : {0.3, 0.5, 1.0, 2.0}) {
    const double lhs = planck_term(-w);
    const double rhs = std::exp(2.0 * kPi * w) * planck_term(w);
    kms = std::max(kms, std::abs(lhs - rhs) / rhs);
  }
  const bool pass = worst < 1e-8 && kms < 1e-12;
  return {pass, "max |delta_fdot(20, w)| = " + fmt(worst) +
                    " (tol 1e-8), detailed-balance residual = " + fmt(kms) +
                    " (tol 1e-12)"};
}

// 3. The g2 sign change sits just below wbar = 1.
std::pair<bool, std::string> c3_gamma2_threshold() {
  ScanOptions opts;
  opts.taubar_max = 10.0;
  opts.n_samples = 240;
  opts.resolution = 0.01;
  const ThresholdScan scan = gamma2_threshold_scan(0.5, 2.0, opts);
  const bool pass = scan.threshold > 0.9 && scan.threshold <= 1.1;
  return {pass, "onset of negative g2 at wbar = " + fmt(scan.threshold) +
                    ", bracket [" + fmt(scan.bracket_lo) + ", " +
                    fmt(scan.bracket_hi) + "] (expected within (0.9, 1.1])"};
}

// 4. g1 and g3 stay positive for small gaps where g2 already dips.
std::pair<bool, std::string> c4_other_rates_stay_positive() {
  double min_g1 = 1e300;
  double min_g3 = 1e300;
  for (double w : {0.05, 0.2, 0.5}) {
    const RateTable table = make_table(w, 12.0, 240);
    for (std::size_t i = 1; i < table.grid().size(); ++i) {
      min_g1 = std::min(min_g1, table.row(i).g1);
      min_g3 = std::min(min_g3, table.row(i).g3);
    }
  }
  const bool pass = min_g1 > 0.0 && min_g3 > 0.0;
  return {pass, "min g1 = " + fmt(min_g1) + ", min g3 = " + fmt(min_g3) +
                    " over wbar in {0.05, 0.2, 0.5} (both must be > 0)"};
}

// 5. Complete positivity of the full map fails only above wbar ~ 1.5.
std::pair<bool, std::string> c5_cp_threshold() {
  ScanOptions opts;
  opts.taubar_max = 15.0;
  opts.n_samples = 320;
  opts.resolution = 0.01;
  const ThresholdScan scan = cp_threshold_scan(1.40, 1.65, opts);
  const bool pass = scan.threshold > 1.45 && scan.threshold < 1.60;
  return {pass, "CP loss onset at wbar = " + fmt(scan.threshold) +
                    ", min P0 beyond it = " + fmt(scan.min_witness) +
                    " at taubar = " + fmt(scan.argmin_taubar) +
                    " (expected onset within (1.45, 1.60))"};
}

// 6. Initial decay slopes: excited state starts at -wbar/2, ground at 0.
std::pair<bool, std::string> c6_initial_slopes() {
  double worst = 0.0;
  for (double w : {0.5, 1.0, 2.0}) {
    const RateTable table = make_table(w, 2.0, 200);
    const QubitState excited{0.0, 0.0, -1.0};
    const QubitState ground{0.0, 0.0, 1.0};
    const StateTrajectory te = evolve_state(excited, table, 0.0, 2.0);
    const StateTrajectory tg = evolve_state(ground, table, 0.0, 2.0);
    const auto pop1 = [](const StateTrajectory& tr, double t) {
      return 0.5 * (1.0 - tr.eval(t).z);
    };
    // One-sided 4-point stencil at taubar = 0.
    const double h = 1e-3;
    const auto slope = [&](const StateTrajectory& tr) {
      return (-11.0 / 6.0 * pop1(tr, 0.0) + 3.0 * pop1(tr, h) -
              1.5 * pop1(tr, 2.0 * h) + pop1(tr, 3.0 * h) / 3.0) /
             h;
    };
    worst = std::max(worst, std::abs(slope(te) + 0.5 * w));
    worst = std::max(worst, std::abs(slope(tg)));
  }
  return {worst < 1e-6,
          "max slope error = " + fmt(worst) +
              " against -wbar/2 (excited) and 0 (ground), tol 1e-6"};
}

// 7. CP of the stepwise maps tracks the sign of the sampled rates.
std::pair<bool, std::string> c7_divisibility_tracks_rates() {
  std::ostringstream detail;
  bool pass = true;
  for (double w : {0.5, 1.6}) {
    const RateTable table = make_table(w, 10.0, 240);
    std::vector<double> grid;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
      grid.push_back(0.05 + (10.0 - 0.1) * i / static_cast<double>(n));
    const DivisibilityReport rep = divisibility_report(table, grid);

    // (a) Intervals whose sampled rates are all nonnegative must be CP.
    int bad_cp = 0;
    for (const auto& iv : rep.intervals)
      if (iv.min_rate >= -1e-8 && iv.choi_min < -1e-8) ++bad_cp;
    // (b) Every region of clearly negative g2 must contain a non-CP step.
    int uncaught_regions = 0;
    bool in_region = false;
    bool caught = false;
    for (const auto& iv : rep.intervals) {
      double g2_min = 1e300;
      for (int k = 0; k <= 8; ++k) {
        const double t = iv.t0 + (iv.t1 - iv.t0) * k / 8.0;
        g2_min = std::min(g2_min, table.triple(t).g2);
      }
      const bool neg = g2_min < -1e-4;
      if (neg && !in_region) {
        in_region = true;
        caught = false;
      }
      if (in_region && iv.choi_min < -1e-6) caught = true;
      if (!neg && in_region) {
        if (!caught) ++uncaught_regions;
        in_region = false;
      }
    }
    if (in_region && !caught) ++uncaught_regions;
    const bool this_ok = bad_cp == 0 && uncaught_regions == 0;
    pass = pass && this_ok;
    detail << "wbar=" << fmt(w) << ": " << rep.n_noncp
           << " non-CP steps, false flags " << bad_cp << ", missed regions "
           << uncaught_regions << "; ";
  }
  return {pass, detail.str() + "(both counts must be 0)"};
}

// 8. An ancilla with a spare level witnesses the CP violation as a rise in
// distinguishability; below threshold every witness is monotone.
std::pair<bool, std::string> c8_extended_witness() {
  const auto rise_for = [](double wbar, double* when, double* g2_at) {
    const RateTable table = make_table(wbar, 4.0, 256);
    const PositivityCurves curves = population_curves(table);
    const ChannelCurves channel(curves);
    const auto pairs = sampled_extended_pairs(3, 10, 20240817);
    double best = 0.0;
    for (const auto& pr : pairs) {
      const std::vector<double> curve =
          helstrom_curve(pr, channel, curves.grid);
      double floor = curve.front();
      for (std::size_t i = 0; i < curve.size(); ++i) {
        floor = std::min(floor, curve[i]);
        if (curve[i] - floor > best) {
          best = curve[i] - floor;
          if (when) *when = curves.grid[i];
          if (g2_at) *g2_at = table.triple(curves.grid[i]).g2;
        }
      }
    }
    return best;
  };
  double when = 0.0;
  double g2_at = 0.0;
  const double rise_high = rise_for(4.0, &when, &g2_at);
  const double rise_low = rise_for(0.5, nullptr, nullptr);
  const bool pass = rise_high >= 1e-4 && g2_at < 0.0 && rise_low < 1e-8;
  return {pass, "bias rise " + fmt(rise_high) + " at taubar = " + fmt(when) +
                    " where g2 = " + fmt(g2_at) + " (needs >= 1e-4 with g2 < "
                    "0); below threshold rise = " +
                    fmt(rise_low) + " (needs < 1e-8)"};
}

// 9. Unextended trace distance shows no backflow anywhere we sample.
std::pair<bool, std::string> c9_no_unextended_backflow() {
  double worst = 0.0;
  std::string where;
  for (double w : {0.2, 1.6, 4.0}) {
    const RateTable table = make_table(w, 8.0, 200);
    const BlpResult result = blp_sample(table, 200, 20240817);
    if (result.measure > worst) {
      worst = result.measure;
      std::ostringstream os;
      os << "wbar=" << fmt(w) << " pair (" << fmt(result.witness.rho1.x)
         << "," << fmt(result.witness.rho1.y) << ","
         << fmt(result.witness.rho1.z) << ")/(" << fmt(result.witness.rho2.x)
         << "," << fmt(result.witness.rho2.y) << ","
         << fmt(result.witness.rho2.z) << ")";
      where = os.str();
    }
  }
  const bool pass = worst <= 1e-8;
  return {pass, "max sampled backflow measure = " + fmt(worst) +
                    (where.empty() ? "" : " [" + where + "]") +
                    " over 200 pairs x 3 gaps (tol 1e-8)"};
}

// 10. The profile that stops accelerating violates positivity immediately.
std::pair<bool, std::string> c10_reversed_profile() {
  std::ostringstream detail;
  bool pass = true;
  for (double w : {0.2, 1.0}) {
    const ReversedCheck check = reversed_path_check(w);
    pass = pass && check.all_negative;
    detail << "wbar=" << fmt(w) << ": P0 = {";
    for (std::size_t i = 0; i < check.P0_at_probes.size(); ++i)
      detail << (i ? ", " : "") << fmt(check.P0_at_probes[i]);
    detail << "}; ";
  }
  return {pass, detail.str() + "(every probe must be negative)"};
}

// 11. The subtracted-kernel rates agree with the regulator extrapolation of
// the raw correlation function.
std::pair<bool, std::string> c11_regulator_cross_check() {
  struct Point {
    double taubar, wbar;
  };
  const std::vector<Point> points = {{1.0, 1.0}, {2.0, 0.5}, {-1.0, -2.0}};
  double worst = 0.0;
  Worldline w;
  w.kind = PathKind::switch_on;
  for (const Point& pt : points) {
    const double reference = fdot(pt.taubar, pt.wbar);
    const double regulated =
        fdot_wightman_extrapolated(w, pt.taubar, pt.wbar);
    worst = std::max(worst, std::abs(regulated - reference));
  }
  return {worst < 1e-4, "max |regulated - subtracted| = " + fmt(worst) +
                            " over 3 probe points (tol 1e-4)"};
}

// 12. Repeated CLI invocations are byte-identical, including parallel runs.
std::pair<bool, std::string> c12_cli_determinism() {
  const std::vector<std::string> cases = {
      "rates --wbar 0.5 --samples 24 --tau-max 2",
      "rates --wbar 1.2 --samples 24 --tau-max 2 --path reversed",
      "cp --wbar 2 --samples 64 --tau-max 6",
      "scan --target gamma2 --wbar-min 0.9 --wbar-max 1.1 --resolution 0.05 "
      "--samples 48 --tau-max 6",
      "evolve --wbar 0.2 --samples 48 --tau-max 3 --rows 40 --init z=-1",
      "backflow --wbar 1.6 --samples 48 --tau-max 3 --pairs 20 "
      "--ancilla-dim 3 --input spare",
      "reversed --wbar 0.2 --samples 48",
  };
  int mismatches = 0;
  int failures = 0;
  for (const std::string& args : cases) {
    const CliRun first = run_cli(args);
    const CliRun second = run_cli(args);
    if (first.exit_code != 0 || second.exit_code != 0) ++failures;
    if (first.out != second.out) ++mismatches;
  }
  const bool pass = mismatches == 0 && failures == 0;
  return {pass, fmt(static_cast<double>(cases.size())) +
                    " subcommand invocations run twice: " +
                    std::to_string(failures) + " nonzero exits, " +
                    std::to_string(mismatches) + " byte mismatches"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
    return 99;
  }
  g_cli_bin = argv[1];

  criterion(1, "dephasing closed form", c1_dephasing_closed_form);
  criterion(2, "late-time thermalization", c2_late_time_thermalization);
  criterion(3, "g2 sign-change threshold", c3_gamma2_threshold);
  criterion(4, "g1/g3 positivity", c4_other_rates_stay_positive);
  criterion(5, "CP-loss threshold", c5_cp_threshold);
  criterion(6, "initial decay slopes", c6_initial_slopes);
  criterion(7, "divisibility vs rate signs", c7_divisibility_tracks_rates);
  criterion(8, "extended-witness backflow", c8_extended_witness);
  criterion(9, "no unextended backflow", c9_no_unextended_backflow);
  criterion(10, "reversed-profile positivity", c10_reversed_profile);
  criterion(11, "regulator cross-check", c11_regulator_cross_check);
  criterion(12, "CLI determinism", c12_cli_determinism);

  if (g_failures == 0)
    std::printf("all 12 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
