#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "udw/information.hpp"
#include "udw/version.hpp"

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RunConfig {
  double wbar = 1.0;
  double alpha = 1.0;
  double taubar_max = -1.0;  // sentinel: per-command default
  int samples = 320;
  int rows = 200;
  std::string path = "switch_on";
  bool markovian_baseline = false;
  bool dephasing_only = false;
  bool rotation = false;
  bool physical = false;
  bool serial = false;
  bool describe = false;
  std::string init = "z=+1";
  std::string output;
  std::string format;  // per-command default when empty
  std::string target;
  double wbar_min = 0.0, wbar_max = 0.0, resolution = 0.01;
  std::vector<double> probes = {0.01, 0.1, 1.0};
  int pairs = 220;
  int ancilla_dim = 2;
  std::string input_kind = "bell";
  std::uint64_t seed = 20240817;
  double abs_tol = 1e-10, rel_tol = 1e-8;
};

// Sorted key = value echo of the options a command actually used; written
// into every output so runs are self-describing and checksummable.
using Echo = std::map<std::string, std::string>;

std::string echo_checksum(const Echo& echo) {
  std::string blob;
  for (const auto& [k, v] : echo) blob += k + "=" + v + "\n";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(blob)));
  return buf;
}

void write_output(const std::string& target_path, const std::string& content) {
  if (target_path.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::path p(target_path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("UDW_OUTPUT_DIR"))
      p = std::filesystem::path(dir) / p;
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + p.string());
  out << content;
  out.flush();
  if (!out.good()) throw IoError("write failed: " + p.string());
}

std::string csv_header(const std::string& command, const Echo& echo,
                       const RunConfig& cfg,
                       const std::vector<std::string>& columns) {
  std::ostringstream os;
  os << "# " << udw::k_version << "\n";
  os << "# command = " << command << "\n";
  for (const auto& [k, v] : echo) os << "# " << k << " = " << v << "\n";
  os << "# config_checksum = " << echo_checksum(echo) << "\n";
  if (cfg.physical) {
    os << "# physical_time_multiplier = " << fmt17(cfg.alpha) << "\n";
    os << "# physical_rate_multiplier = "
       << fmt17(1.0 / (3.14159265358979323846 * cfg.alpha)) << "\n";
  }
  os << "# columns: ";
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << "\n";
  return os.str();
}

ordered_json json_frame(const std::string& command, const Echo& echo) {
  ordered_json j;
  j["version"] = udw::k_version;
  j["command"] = command;
  ordered_json cfg_obj;
  for (const auto& [k, v] : echo) cfg_obj[k] = v;
  j["config"] = cfg_obj;
  j["config_checksum"] = echo_checksum(echo);
  return j;
}

udw::PathKind parse_path(const std::string& name) {
  if (name == "switch_on") return udw::PathKind::switch_on;
  if (name == "eternal") return udw::PathKind::eternal_acceleration;
  if (name == "inertial") return udw::PathKind::inertial;
  if (name == "reversed") return udw::PathKind::reversed_stop;
  throw UsageError("unknown path '" + name +
                   "' (expected switch_on, eternal, inertial, reversed)");
}

udw::QubitState parse_init(const std::string& text) {
  udw::QubitState s;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw UsageError("bad --init token '" + tok + "' (want x=..,y=..,z=..)");
    const std::string key = tok.substr(0, eq);
    double val;
    try {
      val = std::stod(tok.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad --init value in '" + tok + "'");
    }
    if (key == "x")
      s.x = val;
    else if (key == "y")
      s.y = val;
    else if (key == "z")
      s.z = val;
    else
      throw UsageError("bad --init component '" + key + "'");
  }
  if (s.x * s.x + s.y * s.y + s.z * s.z > 1.0 + 1e-12)
    throw UsageError("--init lies outside the Bloch ball");
  return s;
}

udw::RateParams table_params(const RunConfig& cfg, udw::PathKind kind,
                             double default_tau_max) {
  udw::RateParams p;
  p.kind = kind;
  p.wbar = cfg.wbar;
  p.taubar_max = cfg.taubar_max > 0.0 ? cfg.taubar_max : default_tau_max;
  p.n_samples = cfg.samples;
  p.quad.abs_tol = cfg.abs_tol;
  p.quad.rel_tol = cfg.rel_tol;
  p.exec = cfg.serial ? udw::Exec::serial : udw::Exec::parallel;
  return p;
}

Echo common_echo(const RunConfig& cfg, const udw::RateParams& p) {
  Echo e;
  e["wbar"] = fmt17(p.wbar);
  e["alpha"] = fmt17(cfg.alpha);
  e["taubar_max"] = fmt17(p.taubar_max);
  e["samples"] = std::to_string(p.n_samples);
  e["abs_tol"] = fmt17(p.quad.abs_tol);
  e["rel_tol"] = fmt17(p.quad.rel_tol);
  e["exec"] = cfg.serial ? "serial" : "parallel";
  return e;
}

// --- subcommands -------------------------------------------------------------

constexpr const char* kDescribeRates = R"(rates: sampled master-equation rate columns.
  taubar            proper time since the kick, acceleration units
  g1, g2, g3        pi*alpha*gamma_i; g1/g2 drive the two population channels
                    (gaps -wbar/+wbar), g3 the dephasing channel
  g3_closed_form    closed form of g3 where one exists (nan for reversed)
  delta_fdot_plus   g2/2 - planck(+wbar): finite-time correction at +wbar
  delta_fdot_minus  g1/2 - planck(-wbar): same correction at -wbar
With --dephasing-only the columns reduce to taubar, g3, g3_closed_form and
wbar is fixed at 0. --markovian-baseline freezes the rates at their
stationary values. --physical adds comment lines with the dimensionful
multipliers for --alpha.
)";

int cmd_rates(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeRates;
    return 0;
  }
  RunConfig c = cfg;
  if (c.dephasing_only) c.wbar = 0.0;
  if (!c.dephasing_only && c.wbar == 0.0)
    throw UsageError("wbar = 0 needs --dephasing-only (the g1/g2 channels "
                     "degenerate there)");
  const udw::PathKind kind = c.markovian_baseline
                                 ? udw::PathKind::eternal_acceleration
                                 : parse_path(c.path);
  const udw::RateParams params = table_params(c, kind, 10.0);
  const udw::RateTable table = udw::build_rate_table(params);

  Echo echo = common_echo(c, params);
  echo["path"] = c.markovian_baseline ? "eternal" : c.path;
  echo["dephasing_only"] = c.dephasing_only ? "true" : "false";

  const auto closed_g3 = [&](double t) {
    switch (kind) {
      case udw::PathKind::switch_on:
        return udw::g3_closed_form(t);
      case udw::PathKind::eternal_acceleration:
        return udw::planck_term(0.0);
      case udw::PathKind::inertial:
        return 0.0;
      default:
        return std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::vector<std::string> cols;
  if (c.dephasing_only)
    cols = {"taubar", "g3", "g3_closed_form"};
  else
    cols = {"taubar", "g1",
            "g2",     "g3",
            "g3_closed_form", "delta_fdot_plus",
            "delta_fdot_minus"};
  std::ostringstream os;
  os << csv_header("rates", echo, c, cols);
  const double pw = udw::planck_term(c.wbar);
  const double mw = udw::planck_term(-c.wbar);
  for (std::size_t i = 0; i < table.grid().size(); ++i) {
    const double t = table.grid()[i];
    const udw::RateTriple g = table.row(i);
    if (c.dephasing_only) {
      os << fmt17(t) << ',' << fmt17(g.g3) << ',' << fmt17(closed_g3(t)) << "\n";
    } else {
      os << fmt17(t) << ',' << fmt17(g.g1) << ',' << fmt17(g.g2) << ','
         << fmt17(g.g3) << ',' << fmt17(closed_g3(t)) << ','
         << fmt17(0.5 * g.g2 - pw) << ',' << fmt17(0.5 * g.g1 - mw) << "\n";
    }
  }
  write_output(c.output, os.str());
  return 0;
}

constexpr const char* kDescribeEvolve = R"(evolve: Bloch trajectory from --init under the time-local master equation.
  taubar      proper time since the kick
  x, y, z     Bloch components
  pop1        occupation of the |1> level, (1 - z)/2
--markovian-baseline evolves under the stationary rates instead; --rotation
adds the free precession about z at rate wbar. Rows are uniform over
[0, taubar_max] (--rows, default 200).
)";

int cmd_evolve(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeEvolve;
    return 0;
  }
  if (cfg.wbar == 0.0) throw UsageError("evolve needs a nonzero wbar");
  if (cfg.rows < 2) throw UsageError("--rows must be >= 2");
  const udw::PathKind kind = cfg.markovian_baseline
                                 ? udw::PathKind::eternal_acceleration
                                 : udw::PathKind::switch_on;
  const udw::RateParams params = table_params(cfg, kind, 15.0);
  const udw::RateTable table = udw::build_rate_table(params);
  const udw::QubitState init = parse_init(cfg.init);
  udw::BlochRhsParams rhs;
  rhs.include_hamiltonian = cfg.rotation;
  rhs.wbar = cfg.wbar;
  const double t0 = table.grid().front();
  const double t1 = table.grid().back();
  const udw::StateTrajectory traj =
      udw::evolve_state(init, table, t0, t1, {}, rhs);

  Echo echo = common_echo(cfg, params);
  echo["init"] = cfg.init;
  echo["markovian_baseline"] = cfg.markovian_baseline ? "true" : "false";
  echo["rotation"] = cfg.rotation ? "true" : "false";
  echo["rows"] = std::to_string(cfg.rows);

  std::ostringstream os;
  os << csv_header("evolve", echo, cfg, {"taubar", "x", "y", "z", "pop1"});
  for (int i = 0; i < cfg.rows; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / (cfg.rows - 1);
    const udw::QubitState s = traj.eval(t);
    os << fmt17(t) << ',' << fmt17(s.x) << ',' << fmt17(s.y) << ','
       << fmt17(s.z) << ',' << fmt17(0.5 * (1.0 - s.z)) << "\n";
  }
  write_output(cfg.output, os.str());
  return 0;
}

constexpr const char* kDescribeCp = R"(cp: complete-positivity diagnosis of the evolution map.
CSV columns:
  taubar          proper time since the kick
  Gamma, Lambda   population and coherence decay exponents
  G               growth integral Int e^Gamma a2/2
  P0, P1          populations of |1> from the two corner initial states;
                  P0 < 0 is exactly a CP violation
  zeta            affine z shift, 1 - P0 - P1
Comment lines (or the JSON body with --format json) carry the verdict:
min_P0 and where it occurs, max_P1, and the 1e-8 decision tolerance.
)";

int cmd_cp(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeCp;
    return 0;
  }
  if (cfg.wbar == 0.0) throw UsageError("cp needs a nonzero wbar");
  const udw::RateParams params =
      table_params(cfg, udw::PathKind::switch_on, 15.0);
  const udw::PositivityCurves curves =
      udw::population_curves(udw::build_rate_table(params));
  const udw::CpReport report = udw::cp_check(curves);

  Echo echo = common_echo(cfg, params);
  const std::string format = cfg.format.empty() ? "csv" : cfg.format;
  if (format == "json") {
    ordered_json j = json_frame("cp", echo);
    j["verdict"] = report.cp_satisfied ? "satisfied" : "violated";
    j["min_P0"] = report.min_P0;
    j["argmin_taubar"] = report.argmin_taubar;
    j["max_P1"] = report.max_P1;
    j["tol"] = report.tol;
    write_output(cfg.output, j.dump(2) + "\n");
    return 0;
  }
  if (format != "csv") throw UsageError("--format must be csv or json");
  std::ostringstream os;
  os << csv_header("cp", echo, cfg,
                   {"taubar", "Gamma", "Lambda", "G", "P0", "P1", "zeta"});
  std::ostringstream verdict;
  verdict << "# verdict = " << (report.cp_satisfied ? "satisfied" : "violated")
          << "\n# min_P0 = " << fmt17(report.min_P0)
          << "\n# argmin_taubar = " << fmt17(report.argmin_taubar)
          << "\n# max_P1 = " << fmt17(report.max_P1)
          << "\n# tol = " << fmt17(report.tol) << "\n";
  std::string body = os.str();
  // Verdict comments sit between the header block and the column row.
  const auto cut = body.rfind("# columns:");
  body.insert(cut, verdict.str());
  os.str(std::move(body));
  os.seekp(0, std::ios::end);
  for (std::size_t i = 0; i < curves.grid.size(); ++i) {
    os << fmt17(curves.grid[i]) << ',' << fmt17(curves.Gamma[i]) << ','
       << fmt17(curves.Lambda[i]) << ',' << fmt17(curves.G[i]) << ','
       << fmt17(curves.P0[i]) << ',' << fmt17(curves.P1[i]) << ','
       << fmt17(curves.zeta[i]) << "\n";
  }
  write_output(cfg.output, os.str());
  return 0;
}

constexpr const char* kDescribeScan = R"(scan: bracket the onset gap of a sign change.
  --target gamma2   sign change of min_{taubar>0} g2(taubar; wbar)
  --target cp       onset of min P0 < -1e-6 (complete positivity lost)
JSON fields: threshold, bracket_lo, bracket_hi (final bisection bracket of
width --resolution), min_witness and argmin_taubar at bracket_hi, tolerance,
and the full list of evaluated gaps with their witness values. CSV emits the
evaluated gaps as rows with the summary in comments.
)";

int cmd_scan(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeScan;
    return 0;
  }
  if (cfg.target != "gamma2" && cfg.target != "cp")
    throw UsageError("scan needs --target gamma2 or --target cp");
  if (!(cfg.wbar_max > cfg.wbar_min))
    throw UsageError("scan needs --wbar-min < --wbar-max");
  udw::ScanOptions opts;
  opts.taubar_max = cfg.taubar_max > 0.0 ? cfg.taubar_max
                                         : (cfg.target == "cp" ? 15.0 : 10.0);
  opts.n_samples = cfg.samples;
  opts.resolution = cfg.resolution;
  opts.quad.abs_tol = cfg.abs_tol;
  opts.quad.rel_tol = cfg.rel_tol;
  opts.exec = cfg.serial ? udw::Exec::serial : udw::Exec::parallel;

  const udw::ThresholdScan scan =
      cfg.target == "cp" ? udw::cp_threshold_scan(cfg.wbar_min, cfg.wbar_max, opts)
                         : udw::gamma2_threshold_scan(cfg.wbar_min, cfg.wbar_max, opts);

  Echo echo;
  echo["target"] = cfg.target;
  echo["wbar_min"] = fmt17(cfg.wbar_min);
  echo["wbar_max"] = fmt17(cfg.wbar_max);
  echo["resolution"] = fmt17(cfg.resolution);
  echo["taubar_max"] = fmt17(opts.taubar_max);
  echo["samples"] = std::to_string(opts.n_samples);
  echo["abs_tol"] = fmt17(opts.quad.abs_tol);
  echo["rel_tol"] = fmt17(opts.quad.rel_tol);
  echo["exec"] = cfg.serial ? "serial" : "parallel";
  echo["alpha"] = fmt17(cfg.alpha);

  const std::string format = cfg.format.empty() ? "json" : cfg.format;
  if (format == "json") {
    ordered_json j = json_frame("scan", echo);
    j["threshold"] = scan.threshold;
    j["bracket_lo"] = scan.bracket_lo;
    j["bracket_hi"] = scan.bracket_hi;
    j["min_witness"] = scan.min_witness;
    j["argmin_taubar"] = scan.argmin_taubar;
    j["tolerance"] = scan.tolerance;
    j["wbar_grid"] = scan.wbar_grid;
    j["witness"] = scan.witness;
    write_output(cfg.output, j.dump(2) + "\n");
    return 0;
  }
  if (format != "csv") throw UsageError("--format must be csv or json");
  std::ostringstream os;
  os << csv_header("scan", echo, cfg, {"wbar", "witness"});
  std::string body = os.str();
  std::ostringstream summary;
  summary << "# threshold = " << fmt17(scan.threshold)
          << "\n# bracket_lo = " << fmt17(scan.bracket_lo)
          << "\n# bracket_hi = " << fmt17(scan.bracket_hi)
          << "\n# min_witness = " << fmt17(scan.min_witness)
          << "\n# argmin_taubar = " << fmt17(scan.argmin_taubar)
          << "\n# tolerance = " << fmt17(scan.tolerance) << "\n";
  body.insert(body.rfind("# columns:"), summary.str());
  os.str(std::move(body));
  os.seekp(0, std::ios::end);
  for (std::size_t i = 0; i < scan.wbar_grid.size(); ++i)
    os << fmt17(scan.wbar_grid[i]) << ',' << fmt17(scan.witness[i]) << "\n";
  write_output(cfg.output, os.str());
  return 0;
}

constexpr const char* kDescribeBackflow = R"(backflow: information-flow diagnostics along the evolution.
  taubar   proper time since the kick
  D        trace distance between the evolved antipodal z pair
  sigma    d D / d taubar (positive = information backflow)
  E        Helstrom bias of the ancilla-assisted pair selected by
           --ancilla-dim {2,3} and --input {product, bell, spare}
Comment lines report the sampled trace-distance backflow measure over
--pairs seeded pairs (--seed) with its witness, and the largest single-step
increase of E.
)";

int cmd_backflow(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeBackflow;
    return 0;
  }
  if (cfg.wbar == 0.0) throw UsageError("backflow needs a nonzero wbar");
  if (cfg.input_kind != "product" && cfg.input_kind != "bell" &&
      cfg.input_kind != "spare")
    throw UsageError("--input must be product, bell, or spare");
  const udw::RateParams params =
      table_params(cfg, udw::PathKind::switch_on, 10.0);
  const udw::RateTable table = udw::build_rate_table(params);
  const udw::PositivityCurves curves = udw::population_curves(table);
  const udw::ChannelCurves channel(curves);

  udw::StatePair pair;
  pair.rho1 = {0.0, 0.0, 1.0};
  pair.rho2 = {0.0, 0.0, -1.0};
  const udw::ExtendedInput kind = cfg.input_kind == "product"
                                      ? udw::ExtendedInput::product
                                  : cfg.input_kind == "bell"
                                      ? udw::ExtendedInput::max_entangled
                                      : udw::ExtendedInput::spare_level;
  const udw::ExtendedPair extended =
      udw::extend_pair(pair, cfg.ancilla_dim, kind);
  const std::vector<double> e_curve =
      udw::helstrom_curve(extended, channel, curves.grid);

  std::vector<double> d_curve(curves.grid.size());
  for (std::size_t i = 0; i < curves.grid.size(); ++i)
    d_curve[i] = std::exp(-curves.Gamma[i]);
  const udw::CubicSpline d_spline(curves.grid, d_curve);

  const udw::BlpResult blp = udw::blp_sample(table, cfg.pairs, cfg.seed);
  double max_e_step = 0.0;
  for (std::size_t i = 1; i < e_curve.size(); ++i)
    max_e_step = std::max(max_e_step, e_curve[i] - e_curve[i - 1]);

  Echo echo = common_echo(cfg, params);
  echo["ancilla_dim"] = std::to_string(cfg.ancilla_dim);
  echo["input"] = cfg.input_kind;
  echo["pairs"] = std::to_string(cfg.pairs);
  echo["seed"] = std::to_string(cfg.seed);

  std::ostringstream os;
  os << csv_header("backflow", echo, cfg, {"taubar", "D", "sigma", "E"});
  std::string body = os.str();
  std::ostringstream summary;
  summary << "# blp_measure = " << fmt17(blp.measure) << "\n# blp_witness = ("
          << fmt17(blp.witness.rho1.x) << ' ' << fmt17(blp.witness.rho1.y)
          << ' ' << fmt17(blp.witness.rho1.z) << ") vs ("
          << fmt17(blp.witness.rho2.x) << ' ' << fmt17(blp.witness.rho2.y)
          << ' ' << fmt17(blp.witness.rho2.z) << ")\n# max_E_step = "
          << fmt17(max_e_step) << "\n";
  body.insert(body.rfind("# columns:"), summary.str());
  os.str(std::move(body));
  os.seekp(0, std::ios::end);
  for (std::size_t i = 0; i < curves.grid.size(); ++i) {
    os << fmt17(curves.grid[i]) << ',' << fmt17(d_curve[i]) << ','
       << fmt17(d_spline.derivative(curves.grid[i])) << ','
       << fmt17(e_curve[i]) << "\n";
  }
  write_output(cfg.output, os.str());
  return 0;
}

constexpr const char* kDescribeReversed = R"(reversed: positivity probe for the profile that stops accelerating.
Evaluates P0 (the ground-start population of |1>) at the probe times
(--probes, default 0.01,0.1,1.0). Negative values mean the evolution map is
not completely positive there; for this profile that is expected at every
probe. Magnitudes depend on the 1e-3 grid floor, signs do not.
)";

int cmd_reversed(const RunConfig& cfg) {
  if (cfg.describe) {
    std::cout << kDescribeReversed;
    return 0;
  }
  if (cfg.wbar == 0.0) throw UsageError("reversed needs a nonzero wbar");
  udw::ScanOptions opts;
  opts.n_samples = cfg.samples;
  opts.quad.abs_tol = cfg.abs_tol;
  opts.quad.rel_tol = cfg.rel_tol;
  opts.exec = cfg.serial ? udw::Exec::serial : udw::Exec::parallel;
  const udw::ReversedCheck check =
      udw::reversed_path_check(cfg.wbar, cfg.probes, opts);

  Echo echo;
  echo["wbar"] = fmt17(cfg.wbar);
  echo["samples"] = std::to_string(cfg.samples);
  echo["abs_tol"] = fmt17(cfg.abs_tol);
  echo["rel_tol"] = fmt17(cfg.rel_tol);
  echo["exec"] = cfg.serial ? "serial" : "parallel";
  echo["alpha"] = fmt17(cfg.alpha);
  {
    std::string plist;
    for (std::size_t i = 0; i < check.probes.size(); ++i)
      plist += (i ? "," : "") + fmt17(check.probes[i]);
    echo["probes"] = plist;
  }

  const std::string format = cfg.format.empty() ? "json" : cfg.format;
  if (format == "json") {
    ordered_json j = json_frame("reversed", echo);
    j["probes"] = check.probes;
    j["P0_at_probes"] = check.P0_at_probes;
    j["all_negative"] = check.all_negative;
    write_output(cfg.output, j.dump(2) + "\n");
    return 0;
  }
  if (format != "csv") throw UsageError("--format must be csv or json");
  std::ostringstream os;
  os << csv_header("reversed", echo, cfg, {"probe_taubar", "P0"});
  std::string body = os.str();
  body.insert(body.rfind("# columns:"),
              std::string("# all_negative = ") +
                  (check.all_negative ? "true" : "false") + "\n");
  os.str(std::move(body));
  os.seekp(0, std::ios::end);
  for (std::size_t i = 0; i < check.probes.size(); ++i)
    os << fmt17(check.probes[i]) << ',' << fmt17(check.P0_at_probes[i]) << "\n";
  write_output(cfg.output, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent decay rates and open-system dynamics of a "
               "detector that starts accelerating at finite time"};
  app.set_version_flag("--version", std::string(udw::k_version));
  app.set_config("--config", "",
                 "configuration file; [subcommand] sections hold key = value "
                 "lines and can select the subcommand themselves");
  app.require_subcommand(0, 1);
  app.footer("Exit codes: 0 success, 2 usage error, 3 numerical failure, "
             "4 I/O failure.\nRelative --output paths are resolved against "
             "$UDW_OUTPUT_DIR when it is set.");

  RunConfig cfg;
  const auto add_common = [&](CLI::App* sub, bool with_wbar) {
    // --config lives on the root app; unmatched options fall through so it
    // can be given after the subcommand name too.
    sub->fallthrough();
    sub->configurable();
    if (with_wbar) sub->add_option("--wbar", cfg.wbar, "detector gap in acceleration units");
    sub->add_option("--alpha", cfg.alpha, "physical acceleration length 1/a");
    sub->add_option("--tau-max", cfg.taubar_max, "table extent in taubar");
    sub->add_option("--samples", cfg.samples, "rate table rows");
    sub->add_option("--abs-tol", cfg.abs_tol, "quadrature absolute tolerance");
    sub->add_option("--rel-tol", cfg.rel_tol, "quadrature relative tolerance");
    sub->add_option("-o,--output", cfg.output, "output file (default stdout)");
    sub->add_flag("--serial", cfg.serial, "disable the parallel table build");
    sub->add_flag("--physical", cfg.physical,
                  "emit dimensionful multipliers for --alpha");
    sub->add_flag("--describe", cfg.describe, "document the output columns");
  };

  CLI::App* rates = app.add_subcommand("rates", "sample the rate columns");
  add_common(rates, true);
  rates->add_option("--path", cfg.path,
                    "switch_on, eternal, inertial, or reversed");
  rates->add_flag("--markovian-baseline", cfg.markovian_baseline,
                  "use the stationary rates");
  rates->add_flag("--dephasing-only", cfg.dephasing_only,
                  "only the wbar = 0 channel");

  CLI::App* evolve = app.add_subcommand("evolve", "integrate a Bloch trajectory");
  add_common(evolve, true);
  evolve->add_option("--init", cfg.init, "initial state, e.g. z=+1 or x=0.3,z=-0.5");
  evolve->add_option("--rows", cfg.rows, "output rows");
  evolve->add_flag("--markovian-baseline", cfg.markovian_baseline,
                   "evolve under the stationary rates");
  evolve->add_flag("--rotation", cfg.rotation, "include free precession");

  CLI::App* cp = app.add_subcommand("cp", "complete-positivity diagnosis");
  add_common(cp, true);
  cp->add_option("--format", cfg.format, "csv (default) or json");

  CLI::App* scan = app.add_subcommand("scan", "bracket a sign-change threshold");
  add_common(scan, false);
  scan->add_option("--target", cfg.target, "gamma2 or cp");
  scan->add_option("--wbar-min", cfg.wbar_min, "lower end of the gap range");
  scan->add_option("--wbar-max", cfg.wbar_max, "upper end of the gap range");
  scan->add_option("--resolution", cfg.resolution, "final bracket width");
  scan->add_option("--format", cfg.format, "json (default) or csv");

  CLI::App* backflow = app.add_subcommand("backflow", "information-flow diagnostics");
  add_common(backflow, true);
  backflow->add_option("--ancilla-dim", cfg.ancilla_dim, "2 or 3");
  backflow->add_option("--input", cfg.input_kind, "product, bell, or spare");
  backflow->add_option("--pairs", cfg.pairs, "sampled state pairs");
  backflow->add_option("--seed", cfg.seed, "sampling seed");

  CLI::App* reversed = app.add_subcommand("reversed", "reversed-profile positivity probe");
  add_common(reversed, true);
  reversed->add_option("--probes", cfg.probes, "probe times")->delimiter(',');
  reversed->add_option("--format", cfg.format, "json (default) or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rates->parsed()) return cmd_rates(cfg);
    if (evolve->parsed()) return cmd_evolve(cfg);
    if (cp->parsed()) return cmd_cp(cfg);
    if (scan->parsed()) return cmd_scan(cfg);
    if (backflow->parsed()) return cmd_backflow(cfg);
    if (reversed->parsed()) return cmd_reversed(cfg);
    throw UsageError("missing subcommand (see --help)");
  } catch (const UsageError& e) {
    ordered_json err{{"error", e.what()}, {"kind", "usage"}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const IoError& e) {
    ordered_json err{{"error", e.what()}, {"kind", "io"}};
    std::cerr << err.dump() << "\n";
    return 4;
  } catch (const std::exception& e) {
    ordered_json err{{"error", e.what()}, {"kind", "numerical"}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
