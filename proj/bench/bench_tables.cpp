// Wall-clock comparison of the serial and parallel rate-table builds.
// The parallel build must win on wall time and lose nothing in content:
// the outputs are compared byte for byte.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <optional>

#include "udw/parallel.hpp"
#include "udw/rates.hpp"

using namespace udw;

namespace {

double timed_build(const RateParams& params, std::optional<RateTable>* out) {
  const auto start = std::chrono::steady_clock::now();
  out->emplace(build_rate_table(params));
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

bool identical(const RateTable& a, const RateTable& b) {
  if (a.grid().size() != b.grid().size()) return false;
  const std::size_t bytes = a.grid().size() * sizeof(double);
  return std::memcmp(a.col_g1().data(), b.col_g1().data(), bytes) == 0 &&
         std::memcmp(a.col_g2().data(), b.col_g2().data(), bytes) == 0 &&
         std::memcmp(a.col_g3().data(), b.col_g3().data(), bytes) == 0;
}

}  // namespace

int main() {
  std::printf("rate-table build, serial vs parallel (%d threads)\n",
              max_threads());

  const struct {
    const char* label;
    PathKind kind;
    double wbar;
    double tau_max;
    int n;
  } cases[] = {
      {"switch_on  wbar=1.0", PathKind::switch_on, 1.0, 15.0, 320},
      {"switch_on  wbar=2.0", PathKind::switch_on, 2.0, 15.0, 320},
      {"reversed   wbar=0.5", PathKind::reversed_stop, 0.5, 3.0, 320},
  };

  bool all_identical = true;
  for (const auto& c : cases) {
    RateParams p;
    p.kind = c.kind;
    p.wbar = c.wbar;
    p.taubar_max = c.tau_max;
    p.n_samples = c.n;

    std::optional<RateTable> serial_table, parallel_table;
    p.exec = Exec::serial;
    const double t_serial = timed_build(p, &serial_table);
    p.exec = Exec::parallel;
    const double t_parallel = timed_build(p, &parallel_table);
    const bool same = identical(*serial_table, *parallel_table);
    all_identical = all_identical && same;
    std::printf("  %-20s  serial %7.3fs  parallel %7.3fs  speedup %5.2fx  %s\n",
                c.label, t_serial, t_parallel,
                t_parallel > 0.0 ? t_serial / t_parallel : 0.0,
                same ? "bitwise identical" : "OUTPUTS DIFFER");
  }
  if (!all_identical) {
    std::printf("parallel build changed the numbers; that is a bug\n");
    return 1;
  }
  return 0;
}
