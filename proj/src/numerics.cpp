#include "udw/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace udw {

namespace {

// Kronrod 15 / Gauss 7 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
  double value, error;
};

PanelEstimate gk15(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[2 * i] = f(c - h * kXgk[i]);
    fv[2 * i + 1] = f(c + h * kXgk[i]);
  }
  fv[14] = f(c);
  double k15 = kWgk[7] * fv[14];
  double g7 = kWg[3] * fv[14];
  for (int i = 0; i < 7; ++i) {
    k15 += kWgk[i] * (fv[2 * i] + fv[2 * i + 1]);
    if (i % 2 == 1) g7 += kWg[i / 2] * (fv[2 * i] + fv[2 * i + 1]);
  }
  return {h * k15, std::abs(h * (k15 - g7))};
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

IntegralResult integrate_finite(const Fn& f, double a, double b,
                                const QuadratureSpec& spec) {
  if (a == b) return {0.0, 0.0, 0};
  std::priority_queue<Segment> heap;
  PanelEstimate e0 = gk15(f, a, b);
  heap.push({a, b, e0.value, e0.error});
  double total = e0.value, err = e0.error;
  int panels = 1;
  const double width_floor =
      64.0 * std::numeric_limits<double>::epsilon() *
      (std::abs(a) + std::abs(b) + 1.0);
  while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    Segment worst = heap.top();
    if (worst.b - worst.a < width_floor || panels >= spec.max_panels) {
      if (err > 50.0 * std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
        throw NumericsError("quadrature stalled above tolerance", total);
      break;
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    PanelEstimate left = gk15(f, worst.a, mid);
    PanelEstimate right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++panels;
  }
  return {total, err, panels};
}

}  // namespace

IntegralResult integrate(const Fn& f, double a, double b,
                         const QuadratureSpec& spec, TailPolicy tail,
                         double s_max) {
  if (!std::isinf(b)) {
    if (b < a) throw std::invalid_argument("integrate: b < a");
    return integrate_finite(f, a, b, spec);
  }
  const double head_end = std::max(a, 0.0) + s_max;
  IntegralResult head = integrate_finite(f, a, head_end, spec);
  if (tail == TailPolicy::hard_cutoff) return head;
  // Map the remainder through s = 1/u. Gauss-Kronrod nodes are interior, so
  // u = 0 is never evaluated; integrands decaying like 1/s^2 become smooth.
  const auto mapped = [&f](double u) { return f(1.0 / u) / (u * u); };
  IntegralResult tail_part = integrate_finite(mapped, 0.0, 1.0 / head_end, spec);
  return {head.value + tail_part.value, head.error + tail_part.error,
          head.panels + tail_part.panels};
}

IntegralResult integrate_oscillatory(const Fn& f, double a, double w,
                                     Phase phase, const QuadratureSpec& spec,
                                     TailPolicy tail, double s_max) {
  if (w == 0.0) {
    if (phase == Phase::sin) return {0.0, 0.0, 0};
    return integrate(f, a, std::numeric_limits<double>::infinity(), spec, tail,
                     s_max);
  }
  const double sign = (phase == Phase::sin && w < 0.0) ? -1.0 : 1.0;
  const double wa = std::abs(w);
  const auto weighted = [&](double s) {
    return f(s) * (phase == Phase::cos ? std::cos(wa * s) : std::sin(wa * s));
  };
  if (tail == TailPolicy::hard_cutoff) {
    IntegralResult r = integrate_finite(weighted, a, s_max, spec);
    r.value *= sign;
    return r;
  }
  // Zeros of the weight, strictly beyond a.
  const double pi = 3.14159265358979323846;
  long k0;
  if (phase == Phase::cos)
    k0 = static_cast<long>(std::ceil(wa * a / pi - 0.5 + 1e-12));
  else
    k0 = std::max(1L, static_cast<long>(std::ceil(wa * a / pi + 1e-12)));
  const auto zero_at = [&](long k) {
    return (phase == Phase::cos ? (k + 0.5) : static_cast<double>(k)) * pi / wa;
  };

  QuadratureSpec panel_spec = spec;
  panel_spec.abs_tol = spec.abs_tol / 32.0;

  double value = 0.0, err = 0.0;
  int panels = 0;
  double lo = a;
  constexpr int kDirect = 12;
  for (int i = 0; i < kDirect; ++i) {
    const double hi = zero_at(k0 + i);
    IntegralResult r = integrate_finite(weighted, lo, hi, panel_spec);
    value += r.value;
    err += r.error;
    panels += r.panels;
    lo = hi;
  }

  // The remaining half-period contributions alternate in sign for smooth,
  // eventually one-signed f; iterated averaging of the partial sums then
  // converges geometrically.
  std::vector<double> diag;
  double partial = 0.0, estimate = 0.0, prev_estimate = 0.0;
  int stable = 0;
  constexpr int kMaxTail = 400;
  bool converged = false;
  for (int m = 0; m < kMaxTail; ++m) {
    const double hi = zero_at(k0 + kDirect + m);
    IntegralResult r = integrate_finite(weighted, lo, hi, panel_spec);
    lo = hi;
    err += r.error;
    panels += r.panels;
    partial += r.value;
    std::vector<double> prev = diag;
    diag.resize(prev.size() + 1);
    diag[0] = partial;
    for (std::size_t j = 1; j < diag.size(); ++j)
      diag[j] = 0.5 * (diag[j - 1] + prev[j - 1]);
    prev_estimate = estimate;
    estimate = diag.back();
    const double tol_tail =
        std::max(spec.abs_tol, spec.rel_tol * std::abs(value + estimate)) / 4.0;
    if (m >= 4 && std::abs(estimate - prev_estimate) <= tol_tail) {
      if (++stable >= 2) {
        converged = true;
        break;
      }
    } else {
      stable = 0;
    }
  }
  if (!converged)
    throw NumericsError("oscillatory tail acceleration did not converge",
                        sign * (value + estimate));
  value += estimate;
  err += std::abs(estimate - prev_estimate);
  return {sign * value, err, panels};
}

// --- Dormand-Prince 5(4) ---------------------------------------------------

namespace {
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kE[7] = {71.0 / 57600,  0.0,          -71.0 / 16695,
                          71.0 / 1920,   -17253.0 / 339200,
                          22.0 / 525,    -1.0 / 40};
constexpr double kD[7] = {-12715105075.0 / 11282082432.0,
                          0.0,
                          87487479700.0 / 32700410799.0,
                          -10690763975.0 / 1880347072.0,
                          701980252875.0 / 199316789632.0,
                          -1453857185.0 / 822651844.0,
                          69997945.0 / 29380423.0};
}  // namespace

OdeSolution ode_solve(const OdeRhs& rhs, std::vector<double> y0, double t0,
                      double t1, const OdeSpec& spec) {
  if (y0.empty()) throw std::invalid_argument("ode_solve: empty state");
  if (t1 < t0) throw std::invalid_argument("ode_solve: t1 < t0");
  const std::size_t n = y0.size();
  OdeSolution sol;
  sol.t0_ = t0;
  sol.t1_ = t1;
  sol.dim_ = n;
  if (t1 == t0) {
    OdeSolution::Step s;
    s.t = t0;
    s.h = 0.0;
    s.rcont.assign(5 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s.rcont[i] = y0[i];
    sol.steps_.push_back(std::move(s));
    return sol;
  }

  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> y = y0, y_stage(n), y_new(n);
  double t = t0;
  double h = std::min(spec.h_init, t1 - t0);
  rhs(t, y, k[0]);
  long steps = 0;
  while (t < t1) {
    if (++steps > spec.max_steps)
      throw NumericsError("ode_solve: step budget exhausted", t);
    h = std::min(h, t1 - t);
    if (h < spec.h_min)
      throw NumericsError("ode_solve: step size underflow", t);
    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
        y_stage[i] = y[i] + h * acc;
      }
      rhs(t + kC[s] * h, y_stage, k[s]);
    }
    // Stage 7 is evaluated at y_new (FSAL).
    y_new = y_stage;
    double err_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += kE[j] * k[j][i];
      e *= h;
      const double sk =
          spec.abs_tol +
          spec.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm += (e / sk) * (e / sk);
    }
    err_norm = std::sqrt(err_norm / static_cast<double>(n));
    if (err_norm <= 1.0) {
      OdeSolution::Step st;
      st.t = t;
      st.h = h;
      st.rcont.resize(5 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y_new[i] - y[i];
        const double bspl = h * k[0][i] - ydiff;
        double cont5 = 0.0;
        for (int j = 0; j < 7; ++j) cont5 += kD[j] * k[j][i];
        st.rcont[i] = y[i];
        st.rcont[n + i] = ydiff;
        st.rcont[2 * n + i] = bspl;
        st.rcont[3 * n + i] = ydiff - h * k[6][i] - bspl;
        st.rcont[4 * n + i] = h * cont5;
      }
      sol.steps_.push_back(std::move(st));
      t += h;
      y.swap(y_new);
      k[0].swap(k[6]);
      const double fac =
          std::min(10.0, std::max(0.2, 0.9 * std::pow(err_norm, -0.2)));
      h *= fac;
    } else {
      h *= std::max(0.2, std::min(1.0, 0.9 * std::pow(err_norm, -0.2)));
    }
  }
  return sol;
}

void OdeSolution::eval_into(double t, std::vector<double>& y) const {
  y.resize(dim_);
  const double tc = std::min(std::max(t, t0_), t1_);
  std::size_t lo = 0, hi = steps_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (steps_[mid].t <= tc)
      lo = mid;
    else
      hi = mid;
  }
  const Step& s = steps_[lo];
  const double theta = s.h > 0.0 ? (tc - s.t) / s.h : 0.0;
  const std::size_t n = dim_;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = s.rcont[i] +
           theta * (s.rcont[n + i] +
                    (1.0 - theta) *
                        (s.rcont[2 * n + i] +
                         theta * (s.rcont[3 * n + i] +
                                  (1.0 - theta) * s.rcont[4 * n + i])));
  }
}

std::vector<double> OdeSolution::eval(double t) const {
  std::vector<double> y;
  eval_into(t, y);
  return y;
}

// --- Cubic spline ------------------------------------------------------------

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw std::invalid_argument("CubicSpline: need matching grids, n >= 2");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("CubicSpline: grid not strictly increasing");
  m_.assign(n, 0.0);
  if (n == 2) return;
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
  if (n == 3) {
    // One parabola through the three points: constant second derivative.
    const double d0 = (y_[1] - y_[0]) / h[0];
    const double d1 = (y_[2] - y_[1]) / h[1];
    const double m = 2.0 * (d1 - d0) / (h[0] + h[1]);
    m_.assign(n, m);
    return;
  }
  // Not-a-knot: solve for the interior second derivatives, with the two end
  // values eliminated through third-derivative continuity at x_1, x_{n-2}.
  const std::size_t k = n - 2;  // unknowns M_1 .. M_{n-2}
  std::vector<double> sub(k, 0.0), dia(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double di = (y_[i + 1] - y_[i]) / h[i];
    const double dim1 = (y_[i] - y_[i - 1]) / h[i - 1];
    const std::size_t r = i - 1;
    sub[r] = h[i - 1];
    dia[r] = 2.0 * (h[i - 1] + h[i]);
    sup[r] = h[i];
    rhs[r] = 6.0 * (di - dim1);
  }
  // M_0 = [M_1 (h0+h1) - M_2 h0] / h1 folded into the first row.
  dia[0] += h[0] * (h[0] + h[1]) / h[1];
  sup[0] -= h[0] * h[0] / h[1];
  // M_{n-1} = [M_{n-2} (h_{n-3}+h_{n-2}) - M_{n-3} h_{n-2}] / h_{n-3}.
  dia[k - 1] += h[n - 2] * (h[n - 3] + h[n - 2]) / h[n - 3];
  sub[k - 1] -= h[n - 2] * h[n - 2] / h[n - 3];
  for (std::size_t r = 1; r < k; ++r) {
    const double w = sub[r] / dia[r - 1];
    dia[r] -= w * sup[r - 1];
    rhs[r] -= w * rhs[r - 1];
  }
  m_[k] = rhs[k - 1] / dia[k - 1];
  for (std::size_t r = k - 1; r >= 1; --r)
    m_[r] = (rhs[r - 1] - sup[r - 1] * m_[r + 1]) / dia[r - 1];
  m_[0] = (m_[1] * (h[0] + h[1]) - m_[2] * h[0]) / h[1];
  m_[n - 1] = (m_[n - 2] * (h[n - 3] + h[n - 2]) - m_[n - 3] * h[n - 2]) / h[n - 3];
}

std::size_t CubicSpline::locate(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i > 0) --i;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  return i;
}

double CubicSpline::operator()(double t) const {
  const double tc = std::min(std::max(t, x_.front()), x_.back());
  const std::size_t i = locate(tc);
  const double hi = x_[i + 1] - x_[i];
  const double dx = tc - x_[i];
  const double b = (y_[i + 1] - y_[i]) / hi - hi * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  return y_[i] + dx * (b + dx * (0.5 * m_[i] + dx * (m_[i + 1] - m_[i]) / (6.0 * hi)));
}

double CubicSpline::derivative(double t) const {
  const double tc = std::min(std::max(t, x_.front()), x_.back());
  const std::size_t i = locate(tc);
  const double hi = x_[i + 1] - x_[i];
  const double dx = tc - x_[i];
  const double b = (y_[i + 1] - y_[i]) / hi - hi * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  return b + dx * (m_[i] + dx * (m_[i + 1] - m_[i]) / (2.0 * hi));
}

std::vector<double> CubicSpline::antiderivative_samples() const {
  const std::size_t n = x_.size();
  std::vector<double> F(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x_[i + 1] - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    F[i + 1] = F[i] + h * (y_[i] + h * (0.5 * b + h * (m_[i] / 6.0 +
                                                       (m_[i + 1] - m_[i]) / 24.0)));
  }
  return F;
}

std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  return CubicSpline(x, y).antiderivative_samples();
}

RootBracket find_sign_change(const Fn& f, double lo, double hi, double x_tol,
                             int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return {lo, lo, lo};
  if (fhi == 0.0) return {hi, hi, hi};
  if ((flo > 0.0) == (fhi > 0.0))
    throw NumericsError("find_sign_change: no sign change on [lo, hi]", lo);
  for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
    double c;
    if (it % 2 == 0) {
      c = (lo * fhi - hi * flo) / (fhi - flo);  // secant
      const double pad = 0.01 * (hi - lo);
      if (!(c > lo + pad && c < hi - pad)) c = 0.5 * (lo + hi);
    } else {
      c = 0.5 * (lo + hi);
    }
    const double fc = f(c);
    if (fc == 0.0) return {c, c, c};
    if ((fc > 0.0) == (flo > 0.0)) {
      lo = c;
      flo = fc;
    } else {
      hi = c;
      fhi = fc;
    }
  }
  return {0.5 * (lo + hi), lo, hi};
}

}  // namespace udw
