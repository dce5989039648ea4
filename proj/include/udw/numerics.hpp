#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace udw {

// Raised when an adaptive routine cannot meet its tolerance or a runtime
// precondition fails (bad bracket, step underflow, singular map). Carries the
// best estimate available at the point of failure for diagnostics.
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what, double partial = 0.0)
      : std::runtime_error(what), partial_estimate(partial) {}
  double partial_estimate;
};

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_panels = 1000000;
};

// Handling of the semi-infinite remainder once the oscillatory panel sum (or
// the finite head of a plain integral) has been taken:
//   zero_panel_euler: oscillatory tails are summed between weight zeros with
//     iterated averaging; w = 0 tails are mapped through s -> 1/u and
//     integrated exactly.
//   hard_cutoff: truncate at s_max. Kept for brute-force comparisons.
enum class TailPolicy { zero_panel_euler, hard_cutoff };

enum class Phase { cos, sin };

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod 15(7) over [a, b]; b may be +infinity.
IntegralResult integrate(const Fn& f, double a, double b,
                         const QuadratureSpec& spec = {},
                         TailPolicy tail = TailPolicy::zero_panel_euler,
                         double s_max = 60.0);

// Int_a^inf f(s) * cos(w s) ds (or sin with phase = Phase::sin). Panels run
// between consecutive zeros of the weight; the alternating remainder is
// accelerated by iterated averaging of its partial sums. w = 0 falls back to
// the plain integrator (the sin channel is then identically zero).
IntegralResult integrate_oscillatory(const Fn& f, double a, double w,
                                     Phase phase = Phase::cos,
                                     const QuadratureSpec& spec = {},
                                     TailPolicy tail = TailPolicy::zero_panel_euler,
                                     double s_max = 60.0);

struct OdeSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-14;
  long max_steps = 1000000;
};

using OdeRhs =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Dense-output solution of an explicit ODE: stores the accepted steps plus
// the quartic interpolation coefficients of each step, so eval() reproduces
// the solution anywhere in [t0, t1] at the integration order.
class OdeSolution {
 public:
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  std::size_t dim() const { return dim_; }
  std::size_t n_steps() const { return steps_.size(); }

  std::vector<double> eval(double t) const;
  void eval_into(double t, std::vector<double>& y) const;

 private:
  friend OdeSolution ode_solve(const OdeRhs&, std::vector<double>, double,
                               double, const OdeSpec&);
  struct Step {
    double t, h;
    std::vector<double> rcont;  // 5 * dim interpolation coefficients
  };
  double t0_ = 0, t1_ = 0;
  std::size_t dim_ = 0;
  std::vector<Step> steps_;
};

// Dormand-Prince 5(4) with PI-free standard step control.
OdeSolution ode_solve(const OdeRhs& rhs, std::vector<double> y0, double t0,
                      double t1, const OdeSpec& spec = {});

// Not-a-knot cubic spline on a strictly increasing grid (n >= 2; degenerate
// sizes fall back to the interpolant of matching degree). Evaluation clamps
// to the grid range.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

  // Integral of the spline from x.front() to each grid point.
  std::vector<double> antiderivative_samples() const;

 private:
  std::size_t locate(double t) const;
  std::vector<double> x_, y_, m_;  // m_: second derivatives at the knots
};

// F(x_i) = Int_{x_0}^{x_i} of the not-a-knot spline through (x, y).
// Throws std::invalid_argument unless x is strictly increasing.
std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& y);

struct RootBracket {
  double root, lo, hi;
};

// Locates a sign change of f on [lo, hi] by bisection with secant
// refinement. Throws NumericsError when f(lo) and f(hi) have the same sign.
RootBracket find_sign_change(const Fn& f, double lo, double hi,
                             double x_tol = 1e-10, int max_iter = 200);

}  // namespace udw
