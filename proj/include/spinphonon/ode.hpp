// Copyright 2026 The spinphonon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinphonon {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;      // ns; 0 = unbounded
  double initial_step = 0.0;  // ns; 0 = automatic
  std::size_t max_steps = 50'000'000;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw std::invalid_argument("integrator tolerances must be > 0");
    }
    if (max_step < 0.0 || initial_step < 0.0) {
      throw std::invalid_argument("integrator step bounds must be >= 0");
    }
  }
};

/// Raised when the adaptive stepper cannot make progress.
class IntegratorError : public std::runtime_error {
 public:
  IntegratorError(const std::string& what, double t)
      : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
};

/// Dormand-Prince 5(4) with the 4th-order continuous extension. `State` is any
/// Eigen dense type; the error norm is Frobenius over the whole state, so a
/// density matrix is controlled as one object rather than entrywise.
template <class State>
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;
  /// Called for every requested output time with the interpolated state.
  using Observer = std::function<void(std::size_t, double, const State&)>;

  DormandPrince(Rhs rhs, IntegratorConfig cfg) : rhs_(std::move(rhs)), cfg_(cfg) {
    cfg_.validate();
  }

  const IntegrationStats& stats() const { return stats_; }

  /// Integrates from grid.front() to grid.back(); `y` holds the final state on
  /// return. Output times must be non-decreasing.
  void integrate(State& y, const std::vector<double>& grid, const Observer& observe) {
    if (grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (grid[i] < grid[i - 1]) throw std::invalid_argument("time grid must be non-decreasing");
    }
    double t = grid.front();
    const double t_end = grid.back();
    std::size_t next = 0;
    while (next < grid.size() && grid[next] <= t) {
      observe(next, grid[next], y);
      ++next;
    }
    if (t_end <= t) return;

    State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
    call(t, y, k1);
    double h = cfg_.initial_step > 0.0 ? cfg_.initial_step : initial_step(t, t_end - t, y, k1);
    h = std::min(h, t_end - t);
    if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);

    std::size_t steps = 0;
    while (t < t_end) {
      if (++steps > cfg_.max_steps) {
        throw IntegratorError(msg("step budget exhausted", t), t);
      }
      const double min_h = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
      if (h < min_h) throw IntegratorError(msg("step size underflow", t), t);
      const bool last = t + h >= t_end;
      if (last) h = t_end - t;

      ytmp = y + h * (a21 * k1);
      call(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      call(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      call(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      call(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double t_new = last ? t_end : t + h;
      call(t_new, ytmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      call(t_new, ynew, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(y.norm(), ynew.norm());
      const double e = err.norm() / scale;
      if (!std::isfinite(e)) throw IntegratorError(msg("non-finite error estimate", t), t);

      if (e <= 1.0) {
        ++stats_.accepted;
        // Dense output for every grid time inside (t, t_new].
        if (next < grid.size() && grid[next] <= t_new) {
          const State ydiff = ynew - y;
          const State bspl = h * k1 - ydiff;
          const State r4 = ydiff - h * k7 - bspl;
          const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
          while (next < grid.size() && grid[next] <= t_new) {
            const double tq = grid[next];
            if (tq == t_new) {
              observe(next, tq, ynew);
            } else {
              const double th = (tq - t) / h;
              const double th1 = 1.0 - th;
              const State yq = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
              observe(next, tq, yq);
            }
            ++next;
          }
        }
        y.swap(ynew);
        k1.swap(k7);
        t = t_new;
        const double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
        h *= fac;
      } else {
        ++stats_.rejected;
        h *= std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9);
      }
      if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
    }
  }

 private:
  void call(double t, const State& y, State& out) {
    ++stats_.rhs_calls;
    rhs_(t, y, out);
  }

  // Hairer's starting-step heuristic; the probe never leaves [t, t + span].
  double initial_step(double t, double span, const State& y, const State& f0) {
    const double sc = cfg_.abs_tol + cfg_.rel_tol * y.norm();
    const double d0 = y.norm() / sc;
    const double d1 = f0.norm() / sc;
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    State y1 = y + h0 * f0;
    State f1;
    call(t + h0, y1, f1);
    const double d2 = (f1 - f0).norm() / sc / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min(100.0 * h0, h1);
  }

  static std::string msg(const char* what, double t) {
    std::ostringstream os;
    os << what << " at t = " << t << " ns";
    return os.str();
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  Rhs rhs_;
  IntegratorConfig cfg_;
  IntegrationStats stats_;
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / double(n - 1);
  out.back() = b;
  return out;
}

}  // namespace spinphonon
