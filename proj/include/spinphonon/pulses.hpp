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

#include <spinphonon/algebra.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinphonon {

inline constexpr double kPi = std::numbers::pi;

/// Mixing angle, relative phase and overall Rabi magnitude:
/// Omega_R = sin(theta) scale, Omega_2 = cos(theta) scale exp(i phi).
struct ThetaPhiPoint {
  double theta = 0.0;
  double phi = 0.0;
  double scale = 0.0;

  std::pair<Complex, Complex> amplitudes() const {
    return {std::sin(theta) * scale, std::cos(theta) * scale * std::exp(kI * phi)};
  }

  static ThetaPhiPoint from_amplitudes(Complex omega_r, Complex omega_2) {
    ThetaPhiPoint p;
    p.scale = std::sqrt(std::norm(omega_r) + std::norm(omega_2));
    p.theta = std::atan2(std::abs(omega_r), std::abs(omega_2));
    p.phi = std::arg(omega_2) - std::arg(omega_r);
    return p;
  }
};

/// One schedule segment. Holds keep theta fixed and may ramp phi at
/// `phi_rate` (rad/ns); edges move theta with a sin^2 profile and leave phi
/// untouched.
struct Stage {
  enum class Kind { hold, edge };
  Kind kind = Kind::hold;
  double theta_from = 0.0;
  double theta_to = 0.0;
  double duration = 0.0;
  double phi_rate = 0.0;

  static Stage hold(double theta, double duration, double phi_rate = 0.0) {
    return {Kind::hold, theta, theta, duration, phi_rate};
  }
  static Stage edge(double from, double to, double t_rise) {
    return {Kind::edge, from, to, t_rise, 0.0};
  }
};

class StirapSchedule {
 public:
  StirapSchedule() = default;
  StirapSchedule(std::vector<Stage> stages, double scale) : stages_(std::move(stages)), scale_(scale) {
    if (stages_.empty()) throw std::invalid_argument("schedule needs at least one stage");
    if (!(scale_ > 0.0)) throw std::invalid_argument("schedule scale must be > 0");
    double t = 0.0;
    double phi = 0.0;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const Stage& s = stages_[i];
      if (!(s.duration >= 0.0)) throw std::invalid_argument("stage duration must be >= 0");
      if (s.kind == Stage::Kind::edge && s.phi_rate != 0.0) {
        throw std::invalid_argument("phase may only ramp inside hold stages");
      }
      if (s.kind == Stage::Kind::hold && s.theta_from != s.theta_to) {
        throw std::invalid_argument("hold stage must keep theta fixed");
      }
      if (i > 0 && std::abs(stages_[i - 1].theta_to - s.theta_from) > 1e-12) {
        throw std::invalid_argument("theta must be continuous across stages");
      }
      starts_.push_back(t);
      phi_starts_.push_back(phi);
      t += s.duration;
      phi += s.phi_rate * s.duration;
    }
    total_ = t;
    phi_end_ = phi;
  }

  const std::vector<Stage>& stages() const { return stages_; }
  double scale() const { return scale_; }
  double total_duration() const { return total_; }
  double phi_total() const { return phi_end_; }
  double stage_start(std::size_t i) const { return starts_.at(i); }
  double phi_at_stage_start(std::size_t i) const { return phi_starts_.at(i); }

  ThetaPhiPoint evaluate(double t) const {
    const auto [i, tau] = locate(t);
    const Stage& s = stages_[i];
    ThetaPhiPoint p;
    p.scale = scale_;
    p.phi = phi_starts_[i] + s.phi_rate * tau;
    p.theta = s.kind == Stage::Kind::hold ? s.theta_from : edge_theta(s, tau);
    return p;
  }

  std::pair<Complex, Complex> amplitudes(double t) const { return evaluate(t).amplitudes(); }

  double theta_rate(double t) const {
    const auto [i, tau] = locate(t);
    const Stage& s = stages_[i];
    if (s.kind == Stage::Kind::hold || s.duration == 0.0) return 0.0;
    return (s.theta_to - s.theta_from) * kPi / (2.0 * s.duration) * std::sin(kPi * tau / s.duration);
  }

  double phi_rate(double t) const {
    const auto [i, tau] = locate(t);
    (void)tau;
    return stages_[i].phi_rate;
  }

  /// max |d theta/dt| / (2 pi scale).
  double adiabaticity_proxy() const {
    double worst = 0.0;
    for (const Stage& s : stages_) {
      if (s.kind == Stage::Kind::edge && s.duration > 0.0) {
        worst = std::max(worst, std::abs(s.theta_to - s.theta_from) * kPi / (2.0 * s.duration));
      }
    }
    return worst / (kTwoPi * scale_);
  }

  void write_csv(std::ostream& os, std::size_t samples) const {
    if (samples < 2) throw std::invalid_argument("need at least two samples");
    os << "t_ns,re_omega_r,im_omega_r,re_omega_2,im_omega_2,theta,phi\n";
    os << std::setprecision(12);
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = total_ * double(k) / double(samples - 1);
      const ThetaPhiPoint p = evaluate(t);
      const auto [r, c] = p.amplitudes();
      os << t << ',' << r.real() << ',' << r.imag() << ',' << c.real() << ',' << c.imag() << ','
         << p.theta << ',' << p.phi << '\n';
    }
  }

 private:
  static double edge_theta(const Stage& s, double tau) {
    if (s.duration == 0.0) return s.theta_to;
    const double x = std::sin(kPi * tau / (2.0 * s.duration));
    return s.theta_from + (s.theta_to - s.theta_from) * x * x;
  }

  std::pair<std::size_t, double> locate(double t) const {
    if (!(t >= -1e-9 && t <= total_ + 1e-9)) {
      std::ostringstream os;
      os << "schedule time " << t << " outside [0, " << total_ << "]";
      throw std::out_of_range(os.str());
    }
    t = std::clamp(t, 0.0, total_);
    for (std::size_t i = 0; i + 1 < stages_.size(); ++i) {
      if (t < starts_[i + 1]) return {i, t - starts_[i]};
    }
    const std::size_t last = stages_.size() - 1;
    return {last, std::min(t - starts_[last], stages_[last].duration)};
  }

  std::vector<Stage> stages_;
  std::vector<double> starts_;
  std::vector<double> phi_starts_;
  double scale_ = 0.0;
  double total_ = 0.0;
  double phi_end_ = 0.0;
};

/// Controlled-Z design parameters. Hold durations follow from the phase
/// conditions gamma_1 = 2 k pi and delta_gamma = pi at theta = pi/4, where the
/// differential-phase integrand is 1/7.
struct CzDesign {
  double delta_R2 = 0.3e-3;  // GHz
  int k = -2;
  double t_rise = 1350.0;    // ns
  double scale = 0.023;      // GHz

  friend bool operator==(const CzDesign&, const CzDesign&) = default;

  double phi_rate() const { return kTwoPi * delta_R2; }
  double T0() const { return 7.0 / (4.0 * delta_R2); }
  double T1() const { return (-static_cast<double>(k) - 7.0 / 4.0) / delta_R2; }

  void validate() const {
    if (!(delta_R2 > 0.0)) throw std::invalid_argument("delta_R2 must be > 0");
    if (!(t_rise > 0.0)) throw std::invalid_argument("t_rise must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
    if (T1() < 0.0) throw std::invalid_argument("winding k gives a negative T1; need k <= -2");
  }
};

/// pi/2 -> pi/4 (hold T0) -> 0 (hold T1) -> pi/4 (hold T0) -> pi/2, sin^2 edges.
inline StirapSchedule design_cz_schedule(const CzDesign& d) {
  d.validate();
  const double r = d.phi_rate();
  const double q = kPi / 4.0;
  const double h = kPi / 2.0;
  return StirapSchedule(
      {Stage::edge(h, q, d.t_rise), Stage::hold(q, d.T0(), r), Stage::edge(q, 0.0, d.t_rise),
       Stage::hold(0.0, d.T1(), r), Stage::edge(0.0, q, d.t_rise), Stage::hold(q, d.T0(), r),
       Stage::edge(q, h, d.t_rise)},
      d.scale);
}

enum class TransferDirection { phonon_to_spins, spins_to_phonon };

/// Monotone theta sweep through pi/4 made of two sin^2 edges of t_rise each:
/// 0 -> pi/2 moves an excitation from the phonon to the spins.
inline StirapSchedule design_transfer_schedule(double t_rise, double scale, TransferDirection dir) {
  if (!(t_rise > 0.0)) throw std::invalid_argument("t_rise must be > 0");
  const double a = dir == TransferDirection::phonon_to_spins ? 0.0 : kPi / 2.0;
  const double b = kPi / 2.0 - a;
  const double m = kPi / 4.0;
  return StirapSchedule({Stage::edge(a, m, t_rise), Stage::edge(m, b, t_rise)}, scale);
}

/// Effective pulse area of an N-spin single-excitation transfer,
/// integral of 2 pi scale sqrt(cos^2 theta + N sin^2 theta) dt. The collective
/// sideband coupling is sqrt(N) Omega_R, so the bright-state Rabi frequency
/// and with it the area grow with N; equal areas mean equal adiabaticity.
inline double dicke_pulse_area(const StirapSchedule& s, int n_spins, std::size_t samples = 4001) {
  if (n_spins < 1) throw std::invalid_argument("n_spins must be >= 1");
  if (samples < 3) throw std::invalid_argument("need at least three samples");
  auto f = [&](double t) {
    const double th = s.evaluate(t).theta;
    const double c = std::cos(th), sn = std::sin(th);
    return kTwoPi * s.scale() * std::sqrt(c * c + n_spins * sn * sn);
  };
  // Composite Simpson on an odd sample count.
  const std::size_t n = samples % 2 == 1 ? samples : samples + 1;
  const double h = s.total_duration() / double(n - 1);
  double acc = f(0.0) + f(s.total_duration());
  for (std::size_t k = 1; k + 1 < n; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * f(h * double(k));
  return acc * h / 3.0;
}

/// Total transfer duration for n_spins whose pulse area equals that of the
/// reference (ref_spins, ref_total) with the same edge shape and scale.
inline double matched_transfer_duration(int n_spins, int ref_spins, double ref_total, double scale) {
  if (!(ref_total > 0.0)) throw std::invalid_argument("reference duration must be > 0");
  const auto ref = design_transfer_schedule(ref_total / 2.0, scale, TransferDirection::phonon_to_spins);
  // Area is linear in duration for a fixed shape.
  return ref_total * dicke_pulse_area(ref, ref_spins) / dicke_pulse_area(ref, n_spins);
}

}  // namespace spinphonon
