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
#include <spinphonon/dynamics.hpp>

#include <cmath>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace spinphonon {

// All frequencies below are f = omega / 2pi in GHz; builders return generators
// in rad/ns.

struct DefectSpec {
  double g = 0.257;               // excited-state zero-point coupling
  double nu1 = 6.6;               // ground-level energies; only nu1 - nu2 matters
  double nu2 = 1.0;               // outside the lab frame
  double spectral_offset = 0.0;   // static shift of the excited state

  double omega_s() const { return nu1 - nu2; }
  friend bool operator==(const DefectSpec&, const DefectSpec&) = default;
};

/// Raman drive pair on one defect.
///
/// Both branches are referenced to the excited state. The g1 branch drives
/// the red phonon sideband, so its detuning is nu1 - omega1 - omega_m, while
/// the g2 branch drives the carrier, nu2 - omega2. `Delta` is the common part,
/// `raman_offset` = (omega_s - omega_m) - (omega1 - omega2) moves the g1
/// branch only, and `stark_correction` is the extra g1 detuning that puts the
/// Stark-shifted levels back on Raman resonance.
struct DriveSpec {
  Complex Omega1{0.5, 0.0};
  Complex Omega2{0.023, 0.0};
  double Delta = 0.23;
  double raman_offset = 0.0;
  double stark_correction = 0.0;

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

struct DecoherenceSpec {
  double gamma_m1 = 1e-6;
  double gamma_e1 = 0.01;
  double gamma_e_phi = 0.02;
  double gamma_s1 = 1e-9;
  double gamma_s_phi = 1e-6;

  friend bool operator==(const DecoherenceSpec&, const DecoherenceSpec&) = default;
};

/// How tabulated decay rates become Lindblad rates. `raw` uses the number as
/// a rate in 1/ns; `angular` multiplies it by 2pi like the frequencies.
enum class RateConvention { raw, angular };

/// `unit`: L = sqrt(gamma)|x><x|, so coherences decay at gamma/2.
/// `coherence`: L = sqrt(2 gamma)|x><x|, so coherences decay at gamma.
enum class DephasingNormalization { unit, coherence };

inline std::string to_string(RateConvention c) { return c == RateConvention::raw ? "raw" : "angular"; }
inline std::string to_string(DephasingNormalization d) {
  return d == DephasingNormalization::unit ? "unit" : "coherence";
}

struct SystemSpec {
  double omega_m = 5.6;
  std::vector<DefectSpec> defects{DefectSpec{}};
  std::vector<DriveSpec> drives{DriveSpec{}};
  DecoherenceSpec decoherence{};
  HilbertLayout layout{6, 1};
  RateConvention rate_convention = RateConvention::raw;
  DephasingNormalization dephasing = DephasingNormalization::unit;
  double branching_g1 = 0.5;  // fraction of excited-state decay into g1

  int defect_count() const { return static_cast<int>(defects.size()); }

  void validate() const {
    if (!(omega_m > 0.0)) throw std::invalid_argument("omega_m must be > 0");
    if (defects.empty()) throw std::invalid_argument("at least one defect required");
    if (drives.size() != defects.size()) {
      throw std::invalid_argument("one drive per defect required");
    }
    if (layout.defect_count() != defect_count()) {
      throw std::invalid_argument("layout defect count does not match defects");
    }
    const auto& d = decoherence;
    for (double r : {d.gamma_m1, d.gamma_e1, d.gamma_e_phi, d.gamma_s1, d.gamma_s_phi}) {
      if (r < 0.0 || !std::isfinite(r)) throw std::invalid_argument("decoherence rates must be >= 0");
    }
    if (branching_g1 < 0.0 || branching_g1 > 1.0) {
      throw std::invalid_argument("branching_g1 must lie in [0, 1]");
    }
  }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Single-defect ODRO parameters: omega_m 5.6, g 0.257, Delta 0.23,
/// Omega1 0.5, Omega2 0.023 and the five decay rates.
inline SystemSpec table1_spec(int defect_count = 1, int phonon_levels = 6) {
  SystemSpec s;
  s.defects.assign(defect_count, DefectSpec{});
  s.drives.assign(defect_count, DriveSpec{});
  s.layout = HilbertLayout(phonon_levels, defect_count);
  return s;
}

/// Resonant STIRAP parameters: Delta = 0 and no excited-state dephasing;
/// pulse amplitudes come from a schedule.
inline SystemSpec table2_spec(int defect_count = 2, int phonon_levels = 6) {
  SystemSpec s = table1_spec(defect_count, phonon_levels);
  for (auto& d : s.drives) d.Delta = 0.0;
  s.decoherence.gamma_e_phi = 0.0;
  return s;
}

/// Phonon-sideband Rabi frequency Omega_R = Omega1 g / omega_m.
inline Complex sideband_rabi(const SystemSpec& s, int i) {
  return s.drives.at(i).Omega1 * s.defects.at(i).g / s.omega_m;
}

/// (Delta_i1, Delta_i2) entering the rotating-frame Hamiltonian.
inline std::pair<double, double> branch_detunings(const SystemSpec& s, int i) {
  const auto& d = s.drives.at(i);
  const double off = s.defects.at(i).spectral_offset;
  return {d.Delta + d.raman_offset + d.stark_correction + off, d.Delta + off};
}

/// Laser frequencies implied by the detunings (lab frame only).
inline std::pair<double, double> laser_frequencies(const SystemSpec& s, int i) {
  const auto& d = s.drives.at(i);
  const auto& def = s.defects.at(i);
  const double delta1 = d.Delta + d.raman_offset + d.stark_correction;
  return {def.nu1 - s.omega_m - delta1, def.nu2 - d.Delta};
}

/// g' = g Omega1 Omega2 / (4 |Delta| omega_m).
inline double effective_coupling(double g, double Omega1, double Omega2, double Delta,
                                  double omega_m) {
  if (Delta == 0.0 || omega_m == 0.0) throw std::invalid_argument("effective coupling needs Delta, omega_m != 0");
  return g * std::abs(Omega1 * Omega2) / (4.0 * std::abs(Delta) * omega_m);
}

/// Flip-flop amplitude |Omega_R* Omega2 / 8 (1/Delta1 + 1/Delta2)| of defect i.
inline double effective_coupling(const SystemSpec& s, int i) {
  const auto [d1, d2] = branch_detunings(s, i);
  if (d1 == 0.0 || d2 == 0.0) throw std::invalid_argument("effective coupling needs nonzero detunings");
  return std::abs(std::conj(sideband_rabi(s, i)) * s.drives[i].Omega2 / 8.0 * (1.0 / d1 + 1.0 / d2));
}

/// Rate (1/ns) a tabulated value turns into under the chosen convention.
inline double lindblad_rate(const SystemSpec& s, double tabulated) {
  return s.rate_convention == RateConvention::raw ? tabulated : kTwoPi * tabulated;
}

/// C = g'^2 / (Gamma_s Gamma_m), Gamma_s = Gamma_s1 + Gamma_s_phi. g' is taken
/// in the same units as the rates (GHz for raw, rad/ns for angular).
inline double cooperativity(const SystemSpec& s, int i = 0) {
  const double gp = s.rate_convention == RateConvention::raw ? effective_coupling(s, i)
                                                             : kTwoPi * effective_coupling(s, i);
  const double gs = lindblad_rate(s, s.decoherence.gamma_s1 + s.decoherence.gamma_s_phi);
  const double gm = lindblad_rate(s, s.decoherence.gamma_m1);
  if (gs <= 0.0 || gm <= 0.0) throw std::invalid_argument("cooperativity needs nonzero spin and phonon rates");
  return gp * gp / (gs * gm);
}

/// chi = g'^2 / (omega1 - omega2 - omega_s + omega_m); signed.
inline double dispersive_shift_chi(const SystemSpec& s, double raman_detuning, int i = 0) {
  if (raman_detuning == 0.0) throw std::invalid_argument("dispersive shift needs nonzero Raman detuning");
  const double gp = effective_coupling(s, i);
  return gp * gp / raman_detuning;
}

/// Off-resonant carrier pumping shift |Omega1|^2 / (4 (omega_m + Delta1)).
inline double ac_stark_shift(Complex Omega1, double omega_m, double Delta1) {
  if (omega_m + Delta1 == 0.0) throw std::invalid_argument("AC Stark shift: omega_m + Delta1 = 0");
  return std::norm(Omega1) / (4.0 * (omega_m + Delta1));
}

/// Sets each stark_correction so that |0, g2 on defect i, g1 elsewhere> and
/// |1, all g1> are degenerate under the second-order level shifts:
/// Delta_i1 = Delta_i2 + |Omega_i2|^2/(4 Delta_i2) - sum_j |Omega_jR|^2/(4 Delta_j1).
/// Iterated because Delta_j1 appears on both sides.
inline SystemSpec with_raman_resonance(SystemSpec s) {
  const int n = s.defect_count();
  for (int iter = 0; iter < 50; ++iter) {
    double sideband_shift = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d1 = branch_detunings(s, j).first;
      if (d1 == 0.0) throw std::invalid_argument("Raman resonance needs nonzero detuning");
      sideband_shift += std::norm(sideband_rabi(s, j)) / (4.0 * d1);
    }
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      auto& d = s.drives[i];
      const double d2 = branch_detunings(s, i).second;
      if (d2 == 0.0) throw std::invalid_argument("Raman resonance needs nonzero detuning");
      const double want = std::norm(d.Omega2) / (4.0 * d2) - sideband_shift;
      change = std::max(change, std::abs(want - d.stark_correction));
      d.stark_correction = want;
    }
    if (change < 1e-16) break;
  }
  return s;
}

namespace detail {

inline OperatorMatrix level_projector(const HilbertLayout& l, int i, Level a) {
  return defect_transition_op(l, i, a, a);
}

/// -b |e_i><g_i1| / 2 and |e_i><g_i2| / 2, in rad/ns per GHz of amplitude.
inline OperatorMatrix sideband_piece(const HilbertLayout& l, int i) {
  const OperatorMatrix b = annihilation_op(l.phonon_levels());
  return -0.5 * kTwoPi * kron_embed(l, {{kPhononSite, b}, {defect_site(i), level_op(Level::e, Level::g1)}});
}

inline OperatorMatrix carrier_piece(const HilbertLayout& l, int i) {
  return 0.5 * kTwoPi * defect_transition_op(l, i, Level::g2, Level::e);
}

}  // namespace detail

/// -2 sum_{i<j} (g_i g_j / omega_m) |e_i e_j><e_i e_j|, in rad/ns.
inline OperatorMatrix excited_pair_shift(const SystemSpec& s) {
  const auto& l = s.layout;
  OperatorMatrix h = OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  const OperatorMatrix ee = level_op(Level::e, Level::e);
  for (int i = 0; i < s.defect_count(); ++i) {
    for (int j = i + 1; j < s.defect_count(); ++j) {
      const double c = -2.0 * s.defects[i].g * s.defects[j].g / s.omega_m;
      h += angular(c) * kron_embed(l, {{defect_site(i), ee}, {defect_site(j), ee}});
    }
  }
  return h;
}

/// Lab-frame Lambda-system Hamiltonian with explicit drive phases and the full
/// g (b + b^dagger)|e><e| coupling. The excited state sits at
/// spectral_offset; ground levels at -nu1, -nu2; g3 at zero.
inline OperatorMatrix lab_hamiltonian(const SystemSpec& s, double t) {
  s.validate();
  const auto& l = s.layout;
  const OperatorMatrix b = annihilation_op(l.phonon_levels());
  const OperatorMatrix n = b.adjoint() * b;
  const OperatorMatrix x = b + b.adjoint();
  OperatorMatrix h = angular(s.omega_m) * phonon_op(l, n);
  for (int i = 0; i < s.defect_count(); ++i) {
    const auto& def = s.defects[i];
    const auto& dr = s.drives[i];
    const auto [w1, w2] = laser_frequencies(s, i);
    h += angular(-def.nu1) * detail::level_projector(l, i, Level::g1);
    h += angular(-def.nu2) * detail::level_projector(l, i, Level::g2);
    h += angular(def.spectral_offset) * detail::level_projector(l, i, Level::e);
    const OperatorMatrix eg1 = defect_transition_op(l, i, Level::g1, Level::e);
    const OperatorMatrix eg2 = defect_transition_op(l, i, Level::g2, Level::e);
    const Complex p1 = 0.5 * dr.Omega1 * std::exp(-kI * angular(w1) * t);
    const Complex p2 = 0.5 * dr.Omega2 * std::exp(-kI * angular(w2) * t);
    OperatorMatrix drive = p1 * eg1 + p2 * eg2;
    h += kTwoPi * (drive + drive.adjoint());
    h += angular(def.g) * kron_embed(l, {{kPhononSite, x}, {defect_site(i), level_op(Level::e, Level::e)}});
  }
  return h;
}

/// Linearized rotating-frame Hamiltonian: branch detunings, phonon-sideband
/// coupling on g1, carrier coupling on g2 and the excited-pair shift.
inline OperatorMatrix rotating_frame_hamiltonian(const SystemSpec& s) {
  s.validate();
  const auto& l = s.layout;
  OperatorMatrix h = excited_pair_shift(s);
  for (int i = 0; i < s.defect_count(); ++i) {
    const auto [d1, d2] = branch_detunings(s, i);
    h += angular(-d1) * detail::level_projector(l, i, Level::g1);
    h += angular(-d2) * detail::level_projector(l, i, Level::g2);
    const OperatorMatrix sb = sideband_rabi(s, i) * detail::sideband_piece(l, i);
    const OperatorMatrix cr = s.drives[i].Omega2 * detail::carrier_piece(l, i);
    h += sb + sb.adjoint() + cr + cr.adjoint();
  }
  return h;
}

/// Second-order Schrieffer-Wolff Hamiltonian with the excited state removed:
/// Stark-shifted ground levels and b^dagger |g1><g2| flip-flops.
inline OperatorMatrix effective_jc_hamiltonian(const SystemSpec& s) {
  s.validate();
  const auto& l = s.layout;
  const OperatorMatrix b = annihilation_op(l.phonon_levels());
  const OperatorMatrix n = b.adjoint() * b;
  OperatorMatrix h = OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  for (int i = 0; i < s.defect_count(); ++i) {
    const auto [d1, d2] = branch_detunings(s, i);
    if (d1 == 0.0 || d2 == 0.0) {
      throw std::invalid_argument("effective Hamiltonian needs nonzero detunings");
    }
    const Complex om_r = sideband_rabi(s, i);
    const Complex om_2 = s.drives[i].Omega2;
    const double ratio = std::max(std::abs(om_r) / std::abs(d1), std::abs(om_2) / std::abs(d2));
    if (ratio > 0.2) {
      std::cerr << "warning: defect " << i << " is not dispersive (|Omega/Delta| = " << ratio << ")\n";
    }
    const OperatorMatrix g1 = level_op(Level::g1, Level::g1);
    h += angular(-d1) * detail::level_projector(l, i, Level::g1);
    h += angular(-std::norm(om_r) / (4.0 * d1)) * kron_embed(l, {{kPhononSite, n}, {defect_site(i), g1}});
    h += angular(-(d2 + std::norm(om_2) / (4.0 * d2))) * detail::level_projector(l, i, Level::g2);
    const Complex c = std::conj(om_r) * om_2 / 8.0 * (1.0 / d1 + 1.0 / d2);
    const OperatorMatrix flip = kTwoPi * c *
        kron_embed(l, {{kPhononSite, OperatorMatrix(b.adjoint())}, {defect_site(i), level_op(Level::g1, Level::g2)}});
    h += flip + flip.adjoint();
  }
  return h;
}

/// Per-defect (Omega_R, Omega_2) pair, in GHz.
using DriveAmplitudes = std::vector<std::pair<Complex, Complex>>;

struct DarkFrameOptions {
  bool include_excited_pair_shift = false;
};

/// Resonant-frame Hamiltonian for given sideband and carrier amplitudes. Any
/// residual branch detuning (e.g. a spectral offset) enters as -Delta|g><g|.
inline OperatorMatrix darkframe_hamiltonian(const SystemSpec& s, const DriveAmplitudes& amps,
                                            const DarkFrameOptions& opt = {}) {
  s.validate();
  if (static_cast<int>(amps.size()) != s.defect_count()) {
    throw std::invalid_argument("one amplitude pair per defect required");
  }
  const auto& l = s.layout;
  OperatorMatrix h = opt.include_excited_pair_shift
                         ? excited_pair_shift(s)
                         : OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  for (int i = 0; i < s.defect_count(); ++i) {
    const auto [d1, d2] = branch_detunings(s, i);
    if (d1 != 0.0) h += angular(-d1) * detail::level_projector(l, i, Level::g1);
    if (d2 != 0.0) h += angular(-d2) * detail::level_projector(l, i, Level::g2);
    const OperatorMatrix sb = amps[i].first * detail::sideband_piece(l, i);
    const OperatorMatrix cr = amps[i].second * detail::carrier_piece(l, i);
    h += sb + sb.adjoint() + cr + cr.adjoint();
  }
  return h;
}

/// Same Hamiltonian with amplitudes supplied as functions of time; every
/// defect shares the same pulse pair.
inline TimeDependentHamiltonian darkframe_hamiltonian(
    const SystemSpec& s, std::function<std::pair<Complex, Complex>(double)> amplitudes,
    const DarkFrameOptions& opt = {}) {
  s.validate();
  const auto& l = s.layout;
  TimeDependentHamiltonian h(l.total_dim());
  OperatorMatrix stat = opt.include_excited_pair_shift
                            ? excited_pair_shift(s)
                            : OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  OperatorMatrix sb = OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  OperatorMatrix cr = sb;
  for (int i = 0; i < s.defect_count(); ++i) {
    const auto [d1, d2] = branch_detunings(s, i);
    if (d1 != 0.0) stat += angular(-d1) * detail::level_projector(l, i, Level::g1);
    if (d2 != 0.0) stat += angular(-d2) * detail::level_projector(l, i, Level::g2);
    sb += detail::sideband_piece(l, i);
    cr += detail::carrier_piece(l, i);
  }
  h.add_constant(stat);
  auto shared = std::make_shared<decltype(amplitudes)>(std::move(amplitudes));
  h.add_hermitian_pair(sb, [shared](double t) { return (*shared)(t).first; });
  h.add_hermitian_pair(cr, [shared](double t) { return (*shared)(t).second; });
  return h;
}

/// Lindblad operators: phonon decay, excited decay split between g1 and g2,
/// excited pure dephasing, spin relaxation g2 -> g1 and spin pure dephasing
/// on g2. Zero rates produce no operator.
inline std::vector<OperatorMatrix> collapse_operators(const SystemSpec& s) {
  s.validate();
  const auto& l = s.layout;
  const auto& d = s.decoherence;
  const double deph = s.dephasing == DephasingNormalization::unit ? 1.0 : 2.0;
  std::vector<OperatorMatrix> out;
  auto push = [&](double rate, const OperatorMatrix& op) {
    if (rate > 0.0) out.push_back(std::sqrt(rate) * op);
  };
  push(lindblad_rate(s, d.gamma_m1), phonon_op(l, annihilation_op(l.phonon_levels())));
  for (int i = 0; i < s.defect_count(); ++i) {
    const double ge = lindblad_rate(s, d.gamma_e1);
    push(ge * s.branching_g1, defect_transition_op(l, i, Level::e, Level::g1));
    push(ge * (1.0 - s.branching_g1), defect_transition_op(l, i, Level::e, Level::g2));
    push(deph * lindblad_rate(s, d.gamma_e_phi), detail::level_projector(l, i, Level::e));
    push(lindblad_rate(s, d.gamma_s1), defect_transition_op(l, i, Level::g2, Level::g1));
    push(deph * lindblad_rate(s, d.gamma_s_phi), detail::level_projector(l, i, Level::g2));
  }
  return out;
}

/// Spin dephasing rate (as a tabulated value) that gives a g2 coherence
/// lifetime of T2 ns under the configured conventions.
inline double spin_dephasing_for_t2(const SystemSpec& s, double t2_ns) {
  if (!(t2_ns > 0.0)) throw std::invalid_argument("T2 must be > 0");
  // Coherence decay rate = k * rate / 2 with k = 1 (unit) or 2 (coherence).
  const double k = s.dephasing == DephasingNormalization::unit ? 1.0 : 2.0;
  const double rate = 2.0 / (k * t2_ns);
  return s.rate_convention == RateConvention::raw ? rate : rate / kTwoPi;
}

}  // namespace spinphonon
