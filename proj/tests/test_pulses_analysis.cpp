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


#include <spinphonon/analysis.hpp>
#include <spinphonon/models.hpp>
#include <spinphonon/pulses.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace spinphonon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

OperatorMatrix random_unitary(std::mt19937& rng, int n) {
  std::normal_distribution<double> nd;
  OperatorMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(nd(rng), nd(rng));
  Eigen::HouseholderQR<OperatorMatrix> qr(a);
  return qr.householderQ();
}

// |<a|b>| for normalized vectors; insensitive to a global phase.
double overlap(const StateVector& a, const StateVector& b) { return std::abs(a.dot(b)); }

}  // namespace

TEST_CASE("CZ schedule timing", "[pulses]") {
  const CzDesign d;
  CHECK_THAT(d.T0(), WithinAbs(5833.333333, 1e-5));
  CHECK_THAT(d.T1(), WithinAbs(833.333333, 1e-5));
  const auto s = design_cz_schedule(d);
  CHECK(s.stages().size() == 7);
  CHECK_THAT(s.total_duration(), WithinRel(2 * 5833.3333333 + 833.3333333 + 4 * 1350.0, 1e-9));
  CHECK_THAT(s.evaluate(0.0).theta, WithinAbs(kPi / 2, 1e-15));
  CHECK_THAT(s.evaluate(1350.0 + 100.0).theta, WithinAbs(kPi / 4, 1e-15));
  CHECK_THAT(s.evaluate(s.total_duration() / 2).theta, WithinAbs(0.0, 1e-15));
  CHECK_THAT(s.phi_total(), WithinRel(kTwoPi * 0.3e-3 * (2 * d.T0() + d.T1()), 1e-12));
  CHECK(s.adiabaticity_proxy() < 0.05);

  CzDesign bad = d;
  bad.k = -1;
  CHECK_THROWS_AS(design_cz_schedule(bad), std::invalid_argument);
  bad = d;
  bad.delta_R2 = 0.0;
  CHECK_THROWS_AS(design_cz_schedule(bad), std::invalid_argument);
  CHECK_THROWS_AS(s.evaluate(-1.0), std::out_of_range);
}

TEST_CASE("CZ schedule is time-reversal symmetric", "[pulses][property]") {
  for (double dr : {0.3e-3, 0.45e-3, 0.6e-3}) {
    CzDesign d;
    d.delta_R2 = dr;
    const auto s = design_cz_schedule(d);
    const double T = s.total_duration();
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double t = T * k / 2000.0;
      worst = std::max(worst, std::abs(s.evaluate(t).theta - s.evaluate(T - t).theta));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("schedule edges are smooth and continuous", "[pulses]") {
  const auto s = design_transfer_schedule(500.0, 0.02, TransferDirection::phonon_to_spins);
  CHECK(s.evaluate(0.0).theta == 0.0);
  CHECK_THAT(s.evaluate(500.0).theta, WithinAbs(kPi / 4, 1e-14));
  CHECK_THAT(s.evaluate(1000.0).theta, WithinAbs(kPi / 2, 1e-14));
  CHECK(s.theta_rate(0.0) == 0.0);
  CHECK(std::abs(s.theta_rate(500.0)) < 1e-15);
  // Numerical derivative matches theta_rate.
  const double t = 321.0, h = 1e-3;
  CHECK_THAT((s.evaluate(t + h).theta - s.evaluate(t - h).theta) / (2 * h), WithinRel(s.theta_rate(t), 1e-6));
  const auto r = design_transfer_schedule(500.0, 0.02, TransferDirection::spins_to_phonon);
  CHECK_THAT(r.evaluate(0.0).theta, WithinAbs(kPi / 2, 1e-15));

  CHECK_THROWS_AS(StirapSchedule({Stage::edge(0.0, 0.5, 10.0), Stage::hold(0.4, 10.0)}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(StirapSchedule({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StirapSchedule({Stage::hold(0.1, 1.0)}, 0.0), std::invalid_argument);

  std::ostringstream os;
  s.write_csv(os, 11);
  const std::string txt = os.str();
  CHECK(std::count(txt.begin(), txt.end(), '\n') == 12);
}

TEST_CASE("amplitude parametrization round trip", "[pulses][property]") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0), ph(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    ThetaPhiPoint p;
    p.theta = u(rng) * 1.5;
    p.phi = ph(rng);
    p.scale = u(rng);
    const auto [r, c] = p.amplitudes();
    const auto q = ThetaPhiPoint::from_amplitudes(r, c);
    CHECK_THAT(q.theta, WithinAbs(p.theta, 1e-12));
    CHECK_THAT(q.phi, WithinAbs(p.phi, 1e-12));
    CHECK_THAT(q.scale, WithinAbs(p.scale, 1e-12));
  }
}

TEST_CASE("Dicke pulse area scaling", "[pulses]") {
  // With theta fixed at pi/2 the area is 2 pi scale sqrt(N) T.
  const StirapSchedule hold({Stage::hold(kPi / 2, 100.0)}, 0.02);
  for (int n : {1, 2, 3, 4}) {
    CHECK_THAT(dicke_pulse_area(hold, n), WithinRel(kTwoPi * 0.02 * std::sqrt(double(n)) * 100.0, 1e-12));
  }
  const double t3 = matched_transfer_duration(3, 2, 3927.0, 0.023);
  CHECK(t3 < 3927.0);
  CHECK(t3 > 3927.0 * std::sqrt(2.0 / 3.0));
  CHECK_THAT(matched_transfer_duration(2, 2, 3927.0, 0.023), WithinRel(3927.0, 1e-12));
}

TEST_CASE("single-spin dark state is annihilated", "[analysis]") {
  const SystemSpec s = table2_spec(1, 3);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.03), ph(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const Complex om_r = u(rng) * std::exp(kI * ph(rng));
    const Complex om_2 = u(rng) * std::exp(kI * ph(rng));
    const OperatorMatrix h = darkframe_hamiltonian(s, DriveAmplitudes{{om_r, om_2}});
    const StateVector d = dark_state_single(om_r, om_2).to_vector(s.layout);
    CHECK_THAT(d.norm(), WithinAbs(1.0, 1e-14));
    CHECK((h * d).norm() <= 1e-10);
  }
  const auto eq = dark_state_single(0.023, 0.023);
  CHECK_THAT(std::abs(eq.amplitude({1, {Level::g1}})), WithinAbs(1 / std::sqrt(2.0), 1e-15));
  CHECK_THAT(std::abs(eq.amplitude({0, {Level::g2}})), WithinAbs(1 / std::sqrt(2.0), 1e-15));
  CHECK_THROWS_AS(dark_state_single(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("two-spin dark states", "[analysis]") {
  const SystemSpec s = table2_spec(2, 3);
  for (double theta : {0.1, kPi / 6, kPi / 4, 1.2}) {
    for (double phi : {0.0, 0.7, -2.0}) {
      const Complex om_r = 0.02 * std::sin(theta);
      const Complex om_2 = 0.02 * std::cos(theta) * std::exp(kI * phi);
      const OperatorMatrix h = darkframe_hamiltonian(s, DriveAmplitudes{{om_r, om_2}, {om_r, om_2}});
      const StateVector d2 = dark_state_two_angles(theta, phi).to_vector(s.layout);
      const StateVector dt = dark_state_two_orthogonal(theta, phi).to_vector(s.layout);
      const StateVector da = dark_state_two(om_r, om_2).to_vector(s.layout);
      CHECK_THAT(d2.norm(), WithinAbs(1.0, 1e-14));
      CHECK_THAT(dt.norm(), WithinAbs(1.0, 1e-14));
      CHECK(std::abs(d2.dot(dt)) < 1e-14);
      CHECK_THAT(overlap(d2, da), WithinAbs(1.0, 1e-12));
      CHECK((h * d2).norm() <= 1e-10);
      CHECK((h * dt).norm() <= 1e-10);
    }
  }
}

TEST_CASE("collective dark state and Dicke target", "[analysis]") {
  for (int n : {1, 2, 3}) {
    const SystemSpec s = table2_spec(n, 2);
    const Complex om_r = 0.013, om_2 = 0.02 * std::exp(kI * 0.3);
    DriveAmplitudes amps(n, {om_r, om_2});
    const OperatorMatrix h = darkframe_hamiltonian(s, amps);
    const StateVector d = dark_state_dicke(om_r, om_2, n).to_vector(s.layout);
    CHECK_THAT(d.norm(), WithinAbs(1.0, 1e-14));
    CHECK((h * d).norm() <= 1e-10);
    const StateVector target = dicke_target(s.layout);
    CHECK_THAT(target.norm(), WithinAbs(1.0, 1e-14));
    // theta -> pi/2 limit of the dark state is the Dicke target.
    CHECK_THAT(overlap(dark_state_dicke(1.0, 0.0, n).to_vector(s.layout), target), WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("geometric phases of the CZ schedule", "[analysis]") {
  const auto s = design_cz_schedule(CzDesign{});
  const auto g = geometric_phases(s);
  CHECK_THAT(g.gamma1, WithinAbs(gamma1_closed_form(s), 1e-8));
  CHECK_THAT(g.gamma1, WithinAbs(-4.0 * kPi, 1e-6));
  CHECK(std::abs(wrap_angle(g.gamma1)) <= 1e-6);
  CHECK_THAT(g.delta_gamma, WithinAbs(kPi, 1e-6));
  CHECK_THAT(g.gamma2, WithinAbs(g.gamma2_geometric - s.phi_total(), 1e-12));

  // Integrands at the plateau angles.
  CHECK_THAT(delta_gamma_integrand(kPi / 4), WithinAbs(1.0 / 7.0, 1e-15));
  CHECK_THAT(gamma1_integrand(kPi / 4), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(gamma2_geometric_integrand(0.0), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(gamma2_geometric_integrand(kPi / 2), WithinAbs(1.0, 1e-15));

  for (int k : {-2, -3, -5}) {
    CzDesign d;
    d.k = k;
    d.delta_R2 = 0.45e-3;
    const auto sk = design_cz_schedule(d);
    const auto gk = geometric_phases(sk);
    CHECK_THAT(gk.gamma1, WithinAbs(kTwoPi * k, 1e-6));
    CHECK_THAT(gk.delta_gamma, WithinAbs(kPi, 1e-6));
  }
}

TEST_CASE("wrap_angle", "[analysis]") {
  CHECK_THAT(wrap_angle(3 * kPi), WithinAbs(kPi, 1e-12));
  CHECK_THAT(wrap_angle(-kPi), WithinAbs(kPi, 1e-12));
  CHECK_THAT(wrap_angle(-4 * kPi + 0.1), WithinAbs(0.1, 1e-12));
}

TEST_CASE("leakage bound", "[analysis]") {
  const auto b = leakage_upper_bound();
  CHECK_THAT(b.bound, WithinRel(32.0 / 637.0, 1e-14));
  // Plateau leakage 4 eta^2 sin^2(phi/2) never exceeds the bound.
  for (int k = 0; k <= 100; ++k) {
    const double phi = kTwoPi * k / 100.0;
    CHECK(4 * b.eta * b.eta * std::pow(std::sin(phi / 2), 2) <= b.bound + 1e-15);
  }
}

TEST_CASE("chi of known channels", "[analysis]") {
  const auto cz = chi_of_unitary(cz_unitary());
  // CZ = (II + IZ + ZI - ZZ) / 2.
  CHECK_THAT(cz.chi(0, 0).real(), WithinAbs(0.25, 1e-15));
  CHECK_THAT(cz.chi(15, 0).real(), WithinAbs(-0.25, 1e-15));
  CHECK_THAT(cz.chi(3, 12).real(), WithinAbs(0.25, 1e-15));
  CHECK(std::abs(cz.chi(1, 1)) < 1e-15);
  CHECK_THAT(cz.trace(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(process_fidelity(cz, cz), WithinAbs(1.0, 1e-14));
  CHECK_THAT(average_gate_fidelity(1.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(average_gate_fidelity(0.0), WithinAbs(0.2, 1e-15));

  const auto id = process_tomography_2q([](const DensityMatrix& r) { return r; });
  CHECK_THAT(id.chi(0, 0).real(), WithinAbs(1.0, 1e-10));
  CHECK(id.chi.cwiseAbs().sum() - 1.0 < 1e-10);

  const auto dep = process_tomography_2q(
      [](const DensityMatrix& r) { return DensityMatrix(r.trace() * DensityMatrix::Identity(4, 4) / 4.0); });
  for (int m = 0; m < 16; ++m) {
    CHECK_THAT(dep.chi(m, m).real(), WithinAbs(1.0 / 16.0, 1e-10));
    for (int n = 0; n < 16; ++n) {
      if (n != m) CHECK(std::abs(dep.chi(m, n)) < 1e-10);
    }
  }
  CHECK_THAT(process_fidelity(cz, dep), WithinAbs(1.0 / 16.0, 1e-10));
}

TEST_CASE("chi round trip through tomography", "[analysis][property]") {
  std::mt19937 rng(42);
  for (int k = 0; k < 10; ++k) {
    const OperatorMatrix u = random_unitary(rng, 4);
    const auto direct = chi_of_unitary(u);
    const auto rec = process_tomography_2q([&](const DensityMatrix& r) { return DensityMatrix(u * r * u.adjoint()); });
    CHECK((direct.chi - rec.chi).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(rec.hermiticity_error() <= 1e-10);
    CHECK(rec.min_eigenvalue() >= -1e-10);
    CHECK_THAT(rec.trace(), WithinAbs(1.0, 1e-10));
  }
  std::array<DensityMatrix, 16> bad;
  for (auto& b : bad) b = DensityMatrix::Zero(3, 3);
  CHECK_THROWS_AS(reconstruct_chi(bad), std::invalid_argument);
}

TEST_CASE("state fidelity", "[analysis]") {
  StateVector a = StateVector::Zero(2);
  a(0) = 1.0;
  StateVector plus = StateVector::Constant(2, 1.0 / std::sqrt(2.0));
  CHECK_THAT(state_fidelity(pure_density(a), a), WithinAbs(1.0, 1e-15));
  CHECK_THAT(state_fidelity(pure_density(a), plus), WithinAbs(0.5, 1e-15));
  CHECK_THAT(state_fidelity(DensityMatrix(DensityMatrix::Identity(2, 2) / 2.0), plus), WithinAbs(0.5, 1e-15));
  CHECK_THROWS(state_fidelity(pure_density(a), StateVector(StateVector::Zero(3))));
}

TEST_CASE("oscillation and linear fits", "[analysis]") {
  std::vector<double> t, y;
  for (int k = 0; k < 300; ++k) {
    t.push_back(k * 5.0);
    y.push_back(0.4 + 0.3 * std::cos(kTwoPi * 1.234e-3 * t.back() + 0.5));
  }
  CHECK_THAT(fit_oscillation_frequency(t, y, 0.5e-3, 3e-3), WithinRel(1.234e-3, 1e-8));
  CHECK_THROWS(fit_oscillation_frequency(t, y, 3e-3, 1e-3));

  const auto [a, b] = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK_THAT(a, WithinAbs(1.0, 1e-14));
  CHECK_THAT(b, WithinAbs(2.0, 1e-14));
  CHECK_THROWS(linear_fit({1, 1}, {0, 1}));
}
