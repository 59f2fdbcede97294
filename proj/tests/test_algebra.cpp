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


#include <spinphonon/models.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace spinphonon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("annihilation operator lowers and counts", "[algebra]") {
  const OperatorMatrix b = annihilation_op(6);
  StateVector one = StateVector::Zero(6);
  one(1) = 1.0;
  const StateVector lowered = b * one;
  CHECK(std::abs(lowered(0) - Complex(1.0)) < 1e-15);
  CHECK(lowered.tail(5).norm() < 1e-15);

  const OperatorMatrix n = b.adjoint() * b;
  for (int k = 0; k < 6; ++k) CHECK_THAT(n(k, k).real(), WithinAbs(k, 1e-12));

  // Truncation leaves -5 in the top corner of [b, b^dagger].
  const OperatorMatrix c = b * b.adjoint() - b.adjoint() * b;
  for (int k = 0; k < 5; ++k) CHECK_THAT(c(k, k).real(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(c(5, 5).real(), WithinAbs(-5.0, 1e-12));

  CHECK_THROWS_AS(annihilation_op(1), std::invalid_argument);
}

TEST_CASE("truncated commutator identity for any cutoff", "[algebra][property]") {
  for (int levels = 2; levels <= 9; ++levels) {
    const OperatorMatrix b = annihilation_op(levels);
    const OperatorMatrix c = commutator(b, b.adjoint());
    OperatorMatrix expect = OperatorMatrix::Identity(levels, levels);
    expect(levels - 1, levels - 1) = Complex(1.0 - levels);
    CHECK((c - expect).norm() < 1e-12);
  }
}

TEST_CASE("layout encode and decode are inverse", "[algebra][property]") {
  for (int n = 1; n <= 3; ++n) {
    for (int p : {2, 3, 6}) {
      const HilbertLayout l(p, n);
      REQUIRE(l.total_dim() == p * static_cast<Index>(std::pow(4, n)));
      for (Index i = 0; i < l.total_dim(); ++i) REQUIRE(l.encode(l.decode(i)) == i);
    }
  }
  const HilbertLayout l(6, 2);
  CHECK(l.encode({0, {Level::g1, Level::g1}}) == 0);
  CHECK(l.encode({1, {Level::g1, Level::g1}}) == 16);  // phonon is most significant
  CHECK(l.encode({0, {Level::g1, Level::g2}}) == 1);
  CHECK_THROWS(l.encode({6, {Level::g1, Level::g1}}));
}

TEST_CASE("defect transition operators", "[algebra]") {
  const HilbertLayout l(3, 2);
  const OperatorMatrix up = defect_transition_op(l, 0, Level::g1, Level::e);
  const OperatorMatrix down = defect_transition_op(l, 0, Level::e, Level::g1);
  CHECK((up.adjoint() - down).norm() < 1e-15);

  OperatorMatrix sum = OperatorMatrix::Zero(l.total_dim(), l.total_dim());
  for (Level a : {Level::g1, Level::g2, Level::g3, Level::e}) sum += defect_transition_op(l, 1, a, a);
  CHECK((sum - OperatorMatrix::Identity(l.total_dim(), l.total_dim())).norm() < 1e-12);

  const OperatorMatrix a0 = defect_transition_op(l, 0, Level::g2, Level::e);
  const OperatorMatrix b1 = defect_transition_op(l, 1, Level::g1, Level::g3);
  CHECK(commutator(a0, b1).norm() == 0.0);

  CHECK_THROWS(defect_transition_op(l, 2, Level::g1, Level::e));
}

TEST_CASE("kron_embed", "[algebra]") {
  const HilbertLayout l(6, 1);
  const OperatorMatrix id = kron_embed(l, {});
  CHECK((id - OperatorMatrix::Identity(24, 24)).norm() == 0.0);
  const OperatorMatrix b = annihilation_op(6);
  const OperatorMatrix eb = kron_embed(l, {{kPhononSite, b}});
  CHECK(eb.rows() == 24);

  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  OperatorMatrix a(4, 4), c(4, 4);
  for (Index i = 0; i < 16; ++i) {
    a(i / 4, i % 4) = Complex(nd(rng), nd(rng));
    c(i / 4, i % 4) = Complex(nd(rng), nd(rng));
  }
  const OperatorMatrix lhs = kron_embed(l, {{1, a}}) * kron_embed(l, {{1, c}});
  CHECK((lhs - kron_embed(l, {{1, a * c}})).norm() < 1e-12);

  CHECK_THROWS_AS(kron_embed(l, {{1, a}, {1, c}}), std::invalid_argument);
  CHECK_THROWS(kron_embed(l, {{kPhononSite, a}}));
}

TEST_CASE("partial trace", "[algebra]") {
  const HilbertLayout l(3, 1);
  const DensityMatrix rho = pure_density(l.basis_state({1, {Level::g1}}));
  const DensityMatrix ph = partial_trace(l, rho, {kPhononSite});
  DensityMatrix expect = DensityMatrix::Zero(3, 3);
  expect(1, 1) = 1.0;
  CHECK((ph - expect).norm() < 1e-15);

  // Bell-like state between phonon {0,1} and defect {g1,g2}.
  const StateVector psi =
      (l.basis_state({0, {Level::g1}}) + l.basis_state({1, {Level::g2}})) / std::sqrt(2.0);
  const DensityMatrix spin = partial_trace(l, pure_density(psi), {defect_site(0)});
  CHECK_THAT(spin(0, 0).real(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(spin(1, 1).real(), WithinAbs(0.5, 1e-15));
  CHECK(std::abs(spin(0, 1)) < 1e-15);
  CHECK_THAT(spin.trace().real(), WithinAbs(1.0, 1e-15));
  CHECK_THROWS(partial_trace(l, rho, {}));
}

TEST_CASE("effective coupling and cooperativity with the dispersive parameter set", "[models]") {
  const SystemSpec s = table1_spec();
  // g Omega1 Omega2 / (4 Delta omega_m), evaluated by hand.
  const double expected = 0.257 * 0.5 * 0.023 / (4.0 * 0.23 * 5.6);
  CHECK_THAT(effective_coupling(0.257, 0.5, 0.023, 0.23, 5.6), WithinRel(expected, 1e-14));
  CHECK_THAT(effective_coupling(s, 0), WithinRel(expected, 1e-14));
  CHECK_THAT(expected * 1e3, WithinAbs(0.574, 5e-4));
  const double c = cooperativity(s);
  CHECK(c > 3.2e5 / 1.2);
  CHECK(c < 3.2e5 * 1.2);
}

TEST_CASE("effective JC coupling matches the closed form", "[models]") {
  const SystemSpec s = table1_spec(1, 3);
  const OperatorMatrix h = effective_jc_hamiltonian(s);
  const auto& l = s.layout;
  const Complex g = h(l.encode({1, {Level::g1}}), l.encode({0, {Level::g2}}));
  CHECK_THAT(std::abs(g) / kTwoPi, WithinRel(effective_coupling(s, 0), 1e-12));
  CHECK(hermiticity_error(h) < 1e-12);

  SystemSpec s0 = s;
  s0.drives[0].Omega2 = 0.0;
  const OperatorMatrix h0 = effective_jc_hamiltonian(s0);
  CHECK((h0 - OperatorMatrix(h0.diagonal().asDiagonal())).norm() < 1e-15);

  SystemSpec bad = s;
  bad.drives[0].Delta = 0.0;
  CHECK_THROWS_AS(effective_jc_hamiltonian(bad), std::invalid_argument);
}

TEST_CASE("lab Hamiltonian", "[models]") {
  SystemSpec s = table1_spec(1, 3);
  for (double t : {0.0, 0.37, 1.0}) CHECK(hermiticity_error(lab_hamiltonian(s, t)) < 1e-12);
  const auto& l = s.layout;
  const OperatorMatrix h = lab_hamiltonian(s, 0.0);
  const double g = std::abs(h(l.encode({1, {Level::e}}), l.encode({0, {Level::e}})));
  CHECK_THAT(g, WithinRel(kTwoPi * 0.257, 1e-12));

  s.drives[0].Omega1 = s.drives[0].Omega2 = 0.0;
  s.defects[0].g = 0.0;
  const OperatorMatrix d = lab_hamiltonian(s, 0.3);
  CHECK((d - OperatorMatrix(d.diagonal().asDiagonal())).norm() < 1e-12);
  CHECK_THAT(d(l.encode({2, {Level::g2}}), l.encode({2, {Level::g2}})).real(),
             WithinRel(kTwoPi * (2 * 5.6 - 1.0), 1e-12));
}

TEST_CASE("rotating-frame Hamiltonian", "[models]") {
  const SystemSpec s1 = table1_spec(1, 3);
  CHECK_THAT(std::abs(sideband_rabi(s1, 0)), WithinRel(0.5 * 0.257 / 5.6, 1e-14));
  CHECK(hermiticity_error(rotating_frame_hamiltonian(s1)) < 1e-12);

  const SystemSpec s2 = table1_spec(2, 2);
  const auto& l = s2.layout;
  const OperatorMatrix pair = excited_pair_shift(s2);
  const Index ee = l.encode({0, {Level::e, Level::e}});
  CHECK_THAT(pair(ee, ee).real(), WithinRel(-2.0 * 0.257 * 0.257 / 5.6 * kTwoPi, 1e-12));
  CHECK(pair.cwiseAbs().sum() - 2.0 * std::abs(pair(ee, ee)) < 1e-12);  // two phonon levels
  CHECK(hermiticity_error(rotating_frame_hamiltonian(s2)) < 1e-12);

  SystemSpec z = s1;
  z.drives[0].Omega1 = z.drives[0].Omega2 = 0.0;
  const OperatorMatrix hz = rotating_frame_hamiltonian(z);
  CHECK((hz - OperatorMatrix(hz.diagonal().asDiagonal())).norm() < 1e-15);
}

TEST_CASE("dark-frame Hamiltonian matrix elements", "[models]") {
  const SystemSpec s = table2_spec(1, 3);
  const auto& l = s.layout;
  const OperatorMatrix z = darkframe_hamiltonian(s, DriveAmplitudes{{0.0, 0.0}});
  CHECK(z.norm() == 0.0);
  const double om_r = 0.013;
  const OperatorMatrix h = darkframe_hamiltonian(s, DriveAmplitudes{{om_r, 0.02}});
  const Complex el = h(l.encode({0, {Level::e}}), l.encode({1, {Level::g1}}));
  CHECK_THAT(el.real(), WithinRel(-kTwoPi * om_r / 2.0, 1e-12));
}

TEST_CASE("collapse operators", "[models]") {
  SystemSpec s = table1_spec();
  CHECK(collapse_operators(s).size() == 6);  // excited decay contributes two channels
  s.decoherence = {0, 0, 0, 0, 0};
  CHECK(collapse_operators(s).empty());
  s.decoherence.gamma_m1 = -1.0;
  CHECK_THROWS_AS(collapse_operators(s), std::invalid_argument);
}

TEST_CASE("dispersive shift and AC Stark shift", "[models]") {
  const SystemSpec s = table1_spec();
  const double gp = effective_coupling(s, 0);
  CHECK_THAT(dispersive_shift_chi(s, 10.0 * gp), WithinRel(gp / 10.0, 1e-14));
  CHECK_THAT(dispersive_shift_chi(s, -10.0 * gp), WithinRel(-gp / 10.0, 1e-14));
  CHECK_THAT(dispersive_shift_chi(s, 0.010), WithinAbs(0.033e-3, 0.001e-3));
  CHECK_THROWS(dispersive_shift_chi(s, 0.0));

  CHECK_THAT(ac_stark_shift(0.5, 5.6, 0.0), WithinRel(0.25 / 22.4, 1e-14));
  CHECK(ac_stark_shift(0.0, 5.6, 0.0) == 0.0);
  CHECK_THAT(ac_stark_shift(0.5 * std::exp(kI * 0.7), 5.6, 0.0), WithinRel(0.25 / 22.4, 1e-14));
  CHECK_THROWS(ac_stark_shift(0.5, 5.6, -5.6));
}

TEST_CASE("Raman resonance puts |1,g1> and |0,g2> on resonance", "[models]") {
  const SystemSpec s = with_raman_resonance(table1_spec(1, 3));
  const auto& l = s.layout;
  const OperatorMatrix h = effective_jc_hamiltonian(s);
  const Index a = l.encode({1, {Level::g1}}), b = l.encode({0, {Level::g2}});
  CHECK(std::abs(h(a, a) - h(b, b)) < 1e-12);
  CHECK(s.drives[0].stark_correction != 0.0);
}
