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
#include <spinphonon/pulses.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace spinphonon {

// ---------------------------------------------------------------------------
// Dark states

struct DarkState {
  std::vector<std::pair<BasisLabel, Complex>> amplitudes;
  int excitation_number = 0;

  StateVector to_vector(const HilbertLayout& layout) const {
    StateVector v = StateVector::Zero(layout.total_dim());
    for (const auto& [label, a] : amplitudes) v(layout.encode(label)) += a;
    return v;
  }

  Complex amplitude(const BasisLabel& label) const {
    Complex out = 0.0;
    for (const auto& [l, a] : amplitudes) {
      if (l == label) out += a;
    }
    return out;
  }

  double norm() const {
    double n = 0.0;
    for (const auto& [l, a] : amplitudes) n += std::norm(a);
    return std::sqrt(n);
  }
};

namespace detail {
inline BasisLabel lbl(int n, std::initializer_list<Level> spins) { return {n, std::vector<Level>(spins)}; }
}  // namespace detail

/// (Omega_2 |1 g1> + Omega_R |0 g2>) / norm.
inline DarkState dark_state_single(Complex omega_r, Complex omega_2) {
  const double n = std::sqrt(std::norm(omega_r) + std::norm(omega_2));
  if (n == 0.0) throw std::invalid_argument("dark state undefined for zero amplitudes");
  using detail::lbl;
  DarkState d;
  d.excitation_number = 1;
  d.amplitudes = {{lbl(1, {Level::g1}), omega_2 / n}, {lbl(0, {Level::g2}), omega_r / n}};
  return d;
}

/// Two-excitation dark state in the mixing-angle form; valid for every theta.
inline DarkState dark_state_two_angles(double theta, double phi) {
  using detail::lbl;
  const double c = std::cos(theta), s = std::sin(theta);
  const double c4 = c * c * c * c;
  const double norm = std::sqrt(2.0 - c4);
  const Complex ep = std::exp(kI * phi);
  const double sym = 2.0 * s * c / norm / std::sqrt(2.0);
  DarkState d;
  d.excitation_number = 2;
  d.amplitudes = {{lbl(2, {Level::g1, Level::g1}), c * c / norm * ep},
                  {lbl(0, {Level::g2, Level::g2}), std::sqrt(2.0) * s * s / norm / ep},
                  {lbl(1, {Level::g1, Level::g2}), sym},
                  {lbl(1, {Level::g2, Level::g1}), sym}};
  return d;
}

/// Two-excitation dark state from amplitudes; both must be nonzero.
inline DarkState dark_state_two(Complex omega_r, Complex omega_2) {
  if (omega_r == Complex(0.0) || omega_2 == Complex(0.0)) {
    throw std::invalid_argument("two-spin dark state needs both amplitudes nonzero");
  }
  using detail::lbl;
  const Complex a = omega_2 / (2.0 * omega_r);
  const Complex b = omega_r / (std::sqrt(2.0) * omega_2);
  const double inv = 1.0 / std::sqrt(std::norm(a) + std::norm(b) + 1.0);
  const double sym = inv / std::sqrt(2.0);
  DarkState d;
  d.excitation_number = 2;
  d.amplitudes = {{lbl(2, {Level::g1, Level::g1}), a * inv},
                  {lbl(0, {Level::g2, Level::g2}), b * inv},
                  {lbl(1, {Level::g1, Level::g2}), sym},
                  {lbl(1, {Level::g2, Level::g1}), sym}};
  return d;
}

/// The second two-excitation dark state, orthogonal to dark_state_two_angles
/// and carrying an |0 e e> component.
inline DarkState dark_state_two_orthogonal(double theta, double phi) {
  using detail::lbl;
  const double c = std::cos(theta), s = std::sin(theta);
  const double c2 = c * c, c4 = c2 * c2;
  const double norm = std::sqrt((3.0 + 2.0 * c2 - 3.0 * c4) * (2.0 - c4));
  const Complex em = std::exp(-kI * phi);
  const Complex sym = em * std::sqrt(2.0) * s * c * (1.0 + s * s) / std::sqrt(2.0) / norm;
  DarkState d;
  d.excitation_number = 2;
  d.amplitudes = {{lbl(2, {Level::g1, Level::g1}), -std::sqrt(2.0) * s * s / norm},
                  {lbl(0, {Level::g2, Level::g2}), em * em * (2.0 * c4 - 3.0 * c2) / norm},
                  {lbl(1, {Level::g1, Level::g2}), sym},
                  {lbl(1, {Level::g2, Level::g1}), sym},
                  {lbl(0, {Level::e, Level::e}), (2.0 - c4) / norm}};
  return d;
}

/// N-spin transfer dark state (Omega_2 |S1> + sqrt(N) Omega_R |S3>) / norm,
/// with |S1> = |1 g1...g1> and |S3> the symmetric single-g2 state.
inline DarkState dark_state_dicke(Complex omega_r, Complex omega_2, int n_spins) {
  if (n_spins < 1) throw std::invalid_argument("n_spins must be >= 1");
  const double n = std::sqrt(std::norm(omega_2) + n_spins * std::norm(omega_r));
  if (n == 0.0) throw std::invalid_argument("dark state undefined for zero amplitudes");
  DarkState d;
  d.excitation_number = 1;
  d.amplitudes.push_back({BasisLabel{1, std::vector<Level>(n_spins, Level::g1)}, omega_2 / n});
  for (int i = 0; i < n_spins; ++i) {
    BasisLabel l{0, std::vector<Level>(n_spins, Level::g1)};
    l.spins[i] = Level::g2;
    d.amplitudes.push_back({l, omega_r / n});
  }
  return d;
}

/// Target single-excitation Dicke state: symmetric superposition of one g2.
inline StateVector dicke_target(const HilbertLayout& layout) {
  const int n = layout.defect_count();
  StateVector v = StateVector::Zero(layout.total_dim());
  for (int i = 0; i < n; ++i) {
    BasisLabel l{0, std::vector<Level>(n, Level::g1)};
    l.spins[i] = Level::g2;
    v(layout.encode(l)) = 1.0 / std::sqrt(double(n));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Geometric phases

struct GeometricPhases {
  double gamma1 = 0.0;              // -int cos^2 dphi
  double gamma2_geometric = 0.0;    // -int (cos^4 - 2 sin^4)/(2 - cos^4) dphi
  double gamma2 = 0.0;              // gamma2_geometric - (phi_end - phi_start)
  double delta_gamma = 0.0;         // int 2 cos^4 sin^2 / (2 - cos^4) dphi
};

inline double gamma1_integrand(double theta) {
  const double c = std::cos(theta);
  return -c * c;
}

inline double gamma2_geometric_integrand(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double c4 = c * c * c * c, s4 = s * s * s * s;
  return -(c4 - 2.0 * s4) / (2.0 - c4);
}

inline double delta_gamma_integrand(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double c4 = c * c * c * c;
  return 2.0 * c4 * s * s / (2.0 - c4);
}

/// Adaptive Gauss-Kronrod quadrature of each phase integral, stage by stage,
/// using dphi = phi_rate dt.
inline GeometricPhases geometric_phases(const StirapSchedule& s) {
  using boost::math::quadrature::gauss_kronrod;
  GeometricPhases out;
  for (std::size_t i = 0; i < s.stages().size(); ++i) {
    const Stage& st = s.stages()[i];
    if (st.phi_rate == 0.0 || st.duration == 0.0) continue;
    const double t0 = s.stage_start(i);
    const double t1 = t0 + st.duration;
    auto integrate = [&](double (*f)(double)) {
      auto g = [&](double t) { return f(s.evaluate(t).theta) * st.phi_rate; };
      return gauss_kronrod<double, 61>::integrate(g, t0, t1, 15, 1e-14);
    };
    out.gamma1 += integrate(gamma1_integrand);
    out.gamma2_geometric += integrate(gamma2_geometric_integrand);
    out.delta_gamma += integrate(delta_gamma_integrand);
  }
  out.gamma2 = out.gamma2_geometric - s.phi_total();
  return out;
}

/// Closed form for schedules that ramp phi only in holds: -sum cos^2 theta dphi.
inline double gamma1_closed_form(const StirapSchedule& s) {
  double g = 0.0;
  for (const Stage& st : s.stages()) g += gamma1_integrand(st.theta_from) * st.phi_rate * st.duration;
  return g;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

// ---------------------------------------------------------------------------
// Leakage bound

struct LeakageBound {
  double eta = 0.0;
  double bound = 0.0;  // 4 eta^2
};

/// Perturbative leakage into the orthogonal dark state during a pi/4 plateau:
/// eta = (2/7) sqrt(2/13), bound 4 eta^2 = 32/637.
inline LeakageBound leakage_upper_bound() {
  LeakageBound b;
  b.eta = 2.0 / 7.0 * std::sqrt(2.0 / 13.0);
  b.bound = 4.0 * b.eta * b.eta;
  return b;
}

// ---------------------------------------------------------------------------
// Fidelities

inline double state_fidelity(const DensityMatrix& rho, const StateVector& target) {
  if (rho.rows() != target.size()) throw std::invalid_argument("state_fidelity: dimension mismatch");
  return target.dot(rho * target).real();
}

inline double state_fidelity(const DensityMatrix& rho, const DensityMatrix& target) {
  if (rho.rows() != target.rows() || rho.cols() != target.cols()) {
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  }
  return (target * rho).trace().real();
}

// ---------------------------------------------------------------------------
// Two-qubit process tomography

/// Pauli labels in storage order: first letter acts on qubit A (the more
/// significant tensor factor), II, IX, IY, IZ, XI, ..., ZZ.
inline const std::array<std::string, 16>& pauli_labels() {
  static const std::array<std::string, 16> labels = [] {
    std::array<std::string, 16> out;
    const char* p = "IXYZ";
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) out[a * 4 + b] = std::string{p[a], p[b]};
    }
    return out;
  }();
  return labels;
}

inline const std::array<OperatorMatrix, 16>& pauli_basis_2q() {
  static const std::array<OperatorMatrix, 16> basis = [] {
    std::array<OperatorMatrix, 4> s;
    s[0] = OperatorMatrix::Identity(2, 2);
    s[1] = OperatorMatrix::Zero(2, 2);
    s[1] << 0, 1, 1, 0;
    s[2] = OperatorMatrix::Zero(2, 2);
    s[2] << 0, -kI, kI, 0;
    s[3] = OperatorMatrix::Zero(2, 2);
    s[3] << 1, 0, 0, -1;
    std::array<OperatorMatrix, 16> out;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) out[a * 4 + b] = kron(s[a], s[b]);
    }
    return out;
  }();
  return basis;
}

/// E(rho) = sum_mn chi_mn P_m rho P_n^dagger in the two-qubit Pauli basis.
struct ChiMatrix {
  Eigen::Matrix<Complex, 16, 16> chi = Eigen::Matrix<Complex, 16, 16>::Zero();

  double trace() const { return chi.trace().real(); }

  /// Smallest eigenvalue of the Hermitian part; negative values flag a
  /// reconstruction outside the completely positive cone.
  double min_eigenvalue() const {
    const Eigen::Matrix<Complex, 16, 16> h = 0.5 * (chi + chi.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, 16, 16>> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double hermiticity_error() const { return (chi - chi.adjoint()).cwiseAbs().maxCoeff(); }

  void write_csv(std::ostream& os) const {
    const auto& lab = pauli_labels();
    os << "part,row";
    for (const auto& l : lab) os << ',' << l;
    os << '\n' << std::setprecision(12);
    for (int part = 0; part < 2; ++part) {
      for (int m = 0; m < 16; ++m) {
        os << (part == 0 ? "re" : "im") << ',' << lab[m];
        for (int n = 0; n < 16; ++n) os << ',' << (part == 0 ? chi(m, n).real() : chi(m, n).imag());
        os << '\n';
      }
    }
  }
};

inline ChiMatrix chi_of_unitary(const OperatorMatrix& u) {
  if (u.rows() != 4 || u.cols() != 4) throw std::invalid_argument("chi_of_unitary needs a 4x4 matrix");
  const auto& p = pauli_basis_2q();
  Eigen::Matrix<Complex, 16, 1> c;
  for (int m = 0; m < 16; ++m) c(m) = (p[m].adjoint() * u).trace() / 4.0;
  ChiMatrix out;
  out.chi = c * c.adjoint();
  return out;
}

inline OperatorMatrix cz_unitary() {
  OperatorMatrix u = OperatorMatrix::Identity(4, 4);
  u(3, 3) = -1.0;
  return u;
}

/// tr(chi_a chi_b), real part.
inline double process_fidelity(const ChiMatrix& ideal, const ChiMatrix& actual) {
  return (ideal.chi * actual.chi).trace().real();
}

inline double average_gate_fidelity(double process_fid, int dim = 4) {
  return (dim * process_fid + 1.0) / (dim + 1.0);
}

/// The 16 product inputs {|0>, |1>, |+>, |+i>}^(x2), input index a*4+b.
inline std::array<StateVector, 16> tomography_inputs() {
  std::array<StateVector, 4> q;
  for (auto& v : q) v = StateVector::Zero(2);
  q[0](0) = 1.0;
  q[1](1) = 1.0;
  q[2] << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  q[3] << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
  std::array<StateVector, 16> out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      out[a * 4 + b] = StateVector(4);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) out[a * 4 + b](i * 2 + j) = q[a](i) * q[b](j);
      }
    }
  }
  return out;
}

inline Eigen::VectorXcd vec_columns(const OperatorMatrix& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

/// Reconstructs chi from the channel outputs for the 16 standard inputs.
/// outputs[k] must be the channel image of tomography_inputs()[k].
inline ChiMatrix reconstruct_chi(const std::array<DensityMatrix, 16>& outputs) {
  const auto inputs = tomography_inputs();
  Eigen::Matrix<Complex, 16, 16> rin, rout;
  for (int k = 0; k < 16; ++k) {
    if (outputs[k].rows() != 4 || outputs[k].cols() != 4) {
      throw std::invalid_argument("tomography outputs must be 4x4");
    }
    rin.col(k) = vec_columns(pure_density(inputs[k]));
    rout.col(k) = vec_columns(outputs[k]);
  }
  const Eigen::Matrix<Complex, 16, 16> super = rout * rin.inverse();
  // vec(P_m rho P_n^dagger) = (conj(P_n) kron P_m) vec(rho); that basis has
  // Hilbert-Schmidt norm^2 = 16.
  const auto& p = pauli_basis_2q();
  ChiMatrix out;
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) {
      const OperatorMatrix b = kron(p[n].conjugate(), p[m]);
      out.chi(m, n) = (b.adjoint() * super).trace() / 16.0;
    }
  }
  return out;
}

using TwoQubitChannel = std::function<DensityMatrix(const DensityMatrix&)>;

inline ChiMatrix process_tomography_2q(const TwoQubitChannel& channel) {
  const auto inputs = tomography_inputs();
  std::array<DensityMatrix, 16> outs;
  for (int k = 0; k < 16; ++k) outs[k] = channel(pure_density(inputs[k]));
  return reconstruct_chi(outs);
}

// ---------------------------------------------------------------------------
// Oscillation fitting

/// Least-squares fit of y(t) = a + b cos(2 pi f t) + c sin(2 pi f t); returns
/// the f (cycles per time unit) that minimizes the residual, scanning
/// [f_min, f_max] and refining with golden-section search.
inline double fit_oscillation_frequency(const std::vector<double>& t, const std::vector<double>& y,
                                        double f_min, double f_max, std::size_t scan = 2000) {
  if (t.size() != y.size() || t.size() < 4) throw std::invalid_argument("fit needs >= 4 samples");
  if (!(f_max > f_min) || !(f_min > 0.0)) throw std::invalid_argument("bad frequency range");
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[i];
  auto residual = [&](double f) {
    Eigen::MatrixXd a(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(kTwoPi * f * t[i]);
      a(i, 2) = std::sin(kTwoPi * f * t[i]);
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(yy);
    return (a * coef - yy).squaredNorm();
  };
  double best_f = f_min, best_r = residual(f_min);
  const double step = (f_max - f_min) / double(scan);
  for (std::size_t k = 1; k <= scan; ++k) {
    const double f = f_min + step * double(k);
    const double r = residual(f);
    if (r < best_r) {
      best_r = r;
      best_f = f;
    }
  }
  double lo = std::max(f_min, best_f - step), hi = std::min(f_max, best_f + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double r1 = residual(x1), r2 = residual(x2);
  for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    if (r1 < r2) {
      hi = x2;
      x2 = x1;
      r2 = r1;
      x1 = hi - gr * (hi - lo);
      r1 = residual(x1);
    } else {
      lo = x1;
      x1 = x2;
      r1 = r2;
      x2 = lo + gr * (hi - lo);
      r2 = residual(x2);
    }
  }
  return 0.5 * (lo + hi);
}

/// Least-squares slope and intercept of y = a + b x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs >= 2 points");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  const double b = (n * sxy - sx * sy) / den;
  return {(sy - b * sx) / n, b};
}

}  // namespace spinphonon
