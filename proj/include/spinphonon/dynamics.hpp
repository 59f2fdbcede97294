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
#include <spinphonon/ode.hpp>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace spinphonon {

/// H(t) = H_static + sum_k c_k(t) O_k, evaluated fresh on every call.
///
/// Terms are either real-coefficient Hermitian operators or complex-coefficient
/// pairs c O + c* O^dagger, so the result is Hermitian by construction. A
/// fully general callback is accepted via from_function.
class TimeDependentHamiltonian {
 public:
  using RealCoefficient = std::function<double(double)>;
  using ComplexCoefficient = std::function<Complex(double)>;
  using DenseFunction = std::function<OperatorMatrix(double)>;

  explicit TimeDependentHamiltonian(Index dim) : dim_(dim), static_(OperatorMatrix::Zero(dim, dim)) {
    if (dim <= 0) throw std::invalid_argument("Hamiltonian dimension must be positive");
  }

  static TimeDependentHamiltonian constant(const OperatorMatrix& h) {
    TimeDependentHamiltonian out(h.rows());
    out.add_constant(h);
    return out;
  }

  static TimeDependentHamiltonian from_function(Index dim, DenseFunction f) {
    TimeDependentHamiltonian out(dim);
    out.function_ = std::move(f);
    return out;
  }

  Index dim() const { return dim_; }
  bool is_callback() const { return static_cast<bool>(function_); }

  void add_constant(const OperatorMatrix& h) {
    check_shape(h);
    if (hermiticity_error(h) > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("constant Hamiltonian part is not Hermitian");
    }
    static_ += h;
  }

  void add_term(const OperatorMatrix& hermitian_op, RealCoefficient c) {
    check_shape(hermitian_op);
    if (hermiticity_error(hermitian_op) > 1e-12 * std::max(1.0, hermitian_op.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("real-coefficient term must be Hermitian");
    }
    real_terms_.push_back({hermitian_op, std::move(c)});
  }

  void add_hermitian_pair(const OperatorMatrix& op, ComplexCoefficient c) {
    check_shape(op);
    pair_terms_.push_back({op, std::move(c)});
  }

  OperatorMatrix operator()(double t) const {
    if (function_) return function_(t);
    OperatorMatrix h = static_;
    for (const auto& [op, c] : real_terms_) h += c(t) * op;
    for (const auto& [op, c] : pair_terms_) {
      const Complex z = c(t);
      h += z * op + std::conj(z) * op.adjoint();
    }
    return h;
  }

  const OperatorMatrix& static_part() const { return static_; }
  const auto& real_terms() const { return real_terms_; }
  const auto& pair_terms() const { return pair_terms_; }

 private:
  void check_shape(const OperatorMatrix& m) const {
    if (function_) throw std::logic_error("cannot add terms to a callback Hamiltonian");
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw std::invalid_argument("Hamiltonian term dimension mismatch");
    }
  }

  Index dim_;
  OperatorMatrix static_;
  std::vector<std::pair<OperatorMatrix, RealCoefficient>> real_terms_;
  std::vector<std::pair<OperatorMatrix, ComplexCoefficient>> pair_terms_;
  DenseFunction function_;
};

namespace detail {

/// Sparse matrix with a fixed pattern equal to the union of all Hamiltonian
/// pieces, refilled in place from the coefficients at each time.
class SparseAssembler {
 public:
  SparseAssembler(const TimeDependentHamiltonian& h, const OperatorMatrix& extra_static)
      : h_(h) {
    const Index d = h.dim();
    OperatorMatrix mask = OperatorMatrix::Zero(d, d);
    auto accumulate = [&](const OperatorMatrix& m) {
      mask += m.cwiseAbs().cast<Complex>();
    };
    const OperatorMatrix base = h.static_part() + extra_static;
    accumulate(base);
    for (const auto& [op, c] : h.real_terms()) accumulate(op);
    for (const auto& [op, c] : h.pair_terms()) {
      accumulate(op);
      accumulate(op.adjoint());
    }
    matrix_ = mask.sparseView(1.0, 0.0);
    matrix_.makeCompressed();
    base_values_ = scatter_dense(base);
    for (const auto& [op, c] : h.real_terms()) real_.push_back(entries(op));
    for (const auto& [op, c] : h.pair_terms()) {
      pair_.push_back(entries(op));
      pair_adj_.push_back(entries(op.adjoint()));
    }
  }

  const SparseOperator& at(double t) {
    Complex* v = matrix_.valuePtr();
    std::copy(base_values_.begin(), base_values_.end(), v);
    const auto& rt = h_.real_terms();
    for (std::size_t k = 0; k < rt.size(); ++k) {
      const double c = rt[k].second(t);
      if (c == 0.0) continue;
      for (const auto& [pos, val] : real_[k]) v[pos] += c * val;
    }
    const auto& pt = h_.pair_terms();
    for (std::size_t k = 0; k < pt.size(); ++k) {
      const Complex c = pt[k].second(t);
      if (c == Complex(0.0)) continue;
      const Complex cc = std::conj(c);
      for (const auto& [pos, val] : pair_[k]) v[pos] += c * val;
      for (const auto& [pos, val] : pair_adj_[k]) v[pos] += cc * val;
    }
    return matrix_;
  }

 private:
  Index position(Index r, Index c) const {
    const auto* outer = matrix_.outerIndexPtr();
    const auto* inner = matrix_.innerIndexPtr();
    const auto* begin = inner + outer[r];
    const auto* end = inner + outer[r + 1];
    const auto* it = std::lower_bound(begin, end, static_cast<SparseOperator::StorageIndex>(c));
    if (it == end || *it != c) throw std::logic_error("sparse pattern lookup failed");
    return it - inner;
  }

  std::vector<std::pair<Index, Complex>> entries(const OperatorMatrix& m) const {
    std::vector<std::pair<Index, Complex>> out;
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != Complex(0.0)) out.emplace_back(position(r, c), m(r, c));
      }
    }
    return out;
  }

  std::vector<Complex> scatter_dense(const OperatorMatrix& m) const {
    std::vector<Complex> out(static_cast<std::size_t>(matrix_.nonZeros()), Complex(0.0));
    for (const auto& [pos, val] : entries(m)) out[static_cast<std::size_t>(pos)] += val;
    return out;
  }

  const TimeDependentHamiltonian& h_;
  SparseOperator matrix_;
  std::vector<Complex> base_values_;
  std::vector<std::vector<std::pair<Index, Complex>>> real_, pair_, pair_adj_;
};

}  // namespace detail

/// Right-hand side of the Lindblad equation,
///   d rho/dt = -i (H_eff rho - rho H_eff^dagger) + sum_k L_k rho L_k^dagger,
/// with H_eff = H - (i/2) sum_k L_k^dagger L_k. Inputs are assumed Hermitian,
/// which holds for every Runge-Kutta stage of a Hermitian initial state.
class LindbladGenerator {
 public:
  LindbladGenerator(const TimeDependentHamiltonian& h, const std::vector<OperatorMatrix>& collapse)
      : h_(h) {
    const Index d = h.dim();
    OperatorMatrix decay = OperatorMatrix::Zero(d, d);
    for (const auto& l : collapse) {
      if (l.rows() != d || l.cols() != d) {
        throw std::invalid_argument("collapse operator dimension mismatch");
      }
      decay += l.adjoint() * l;
      jumps_.push_back(to_sparse(l));
    }
    anti_ = -0.5 * kI * decay;
    if (!h.is_callback()) assembler_ = std::make_unique<detail::SparseAssembler>(h, anti_);
  }

  void operator()(double t, const DensityMatrix& rho, DensityMatrix& out) {
    if (assembler_) {
      const SparseOperator& heff = assembler_->at(t);
      work_.noalias() = heff * rho;
    } else {
      work_.noalias() = (h_(t) + anti_) * rho;
    }
    out = -kI * work_;
    out += kI * work_.adjoint();
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      jump_work_.noalias() = jumps_[k] * rho;
      out.noalias() += jumps_[k] * jump_work_.adjoint();
    }
  }

 private:
  const TimeDependentHamiltonian& h_;
  OperatorMatrix anti_;
  std::vector<SparseOperator> jumps_;
  std::unique_ptr<detail::SparseAssembler> assembler_;
  DensityMatrix work_, jump_work_;
};

/// d psi/dt = -i H(t) psi.
class SchrodingerGenerator {
 public:
  explicit SchrodingerGenerator(const TimeDependentHamiltonian& h) : h_(h) {
    if (!h.is_callback()) {
      assembler_ = std::make_unique<detail::SparseAssembler>(
          h, OperatorMatrix::Zero(h.dim(), h.dim()));
    }
  }

  void operator()(double t, const StateVector& psi, StateVector& out) {
    if (assembler_) {
      out.noalias() = assembler_->at(t) * psi;
    } else {
      out.noalias() = h_(t) * psi;
    }
    out *= -kI;
  }

 private:
  const TimeDependentHamiltonian& h_;
  std::unique_ptr<detail::SparseAssembler> assembler_;
};

struct Observable {
  std::string name;
  OperatorMatrix op;
};

/// Basis amplitude to follow during closed-system runs; produces the series
/// "pop:<name>" and "phase:<name>".
struct TrackedAmplitude {
  std::string name;
  Index index = 0;
};

struct EvolveOptions {
  std::vector<Observable> observables;
  std::vector<TrackedAmplitude> tracked;
  bool store_states = true;
  bool check_positivity = true;
};

struct TrajectoryResult {
  std::vector<double> time_grid;
  std::vector<DensityMatrix> states;  // master-equation runs
  std::vector<StateVector> kets;      // unitary runs
  std::map<std::string, std::vector<double>> observables;
  DensityMatrix final_state;
  StateVector final_ket;
  IntegrationStats stats;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;

  const std::vector<double>& series(const std::string& name) const {
    auto it = observables.find(name);
    if (it == observables.end()) throw std::out_of_range("no observable '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline void check_hamiltonian(const TimeDependentHamiltonian& h, double t) {
  const OperatorMatrix m = h(t);
  if (m.rows() != h.dim() || m.cols() != h.dim()) {
    throw std::invalid_argument("Hamiltonian callback returned wrong dimension");
  }
  if (hermiticity_error(m) > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("Hamiltonian is not Hermitian");
  }
}

}  // namespace detail

inline TrajectoryResult evolve_master_equation(const TimeDependentHamiltonian& h,
                                               const std::vector<OperatorMatrix>& collapse,
                                               const DensityMatrix& rho0,
                                               const std::vector<double>& grid,
                                               const IntegratorConfig& cfg,
                                               const EvolveOptions& opts = {}) {
  if (rho0.rows() != h.dim() || rho0.cols() != h.dim()) {
    throw std::invalid_argument("initial state dimension does not match Hamiltonian");
  }
  if (!is_valid_density(rho0, 1e-10, 1e-9, 1e-8)) {
    throw std::invalid_argument("initial density matrix is not valid");
  }
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  detail::check_hamiltonian(h, grid.front());

  TrajectoryResult res;
  res.time_grid = grid;
  res.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& o : opts.observables) {
    if (o.op.rows() != h.dim()) throw std::invalid_argument("observable dimension mismatch");
    res.observables[o.name].reserve(grid.size());
  }
  const Complex tr0 = rho0.trace();

  LindbladGenerator gen(h, collapse);
  DormandPrince<DensityMatrix> stepper(
      [&gen](double t, const DensityMatrix& y, DensityMatrix& dy) { gen(t, y, dy); }, cfg);
  DensityMatrix rho = rho0;
  stepper.integrate(rho, grid, [&](std::size_t, double, const DensityMatrix& r) {
    res.max_trace_drift = std::max(res.max_trace_drift, std::abs(r.trace() - tr0));
    res.max_hermiticity_error = std::max(res.max_hermiticity_error, hermiticity_error(r));
    if (opts.check_positivity) {
      Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(0.5 * (r + r.adjoint()),
                                                       Eigen::EigenvaluesOnly);
      res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    for (const auto& o : opts.observables) {
      res.observables[o.name].push_back((o.op * r).trace().real());
    }
    if (opts.store_states) res.states.push_back(r);
  });
  if (!opts.check_positivity) res.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  res.final_state = std::move(rho);
  res.stats = stepper.stats();
  return res;
}

inline TrajectoryResult evolve_unitary(const TimeDependentHamiltonian& h, const StateVector& psi0,
                                       const std::vector<double>& grid,
                                       const IntegratorConfig& cfg,
                                       const EvolveOptions& opts = {}) {
  if (psi0.size() != h.dim()) {
    throw std::invalid_argument("initial state dimension does not match Hamiltonian");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state not normalized");
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  detail::check_hamiltonian(h, grid.front());

  TrajectoryResult res;
  res.time_grid = grid;
  for (const auto& a : opts.tracked) {
    if (a.index < 0 || a.index >= h.dim()) throw std::out_of_range("tracked amplitude index");
  }
  SchrodingerGenerator gen(h);
  DormandPrince<StateVector> stepper(
      [&gen](double t, const StateVector& y, StateVector& dy) { gen(t, y, dy); }, cfg);
  StateVector psi = psi0;
  stepper.integrate(psi, grid, [&](std::size_t, double, const StateVector& v) {
    res.max_trace_drift = std::max(res.max_trace_drift, std::abs(v.squaredNorm() - 1.0));
    for (const auto& o : opts.observables) {
      res.observables[o.name].push_back(v.dot(o.op * v).real());
    }
    for (const auto& a : opts.tracked) {
      res.observables["pop:" + a.name].push_back(std::norm(v(a.index)));
      res.observables["phase:" + a.name].push_back(std::arg(v(a.index)));
    }
    if (opts.store_states) res.kets.push_back(v);
  });
  res.final_ket = std::move(psi);
  res.stats = stepper.stats();
  return res;
}

/// Unwraps a sequence of angles so successive differences lie in (-pi, pi].
inline std::vector<double> unwrap_phase(const std::vector<double>& phase) {
  std::vector<double> out(phase);
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    d -= kTwoPi * std::round(d / kTwoPi);
    out[i] = out[i - 1] + d;
  }
  return out;
}

}  // namespace spinphonon
