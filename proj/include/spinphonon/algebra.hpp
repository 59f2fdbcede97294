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

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinphonon {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex square matrix. Used for Hamiltonians, collapse operators and
/// density matrices alike.
using OperatorMatrix = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using SparseOperator = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Frequencies are configured as f = omega / 2pi in GHz; generators use omega.
constexpr double angular(double f) { return kTwoPi * f; }

/// Defect level, in storage order.
enum class Level : int { g1 = 0, g2 = 1, g3 = 2, e = 3 };

inline constexpr int kDefectLevels = 4;

inline std::string to_string(Level l) {
  switch (l) {
    case Level::g1: return "g1";
    case Level::g2: return "g2";
    case Level::g3: return "g3";
    case Level::e: return "e";
  }
  return "?";
}

inline Level level_from_string(const std::string& s) {
  if (s == "g1") return Level::g1;
  if (s == "g2") return Level::g2;
  if (s == "g3") return Level::g3;
  if (s == "e") return Level::e;
  throw std::invalid_argument("unknown defect level '" + s + "'");
}

/// Basis label |n s_1 ... s_N>.
struct BasisLabel {
  int phonon = 0;
  std::vector<Level> spins;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

inline std::string to_string(const BasisLabel& label) {
  std::string out = "|" + std::to_string(label.phonon);
  for (Level l : label.spins) out += "," + to_string(l);
  return out + ">";
}

/// Site 0 is the phonon mode; site k+1 is defect k.
inline constexpr int kPhononSite = 0;
constexpr int defect_site(int defect) { return defect + 1; }

/// Tensor layout of (phonon) x (defect 0) x ... x (defect N-1). The phonon is
/// the most significant factor of the flat index.
class HilbertLayout {
 public:
  HilbertLayout() = default;
  HilbertLayout(int phonon_levels, int defect_count)
      : phonon_levels_(phonon_levels), defect_count_(defect_count) {
    if (phonon_levels < 2) {
      throw std::invalid_argument("phonon_levels must be >= 2");
    }
    if (defect_count < 1) {
      throw std::invalid_argument("defect_count must be >= 1");
    }
    if (defect_count > 8) {
      throw std::invalid_argument("defect_count > 8 exceeds dense capacity");
    }
  }

  int phonon_levels() const { return phonon_levels_; }
  int defect_count() const { return defect_count_; }
  int site_count() const { return defect_count_ + 1; }

  int site_dim(int site) const {
    check_site(site);
    return site == kPhononSite ? phonon_levels_ : kDefectLevels;
  }

  Index spin_dim() const {
    Index d = 1;
    for (int i = 0; i < defect_count_; ++i) d *= kDefectLevels;
    return d;
  }

  Index total_dim() const { return phonon_levels_ * spin_dim(); }

  Index encode(const BasisLabel& label) const {
    if (label.phonon < 0 || label.phonon >= phonon_levels_) {
      throw std::out_of_range("phonon number out of range");
    }
    if (static_cast<int>(label.spins.size()) != defect_count_) {
      throw std::invalid_argument("label has wrong number of defects");
    }
    Index idx = label.phonon;
    for (Level l : label.spins) idx = idx * kDefectLevels + static_cast<int>(l);
    return idx;
  }

  BasisLabel decode(Index idx) const {
    if (idx < 0 || idx >= total_dim()) throw std::out_of_range("basis index");
    BasisLabel label;
    label.spins.resize(defect_count_);
    for (int k = defect_count_ - 1; k >= 0; --k) {
      label.spins[k] = static_cast<Level>(idx % kDefectLevels);
      idx /= kDefectLevels;
    }
    label.phonon = static_cast<int>(idx);
    return label;
  }

  StateVector basis_state(const BasisLabel& label) const {
    StateVector v = StateVector::Zero(total_dim());
    v(encode(label)) = 1.0;
    return v;
  }

  void check_site(int site) const {
    if (site < 0 || site > defect_count_) throw std::out_of_range("site index");
  }

  friend bool operator==(const HilbertLayout&, const HilbertLayout&) = default;

 private:
  int phonon_levels_ = 6;
  int defect_count_ = 1;
};

/// Truncated lowering operator, b[n-1, n] = sqrt(n).
inline OperatorMatrix annihilation_op(int phonon_levels) {
  if (phonon_levels < 2) throw std::invalid_argument("phonon_levels must be >= 2");
  OperatorMatrix b = OperatorMatrix::Zero(phonon_levels, phonon_levels);
  for (int n = 1; n < phonon_levels; ++n) b(n - 1, n) = std::sqrt(double(n));
  return b;
}

/// |to><from| on a single four-level defect.
inline OperatorMatrix level_op(Level to, Level from) {
  OperatorMatrix m = OperatorMatrix::Zero(kDefectLevels, kDefectLevels);
  m(static_cast<int>(to), static_cast<int>(from)) = 1.0;
  return m;
}

using SiteOperator = std::pair<int, OperatorMatrix>;

inline OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  OperatorMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Kronecker product of the given site operators with identities elsewhere.
inline OperatorMatrix kron_embed(const HilbertLayout& layout,
                                 const std::vector<SiteOperator>& site_ops) {
  std::vector<const OperatorMatrix*> per_site(layout.site_count(), nullptr);
  for (const auto& [site, op] : site_ops) {
    layout.check_site(site);
    if (per_site[site] != nullptr) {
      throw std::invalid_argument("duplicate operator for site " + std::to_string(site));
    }
    const int d = layout.site_dim(site);
    if (op.rows() != d || op.cols() != d) {
      throw std::invalid_argument("site operator dimension mismatch at site " +
                                  std::to_string(site));
    }
    per_site[site] = &op;
  }
  OperatorMatrix out = OperatorMatrix::Ones(1, 1);
  for (int s = 0; s < layout.site_count(); ++s) {
    if (per_site[s] != nullptr) {
      out = kron(out, *per_site[s]);
    } else {
      out = kron(out, OperatorMatrix::Identity(layout.site_dim(s), layout.site_dim(s)));
    }
  }
  return out;
}

/// |to><from| acting on one defect, identity elsewhere.
inline OperatorMatrix defect_transition_op(const HilbertLayout& layout, int defect,
                                           Level from, Level to) {
  if (defect < 0 || defect >= layout.defect_count()) {
    throw std::out_of_range("defect index");
  }
  const int f = static_cast<int>(from);
  const int t = static_cast<int>(to);
  if (f < 0 || f >= kDefectLevels || t < 0 || t >= kDefectLevels) {
    throw std::out_of_range("defect level");
  }
  return kron_embed(layout, {{defect_site(defect), level_op(to, from)}});
}

inline OperatorMatrix phonon_op(const HilbertLayout& layout, const OperatorMatrix& op) {
  return kron_embed(layout, {{kPhononSite, op}});
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

inline double hermiticity_error(const OperatorMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Reduced density matrix over `keep` (site indices, phonon = 0). The kept
/// sites stay in layout order.
inline DensityMatrix partial_trace(const HilbertLayout& layout, const DensityMatrix& rho,
                                   const std::set<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  for (int s : keep) layout.check_site(s);
  if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim()) {
    throw std::invalid_argument("partial_trace: density matrix does not match layout");
  }
  const int n_sites = layout.site_count();
  std::vector<int> dims(n_sites);
  for (int s = 0; s < n_sites; ++s) dims[s] = layout.site_dim(s);

  Index keep_dim = 1;
  Index trace_dim = 1;
  for (int s = 0; s < n_sites; ++s) (keep.count(s) ? keep_dim : trace_dim) *= dims[s];

  // Flat index from (kept multi-index, traced multi-index).
  auto compose = [&](Index k, Index t) {
    std::vector<int> digits(n_sites);
    for (int s = n_sites - 1; s >= 0; --s) {
      if (keep.count(s)) {
        digits[s] = static_cast<int>(k % dims[s]);
        k /= dims[s];
      } else {
        digits[s] = static_cast<int>(t % dims[s]);
        t /= dims[s];
      }
    }
    Index idx = 0;
    for (int s = 0; s < n_sites; ++s) idx = idx * dims[s] + digits[s];
    return idx;
  };

  std::vector<Index> map(static_cast<size_t>(keep_dim * trace_dim));
  for (Index k = 0; k < keep_dim; ++k) {
    for (Index t = 0; t < trace_dim; ++t) map[k * trace_dim + t] = compose(k, t);
  }
  DensityMatrix out = DensityMatrix::Zero(keep_dim, keep_dim);
  for (Index i = 0; i < keep_dim; ++i) {
    for (Index j = 0; j < keep_dim; ++j) {
      Complex acc = 0.0;
      for (Index t = 0; t < trace_dim; ++t) {
        acc += rho(map[i * trace_dim + t], map[j * trace_dim + t]);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

struct DensityDiagnostics {
  double hermiticity_error = 0.0;
  double trace_error = 0.0;  // |tr(rho) - 1|
  double min_eigenvalue = 0.0;
};

inline DensityDiagnostics diagnose_density(const DensityMatrix& rho) {
  DensityDiagnostics d;
  d.hermiticity_error = hermiticity_error(rho);
  d.trace_error = std::abs(rho.trace() - Complex(1.0));
  const OperatorMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

inline bool is_valid_density(const DensityMatrix& rho, double tol_herm = 1e-10,
                             double tol_trace = 1e-9, double tol_eig = 1e-8) {
  if (rho.rows() != rho.cols()) return false;
  const auto d = diagnose_density(rho);
  return d.hermiticity_error <= tol_herm && d.trace_error <= tol_trace &&
         d.min_eigenvalue >= -tol_eig;
}

inline DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

inline SparseOperator to_sparse(const OperatorMatrix& m, double prune = 0.0) {
  SparseOperator s = m.sparseView(1.0, prune);
  s.makeCompressed();
  return s;
}

}  // namespace spinphonon
