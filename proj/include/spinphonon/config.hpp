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

// JSON run configuration. The schema is documented in docs/config.md; every
// object rejects keys it does not know and every error names the field path.

#pragma once

#include <spinphonon/models.hpp>
#include <spinphonon/ode.hpp>
#include <spinphonon/protocols.hpp>
#include <spinphonon/pulses.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace spinphonon {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExperimentKind {
  odro,
  chevron,
  swap,
  cz,
  robustness,
  dicke,
  sd_benchmark,
  leakage,
  ac_stark,
  pulse_design,
  darkstate
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& experiment_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::odro, "odro"},           {ExperimentKind::chevron, "chevron"},
      {ExperimentKind::swap, "swap"},           {ExperimentKind::cz, "cz"},
      {ExperimentKind::robustness, "robustness"}, {ExperimentKind::dicke, "dicke"},
      {ExperimentKind::sd_benchmark, "sd-benchmark"}, {ExperimentKind::leakage, "leakage"},
      {ExperimentKind::ac_stark, "ac-stark"},   {ExperimentKind::pulse_design, "pulse-design"},
      {ExperimentKind::darkstate, "darkstate"}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : experiment_names()) {
    if (kind == k) return name;
  }
  return "?";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (const auto& [kind, name] : experiment_names()) {
    if (name == s) return kind;
  }
  throw ConfigError("experiment", "unknown experiment kind '" + s + "'");
}

struct OdroSection {
  double duration = 1000.0;
  std::size_t samples = 1001;
  bool stark_compensation = true;
  // Optional optimum sweep; empty lists skip it.
  std::vector<double> delta_scales;
  std::vector<double> omega1_scales;
  std::vector<double> omega2_scales;
  friend bool operator==(const OdroSection&, const OdroSection&) = default;
};

struct ChevronSection {
  std::vector<double> offsets = linspace(-0.004, 0.004, 41);
  double duration = 2000.0;
  std::size_t samples = 200;
  bool stark_compensation = true;
  friend bool operator==(const ChevronSection&, const ChevronSection&) = default;
};

struct SwapSection {
  DetuningMode mode = DetuningMode::opposite;
  std::vector<double> detunings = linspace(-0.002, 0.002, 21);
  double duration = 900.0;
  std::size_t samples = 451;
  bool stark_compensation = true;
  friend bool operator==(const SwapSection&, const SwapSection&) = default;
};

struct CzSection {
  bool tomography = true;
  bool phase_traces = true;
  std::size_t trace_samples = 600;
  bool excited_pair_shift = true;
  friend bool operator==(const CzSection&, const CzSection&) = default;
};

struct RobustnessSection {
  std::vector<double> t2_ns{1e6, 5e5, 3e5, 2e5, 1.5e5, 1e5};
  std::vector<double> delta_r2{0.6e-3};
  bool include_no_dephasing = false;
  friend bool operator==(const RobustnessSection&, const RobustnessSection&) = default;
};

struct DickeSection {
  double total_ns = 3927.0;
  double scale = 0.023;
  DickeMode mode = DickeMode::full;
  std::size_t samples = 201;
  bool excited_pair_shift = true;
  int reference_spins = 2;
  double reference_total_ns = 3927.0;
  friend bool operator==(const DickeSection&, const DickeSection&) = default;
};

struct SdSection {
  double sigma = 0.020;
  std::size_t n_traj = 300;
  std::vector<double> prep_times;
  double stirap_scale = 0.023;
  friend bool operator==(const SdSection&, const SdSection&) = default;
};

struct LeakageSection {
  LeakageModel model = LeakageModel::full_frame;
  std::size_t samples = 600;
  bool excited_pair_shift = true;
  friend bool operator==(const LeakageSection&, const LeakageSection&) = default;
};

struct AcStarkSection {
  std::vector<double> omega1{0.25, 0.5, 1.0};
  double duration = 200.0;
  std::size_t samples = 2001;
  friend bool operator==(const AcStarkSection&, const AcStarkSection&) = default;
};

struct PulseDesignSection {
  std::string shape = "cz";  // cz | transfer
  TransferDirection direction = TransferDirection::phonon_to_spins;
  double transfer_total_ns = 3927.0;
  std::size_t samples = 1001;
  friend bool operator==(const PulseDesignSection&, const PulseDesignSection&) = default;
};

struct DarkStateSection {
  std::string which = "single";  // single | two | two_orthogonal | dicke
  Complex omega_r{0.023, 0.0};
  Complex omega_2{0.023, 0.0};
  int n_spins = 2;
  friend bool operator==(const DarkStateSection&, const DarkStateSection&) = default;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::odro;
  SystemSpec system;
  IntegratorConfig integrator;
  CzDesign schedule;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int jobs = 0;  // 0: all cores

  OdroSection odro;
  ChevronSection chevron;
  SwapSection swap;
  CzSection cz;
  RobustnessSection robustness;
  DickeSection dicke;
  SdSection sd;
  LeakageSection leakage;
  AcStarkSection ac_stark;
  PulseDesignSection pulse_design;
  DarkStateSection darkstate;

  std::vector<std::string> warnings;  // not part of equality

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.kind == b.kind && a.system == b.system && a.integrator == b.integrator &&
           a.schedule == b.schedule && a.seed == b.seed && a.output_dir == b.output_dir &&
           a.jobs == b.jobs && a.odro == b.odro && a.chevron == b.chevron && a.swap == b.swap &&
           a.cz == b.cz && a.robustness == b.robustness && a.dicke == b.dicke && a.sd == b.sd &&
           a.leakage == b.leakage && a.ac_stark == b.ac_stark && a.pulse_design == b.pulse_design &&
           a.darkstate == b.darkstate;
  }
};

/// Name of the experiment-specific section in the file.
inline std::string section_key(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::sd_benchmark: return "sd";
    case ExperimentKind::ac_stark: return "ac_stark";
    case ExperimentKind::pulse_design: return "pulse_design";
    default: return to_string(k);
  }
}

inline bool uses_schedule(ExperimentKind k) {
  return k == ExperimentKind::cz || k == ExperimentKind::robustness || k == ExperimentKind::leakage ||
         k == ExperimentKind::pulse_design;
}

/// Defect count, phonon truncation and parameter table each experiment
/// starts from. The phonon cutoffs are the smallest exact ones: the
/// Hamiltonian conserves n + #g2 + #e and dissipation only lowers it.
inline SystemSpec default_system(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::swap: return table1_spec(2, 2);
    case ExperimentKind::cz:
    case ExperimentKind::robustness:
    case ExperimentKind::leakage:
    case ExperimentKind::pulse_design:
    case ExperimentKind::darkstate: return table2_spec(2, 3);
    case ExperimentKind::dicke: return table2_spec(2, 2);
    default: return table1_spec(1, 2);
  }
}

namespace detail {

/// Object reader that records which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* get(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(sub(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(sub(key), "must be finite");
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError(sub(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned() || v->get<long long>() >= 0) {
          out = v->get<Int>();
        } else {
          throw ConfigError(sub(key), "must be >= 0");
        }
      } else {
        out = v->get<Int>();
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(sub(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(sub(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  /// A number, or a [re, im] pair.
  void complex(const std::string& key, Complex& out) {
    if (const Json* v = get(key)) {
      if (v->is_number()) {
        out = Complex(v->get<double>(), 0.0);
      } else if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
        out = Complex((*v)[0].get<double>(), (*v)[1].get<double>());
      } else {
        throw ConfigError(sub(key), "expected a number or [re, im]");
      }
    }
  }

  /// A list of numbers, or {"min", "max", "count"} expanded with linspace.
  void values(const std::string& key, std::vector<double>& out) {
    const Json* v = get(key);
    if (!v) return;
    if (v->is_array()) {
      std::vector<double> tmp;
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(sub(key) + "[" + std::to_string(i) + "]", "expected a number");
        tmp.push_back((*v)[i].get<double>());
      }
      out = std::move(tmp);
    } else if (v->is_object()) {
      ObjectReader r(*v, sub(key));
      double lo = 0.0, hi = 0.0;
      std::size_t n = 0;
      if (!r.has("min") || !r.has("max") || !r.has("count")) {
        throw ConfigError(sub(key), "range needs min, max and count");
      }
      r.number("min", lo);
      r.number("max", hi);
      r.integer("count", n);
      r.finish();
      if (n < 1) throw ConfigError(sub(key) + ".count", "must be >= 1");
      out = linspace(lo, hi, n);
    } else {
      throw ConfigError(sub(key), "expected a list of numbers or a {min, max, count} range");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(sub(it.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

inline Json complex_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

}  // namespace detail

inline RateConvention rate_convention_from_string(const std::string& s, const std::string& path) {
  if (s == "raw") return RateConvention::raw;
  if (s == "angular") return RateConvention::angular;
  throw ConfigError(path, "expected 'raw' or 'angular'");
}

inline DephasingNormalization dephasing_from_string(const std::string& s, const std::string& path) {
  if (s == "unit") return DephasingNormalization::unit;
  if (s == "coherence") return DephasingNormalization::coherence;
  throw ConfigError(path, "expected 'unit' or 'coherence'");
}

/// Parses and validates a configuration document. Omitted fields take the
/// dispersive (single-defect experiments) or resonant (STIRAP experiments)
/// defaults.
inline RunConfig parse_config(const Json& doc) {
  using detail::check;
  detail::ObjectReader root(doc, "");
  RunConfig c;
  std::string kind;
  if (!root.has("experiment")) throw ConfigError("experiment", "missing");
  root.string("experiment", kind);
  c.kind = experiment_from_string(kind);
  c.system = default_system(c.kind);
  if (c.kind == ExperimentKind::robustness) c.schedule.delta_R2 = c.robustness.delta_r2.front();

  root.integer("seed", c.seed);
  root.string("output_dir", c.output_dir);
  root.integer("jobs", c.jobs);
  check(c.jobs >= 0, "jobs", "must be >= 0");

  // system
  int phonon_levels = c.system.layout.phonon_levels();
  int defect_count = c.system.defect_count();
  DefectSpec defect = c.system.defects.front();
  DriveSpec drive = c.system.drives.front();
  if (const Json* js = root.get("system")) {
    detail::ObjectReader r(*js, "system");
    r.number("omega_m", c.system.omega_m);
    check(c.system.omega_m > 0.0, "system.omega_m", "must be > 0");
    r.integer("phonon_levels", phonon_levels);
    check(phonon_levels >= 2, "system.phonon_levels", "must be >= 2 (n_max >= 1)");
    r.integer("defect_count", defect_count);
    check(defect_count >= 1 && defect_count <= 8, "system.defect_count", "must lie in [1, 8]");
    std::string s;
    if (r.has("rate_convention")) {
      r.string("rate_convention", s);
      c.system.rate_convention = rate_convention_from_string(s, "system.rate_convention");
    }
    if (r.has("dephasing")) {
      r.string("dephasing", s);
      c.system.dephasing = dephasing_from_string(s, "system.dephasing");
    }
    r.number("branching_g1", c.system.branching_g1);
    check(c.system.branching_g1 >= 0.0 && c.system.branching_g1 <= 1.0, "system.branching_g1", "must lie in [0, 1]");
    if (const Json* jd = r.get("defect")) {
      detail::ObjectReader d(*jd, "system.defect");
      d.number("g", defect.g);
      d.number("nu1", defect.nu1);
      d.number("nu2", defect.nu2);
      d.number("spectral_offset", defect.spectral_offset);
      d.finish();
      check(defect.g >= 0.0, "system.defect.g", "must be >= 0");
      check(defect.nu1 > 0.0, "system.defect.nu1", "must be > 0");
      check(defect.nu2 > 0.0, "system.defect.nu2", "must be > 0");
    }
    if (const Json* jd = r.get("drive")) {
      detail::ObjectReader d(*jd, "system.drive");
      d.complex("omega1", drive.Omega1);
      d.complex("omega2", drive.Omega2);
      d.number("delta", drive.Delta);
      d.number("raman_offset", drive.raman_offset);
      d.number("stark_correction", drive.stark_correction);
      d.finish();
    }
    r.finish();
  }
  c.system.defects.assign(defect_count, defect);
  c.system.drives.assign(defect_count, drive);
  c.system.layout = HilbertLayout(phonon_levels, defect_count);
  if (defect_count > 3) {
    c.warnings.push_back("system.defect_count > 3 goes beyond desk-scale runtimes");
  }

  if (const Json* jd = root.get("decoherence")) {
    detail::ObjectReader r(*jd, "decoherence");
    auto& d = c.system.decoherence;
    const std::pair<const char*, double*> fields[] = {{"gamma_m1", &d.gamma_m1},
                                                      {"gamma_e1", &d.gamma_e1},
                                                      {"gamma_e_phi", &d.gamma_e_phi},
                                                      {"gamma_s1", &d.gamma_s1},
                                                      {"gamma_s_phi", &d.gamma_s_phi}};
    for (const auto& [key, ptr] : fields) {
      r.number(key, *ptr);
      check(*ptr >= 0.0, r.sub(key), "rate must be >= 0");
    }
    r.finish();
  }

  if (const Json* ji = root.get("integrator")) {
    detail::ObjectReader r(*ji, "integrator");
    r.number("rel_tol", c.integrator.rel_tol);
    r.number("abs_tol", c.integrator.abs_tol);
    r.number("max_step", c.integrator.max_step);
    r.number("initial_step", c.integrator.initial_step);
    r.integer("max_steps", c.integrator.max_steps);
    r.finish();
    check(c.integrator.rel_tol > 0.0, "integrator.rel_tol", "must be > 0");
    check(c.integrator.abs_tol > 0.0, "integrator.abs_tol", "must be > 0");
    check(c.integrator.max_step >= 0.0, "integrator.max_step", "must be >= 0");
    check(c.integrator.initial_step >= 0.0, "integrator.initial_step", "must be >= 0");
    check(c.integrator.max_steps >= 1, "integrator.max_steps", "must be >= 1");
  }

  if (const Json* js = root.get("schedule")) {
    check(uses_schedule(c.kind), "schedule", "not used by experiment '" + kind + "'");
    detail::ObjectReader r(*js, "schedule");
    r.number("delta_r2", c.schedule.delta_R2);
    r.integer("k", c.schedule.k);
    r.number("t_rise", c.schedule.t_rise);
    r.number("scale", c.schedule.scale);
    r.finish();
    check(c.schedule.delta_R2 > 0.0, "schedule.delta_r2", "must be > 0");
    check(c.schedule.k <= -2, "schedule.k", "must be <= -2");
    check(c.schedule.t_rise > 0.0, "schedule.t_rise", "must be > 0");
    check(c.schedule.scale > 0.0, "schedule.scale", "must be > 0");
  }

  const std::string sk = section_key(c.kind);
  auto positive = [&](double v, const std::string& f) { check(v > 0.0, sk + "." + f, "must be > 0"); };
  auto samples = [&](std::size_t v, const std::string& f) { check(v >= 2, sk + "." + f, "must be >= 2"); };
  auto nonempty = [&](const std::vector<double>& v, const std::string& f) {
    check(!v.empty(), sk + "." + f, "must not be empty");
  };
  const Json* jsec = root.get(sk);
  for (const auto& [other, name] : experiment_names()) {
    const std::string ok = section_key(other);
    if (other != c.kind && root.has(ok) && ok != sk) {
      throw ConfigError(ok, "section does not belong to experiment '" + kind + "'");
    }
  }
  Json empty = Json::object();
  detail::ObjectReader r(jsec ? *jsec : empty, sk);
  std::string s;
  switch (c.kind) {
    case ExperimentKind::odro: {
      auto& o = c.odro;
      r.number("duration", o.duration);
      r.integer("samples", o.samples);
      r.boolean("stark_compensation", o.stark_compensation);
      r.values("delta_scales", o.delta_scales);
      r.values("omega1_scales", o.omega1_scales);
      r.values("omega2_scales", o.omega2_scales);
      positive(o.duration, "duration");
      samples(o.samples, "samples");
      const bool any = !o.delta_scales.empty() || !o.omega1_scales.empty() || !o.omega2_scales.empty();
      if (any) {
        nonempty(o.delta_scales, "delta_scales");
        nonempty(o.omega1_scales, "omega1_scales");
        nonempty(o.omega2_scales, "omega2_scales");
        for (const auto* v : {&o.delta_scales, &o.omega1_scales, &o.omega2_scales}) {
          for (double x : *v) check(x > 0.0, sk, "scale factors must be > 0");
        }
      }
      check(defect_count == 1, "system.defect_count", "odro needs one defect");
      break;
    }
    case ExperimentKind::chevron: {
      auto& o = c.chevron;
      r.values("offsets", o.offsets);
      r.number("duration", o.duration);
      r.integer("samples", o.samples);
      r.boolean("stark_compensation", o.stark_compensation);
      nonempty(o.offsets, "offsets");
      positive(o.duration, "duration");
      samples(o.samples, "samples");
      check(defect_count == 1, "system.defect_count", "chevron needs one defect");
      break;
    }
    case ExperimentKind::swap: {
      auto& o = c.swap;
      if (r.has("mode")) {
        r.string("mode", s);
        if (s == "opposite") {
          o.mode = DetuningMode::opposite;
        } else if (s == "common") {
          o.mode = DetuningMode::common;
        } else {
          throw ConfigError("swap.mode", "expected 'opposite' or 'common'");
        }
      }
      r.values("detunings", o.detunings);
      r.number("duration", o.duration);
      r.integer("samples", o.samples);
      r.boolean("stark_compensation", o.stark_compensation);
      nonempty(o.detunings, "detunings");
      positive(o.duration, "duration");
      samples(o.samples, "samples");
      check(defect_count == 2, "system.defect_count", "swap needs two defects");
      break;
    }
    case ExperimentKind::cz: {
      auto& o = c.cz;
      r.boolean("tomography", o.tomography);
      r.boolean("phase_traces", o.phase_traces);
      r.integer("trace_samples", o.trace_samples);
      r.boolean("excited_pair_shift", o.excited_pair_shift);
      samples(o.trace_samples, "trace_samples");
      check(defect_count == 2, "system.defect_count", "cz needs two defects");
      break;
    }
    case ExperimentKind::robustness: {
      auto& o = c.robustness;
      r.values("t2_ns", o.t2_ns);
      r.values("delta_r2", o.delta_r2);
      r.boolean("include_no_dephasing", o.include_no_dephasing);
      nonempty(o.t2_ns, "t2_ns");
      nonempty(o.delta_r2, "delta_r2");
      for (double x : o.t2_ns) check(x > 0.0, "robustness.t2_ns", "values must be > 0");
      for (double x : o.delta_r2) check(x > 0.0, "robustness.delta_r2", "values must be > 0");
      check(defect_count == 2, "system.defect_count", "robustness needs two defects");
      break;
    }
    case ExperimentKind::dicke: {
      auto& o = c.dicke;
      r.number("total_ns", o.total_ns);
      r.number("scale", o.scale);
      if (r.has("mode")) {
        r.string("mode", s);
        if (s == "full") {
          o.mode = DickeMode::full;
        } else if (s == "symmetric") {
          o.mode = DickeMode::symmetric;
        } else {
          throw ConfigError("dicke.mode", "expected 'full' or 'symmetric'");
        }
      }
      r.integer("samples", o.samples);
      r.boolean("excited_pair_shift", o.excited_pair_shift);
      r.integer("reference_spins", o.reference_spins);
      r.number("reference_total_ns", o.reference_total_ns);
      positive(o.total_ns, "total_ns");
      positive(o.scale, "scale");
      samples(o.samples, "samples");
      check(o.reference_spins >= 1, "dicke.reference_spins", "must be >= 1");
      positive(o.reference_total_ns, "reference_total_ns");
      check(defect_count >= 2, "system.defect_count", "dicke needs at least two defects");
      break;
    }
    case ExperimentKind::sd_benchmark: {
      auto& o = c.sd;
      r.number("sigma", o.sigma);
      r.integer("n_traj", o.n_traj);
      r.values("prep_times", o.prep_times);
      r.number("stirap_scale", o.stirap_scale);
      check(o.sigma >= 0.0, "sd.sigma", "must be >= 0");
      check(o.n_traj >= 1, "sd.n_traj", "must be >= 1");
      for (double x : o.prep_times) check(x > 0.0, "sd.prep_times", "values must be > 0");
      positive(o.stirap_scale, "stirap_scale");
      check(defect_count == 1, "system.defect_count", "sd-benchmark needs one defect");
      break;
    }
    case ExperimentKind::leakage: {
      auto& o = c.leakage;
      if (r.has("model")) {
        r.string("model", s);
        if (s == "dark_subspace") {
          o.model = LeakageModel::dark_subspace;
        } else if (s == "full_frame") {
          o.model = LeakageModel::full_frame;
        } else {
          throw ConfigError("leakage.model", "expected 'dark_subspace' or 'full_frame'");
        }
      }
      r.integer("samples", o.samples);
      r.boolean("excited_pair_shift", o.excited_pair_shift);
      samples(o.samples, "samples");
      check(defect_count == 2, "system.defect_count", "leakage needs two defects");
      check(phonon_levels >= 3, "system.phonon_levels", "leakage needs >= 3 phonon levels");
      break;
    }
    case ExperimentKind::ac_stark: {
      auto& o = c.ac_stark;
      r.values("omega1", o.omega1);
      r.number("duration", o.duration);
      r.integer("samples", o.samples);
      nonempty(o.omega1, "omega1");
      positive(o.duration, "duration");
      samples(o.samples, "samples");
      break;
    }
    case ExperimentKind::pulse_design: {
      auto& o = c.pulse_design;
      r.string("shape", o.shape);
      check(o.shape == "cz" || o.shape == "transfer", "pulse_design.shape", "expected 'cz' or 'transfer'");
      if (r.has("direction")) {
        r.string("direction", s);
        if (s == "phonon_to_spins") {
          o.direction = TransferDirection::phonon_to_spins;
        } else if (s == "spins_to_phonon") {
          o.direction = TransferDirection::spins_to_phonon;
        } else {
          throw ConfigError("pulse_design.direction", "expected 'phonon_to_spins' or 'spins_to_phonon'");
        }
      }
      r.number("transfer_total_ns", o.transfer_total_ns);
      r.integer("samples", o.samples);
      positive(o.transfer_total_ns, "transfer_total_ns");
      samples(o.samples, "samples");
      break;
    }
    case ExperimentKind::darkstate: {
      auto& o = c.darkstate;
      r.string("which", o.which);
      check(o.which == "single" || o.which == "two" || o.which == "two_orthogonal" || o.which == "dicke",
            "darkstate.which", "expected single, two, two_orthogonal or dicke");
      r.complex("omega_r", o.omega_r);
      r.complex("omega_2", o.omega_2);
      r.integer("n_spins", o.n_spins);
      check(o.n_spins >= 1, "darkstate.n_spins", "must be >= 1");
      check(o.omega_r != Complex(0.0) || o.omega_2 != Complex(0.0), "darkstate", "amplitudes must not both be zero");
      if (o.which != "single" && o.which != "dicke") {
        check(o.omega_r != Complex(0.0) && o.omega_2 != Complex(0.0), "darkstate",
              "two-excitation dark states need both amplitudes nonzero");
      }
      break;
    }
  }
  r.finish();
  root.finish();
  c.system.validate();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// A default configuration for `kind`, equivalent to {"experiment": kind}.
inline RunConfig default_config(ExperimentKind kind) {
  return parse_config(Json{{"experiment", to_string(kind)}});
}

/// Effective configuration with every field spelled out; parsing the result
/// gives back an equal RunConfig.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  const auto& s = c.system;
  const auto& d = s.defects.front();
  const auto& dr = s.drives.front();
  j["system"] = {{"omega_m", s.omega_m},
                 {"phonon_levels", s.layout.phonon_levels()},
                 {"defect_count", s.defect_count()},
                 {"rate_convention", to_string(s.rate_convention)},
                 {"dephasing", to_string(s.dephasing)},
                 {"branching_g1", s.branching_g1},
                 {"defect", {{"g", d.g}, {"nu1", d.nu1}, {"nu2", d.nu2}, {"spectral_offset", d.spectral_offset}}},
                 {"drive",
                  {{"omega1", detail::complex_json(dr.Omega1)},
                   {"omega2", detail::complex_json(dr.Omega2)},
                   {"delta", dr.Delta},
                   {"raman_offset", dr.raman_offset},
                   {"stark_correction", dr.stark_correction}}}};
  const auto& dc = s.decoherence;
  j["decoherence"] = {{"gamma_m1", dc.gamma_m1},
                      {"gamma_e1", dc.gamma_e1},
                      {"gamma_e_phi", dc.gamma_e_phi},
                      {"gamma_s1", dc.gamma_s1},
                      {"gamma_s_phi", dc.gamma_s_phi}};
  const auto& ic = c.integrator;
  j["integrator"] = {{"rel_tol", ic.rel_tol},
                     {"abs_tol", ic.abs_tol},
                     {"max_step", ic.max_step},
                     {"initial_step", ic.initial_step},
                     {"max_steps", ic.max_steps}};
  if (uses_schedule(c.kind)) {
    j["schedule"] = {{"delta_r2", c.schedule.delta_R2},
                     {"k", c.schedule.k},
                     {"t_rise", c.schedule.t_rise},
                     {"scale", c.schedule.scale}};
  }
  Json sec;
  switch (c.kind) {
    case ExperimentKind::odro:
      sec = {{"duration", c.odro.duration},
             {"samples", c.odro.samples},
             {"stark_compensation", c.odro.stark_compensation},
             {"delta_scales", c.odro.delta_scales},
             {"omega1_scales", c.odro.omega1_scales},
             {"omega2_scales", c.odro.omega2_scales}};
      break;
    case ExperimentKind::chevron:
      sec = {{"offsets", c.chevron.offsets},
             {"duration", c.chevron.duration},
             {"samples", c.chevron.samples},
             {"stark_compensation", c.chevron.stark_compensation}};
      break;
    case ExperimentKind::swap:
      sec = {{"mode", to_string(c.swap.mode)},
             {"detunings", c.swap.detunings},
             {"duration", c.swap.duration},
             {"samples", c.swap.samples},
             {"stark_compensation", c.swap.stark_compensation}};
      break;
    case ExperimentKind::cz:
      sec = {{"tomography", c.cz.tomography},
             {"phase_traces", c.cz.phase_traces},
             {"trace_samples", c.cz.trace_samples},
             {"excited_pair_shift", c.cz.excited_pair_shift}};
      break;
    case ExperimentKind::robustness:
      sec = {{"t2_ns", c.robustness.t2_ns},
             {"delta_r2", c.robustness.delta_r2},
             {"include_no_dephasing", c.robustness.include_no_dephasing}};
      break;
    case ExperimentKind::dicke:
      sec = {{"total_ns", c.dicke.total_ns},
             {"scale", c.dicke.scale},
             {"mode", c.dicke.mode == DickeMode::full ? "full" : "symmetric"},
             {"samples", c.dicke.samples},
             {"excited_pair_shift", c.dicke.excited_pair_shift},
             {"reference_spins", c.dicke.reference_spins},
             {"reference_total_ns", c.dicke.reference_total_ns}};
      break;
    case ExperimentKind::sd_benchmark:
      sec = {{"sigma", c.sd.sigma},
             {"n_traj", c.sd.n_traj},
             {"prep_times", c.sd.prep_times},
             {"stirap_scale", c.sd.stirap_scale}};
      break;
    case ExperimentKind::leakage:
      sec = {{"model", to_string(c.leakage.model)},
             {"samples", c.leakage.samples},
             {"excited_pair_shift", c.leakage.excited_pair_shift}};
      break;
    case ExperimentKind::ac_stark:
      sec = {{"omega1", c.ac_stark.omega1}, {"duration", c.ac_stark.duration}, {"samples", c.ac_stark.samples}};
      break;
    case ExperimentKind::pulse_design:
      sec = {{"shape", c.pulse_design.shape},
             {"direction", c.pulse_design.direction == TransferDirection::phonon_to_spins ? "phonon_to_spins"
                                                                                         : "spins_to_phonon"},
             {"transfer_total_ns", c.pulse_design.transfer_total_ns},
             {"samples", c.pulse_design.samples}};
      break;
    case ExperimentKind::darkstate:
      sec = {{"which", c.darkstate.which},
             {"omega_r", detail::complex_json(c.darkstate.omega_r)},
             {"omega_2", detail::complex_json(c.darkstate.omega_2)},
             {"n_spins", c.darkstate.n_spins}};
      break;
  }
  j[section_key(c.kind)] = sec;
  return j;
}

}  // namespace spinphonon
