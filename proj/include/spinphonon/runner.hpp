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

// Runs one configured experiment and writes its result files.

#pragma once

#include <spinphonon/analysis.hpp>
#include <spinphonon/config.hpp>
#include <spinphonon/output.hpp>
#include <spinphonon/parallel.hpp>
#include <spinphonon/protocols.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

namespace spinphonon {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitIntegrator = 3,
  kExitOutput = 4
};

struct RunOptions {
  bool plot = false;
  std::ostream* log = &std::cerr;
  std::ostream* report = nullptr;  // receives the "results" block when set
};

/// Raman detuning at which the summary quotes the dispersive shift chi.
inline constexpr double kChiReportDetuning = 1e-3;  // GHz

namespace detail {

inline Json metrics_json(const std::map<std::string, double>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

inline Json report_json(const FidelityReport& r) {
  return {{"fidelity", r.fidelity},
          {"time_ns", r.time_ns},
          {"max_trace_drift", r.max_trace_drift},
          {"min_eigenvalue", r.min_eigenvalue},
          {"metrics", metrics_json(r.metrics)}};
}

inline std::string report_csv(const FidelityReport& r) {
  std::vector<std::pair<std::string, std::vector<double>>> cols{{"t_ns", r.time}};
  for (const auto& [k, v] : r.traces) cols.emplace_back(k, v);
  return columns_csv(cols);
}

inline std::string grid_csv(const SweepGrid& g) {
  std::ostringstream os;
  g.write_csv(os);
  return os.str();
}

inline std::string grid_heatmap(const std::string& title, const SweepGrid& g) {
  const auto& a = g.axes();
  return heatmap_svg(title, a[0].name, a[1].name, a[0].values, a[1].values, g.values());
}

inline Json grid_json(const SweepGrid& g) {
  Json axes = Json::array();
  for (const auto& a : g.axes()) axes.push_back({{"name", a.name}, {"values", a.values}});
  return {{"quantity", g.quantity()}, {"axes", axes}, {"values", g.values()}};
}

/// Derived parameters that depend only on the configuration. Quantities that
/// are undefined for the configured drive (e.g. g' at zero detuning) are null.
inline Json derived_json(const RunConfig& c) {
  Json d = Json::object();
  const SystemSpec& s = c.system;
  auto guarded = [&](const char* key, auto f) {
    try {
      d[key] = f();
    } catch (const std::invalid_argument&) {
      d[key] = nullptr;
    }
  };
  guarded("sideband_rabi_ghz", [&] { return std::abs(sideband_rabi(s, 0)); });
  guarded("g_eff_ghz", [&] { return effective_coupling(with_raman_resonance(s), 0); });
  guarded("cooperativity", [&] { return cooperativity(with_raman_resonance(s), 0); });
  d["chi_detuning_ghz"] = kChiReportDetuning;
  guarded("chi_ghz", [&] { return dispersive_shift_chi(with_raman_resonance(s), kChiReportDetuning, 0); });
  guarded("stark_correction_ghz", [&] { return with_raman_resonance(s).drives[0].stark_correction; });
  if (uses_schedule(c.kind)) {
    const auto sch = design_cz_schedule(c.schedule);
    const auto ph = geometric_phases(sch);
    d["T0_ns"] = c.schedule.T0();
    d["T1_ns"] = c.schedule.T1();
    d["total_ns"] = sch.total_duration();
    d["gamma1"] = ph.gamma1;
    d["gamma2"] = ph.gamma2;
    d["delta_gamma"] = ph.delta_gamma;
  }
  return d;
}

inline int resolve_jobs(int jobs) { return jobs > 0 ? jobs : default_jobs(); }

struct Emit {
  const RunConfig& c;
  OutputWriter& out;
  const RunOptions& opt;
  Json results = Json::object();

  void plot(const std::string& name, const std::string& svg) {
    if (opt.plot) out.write(name, svg);
  }

  void odro() {
    OdroOptions o;
    o.duration = c.odro.duration;
    o.samples = c.odro.samples;
    o.stark_compensation = c.odro.stark_compensation;
    o.integrator = c.integrator;
    const auto r = run_odro_prep(c.system, o);
    out.write("odro_traces.csv", report_csv(r));
    results["odro"] = report_json(r);
    plot("odro.svg", line_plot_svg("ODRO |0,g2> -> |1,g1>", "t (ns)", "population", r.time,
                                   {{"fidelity", r.traces.at("fidelity")}, {"p_g2", r.traces.at("p_g2")}}));
    if (!c.odro.delta_scales.empty()) {
      const auto g = run_odro_optimum(c.system, c.odro.delta_scales, c.odro.omega1_scales, c.odro.omega2_scales, o,
                                      resolve_jobs(c.jobs));
      out.write("odro_optimum.csv", grid_csv(g));
      const std::size_t k = argmax(g.values());
      const auto shape = g.shape();
      const std::size_t n2 = shape[2], n1 = shape[1];
      results["optimum"] = {{"peak_fidelity", g.values()[k]},
                            {"delta_scale", g.axes()[0].values[k / (n1 * n2)]},
                            {"omega1_scale", g.axes()[1].values[(k / n2) % n1]},
                            {"omega2_scale", g.axes()[2].values[k % n2]}};
    }
  }

  void chevron() {
    ChevronOptions o;
    o.duration = c.chevron.duration;
    o.samples = c.chevron.samples;
    o.stark_compensation = c.chevron.stark_compensation;
    o.integrator = c.integrator;
    const auto g = run_chevron(c.system, c.chevron.offsets, o, resolve_jobs(c.jobs));
    out.write("chevron.csv", grid_csv(g));
    plot("chevron.svg", grid_heatmap("Chevron: phonon population", g));
    // Oscillation frequency per offset against the generalized Rabi formula.
    Json rows = Json::array();
    const auto& t = g.axes()[1].values;
    for (std::size_t k = 0; k < c.chevron.offsets.size(); ++k) {
      const SystemSpec s = chevron_spec(c.system, c.chevron.offsets[k], c.chevron.stark_compensation);
      const double gp = effective_coupling(s, 0);
      const double det = chevron_effective_detuning(s);
      const double predicted = std::sqrt(4.0 * gp * gp + det * det);
      std::vector<double> y(g.values().begin() + k * t.size(), g.values().begin() + (k + 1) * t.size());
      double fitted = kNaN;
      try {
        fitted = fit_oscillation_frequency(t, y, 0.5 * predicted, 2.0 * predicted);
      } catch (const std::invalid_argument&) {
      }
      rows.push_back({{"offset_ghz", c.chevron.offsets[k]},
                      {"effective_detuning_ghz", det},
                      {"predicted_frequency_ghz", predicted},
                      {"fitted_frequency_ghz", fitted}});
    }
    results["frequencies"] = rows;
  }

  void swap() {
    SwapOptions o;
    o.duration = c.swap.duration;
    o.samples = c.swap.samples;
    o.stark_compensation = c.swap.stark_compensation;
    o.integrator = c.integrator;
    const auto r = run_two_spin_swap(c.system, c.swap.mode, c.swap.detunings, o, resolve_jobs(c.jobs));
    out.write("swap.csv", grid_csv(r.grid));
    out.write("swap_resonance.csv", report_csv(r.resonance));
    results["mode"] = to_string(c.swap.mode);
    results["resonance"] = report_json(r.resonance);
    plot("swap.svg", grid_heatmap("Swap: P(|0,g1,g2>)", r.grid));
  }

  CzOptions cz_options() const {
    CzOptions o;
    o.tomography = c.cz.tomography;
    o.phase_traces = c.cz.phase_traces;
    o.trace_samples = c.cz.trace_samples;
    o.include_excited_pair_shift = c.cz.excited_pair_shift;
    o.integrator = c.integrator;
    o.jobs = resolve_jobs(c.jobs);
    return o;
  }

  void cz() {
    const auto r = run_cz_gate(c.system, c.schedule, cz_options());
    results["cz"] = report_json(r.report);
    if (c.cz.tomography) {
      std::ostringstream os;
      r.chi.write_csv(os);
      out.write("chi.csv", os.str());
    }
    if (c.cz.phase_traces) {
      out.write("cz_traces.csv", report_csv(r.report));
      plot("cz_phases.svg", line_plot_svg("Accumulated phases", "t (ns)", "phase (rad)", r.report.time,
                                          {{"10", r.report.traces.at("phase_10")},
                                           {"01", r.report.traces.at("phase_01")},
                                           {"11", r.report.traces.at("phase_11")}}));
    }
    std::ostringstream os;
    r.schedule.write_csv(os, 1001);
    out.write("schedule.csv", os.str());
  }

  void robustness() {
    CzOptions o = cz_options();
    std::vector<double> t2 = c.robustness.t2_ns;
    if (c.robustness.include_no_dephasing) t2.insert(t2.begin(), INFINITY);
    const auto g = run_robustness_scan(c.system, c.schedule, t2, c.robustness.delta_r2, o);
    out.write("robustness.csv", grid_csv(g));
    results["grid"] = grid_json(g);
    if (g.shape()[0] == 1) {
      plot("robustness.svg", line_plot_svg("CZ process fidelity", "T2 (ns)", "F_pro", g.axes()[1].values,
                                           {{"F_pro", g.values()}}));
    } else {
      plot("robustness.svg", grid_heatmap("CZ process fidelity", g));
    }
  }

  void dicke() {
    DickeOptions o;
    o.mode = c.dicke.mode;
    o.samples = c.dicke.samples;
    o.include_excited_pair_shift = c.dicke.excited_pair_shift;
    o.integrator = c.integrator;
    const auto sch = design_transfer_schedule(c.dicke.total_ns / 2.0, c.dicke.scale, TransferDirection::phonon_to_spins);
    const auto r = run_dicke_prep(c.system, sch, o);
    out.write("dicke_traces.csv", report_csv(r));
    results["dicke"] = report_json(r);
    results["matched_duration_ns"] = matched_transfer_duration(
        c.system.defect_count(), c.dicke.reference_spins, c.dicke.reference_total_ns, c.dicke.scale);
    plot("dicke.svg", line_plot_svg("Dicke preparation", "t (ns)", "population", r.time,
                                    {{"fidelity", r.traces.at("fidelity")}, {"phonon_n", r.traces.at("phonon_n")}}));
  }

  void sd() {
    SpectralDiffusionConfig cfg;
    cfg.sigma = c.sd.sigma;
    cfg.n_traj = c.sd.n_traj;
    cfg.seed = c.seed;
    cfg.prep_times = c.sd.prep_times;
    cfg.stirap_scale = c.sd.stirap_scale;
    cfg.integrator = c.integrator;
    cfg.jobs = resolve_jobs(c.jobs);
    const auto r = run_spectral_diffusion_benchmark(c.system, cfg);
    out.write("sd_summary.csv", columns_csv({{"t_ns", r.prep_times},
                                             {"odro_mean", r.odro.mean},
                                             {"odro_std", r.odro.stddev},
                                             {"stirap_mean", r.stirap.mean},
                                             {"stirap_std", r.stirap.stddev}}));
    std::vector<double> idx(r.offsets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = double(i);
    out.write("sd_offsets.csv", columns_csv({{"trajectory", idx}, {"offset_ghz", r.offsets}}));
    results["odro_reference_time_ns"] = r.odro_reference_time;
    results["prep_times_ns"] = r.prep_times;
    results["odro"] = {{"mean", r.odro.mean}, {"std", r.odro.stddev}};
    results["stirap"] = {{"mean", r.stirap.mean}, {"std", r.stirap.stddev}};
    plot("sd.svg", line_plot_svg("Preparation under spectral diffusion", "T (ns)", "mean fidelity", r.prep_times,
                                 {{"ODRO", r.odro.mean}, {"STIRAP", r.stirap.mean}}));
  }

  void leakage() {
    LeakageOptions o;
    o.model = c.leakage.model;
    o.samples = c.leakage.samples;
    o.phonon_levels = c.system.layout.phonon_levels();
    o.include_excited_pair_shift = c.leakage.excited_pair_shift;
    o.integrator = c.integrator;
    const auto sch = design_cz_schedule(c.schedule);
    const auto r = run_leakage_sim(sch, o, detail::closed(c.system));
    const auto& leak = r.observables.at("leakage");
    out.write("leakage.csv", columns_csv({{"t_ns", r.time_grid},
                                          {"leakage", leak},
                                          {"theta", r.observables.at("theta")},
                                          {"phi", r.observables.at("phi")}}));
    const auto bound = leakage_upper_bound();
    results["model"] = to_string(c.leakage.model);
    results["max_leakage"] = *std::max_element(leak.begin(), leak.end());
    results["final_leakage"] = leak.back();
    results["bound"] = bound.bound;
    plot("leakage.svg", line_plot_svg("Leakage into the orthogonal dark state", "t (ns)", "population",
                                      r.time_grid, {{"leakage", leak}}));
  }

  void ac_stark() {
    AcStarkOptions o;
    o.omega1_values.assign(c.ac_stark.omega1.begin(), c.ac_stark.omega1.end());
    o.duration = c.ac_stark.duration;
    o.samples = c.ac_stark.samples;
    o.integrator = c.integrator;
    const auto r = run_ac_stark_check(c.system, o);
    std::vector<double> om, fit, pred, err;
    for (const auto& p : r.points) {
      om.push_back(std::abs(p.omega1));
      fit.push_back(p.fitted);
      pred.push_back(p.predicted);
      err.push_back(p.rel_error);
    }
    out.write("ac_stark.csv", columns_csv({{"omega1_ghz", om},
                                           {"fitted_shift_ghz", fit},
                                           {"predicted_shift_ghz", pred},
                                           {"rel_error", err}}));
    results["delta1_ghz"] = r.delta1;
    results["max_rel_error"] = r.max_rel_error;
  }

  void pulse_design() {
    const auto& p = c.pulse_design;
    const StirapSchedule sch = p.shape == "cz"
                                   ? design_cz_schedule(c.schedule)
                                   : design_transfer_schedule(p.transfer_total_ns / 2.0, c.schedule.scale, p.direction);
    std::ostringstream os;
    sch.write_csv(os, p.samples);
    out.write("schedule.csv", os.str());
    const auto ph = geometric_phases(sch);
    results["total_ns"] = sch.total_duration();
    results["adiabaticity_proxy"] = sch.adiabaticity_proxy();
    results["phi_total"] = sch.phi_total();
    results["gamma1"] = ph.gamma1;
    results["gamma2"] = ph.gamma2;
    results["delta_gamma"] = ph.delta_gamma;
    if (opt.plot) {
      const auto t = linspace(0.0, sch.total_duration(), p.samples);
      std::vector<double> th, phi;
      for (double x : t) {
        const auto q = sch.evaluate(x);
        th.push_back(q.theta);
        phi.push_back(q.phi);
      }
      out.write("schedule.svg", line_plot_svg("Pulse schedule", "t (ns)", "rad", t, {{"theta", th}, {"phi", phi}}));
    }
  }

  void darkstate() {
    const auto& d = c.darkstate;
    const int n = d.which == "single" ? 1 : d.which == "dicke" ? d.n_spins : 2;
    SystemSpec s = c.system;
    s.defects.assign(n, s.defects.front());
    s.drives.assign(n, s.drives.front());
    for (auto& dr : s.drives) dr.Delta = dr.raman_offset = dr.stark_correction = 0.0;
    s.layout = HilbertLayout(std::max(3, c.system.layout.phonon_levels()), n);
    DarkState ds;
    if (d.which == "single") {
      ds = dark_state_single(d.omega_r, d.omega_2);
    } else if (d.which == "two") {
      ds = dark_state_two(d.omega_r, d.omega_2);
    } else if (d.which == "two_orthogonal") {
      const auto p = ThetaPhiPoint::from_amplitudes(d.omega_r, d.omega_2);
      ds = dark_state_two_orthogonal(p.theta, p.phi);
    } else {
      ds = dark_state_dicke(d.omega_r, d.omega_2, n);
    }
    const DriveAmplitudes amps(n, {d.omega_r, d.omega_2});
    const StateVector v = ds.to_vector(s.layout);
    const double nullity = (darkframe_hamiltonian(s, amps) * v).norm() / kTwoPi;
    std::ostringstream os;
    os << "label,re,im\n" << std::setprecision(12);
    for (const auto& [label, a] : ds.amplitudes) os << '"' << to_string(label) << "\"," << a.real() << ',' << a.imag() << '\n';
    out.write("darkstate.csv", os.str());
    Json amp = Json::array();
    for (const auto& [label, a] : ds.amplitudes) amp.push_back({{"label", to_string(label)}, {"re", a.real()}, {"im", a.imag()}});
    results["which"] = d.which;
    results["amplitudes"] = amp;
    results["excitation_number"] = ds.excitation_number;
    results["norm"] = ds.norm();
    results["nullity_ghz"] = nullity;
  }
};

}  // namespace detail

/// Runs the experiment and writes summary.json plus its data files into
/// `c.output_dir`. Returns the summary document.
inline Json run_experiment(const RunConfig& c, const RunOptions& opt = {}) {
  OutputWriter out(c.output_dir);
  const auto start = std::chrono::steady_clock::now();
  detail::Emit e{c, out, opt};
  switch (c.kind) {
    case ExperimentKind::odro: e.odro(); break;
    case ExperimentKind::chevron: e.chevron(); break;
    case ExperimentKind::swap: e.swap(); break;
    case ExperimentKind::cz: e.cz(); break;
    case ExperimentKind::robustness: e.robustness(); break;
    case ExperimentKind::dicke: e.dicke(); break;
    case ExperimentKind::sd_benchmark: e.sd(); break;
    case ExperimentKind::leakage: e.leakage(); break;
    case ExperimentKind::ac_stark: e.ac_stark(); break;
    case ExperimentKind::pulse_design: e.pulse_design(); break;
    case ExperimentKind::darkstate: e.darkstate(); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json summary;
  summary["experiment"] = to_string(c.kind);
  summary["seed"] = c.seed;
  summary["wall_time_s"] = wall;
  summary["config"] = to_json(c);
  summary["derived"] = detail::derived_json(c);
  summary["results"] = e.results;
  summary["warnings"] = c.warnings;
  auto files = out.written();
  files.push_back("summary.json");
  summary["files"] = files;
  out.write("summary.json", summary.dump(2) + "\n");
  return summary;
}

/// run_experiment with errors mapped to exit codes and reported on opt.log.
inline int run_and_emit(const RunConfig& c, const RunOptions& opt = {}) {
  std::ostream& log = *opt.log;
  try {
    for (const auto& w : c.warnings) log << "warning: " << w << '\n';
    const Json summary = run_experiment(c, opt);
    if (opt.report) *opt.report << summary["results"].dump(2) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegratorError& e) {
    log << "integrator failure: " << e.what() << '\n';
    return kExitIntegrator;
  } catch (const OutputError& e) {
    log << "output error: " << e.what() << '\n';
    return kExitOutput;
  } catch (const std::invalid_argument& e) {
    log << "invalid parameters: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace spinphonon
