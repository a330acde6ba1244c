#pragma once

// The five driver commands as library functions over a parsed RunConfig.
// Each file-writing command drops config.effective.json next to its outputs;
// re-running from that dump reproduces the outputs byte for byte.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tedg/analysis.hpp"
#include "tedg/config.hpp"
#include "tedg/io.hpp"
#include "tedg/materials.hpp"
#include "tedg/mesh.hpp"
#include "tedg/scenarios.hpp"
#include "tedg/semidiscrete.hpp"
#include "tedg/timestep.hpp"

namespace tedg {

inline Mesh make_mesh(const MeshConfig& mc) {
  if (mc.source == "structured")
    return generate_structured_square(mc.n_per_side, mc.lo, mc.hi);
  return load_mesh(mc.path, mc.format);
}

inline Scenario make_scenario(const ScenarioSpec& spec) {
  if (spec.name == "manufactured") return manufactured_scenario();
  ScatteringGeometry geometry =
      spec.name == "one_circle" ? one_circle_geometry() : three_circles_geometry();
  geometry.eps_inside = spec.eps_inside;
  geometry.wave_number = spec.wave_number;
  return scattering_scenario(geometry);
}

namespace detail {

inline void write_effective_config(const RunConfig& cfg) {
  auto out = open_output(cfg.output.directory + "/config.effective.json");
  out << cfg.effective.dump(2) << '\n';
  if (!out) throw IoError("failed while writing config.effective.json");
}

inline std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06ld.vtk", step);
  return buf;
}

// Runs the manufactured scenario on one mesh/order/scheme/dt combination and
// measures discrete L2 errors at the staggered final stations. When `midpoint`
// is given and t=0.5 falls inside the run, errors at the step nearest 0.5 are
// recorded there as a robustness cross-check (the exact fields vanish at
// integer times, so the final-time error target is the zero field).
inline ErrorRecord run_manufactured_case(const Mesh& mesh, int order, SchemeConfig scheme,
                                         Real dt, Real t_start, Real t_final,
                                         ErrorRecord* midpoint = nullptr) {
  const Scenario scenario = manufactured_scenario();
  DGOperator op(mesh, order, scenario.regions);
  Stepper stepper(op, scheme, dt, prepare_sources(op, scenario));
  FieldState state = initialize(op, scenario, dt, t_start);

  const Real h_max = mesh.h.maxCoeff();
  const long total_steps = std::lround(t_final / dt);
  const long mid_step = std::lround((0.5 - t_start) / dt);
  Stepper::Observer observer;
  long stride = 0;
  if (midpoint != nullptr && mid_step > 0 && mid_step < total_steps) {
    stride = 1;
    observer = [&](const FieldState& s, long m, Real t) {
      if (m != mid_step) return;
      const ErrorTriple err = l2_errors(op, s, scenario, t, t + 0.5 * dt);
      *midpoint = {h_max, dt,     order,  scheme.alpha,
                   to_string(scheme.mode), err.ex, err.ey, err.hz};
    };
  }

  const auto result = stepper.run(state, t_start, t_final, observer, stride);
  const Real te = t_start + result.steps * dt;
  const ErrorTriple err = l2_errors(op, state, scenario, te, te + 0.5 * dt);
  return {h_max, dt,     order,  scheme.alpha,
          to_string(scheme.mode), err.ex, err.ey, err.hz};
}

inline void append_rates(std::vector<RateRecord>& rates, const std::string& axis,
                         const std::vector<Real>& scale,
                         const std::vector<ErrorTriple>& errors, int order, Real alpha,
                         const std::string& scheme) {
  std::vector<Real> ex, ey, hz;
  for (const ErrorTriple& e : errors) {
    ex.push_back(e.ex);
    ey.push_back(e.ey);
    hz.push_back(e.hz);
  }
  rates.push_back({axis, "Ex", order, alpha, scheme, fit_rate(scale, ex)});
  rates.push_back({axis, "Ey", order, alpha, scheme, fit_rate(scale, ey)});
  rates.push_back({axis, "Hz", order, alpha, scheme, fit_rate(scale, hz)});
}

} // namespace detail

inline void cmd_mesh_info(const RunConfig& cfg, std::ostream& log) {
  const Mesh mesh = make_mesh(cfg.mesh);
  const MeshQuality q = mesh_quality(mesh);
  long boundary_faces = 0;
  for (int k = 0; k < mesh.num_elements(); ++k)
    for (int f = 0; f < 3; ++f)
      if (mesh.is_boundary(k, f)) ++boundary_faces;

  log << "elements        " << mesh.num_elements() << '\n';
  log << "vertices        " << mesh.num_vertices() << '\n';
  log << "boundary faces  " << boundary_faces << '\n';
  log << "h min           " << format_real(q.h_min) << '\n';
  log << "h max           " << format_real(q.h_max) << '\n';
  log << "max h/tau       " << format_real(q.ratio_max) << '\n';

  detail::write_effective_config(cfg);
  auto out = open_output(cfg.output.directory + "/mesh_info.csv");
  out << "elements,vertices,boundary_faces,h_min,h_max,ratio_max\n";
  out << mesh.num_elements() << ',' << mesh.num_vertices() << ',' << boundary_faces << ','
      << format_real(q.h_min) << ',' << format_real(q.h_max) << ','
      << format_real(q.ratio_max) << '\n';
  if (!out) throw IoError("failed while writing mesh_info.csv");
}

inline void cmd_convergence_space(const RunConfig& cfg, std::ostream& log) {
  detail::write_effective_config(cfg);
  std::vector<ErrorRecord> records;
  std::vector<ErrorRecord> midpoints;
  std::vector<RateRecord> rates;

  for (int order : cfg.convergence.orders) {
    for (Real alpha : cfg.convergence.fluxes) {
      std::vector<Real> hs;
      std::vector<ErrorTriple> errs;
      for (int n : cfg.convergence.resolutions) {
        const Mesh mesh = generate_structured_square(n, cfg.mesh.lo, cfg.mesh.hi);
        SchemeConfig scheme = cfg.scheme;
        scheme.alpha = alpha;
        ErrorRecord rec;
        ErrorRecord mid;
        mid.order = -1;
        try {
          rec = detail::run_manufactured_case(mesh, order, scheme, cfg.dt, cfg.t_start,
                                              cfg.t_final, &mid);
        } catch (const BlowupError& e) {
          throw BlowupError("resolution " + std::to_string(n) + " per side: " + e.what(),
                            e.step);
        }
        if (mid.order == order) midpoints.push_back(mid);
        records.push_back(rec);
        hs.push_back(rec.h);
        errs.push_back({rec.err_ex, rec.err_ey, rec.err_hz});
        log << "N=" << order << " alpha=" << format_real(alpha) << " n=" << n
            << " h=" << format_real(rec.h) << " err_Ex=" << format_real(rec.err_ex)
            << " err_Ey=" << format_real(rec.err_ey) << " err_Hz=" << format_real(rec.err_hz)
            << '\n';
      }
      detail::append_rates(rates, "h", hs, errs, order, alpha, to_string(cfg.scheme.mode));
      log << "N=" << order << " alpha=" << format_real(alpha)
          << " slope_Ex=" << format_real(rates[rates.size() - 3].fit.slope)
          << " slope_Ey=" << format_real(rates[rates.size() - 2].fit.slope)
          << " slope_Hz=" << format_real(rates[rates.size() - 1].fit.slope) << '\n';
    }
  }

  write_errors_csv(cfg.output.directory + "/errors.csv", records);
  write_rates_csv(cfg.output.directory + "/rates.csv", rates);
  if (!midpoints.empty())
    write_errors_csv(cfg.output.directory + "/errors_midpoint.csv", midpoints);
}

inline void cmd_convergence_time(const RunConfig& cfg, std::ostream& log) {
  detail::write_effective_config(cfg);
  const Mesh mesh = make_mesh(cfg.mesh);
  const Scenario scenario = manufactured_scenario();
  const DGOperator op(mesh, cfg.order, scenario.regions);
  const Real dt_bound = estimate_dt(op, cfg.scheme.alpha, 1.0, cfg.constants);

  std::vector<ErrorRecord> records;
  std::vector<RateRecord> rates;
  std::vector<std::string> warnings;

  for (const std::string& mode_name : cfg.convergence.modes) {
    SchemeConfig scheme = cfg.scheme;
    scheme.mode = scheme_mode_from_string(mode_name);
    std::vector<Real> dts;
    std::vector<ErrorTriple> errs;
    for (Real dt : cfg.convergence.dts) {
      if (dt > dt_bound)
        warnings.push_back("mode " + mode_name + ": dt " + format_real(dt) +
                           " exceeds the stability estimate " + format_real(dt_bound));
      ErrorRecord rec;
      try {
        rec = detail::run_manufactured_case(mesh, cfg.order, scheme, dt, cfg.t_start,
                                            cfg.t_final);
      } catch (const BlowupError& e) {
        throw BlowupError("mode " + mode_name + ", dt " + format_real(dt) + ": " + e.what(),
                          e.step);
      }
      records.push_back(rec);
      dts.push_back(dt);
      errs.push_back({rec.err_ex, rec.err_ey, rec.err_hz});
      log << "mode=" << mode_name << " dt=" << format_real(dt)
          << " err_Ex=" << format_real(rec.err_ex) << " err_Ey=" << format_real(rec.err_ey)
          << " err_Hz=" << format_real(rec.err_hz) << '\n';
    }
    detail::append_rates(rates, "dt", dts, errs, cfg.order, scheme.alpha, mode_name);
    log << "mode=" << mode_name << " slope_Ex=" << format_real(rates[rates.size() - 3].fit.slope)
        << " slope_Ey=" << format_real(rates[rates.size() - 2].fit.slope)
        << " slope_Hz=" << format_real(rates[rates.size() - 1].fit.slope) << '\n';
  }

  write_errors_csv(cfg.output.directory + "/errors.csv", records);
  write_rates_csv(cfg.output.directory + "/rates.csv", rates);
  if (!warnings.empty()) {
    auto out = open_output(cfg.output.directory + "/warnings.txt");
    for (const std::string& w : warnings) out << w << '\n';
    for (const std::string& w : warnings) log << "warning: " << w << '\n';
  }
}

namespace detail {

// Shared by scatter and run: advances the state, writing VTK snapshots with
// an intensity channel, a probe time series, and a per-snapshot summary.
inline void run_with_outputs(const RunConfig& cfg, const Scenario& scenario, std::ostream& log) {
  Mesh mesh = make_mesh(cfg.mesh);
  if (scenario.region_of) assign_regions(mesh, scenario.region_of);
  DGOperator op(mesh, cfg.order, scenario.regions);

  const Real dt =
      cfg.has_dt ? cfg.dt : estimate_dt(op, cfg.scheme.alpha, cfg.cfl_safety, cfg.constants);
  PreparedSources sources = prepare_sources(op, scenario);
  Stepper stepper(op, cfg.scheme, dt, sources);
  FieldState state = initialize(op, scenario, dt, cfg.t_start, &sources);

  ProbeSet probes;
  const bool have_probes = !cfg.output.probes.empty();
  if (have_probes) probes = ProbeSet::build(op, cfg.output.probes);
  std::vector<std::string> probe_columns;
  for (size_t i = 0; i < cfg.output.probes.size(); ++i) {
    const std::string tag = std::to_string(i);
    probe_columns.push_back("Ex" + tag);
    probe_columns.push_back("Ey" + tag);
    probe_columns.push_back("Hz" + tag);
    probe_columns.push_back("I" + tag);
  }

  std::vector<Real> times;
  std::vector<std::vector<Real>> probe_rows;
  auto summary = open_output(cfg.output.directory + "/summary.csv");
  summary << "step,t,max_intensity,energy\n";

  const auto observer = [&](const FieldState& s, long step, Real t) {
    const Matrix intens = intensity(s);
    write_vtk(cfg.output.directory + "/" + snapshot_name(step), op, s,
              {{"intensity", &intens}});
    summary << step << ',' << format_real(t) << ',' << format_real(intens.maxCoeff()) << ','
            << format_real(discrete_energy(op, s)) << '\n';
    if (have_probes) {
      const Vector ex = probes.sample(s.ex);
      const Vector ey = probes.sample(s.ey);
      const Vector hz = probes.sample(s.hz);
      std::vector<Real> row;
      for (long i = 0; i < ex.size(); ++i) {
        row.push_back(ex[i]);
        row.push_back(ey[i]);
        row.push_back(hz[i]);
        row.push_back(std::sqrt(ex[i] * ex[i] + ey[i] * ey[i]));
      }
      times.push_back(t);
      probe_rows.push_back(std::move(row));
    }
  };

  const auto result = stepper.run(state, cfg.t_start, cfg.t_final, observer,
                                  cfg.output.snapshot_stride);
  if (!summary) throw IoError("failed while writing summary.csv");
  if (have_probes)
    write_probe_csv(cfg.output.directory + "/probes.csv", probe_columns, times, probe_rows);

  if (scenario.has_exact) {
    const Real te = cfg.t_start + result.steps * dt;
    const ErrorTriple err = l2_errors(op, state, scenario, te, te + 0.5 * dt);
    write_errors_csv(cfg.output.directory + "/errors.csv",
                     {{mesh.h.maxCoeff(), dt, cfg.order, cfg.scheme.alpha,
                       to_string(cfg.scheme.mode), err.ex, err.ey, err.hz}});
    log << "final errors: Ex=" << format_real(err.ex) << " Ey=" << format_real(err.ey)
        << " Hz=" << format_real(err.hz) << '\n';
  }

  log << "scenario " << scenario.name << ": " << result.steps << " steps of dt=" << format_real(dt)
      << ", max intensity " << format_real(intensity(state).maxCoeff()) << '\n';
}

} // namespace detail

inline void cmd_scatter(const RunConfig& cfg, std::ostream& log) {
  detail::write_effective_config(cfg);
  const Scenario scenario = make_scenario(cfg.scenario);
  detail::run_with_outputs(cfg, scenario, log);
}

inline void cmd_run(const RunConfig& cfg, std::ostream& log) {
  detail::write_effective_config(cfg);
  const Scenario scenario = make_scenario(cfg.scenario);
  detail::run_with_outputs(cfg, scenario, log);
}

inline void dispatch(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == "mesh-info")
    cmd_mesh_info(cfg, log);
  else if (cfg.command == "convergence-space")
    cmd_convergence_space(cfg, log);
  else if (cfg.command == "convergence-time")
    cmd_convergence_time(cfg, log);
  else if (cfg.command == "scatter")
    cmd_scatter(cfg, log);
  else if (cfg.command == "run")
    cmd_run(cfg, log);
  else
    throw ConfigError("unknown command '" + cfg.command + "'");
}

} // namespace tedg
