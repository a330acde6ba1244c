#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "tedg/analysis.hpp"
#include "tedg/semidiscrete.hpp"
#include "tedg/types.hpp"

namespace tedg {

// Shortest round-trip-exact decimal form, identical across runs.
inline std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

struct ErrorRecord {
  Real h = 0.0;
  Real dt = 0.0;
  int order = 0;
  Real alpha = 0.0;
  std::string scheme;
  Real err_ex = 0.0, err_ey = 0.0, err_hz = 0.0;
};

inline void write_errors_csv(std::ostream& out, const std::vector<ErrorRecord>& records) {
  out << "h,dt,N,alpha,scheme,err_Ex,err_Ey,err_Hz\n";
  for (const auto& r : records) {
    out << format_real(r.h) << ',' << format_real(r.dt) << ',' << r.order << ','
        << format_real(r.alpha) << ',' << r.scheme << ',' << format_real(r.err_ex) << ','
        << format_real(r.err_ey) << ',' << format_real(r.err_hz) << '\n';
  }
}

inline void write_errors_csv(const std::string& path, const std::vector<ErrorRecord>& records) {
  auto out = open_output(path);
  write_errors_csv(out, records);
}

struct RateRecord {
  std::string axis;  // "h" or "dt"
  std::string field; // "Ex", "Ey", "Hz"
  int order = 0;
  Real alpha = 0.0;
  std::string scheme;
  RateFit fit;
};

inline void write_rates_csv(std::ostream& out, const std::vector<RateRecord>& records) {
  out << "axis,field,N,alpha,scheme,slope,intercept,residual,samples\n";
  for (const auto& r : records) {
    out << r.axis << ',' << r.field << ',' << r.order << ',' << format_real(r.alpha) << ','
        << r.scheme << ',' << format_real(r.fit.slope) << ',' << format_real(r.fit.intercept)
        << ',' << format_real(r.fit.residual) << ',' << r.fit.samples << '\n';
  }
}

inline void write_rates_csv(const std::string& path, const std::vector<RateRecord>& records) {
  auto out = open_output(path);
  write_rates_csv(out, records);
}

// Legacy ASCII VTK export of nodal fields; each element is written as its
// node-lattice sub-triangulation so high-order fields stay visible.
inline void write_vtk(const std::string& path, const DGOperator& op, const FieldState& state,
                      const std::vector<std::pair<std::string, const Matrix*>>& extra = {}) {
  auto out = open_output(path);
  const int K = op.num_elements();
  const int Np = op.ops.Np;
  const long npoints = static_cast<long>(K) * Np;
  const long nsub = static_cast<long>(op.ops.plot_triangles.rows());
  const long ncells = nsub * K;

  out << "# vtk DataFile Version 3.0\n";
  out << "transverse-electric DG fields\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << npoints << " double\n";
  for (int k = 0; k < K; ++k)
    for (int p = 0; p < Np; ++p)
      out << format_real(op.node_x(p, k)) << ' ' << format_real(op.node_y(p, k)) << " 0\n";

  out << "CELLS " << ncells << ' ' << 4 * ncells << '\n';
  for (int k = 0; k < K; ++k)
    for (long t = 0; t < nsub; ++t)
      out << "3 " << k * Np + op.ops.plot_triangles(t, 0) << ' '
          << k * Np + op.ops.plot_triangles(t, 1) << ' ' << k * Np + op.ops.plot_triangles(t, 2)
          << '\n';

  out << "CELL_TYPES " << ncells << '\n';
  for (long c = 0; c < ncells; ++c) out << "5\n";

  out << "POINT_DATA " << npoints << '\n';
  auto write_scalars = [&](const std::string& name, const Matrix& field) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < K; ++k)
      for (int p = 0; p < Np; ++p) out << format_real(field(p, k)) << '\n';
  };
  write_scalars("Ex", state.ex);
  write_scalars("Ey", state.ey);
  write_scalars("Hz", state.hz);
  for (const auto& [name, field] : extra) write_scalars(name, *field);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

// Time series at probe points: one row per sample time, one column block per
// field.
inline void write_probe_csv(const std::string& path, const std::vector<std::string>& columns,
                            const std::vector<Real>& times,
                            const std::vector<std::vector<Real>>& rows) {
  if (times.size() != rows.size()) throw IoError("probe series length mismatch");
  auto out = open_output(path);
  out << "t";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (size_t i = 0; i < times.size(); ++i) {
    out << format_real(times[i]);
    for (Real v : rows[i]) out << ',' << format_real(v);
    out << '\n';
  }
}

}  // namespace tedg
