// The scale sweep: for each epsilon, build the brush, solve directly, solve
// the coupled limit problem on the same base mesh, reconstruct the limit
// field on the brush and report the distance columns and energies. Rows are
// processed and emitted in the given order; a failing scale is recorded and
// the sweep continues.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "brush/config.hpp"
#include "brush/density.hpp"
#include "brush/direct.hpp"
#include "brush/limit.hpp"
#include "brush/unfold.hpp"

namespace brush {

struct ConvergeRow {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  bool no_limit_info = false;  // vanishing density: teeth column is only a norm
  double err_base = 0.0;   // H1 distance on the base rectangle
  double err_teeth = 0.0;  // H1 distance on the teeth
  double grad_x = 0.0;     // L2 norm of the unfolded horizontal gradient
  double e_direct = 0.0;
  double e_limit = 0.0;
  double e_gap = 0.0;
};

inline DensityField density_for(const RunConfig& rc, const BrushSpec& spec,
                                const BaseMesh& base) {
  std::vector<double> xs(base.trace_count());
  for (int k = 0; k < base.trace_count(); ++k) xs[k] = base.trace_x(k);
  if (rc.theta_mode == "empirical")
    return theta_empirical(spec, rc.theta_window, std::move(xs),
                           rc.theta_min);
  if (rc.family == "periodic")
    return theta_constant(rc.fill, std::move(xs), rc.attach_lo, rc.attach_hi,
                          rc.theta_min);
  if (rc.family == "linear-gaps")
    return theta_linear_profile(std::move(xs), rc.theta_min);
  if (rc.family == "single")
    return theta_zero(std::move(xs), rc.attach_lo, rc.attach_hi,
                      rc.theta_min);
  throw ConfigError("no exact density for family '" + rc.family + "'");
}

inline ConvergeRow converge_one(const RunConfig& rc, double eps) {
  ConvergeRow row;
  row.eps = eps;
  BrushSpec spec = rc.make_spec(eps);
  BrushMesh bm = mesh_brush(spec, rc.h_base, rc.h_tooth);
  BaseMesh base = extract_base(bm);
  GraphDecomposition decomp = decompose(bm.ref);

  DirectSolution direct = solve_direct(bm, rc.source, rc.cg_tol);
  DensityField theta = density_for(rc, spec, base);
  LimitOptions opt;
  opt.h_y = rc.h_y;
  opt.cg_tol = rc.cg_tol;
  LimitSolution limit = solve_limit(base, decomp, theta, rc.source, opt);
  row.no_limit_info = limit.dropped_nodes.size() == limit.trace_xs.size();

  DiscreteField ubar = reconstruct_ubar(limit, bm);
  row.err_base = std::sqrt(h1_diff_sq(
      bm.mesh, direct.u.values, ubar.values,
      [&](int t) { return t < bm.base_tri_count; }));
  row.err_teeth = std::sqrt(h1_diff_sq(
      bm.mesh, direct.u.values, ubar.values,
      [&](int t) { return t >= bm.base_tri_count; }));
  UnfoldedDerivatives der = unfold_derivatives(bm, direct.u);
  row.grad_x = std::sqrt(l2_sq_unfolded_grad_x(bm, der));
  EnergyReport er = energies(bm, direct.u, limit);
  row.e_direct = er.direct;
  row.e_limit = er.limit;
  row.e_gap = std::abs(er.direct - er.limit);
  row.ok = true;
  return row;
}

struct ConvergeResult {
  std::vector<ConvergeRow> rows;
  std::string csv;
};

inline ConvergeResult run_converge(const RunConfig& rc) {
  ConvergeResult res;
  for (double eps : rc.epsilons) {
    ConvergeRow row;
    try {
      row = converge_one(rc, eps);
    } catch (const std::exception& e) {
      row.eps = eps;
      row.ok = false;
      row.error = e.what();
    }
    res.rows.push_back(row);
  }
  std::ostringstream out;
  out << "# brushhom converge v1\n";
  out << "eps,err_base_h1,err_teeth_h1,grad_x_l2,energy_direct,energy_limit,"
         "energy_gap,flag\n";
  char buf[256];
  for (const ConvergeRow& r : res.rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof(buf), "%.12e,,,,,,,", r.eps);
      out << buf << "failed: " << r.error << "\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf),
                  "%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,", r.eps,
                  r.err_base, r.err_teeth, r.grad_x, r.e_direct, r.e_limit,
                  r.e_gap);
    out << buf << (r.no_limit_info ? "no limit info (vanishing density)" : "")
        << "\n";
  }
  res.csv = out.str();
  return res;
}

}  // namespace brush
