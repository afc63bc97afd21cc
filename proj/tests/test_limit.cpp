#include <doctest.h>

#include <functional>

#include "brush/direct.hpp"
#include "brush/limit.hpp"
#include "oracles.hpp"

using namespace brush;

namespace {

Rect unit_base() { return {0.0, 1.0, -1.0, 0.0}; }

std::vector<double> trace_positions(const BaseMesh& base) {
  std::vector<double> xs(base.trace_count());
  for (int k = 0; k < base.trace_count(); ++k) xs[k] = base.trace_x(k);
  return xs;
}

struct Setup {
  BrushMesh bm;
  BaseMesh base;
  ToothMesh ref;
  GraphDecomposition decomp;
};

Setup make_setup(const BrushSpec& spec, double h_base, double h_tooth) {
  Setup s{mesh_brush(spec, h_base, h_tooth), {}, {}, {}};
  s.base = extract_base(s.bm);
  s.ref = s.bm.ref;
  s.decomp = decompose(s.ref);
  return s;
}

std::vector<double> uniform_nodes(int n) {
  std::vector<double> xs(n + 1);
  for (int k = 0; k <= n; ++k) xs[k] = double(k) / n;
  return xs;
}

// L2 distance of one edge profile to a closed form, 5-point Gauss.
double edge_l2_error(const LimitSolution& sol, int k, int e,
                     const std::function<double(double)>& exact) {
  const auto& g = sol.layout.grids[e];
  const auto& v = sol.values[k][e];
  double s = 0.0;
  for (size_t m = 0; m + 1 < g.size(); ++m) {
    double len = g[m + 1] - g[m];
    for (const GaussPoint& q : gauss01(5)) {
      double y = g[m] + q.t * len;
      double uh = v[m] + q.t * (v[m + 1] - v[m]);
      double dv = uh - exact(y);
      s += len * q.w * dv * dv;
    }
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("constant source solves the coupled problem exactly") {
  BrushSpec spec =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th =
      theta_constant(0.5, trace_positions(s.base), 0.0, 1.0);
  LimitOptions opt;
  opt.h_y = 0.125;
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), opt);
  for (double v : sol.base_values) CHECK(std::abs(v - 1.0) <= 1e-8);
  for (int k = 0; k < int(sol.trace_xs.size()); ++k)
    for (const auto& edge_vals : sol.values[k])
      for (double v : edge_vals) CHECK(std::abs(v - 1.0) <= 1e-8);
}

TEST_CASE("constant source on the branching graph with full density") {
  BrushSpec spec = place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.25,
                                  branching_tooth_unit());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_constant(1.0, trace_positions(s.base), 0.0, 1.0);
  LimitOptions opt;
  opt.h_y = 0.25;
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), opt);
  for (double v : sol.base_values) CHECK(std::abs(v - 1.0) <= 1e-8);
  for (int k = 0; k < int(sol.trace_xs.size()); ++k)
    for (const auto& edge_vals : sol.values[k])
      for (double v : edge_vals) CHECK(std::abs(v - 1.0) <= 1e-8);
}

TEST_CASE("vanishing density degenerates to the standalone base problem") {
  BrushSpec spec =
      place_single(unit_base(), 0.0, 1.0, 0.125, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_zero(trace_positions(s.base), 0.0, 1.0);
  Expr f = Expr::parse("1 + y + sin(2*x)");
  LimitSolution sol = solve_limit(s.base, s.decomp, th, f, {});

  SparseSpd A = assemble(s.base.mesh);
  std::vector<double> b =
      load(s.base.mesh, [&](double x, double y) { return f(x, y); });
  CgResult direct = solve_spd(A, b, 1e-10);
  REQUIRE(sol.base_values.size() == direct.x.size());
  for (size_t i = 0; i < direct.x.size(); ++i)
    CHECK(std::abs(sol.base_values[i] - direct.x[i]) <= 1e-12);
  CHECK(sol.dropped_nodes.size() == sol.trace_xs.size());
  for (const auto& per_edge : sol.values)
    for (const auto& vals : per_edge)
      for (double v : vals) CHECK(v == 0.0);
}

TEST_CASE("fixed unit trace reproduces the 1d catenary profile") {
  ToothMesh tm = mesh_tooth_reference(cylinder_tooth(), 0.25);
  GraphDecomposition d = decompose(tm);
  std::vector<double> xs = uniform_nodes(8);
  DensityField th = theta_constant(0.5, xs, 0.0, 1.0);
  auto exact = [](double y) { return std::cosh(1.0 - y) / std::cosh(1.0); };

  double err_prev = 0.0, top_prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    LimitOptions opt;
    opt.h_y = 0.125 / (1 << level);
    LimitSolution sol =
        solve_graph_fixed_trace(d, th, Expr(0.0), [](double) { return 1.0; },
                                opt);
    // The profile is independent of x.
    for (size_t m = 0; m < sol.values[0][0].size(); ++m)
      CHECK(sol.values[3][0][m] ==
            doctest::Approx(sol.values[0][0][m]).epsilon(1e-9));
    double err = edge_l2_error(sol, 0, 0, exact);
    double top = flux_residuals(sol).top_max;
    if (level > 0) {
      CHECK(err_prev / err > 3.5);
      CHECK(err_prev / err < 4.5);
      CHECK(top_prev / top > 1.5);
      CHECK(top_prev / top < 3.0);
    }
    err_prev = err;
    top_prev = top;
  }
}

TEST_CASE("kirchhoff residuals shrink linearly on the branching graph") {
  ToothMesh tm = mesh_tooth_reference(branching_tooth(), 0.25);
  GraphDecomposition d = decompose(tm);
  std::vector<double> xs = uniform_nodes(4);
  DensityField th = theta_constant(0.5, xs, 0.0, 1.0);

  std::vector<double> joint_max, top_max;
  for (int level = 0; level < 3; ++level) {
    LimitOptions opt;
    opt.h_y = 0.25 / (1 << level);
    LimitSolution sol =
        solve_graph_fixed_trace(d, th, Expr(0.0), [](double) { return 1.0; },
                                opt);
    FluxReport rep = flux_residuals(sol);
    double jm = 0.0;
    for (const auto& jr : rep.joints) jm = std::max(jm, jr.max_residual);
    joint_max.push_back(jm);
    top_max.push_back(rep.top_max);
  }
  for (size_t l = 1; l < joint_max.size(); ++l) {
    CHECK(joint_max[l - 1] / joint_max[l] > 1.5);
    CHECK(joint_max[l - 1] / joint_max[l] < 3.0);
    CHECK(top_max[l - 1] / top_max[l] > 1.5);
    CHECK(top_max[l - 1] / top_max[l] < 3.0);
  }
}

TEST_CASE("flux residuals vanish for the constant solution") {
  BrushSpec spec =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_constant(0.5, trace_positions(s.base), 0.0, 1.0);
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), {});
  FluxReport rep = flux_residuals(sol);
  CHECK(rep.joints.empty());  // single-edge graph: no interior joints
  CHECK(rep.top_max <= 1e-8);
  CHECK(rep.base_flux_max <= 1e-7);
}

TEST_CASE("reconstruction: constant fields, x-independent fields, averages") {
  BrushSpec spec =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_constant(0.5, trace_positions(s.base), 0.0, 1.0);
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), {});
  DiscreteField ubar = reconstruct_ubar(sol, s.bm);
  for (double v : ubar.values) CHECK(std::abs(v - 1.0) <= 1e-8);
}

TEST_CASE("reconstruction averages x-linear fields to the midpoint value") {
  BrushSpec spec =
      place_single(unit_base(), 0.0, 1.0, 0.25, cylinder_tooth());
  BrushMesh bm = mesh_brush(spec, 0.25, 0.25);
  BaseMesh base = extract_base(bm);
  ToothMesh ref = bm.ref;
  GraphDecomposition d = decompose(ref);

  LimitSolution sol;
  sol.base = nullptr;
  sol.decomp = &d;
  sol.layout = build_graph_layout(d, 0.25);
  std::vector<double> xs = trace_positions(base);
  sol.trace_xs = xs;
  sol.active.assign(xs.size(), 1);
  sol.values.resize(xs.size());
  const double slope = 2.0, offset = -0.25;
  for (size_t k = 0; k < xs.size(); ++k) {
    sol.values[k].resize(d.edges.size());
    for (size_t e = 0; e < d.edges.size(); ++e)
      sol.values[k][e].assign(sol.layout.grids[e].size(),
                              slope * xs[k] + offset);
  }
  DiscreteField ubar = reconstruct_ubar(sol, bm);
  double mid = spec.placements[0].center;
  for (int r = 0; r < ref.mesh.vertex_count(); ++r) {
    int vid = bm.tooth_nodes[0][r];
    if (vid < bm.base_vertex_count) continue;
    CHECK(ubar.values[vid] ==
          doctest::Approx(slope * mid + offset).epsilon(1e-13));
  }

  // x-independent fields: averaging is the identity.
  for (size_t k = 0; k < xs.size(); ++k)
    for (size_t e = 0; e < d.edges.size(); ++e)
      for (size_t m = 0; m < sol.values[k][e].size(); ++m)
        sol.values[k][e][m] = 3.0 + double(m);
  DiscreteField ubar2 = reconstruct_ubar(sol, bm);
  for (int r = 0; r < ref.mesh.vertex_count(); ++r) {
    int vid = bm.tooth_nodes[0][r];
    if (vid < bm.base_vertex_count) continue;
    double y = ref.mesh.vertices[r].y;
    // P1 interpolation of the (3 + m) profile at this height.
    const auto& g = sol.layout.grids[0];
    double expect = 0.0;
    for (size_t m = 0; m + 1 < g.size(); ++m)
      if (y >= g[m] - 1e-14 && y <= g[m + 1] + 1e-14)
        expect = 3.0 + m + (y - g[m]) / (g[m + 1] - g[m]);
    CHECK(ubar2.values[vid] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("energies: constant solution gives domain measures") {
  BrushSpec spec =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_constant(0.5, trace_positions(s.base), 0.0, 1.0);
  DirectSolution direct = solve_direct(s.bm, Expr(1.0), 1e-11);
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), {});
  EnergyReport er = energies(s.bm, direct.u, sol);

  double cell_area = polygon_signed_area(spec.tooth.polygon);
  double omega_eps = spec.covered_length();
  double direct_expect = spec.base.area() + omega_eps * cell_area;
  double limit_expect = spec.base.area() + cell_area * 0.5 * 1.0;
  CHECK(er.direct == doctest::Approx(direct_expect).epsilon(1e-8));
  CHECK(er.limit == doctest::Approx(limit_expect).epsilon(1e-8));
  CHECK(std::abs(er.direct - er.limit) <=
        cell_area * 0.5 * spec.epsilon + 1e-8);
  // Indicator-weighted form replaces the density by the covered intervals.
  double indicator_expect = spec.base.area() + cell_area * omega_eps;
  CHECK(er.limit_indicator ==
        doctest::Approx(indicator_expect).epsilon(1e-8));

  DiscreteField zero(s.bm.mesh);
  EnergyReport ez = energies(s.bm, zero, sol);
  CHECK(ez.direct == 0.0);
}

TEST_CASE("limit energy identity and graph/cell energy equivalence") {
  BrushSpec spec =
      place_periodic(unit_base(), 0.0, 1.0, 0.25, 0.5, cylinder_tooth());
  Setup s = make_setup(spec, 0.0625, 0.25);
  DensityField th = theta_constant(0.5, trace_positions(s.base), 0.0, 1.0);
  Expr f = Expr::parse("1 + y + sin(2*x)");
  LimitOptions opt;
  opt.h_y = 0.125;
  LimitSolution sol = solve_limit(s.base, s.decomp, th, f, opt);

  double energy =
      h1_norm_sq(s.base.mesh, sol.base_values) + graph_energy(sol);
  double source = limit_source_term(sol, f);
  CHECK(std::abs(energy - source) <= 1e-8 * energy);

  // Cell-quadrature route to the graph energy: per x-element Gauss points,
  // build the edge profiles and integrate their extension over the cell.
  double cell_route = 0.0;
  const auto& xs = sol.trace_xs;
  for (int k = 0; k + 1 < int(xs.size()); ++k) {
    double len = xs[k + 1] - xs[k];
    for (const GaussPoint& g : gauss01(2)) {
      double x = xs[k] + g.t * len;
      GraphFunction fx(s.decomp.edges.size());
      for (size_t e = 0; e < s.decomp.edges.size(); ++e) {
        std::vector<double> vals(sol.layout.grids[e].size());
        for (size_t m = 0; m < vals.size(); ++m)
          vals[m] = (1.0 - g.t) * sol.values[k][e][m] +
                    g.t * sol.values[k + 1][e][m];
        fx[e] = Piecewise1D::linear_nodes(sol.layout.grids[e], vals);
      }
      cell_route += len * g.w * th.eval(x) * extension_h1_sq(s.decomp, fx);
    }
  }
  double graph_route = graph_energy(sol);
  CHECK(std::abs(cell_route - graph_route) <=
        1e-10 * std::max(1.0, graph_route));
}

TEST_CASE("constant exactness holds for a density with a vanishing set") {
  BrushSpec spec = place_linear_gaps(unit_base(), 1.0 / 32, cylinder_tooth());
  Setup s = make_setup(spec, 0.125, 0.25);
  DensityField th = theta_linear_profile(trace_positions(s.base));
  LimitOptions opt;
  opt.h_y = 1.0 / 16;
  LimitSolution sol = solve_limit(s.base, s.decomp, th, Expr(1.0), opt);
  CHECK(!sol.dropped_nodes.empty());
  for (double v : sol.base_values) CHECK(std::abs(v - 1.0) <= 1e-8);
  for (int k = 0; k < int(sol.trace_xs.size()); ++k) {
    if (!sol.active[k]) continue;
    for (const auto& edge_vals : sol.values[k])
      for (double v : edge_vals) CHECK(std::abs(v - 1.0) <= 1e-8);
  }
}
