// Coupled limit problem: the base Neumann problem on the rectangle, coupled
// through its top trace to density-weighted 1D problems on the tooth graph,
// one bundle of edge functions per trace node. The x-dependence is
// discretized by P1 on the trace partition (tensored with P1 in y); the
// root-edge bottom value at a trace node IS that node's base DOF, and all
// edge endpoints meeting at a joint share one DOF, so the continuity
// conditions hold exactly at the discrete level. Kirchhoff flux balances are
// natural conditions of the weak form and only checked as residuals.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "brush/density.hpp"
#include "brush/expr.hpp"
#include "brush/fem.hpp"
#include "brush/graph.hpp"
#include "brush/mesh.hpp"
#include "brush/quad.hpp"

namespace brush {

struct LimitOptions {
  double h_y = 1.0 / 64.0;
  double cg_tol = 1e-10;
  int max_iter = 400000;
};

// Per-edge uniform 1D grids plus the vertex identifications that realize the
// continuity conditions: interior nodes own a local DOF, edge endpoints share
// the DOF of their joint (or of the base trace node for the root bottom).
struct GraphDofLayout {
  std::vector<std::vector<double>> grids;  // [edge] -> node ordinates
  std::vector<std::vector<int>> node_dof;  // [edge][m] -> local DOF, -1 = base
  int local_count = 0;

  int elems(int e) const { return int(grids[e].size()) - 1; }
};

inline GraphDofLayout build_graph_layout(const GraphDecomposition& d,
                                         double h_y) {
  if (!(h_y > 0.0)) throw MeshError("graph mesh size h_y must be positive");
  GraphDofLayout lay;
  const int E = int(d.edges.size());
  const int M = d.slab_count();
  lay.grids.resize(E);
  lay.node_dof.resize(E);
  for (int e = 0; e < E; ++e) {
    const GraphEdge& ed = d.edges[e];
    int n = std::max(1, int(std::ceil((ed.y_hi - ed.y_lo) / h_y - 1e-12)));
    lay.grids[e].resize(n + 1);
    for (int m = 0; m <= n; ++m)
      lay.grids[e][m] = detail::lerp_exact(ed.y_lo, ed.y_hi, m, n);
    lay.node_dof[e].assign(n + 1, -2);
  }
  int next = 0;
  for (int e = 0; e < E; ++e)
    for (int m = 1; m < lay.elems(e); ++m) lay.node_dof[e][m] = next++;
  std::vector<int> joint_dof(d.joints.size(), -1);
  for (size_t j = 0; j < d.joints.size(); ++j) joint_dof[j] = next++;
  for (int e = 0; e < E; ++e) {
    const GraphEdge& ed = d.edges[e];
    // Bottom endpoint: base vertex for the root slab, otherwise the joint
    // one stage below that lists this edge above.
    if (ed.slab == 1) {
      lay.node_dof[e][0] = -1;
    } else {
      for (size_t j = 0; j < d.joints.size(); ++j) {
        const Joint& jt = d.joints[j];
        if (jt.stage != ed.slab - 1) continue;
        if (std::find(jt.above.begin(), jt.above.end(), e) != jt.above.end())
          lay.node_dof[e][0] = joint_dof[j];
      }
    }
    // Top endpoint: free vertex on the last slab, otherwise this stage's
    // joint that lists the edge below.
    if (ed.slab == M) {
      lay.node_dof[e][lay.elems(e)] = next++;
    } else {
      for (size_t j = 0; j < d.joints.size(); ++j) {
        const Joint& jt = d.joints[j];
        if (jt.stage != ed.slab) continue;
        if (std::find(jt.below.begin(), jt.below.end(), e) != jt.below.end())
          lay.node_dof[e][lay.elems(e)] = joint_dof[j];
      }
    }
  }
  for (int e = 0; e < E; ++e)
    for (int dof : lay.node_dof[e])
      if (dof == -2)
        throw DecompositionError("internal: unassigned graph DOF");
  lay.local_count = next;
  return lay;
}

struct LimitSolution {
  const BaseMesh* base = nullptr;  // null for the fixed-trace fixture
  const GraphDecomposition* decomp = nullptr;
  GraphDofLayout layout;
  DensityField density;
  std::vector<double> trace_xs;
  std::vector<char> active;        // per trace node
  std::vector<int> dropped_nodes;  // vanishing-set trace indices
  std::vector<double> base_values;
  // values[k][e][m]: edge-node values per trace node; identically zero on
  // dropped nodes, and shared vertex values are materialized on every
  // incident edge.
  std::vector<std::vector<std::vector<double>>> values;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

namespace limitdetail {

struct YBlocks {
  // Per (edge, element): 2x2 stiffness+mass with the width weight.
  std::vector<std::vector<std::array<std::array<double, 2>, 2>>> a;
};

inline YBlocks y_blocks(const GraphDecomposition& d,
                        const GraphDofLayout& lay) {
  YBlocks yb;
  yb.a.resize(d.edges.size());
  for (size_t e = 0; e < d.edges.size(); ++e) {
    int n = lay.elems(int(e));
    yb.a[e].resize(n);
    for (int m = 0; m < n; ++m) {
      double ylo = lay.grids[e][m], yhi = lay.grids[e][m + 1];
      double dy = yhi - ylo;
      std::array<std::array<double, 2>, 2> loc{};
      for (const GaussPoint& g : gauss01(2)) {
        double y = ylo + g.t * dy;
        double w = d.edges[e].width(y);
        double psi[2] = {1.0 - g.t, g.t};
        double dpsi[2] = {-1.0 / dy, 1.0 / dy};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            loc[a][b] += dy * g.w * w *
                         (dpsi[a] * dpsi[b] + psi[a] * psi[b]);
      }
      yb.a[e][m] = loc;
    }
  }
  return yb;
}

inline bool element_in_attach(const DensityField& th, double xl, double xr) {
  double mid = 0.5 * (xl + xr);
  return mid >= th.attach_lo && mid <= th.attach_hi;
}

}  // namespace limitdetail

// Shared assembly/solve for the coupled problem and the fixed-trace fixture.
// When `base` is null, `fixed_trace` supplies the root-bottom value per trace
// node and the base block is absent.
inline LimitSolution solve_limit_impl(
    const BaseMesh* base, const GraphDecomposition& d,
    const DensityField& density, const Expr& f,
    const std::function<double(double)>& fixed_trace,
    const LimitOptions& opt) {
  LimitSolution sol;
  sol.base = base;
  sol.decomp = &d;
  sol.layout = build_graph_layout(d, opt.h_y);
  sol.density = density;
  const GraphDofLayout& lay = sol.layout;

  const std::vector<double>& xs = density.xs;
  const int K = int(xs.size());
  sol.trace_xs = xs;
  // The graph form is integrated only over trace elements whose endpoints
  // both carry graph DOFs; constants then stay exactly representable next to
  // the vanishing set. Active nodes without such an element are dropped too
  // (their block would be singular).
  std::vector<char> raw(K, 0);
  for (int k = 0; k < K; ++k) raw[k] = density.active(k) ? 1 : 0;
  sol.active.assign(K, 0);
  for (int k = 0; k < K; ++k) {
    if (!raw[k]) continue;
    bool left = k > 0 && raw[k - 1] &&
                limitdetail::element_in_attach(density, xs[k - 1], xs[k]);
    bool right = k + 1 < K && raw[k + 1] &&
                 limitdetail::element_in_attach(density, xs[k], xs[k + 1]);
    sol.active[k] = (left || right) ? 1 : 0;
  }
  sol.dropped_nodes.clear();
  for (int k = 0; k < K; ++k)
    if (!sol.active[k]) sol.dropped_nodes.push_back(k);

  const int n_base = base ? base->mesh.vertex_count() : 0;
  std::vector<int> rank(K, -1);
  int n_active = 0;
  for (int k = 0; k < K; ++k)
    if (sol.active[k]) rank[k] = n_active++;
  const int L = lay.local_count;
  const int n_total = n_base + n_active * L;

  // Global index of edge-node (k, e, m); -1 encodes the fixed-trace value.
  auto gdof = [&](int k, int e, int m) -> int {
    int l = lay.node_dof[e][m];
    if (l == -1) return base ? base->trace_nodes[k] : -1;
    return n_base + rank[k] * L + l;
  };

  std::vector<std::array<int, 2>> idx;
  std::vector<double> val;
  std::vector<double> b(n_total, 0.0);

  if (base) {
    for (int t = 0; t < base->mesh.triangle_count(); ++t) {
      auto g = femdetail::tri_geom(base->mesh, t);
      const auto& tr = base->mesh.triangles[t];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double kij = g.area * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j]);
          double mij = 0.0;
          for (int q = 0; q < 3; ++q)
            mij += (g.area / 3.0) * g.phi_mid[q][i] * g.phi_mid[q][j];
          idx.push_back({tr[i], tr[j]});
          val.push_back(kij + mij);
        }
        for (int q = 0; q < 3; ++q)
          b[tr[i]] += (g.area / 3.0) * f(g.mid[q].x, g.mid[q].y) *
                      g.phi_mid[q][i];
      }
    }
  }

  limitdetail::YBlocks yb = limitdetail::y_blocks(d, lay);
  for (int k = 0; k + 1 < K; ++k) {
    double xl = xs[k], xr = xs[k + 1];
    if (!limitdetail::element_in_attach(density, xl, xr)) continue;
    if (!sol.active[k] || !sol.active[k + 1]) continue;
    double len = xr - xl;
    // Density-weighted x-mass on the element.
    std::array<std::array<double, 2>, 2> mx{};
    for (const GaussPoint& g : gauss01(2)) {
      double th = density.eval(xl + g.t * len);
      double phi[2] = {1.0 - g.t, g.t};
      for (int a = 0; a < 2; ++a)
        for (int bq = 0; bq < 2; ++bq)
          mx[a][bq] += len * g.w * th * phi[a] * phi[bq];
    }
    for (size_t e = 0; e < d.edges.size(); ++e) {
      for (int m = 0; m < lay.elems(int(e)); ++m) {
        const auto& ay = yb.a[e][m];
        for (int a = 0; a < 2; ++a) {
          if (!sol.active[k + a]) continue;
          for (int g = 0; g < 2; ++g) {
            int row = gdof(k + a, int(e), m + g);
            if (row < 0) continue;  // fixed-trace row eliminated
            for (int bq = 0; bq < 2; ++bq) {
              if (!sol.active[k + bq]) continue;
              for (int dq = 0; dq < 2; ++dq) {
                int col = gdof(k + bq, int(e), m + dq);
                double a_val = mx[a][bq] * ay[g][dq];
                if (col < 0)
                  b[row] -= a_val * fixed_trace(xs[k + bq]);
                else {
                  idx.push_back({row, col});
                  val.push_back(a_val);
                }
              }
            }
          }
        }
      }
      // Source term with the density and width weights (3x3 Gauss).
      for (int m = 0; m < lay.elems(int(e)); ++m) {
        double ylo = lay.grids[e][m], yhi = lay.grids[e][m + 1];
        double dy = yhi - ylo;
        for (const GaussPoint& gx : gauss01(3)) {
          double x = xl + gx.t * len;
          double th = density.eval(x);
          if (th == 0.0) continue;
          double phi[2] = {1.0 - gx.t, gx.t};
          for (const GaussPoint& gy : gauss01(3)) {
            double y = ylo + gy.t * dy;
            double common =
                len * dy * gx.w * gy.w * th * d.edges[e].width(y) * f(x, y);
            double psi[2] = {1.0 - gy.t, gy.t};
            for (int a = 0; a < 2; ++a) {
              if (!sol.active[k + a]) continue;
              for (int g = 0; g < 2; ++g) {
                int row = gdof(k + a, int(e), m + g);
                if (row >= 0) b[row] += common * phi[a] * psi[g];
              }
            }
          }
        }
      }
    }
  }

  SparseSpd A(n_total, std::move(idx), std::move(val));
  CgResult cg = solve_spd(A, b, opt.cg_tol, opt.max_iter);
  sol.cg_iterations = cg.iterations;
  sol.cg_residual = cg.relative_residual;

  if (base)
    sol.base_values.assign(cg.x.begin(), cg.x.begin() + n_base);
  sol.values.assign(K, {});
  for (int k = 0; k < K; ++k) {
    sol.values[k].resize(d.edges.size());
    for (size_t e = 0; e < d.edges.size(); ++e) {
      int n = lay.elems(int(e));
      sol.values[k][e].assign(n + 1, 0.0);
      if (!sol.active[k]) continue;
      for (int m = 0; m <= n; ++m) {
        int g = gdof(k, int(e), m);
        sol.values[k][e][m] = g < 0 ? fixed_trace(xs[k]) : cg.x[g];
      }
    }
  }
  return sol;
}

// Coupled limit problem on base + graph. An everywhere-vanishing density
// degenerates to the standalone base Neumann problem with empty graph fields.
inline LimitSolution solve_limit(const BaseMesh& base,
                                 const GraphDecomposition& d,
                                 const DensityField& density, const Expr& f,
                                 const LimitOptions& opt = {}) {
  if (int(density.xs.size()) != base.trace_count())
    throw DensityError("density samples do not match the trace nodes");
  return solve_limit_impl(&base, d, density, f, {}, opt);
}

// Test fixture: the base problem is replaced by a prescribed trace value, so
// the graph block can be checked against closed-form 1D solutions.
inline LimitSolution solve_graph_fixed_trace(
    const GraphDecomposition& d, const DensityField& density, const Expr& f,
    const std::function<double(double)>& trace_value,
    const LimitOptions& opt = {}) {
  return solve_limit_impl(nullptr, d, density, f, trace_value, opt);
}

// ---------------------------------------------------------------------------
// Evaluation helpers

inline double edge_value_at(const LimitSolution& sol, int k, int e, double y) {
  const std::vector<double>& g = sol.layout.grids[e];
  const std::vector<double>& v = sol.values[k][e];
  if (y <= g.front()) return v.front();
  if (y >= g.back()) return v.back();
  auto it = std::upper_bound(g.begin(), g.end(), y);
  size_t m = size_t(it - g.begin());
  double t = (y - g[m - 1]) / (g[m] - g[m - 1]);
  return v[m - 1] + t * (v[m] - v[m - 1]);
}

// Exact integral of the P1 interpolant of nodal data over [lo, hi].
struct TracePrefix {
  const std::vector<double>* xs;
  std::vector<double> vals;
  std::vector<double> cum;

  TracePrefix(const std::vector<double>& x, std::vector<double> v)
      : xs(&x), vals(std::move(v)) {
    cum.assign(xs->size(), 0.0);
    for (size_t k = 0; k + 1 < xs->size(); ++k)
      cum[k + 1] = cum[k] + 0.5 * ((*xs)[k + 1] - (*xs)[k]) *
                               (vals[k] + vals[k + 1]);
  }

  double value_at(double x) const {
    const std::vector<double>& x_ = *xs;
    if (x <= x_.front()) return vals.front();
    if (x >= x_.back()) return vals.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    size_t k = size_t(it - x_.begin());
    double t = (x - x_[k - 1]) / (x_[k] - x_[k - 1]);
    return vals[k - 1] + t * (vals[k] - vals[k - 1]);
  }

  double integral_to(double x) const {
    const std::vector<double>& x_ = *xs;
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return cum.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    size_t k = size_t(it - x_.begin());
    return cum[k - 1] +
           0.5 * (x - x_[k - 1]) * (vals[k - 1] + value_at(x));
  }

  double average_over(double lo, double hi) const {
    return (integral_to(hi) - integral_to(lo)) / (hi - lo);
  }
};

// Reconstruction of the limit field on the physical brush: the base part is
// the base solution; a tooth node takes the average over the scaled base
// interval of the x-interpolated edge functions, evaluated at the node's
// height inside its slab piece. Nodes on level lines may belong to several
// pieces; the incident values must agree.
inline DiscreteField reconstruct_ubar(const LimitSolution& sol,
                                      const BrushMesh& bm) {
  DiscreteField out(bm.mesh);
  const int nb = bm.base_vertex_count;
  if (sol.base) {
    if (int(sol.base_values.size()) != nb)
      throw StructureError("limit solution does not match this brush mesh");
    std::copy(sol.base_values.begin(), sol.base_values.end(),
              out.values.begin());
  }

  const TriMesh& ref = bm.ref.mesh;
  const GraphDecomposition& d = *sol.decomp;
  // Incident edges per reference node.
  std::vector<std::vector<int>> node_edges(ref.vertex_count());
  for (int t = 0; t < ref.triangle_count(); ++t) {
    int e = d.edge_id(ref.tags[t].slab, ref.tags[t].comp);
    for (int vid : ref.triangles[t]) {
      auto& v = node_edges[vid];
      if (std::find(v.begin(), v.end(), e) == v.end()) v.push_back(e);
    }
  }
  for (auto& v : node_edges) std::sort(v.begin(), v.end());

  const int K = int(sol.trace_xs.size());
  // Group reference nodes by (lowest incident edge, height) and average the
  // trace interpolant once per group.
  std::vector<double> per_ref_value(ref.vertex_count(), 0.0);
  std::vector<std::vector<double>> tooth_avg;  // [tooth] per ref node
  tooth_avg.assign(bm.tooth_count(),
                   std::vector<double>(ref.vertex_count(), 0.0));
  std::vector<double> node_vals(K);
  for (int r = 0; r < ref.vertex_count(); ++r) {
    if (node_edges[r].empty()) continue;
    double y = ref.vertices[r].y;
    for (size_t c = 0; c < node_edges[r].size(); ++c) {
      int e = node_edges[r][c];
      for (int k = 0; k < K; ++k) node_vals[k] = edge_value_at(sol, k, e, y);
      TracePrefix pref(sol.trace_xs, node_vals);
      for (int n = 0; n < bm.tooth_count(); ++n) {
        double avg = pref.average_over(bm.spec.tooth_base_lo(n),
                                       bm.spec.tooth_base_hi(n));
        if (c == 0)
          tooth_avg[n][r] = avg;
        else if (std::abs(tooth_avg[n][r] - avg) > 1e-10)
          throw ContinuityError(
              "reconstruction ambiguous at a level-line node");
      }
    }
  }
  for (int n = 0; n < bm.tooth_count(); ++n)
    for (int r = 0; r < ref.vertex_count(); ++r) {
      int vid = bm.tooth_nodes[n][r];
      if (vid >= nb)  // glued base-row nodes keep the base value
        out.values[vid] = tooth_avg[n][r];
    }
  return out;
}

// ---------------------------------------------------------------------------
// Energies and residuals

// Density-weighted graph energy of the limit solution (the weak-form
// quadratic part restricted to the graph block).
inline double graph_energy(const LimitSolution& sol) {
  const GraphDecomposition& d = *sol.decomp;
  const GraphDofLayout& lay = sol.layout;
  limitdetail::YBlocks yb = limitdetail::y_blocks(d, lay);
  const std::vector<double>& xs = sol.trace_xs;
  double total = 0.0;
  for (int k = 0; k + 1 < int(xs.size()); ++k) {
    if (!limitdetail::element_in_attach(sol.density, xs[k], xs[k + 1]))
      continue;
    if (!sol.active[k] || !sol.active[k + 1]) continue;
    double len = xs[k + 1] - xs[k];
    std::array<std::array<double, 2>, 2> mx{};
    for (const GaussPoint& g : gauss01(2)) {
      double th = sol.density.eval(xs[k] + g.t * len);
      double phi[2] = {1.0 - g.t, g.t};
      for (int a = 0; a < 2; ++a)
        for (int bq = 0; bq < 2; ++bq)
          mx[a][bq] += len * g.w * th * phi[a] * phi[bq];
    }
    for (size_t e = 0; e < d.edges.size(); ++e)
      for (int m = 0; m < lay.elems(int(e)); ++m) {
        const auto& ay = yb.a[e][m];
        for (int a = 0; a < 2; ++a)
          for (int bq = 0; bq < 2; ++bq)
            for (int g = 0; g < 2; ++g)
              for (int dq = 0; dq < 2; ++dq)
                total += mx[a][bq] * ay[g][dq] *
                         sol.values[k + a][e][m + g] *
                         sol.values[k + bq][e][m + dq];
      }
  }
  return total;
}

// Graph energy with the teeth-base indicator in place of the density.
inline double graph_energy_indicator(const LimitSolution& sol,
                                     const BrushSpec& spec) {
  const GraphDecomposition& d = *sol.decomp;
  const GraphDofLayout& lay = sol.layout;
  limitdetail::YBlocks yb = limitdetail::y_blocks(d, lay);
  const std::vector<double>& xs = sol.trace_xs;
  double total = 0.0;
  for (int k = 0; k + 1 < int(xs.size()); ++k) {
    double xl = xs[k], xr = xs[k + 1];
    double len = xr - xl;
    // Exact x-mass against the union of scaled base intervals.
    std::array<std::array<double, 2>, 2> mx{};
    bool any = false;
    for (size_t n = 0; n < spec.placements.size(); ++n) {
      double lo = std::max(xl, spec.tooth_base_lo(int(n)));
      double hi = std::min(xr, spec.tooth_base_hi(int(n)));
      if (!(hi > lo)) continue;
      any = true;
      for (const GaussPoint& g : gauss01(2)) {
        double x = lo + g.t * (hi - lo);
        double t = (x - xl) / len;
        double phi[2] = {1.0 - t, t};
        for (int a = 0; a < 2; ++a)
          for (int bq = 0; bq < 2; ++bq)
            mx[a][bq] += (hi - lo) * g.w * phi[a] * phi[bq];
      }
    }
    if (!any) continue;
    for (size_t e = 0; e < d.edges.size(); ++e)
      for (int m = 0; m < lay.elems(int(e)); ++m) {
        const auto& ay = yb.a[e][m];
        for (int a = 0; a < 2; ++a)
          for (int bq = 0; bq < 2; ++bq)
            for (int g = 0; g < 2; ++g)
              for (int dq = 0; dq < 2; ++dq)
                total += mx[a][bq] * ay[g][dq] *
                         sol.values[k + a][e][m + g] *
                         sol.values[k + bq][e][m + dq];
      }
  }
  return total;
}

// Source functional of the limit problem evaluated at the solution, with the
// assembly quadrature; matches the energy to solver tolerance.
inline double limit_source_term(const LimitSolution& sol, const Expr& f) {
  double total = 0.0;
  if (sol.base)
    total += integrate_against(
        sol.base->mesh, [&](double x, double y) { return f(x, y); },
        sol.base_values);
  const GraphDecomposition& d = *sol.decomp;
  const GraphDofLayout& lay = sol.layout;
  const std::vector<double>& xs = sol.trace_xs;
  for (int k = 0; k + 1 < int(xs.size()); ++k) {
    if (!limitdetail::element_in_attach(sol.density, xs[k], xs[k + 1]))
      continue;
    if (!sol.active[k] || !sol.active[k + 1]) continue;
    double len = xs[k + 1] - xs[k];
    for (size_t e = 0; e < d.edges.size(); ++e)
      for (int m = 0; m < lay.elems(int(e)); ++m) {
        double ylo = lay.grids[e][m], yhi = lay.grids[e][m + 1];
        double dy = yhi - ylo;
        for (const GaussPoint& gx : gauss01(3)) {
          double x = xs[k] + gx.t * len;
          double th = sol.density.eval(x);
          if (th == 0.0) continue;
          double phi[2] = {1.0 - gx.t, gx.t};
          for (const GaussPoint& gy : gauss01(3)) {
            double y = ylo + gy.t * dy;
            double common = len * dy * gx.w * gy.w * th *
                            d.edges[e].width(y) * f(x, y);
            double psi[2] = {1.0 - gy.t, gy.t};
            double uq = 0.0;
            for (int a = 0; a < 2; ++a)
              for (int g = 0; g < 2; ++g)
                uq += phi[a] * psi[g] * sol.values[k + a][e][m + g];
            total += common * uq;
          }
        }
      }
  }
  return total;
}

struct EnergyReport {
  double direct = 0.0;           // brush solution energy
  double limit = 0.0;            // base + density-weighted graph energy
  double limit_indicator = 0.0;  // base + indicator-weighted graph energy
};

inline EnergyReport energies(const BrushMesh& bm, const DiscreteField& u_eps,
                             const LimitSolution& sol) {
  EnergyReport r;
  r.direct = h1_norm_sq(bm.mesh, u_eps.values);
  double base_part =
      sol.base ? h1_norm_sq(sol.base->mesh, sol.base_values) : 0.0;
  r.limit = base_part + graph_energy(sol);
  r.limit_indicator = base_part + graph_energy_indicator(sol, bm.spec);
  return r;
}

struct FluxReport {
  struct JointResidual {
    int stage = 0;
    int k = 0;
    double max_residual = 0.0;  // over active trace nodes
  };
  std::vector<JointResidual> joints;
  double top_max = 0.0;        // |u'(top)| over last-slab edges
  double base_flux_max = 0.0;  // |d_y u^b - theta * width(0) * u_root'(0)|
};

// One-sided slopes from the first/last 1D element of each edge; all entries
// are O(h) recovery diagnostics, not enforced conditions.
inline FluxReport flux_residuals(const LimitSolution& sol) {
  const GraphDecomposition& d = *sol.decomp;
  const GraphDofLayout& lay = sol.layout;
  const int K = int(sol.trace_xs.size());
  auto slope_bottom = [&](int k, int e) {
    const auto& g = lay.grids[e];
    const auto& v = sol.values[k][e];
    return (v[1] - v[0]) / (g[1] - g[0]);
  };
  auto slope_top = [&](int k, int e) {
    const auto& g = lay.grids[e];
    const auto& v = sol.values[k][e];
    size_t n = g.size() - 1;
    return (v[n] - v[n - 1]) / (g[n] - g[n - 1]);
  };
  FluxReport rep;
  for (const Joint& j : d.joints) {
    FluxReport::JointResidual jr{j.stage, j.k, 0.0};
    double level = d.levels[j.stage];
    for (int k = 0; k < K; ++k) {
      if (!sol.active[k]) continue;
      double below = 0.0, above = 0.0;
      for (int e : j.below) below += d.edges[e].width(level) * slope_top(k, e);
      for (int e : j.above)
        above += d.edges[e].width(level) * slope_bottom(k, e);
      jr.max_residual = std::max(jr.max_residual, std::abs(below - above));
    }
    rep.joints.push_back(jr);
  }
  for (size_t e = 0; e < d.edges.size(); ++e) {
    if (d.edges[e].slab != d.slab_count()) continue;
    for (int k = 0; k < K; ++k)
      if (sol.active[k])
        rep.top_max = std::max(rep.top_max, std::abs(slope_top(k, int(e))));
  }
  if (sol.base) {
    // Base-side vertical derivative at the trace nodes, area-weighted over
    // incident base triangles, against the weighted root-edge flux.
    const TriMesh& mesh = sol.base->mesh;
    std::vector<double> dy_num(mesh.vertices.size(), 0.0);
    std::vector<double> dy_den(mesh.vertices.size(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      auto g = femdetail::tri_geom(mesh, t);
      const auto& tr = mesh.triangles[t];
      double grad_y = 0.0;
      for (int i = 0; i < 3; ++i) grad_y += sol.base_values[tr[i]] * g.gy[i];
      for (int i = 0; i < 3; ++i) {
        dy_num[tr[i]] += g.area * grad_y;
        dy_den[tr[i]] += g.area;
      }
    }
    double w0 = d.edges[d.root_edge].width(d.levels.front());
    for (int k = 0; k < K; ++k) {
      if (!sol.active[k]) continue;
      double base_side =
          dy_num[sol.base->trace_nodes[k]] / dy_den[sol.base->trace_nodes[k]];
      double graph_side = sol.density.samples[k] * w0 *
                          slope_bottom(k, d.root_edge);
      rep.base_flux_max =
          std::max(rep.base_flux_max, std::abs(base_side - graph_side));
    }
  }
  return rep;
}

}  // namespace brush
