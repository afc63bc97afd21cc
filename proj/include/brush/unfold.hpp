// Unfolding of discrete fields from the teeth onto the fixed product domain
// attachment-interval x reference-cell. Because every tooth is an affine image
// of one reference mesh, unfolding is an exact node relabeling and the usual
// unfolding identities hold at machine precision on discrete fields.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "brush/fem.hpp"
#include "brush/mesh.hpp"
#include "brush/quad.hpp"

namespace brush {

// Unfolded discrete field: per tooth, the tooth-restricted coefficients
// relabeled onto the reference-cell nodes. As a function on the product
// domain it is piecewise constant in x on each scaled base interval and zero
// off the union of those intervals.
struct UnfoldedField {
  const BrushMesh* bm = nullptr;
  std::vector<std::vector<double>> blocks;  // [tooth][ref node]

  double base_measure(int n) const {
    const BrushSpec& s = bm->spec;
    return s.placements[n].length * (s.tooth.base_hi - s.tooth.base_lo);
  }
};

inline UnfoldedField unfold(const BrushMesh& bm, const DiscreteField& u) {
  if (u.mesh != &bm.mesh)
    throw StructureError("field does not live on this brush mesh");
  UnfoldedField uf;
  uf.bm = &bm;
  uf.blocks.resize(bm.tooth_count());
  for (int n = 0; n < bm.tooth_count(); ++n) {
    const std::vector<int>& map = bm.tooth_nodes[n];
    uf.blocks[n].resize(map.size());
    for (size_t r = 0; r < map.size(); ++r)
      uf.blocks[n][r] = u.values[map[r]];
  }
  return uf;
}

// L2 norm squared over the unfolded domain: sum over teeth of the scaled base
// measure times the reference-cell L2 norm of the block.
inline double l2_sq_unfolded(const UnfoldedField& uf) {
  const TriMesh& ref = uf.bm->ref.mesh;
  double total = 0.0;
  for (int n = 0; n < uf.bm->tooth_count(); ++n) {
    double cell = 0.0;
    for (int t = 0; t < ref.triangle_count(); ++t) {
      auto g = femdetail::tri_geom(ref, t);
      const auto& tr = ref.triangles[t];
      for (int q = 0; q < 3; ++q) {
        double vq = 0.0;
        for (int i = 0; i < 3; ++i)
          vq += uf.blocks[n][tr[i]] * g.phi_mid[q][i];
        cell += (g.area / 3.0) * vq * vq;
      }
    }
    total += uf.base_measure(n) * cell;
  }
  return total;
}

inline double l2_sq_unfolded_tooth(const UnfoldedField& uf, int n) {
  const TriMesh& ref = uf.bm->ref.mesh;
  double cell = 0.0;
  for (int t = 0; t < ref.triangle_count(); ++t) {
    auto g = femdetail::tri_geom(ref, t);
    const auto& tr = ref.triangles[t];
    for (int q = 0; q < 3; ++q) {
      double vq = 0.0;
      for (int i = 0; i < 3; ++i) vq += uf.blocks[n][tr[i]] * g.phi_mid[q][i];
      cell += (g.area / 3.0) * vq * vq;
    }
  }
  return uf.base_measure(n) * cell;
}

// Integral of the unfolded field over the product domain.
inline double integral_unfolded(const UnfoldedField& uf) {
  const TriMesh& ref = uf.bm->ref.mesh;
  double total = 0.0;
  for (int n = 0; n < uf.bm->tooth_count(); ++n) {
    double cell = 0.0;
    for (int t = 0; t < ref.triangle_count(); ++t) {
      const auto& tr = ref.triangles[t];
      double avg = (uf.blocks[n][tr[0]] + uf.blocks[n][tr[1]] +
                    uf.blocks[n][tr[2]]) /
                   3.0;
      cell += ref.tri_area(t) * avg;
    }
    total += uf.base_measure(n) * cell;
  }
  return total;
}

// L2 norm squared / integral of a P1 field over the physical teeth.
inline double l2_sq_teeth(const BrushMesh& bm, const DiscreteField& u,
                          int only_tooth = 0) {
  double s = 0.0;
  for (int t = bm.base_tri_count; t < bm.mesh.triangle_count(); ++t) {
    if (only_tooth > 0 && bm.mesh.tags[t].tooth != only_tooth) continue;
    auto g = femdetail::tri_geom(bm.mesh, t);
    const auto& tr = bm.mesh.triangles[t];
    for (int q = 0; q < 3; ++q) {
      double vq = 0.0;
      for (int i = 0; i < 3; ++i) vq += u.values[tr[i]] * g.phi_mid[q][i];
      s += (g.area / 3.0) * vq * vq;
    }
  }
  return s;
}

inline double integral_teeth(const BrushMesh& bm, const DiscreteField& u) {
  double s = 0.0;
  for (int t = bm.base_tri_count; t < bm.mesh.triangle_count(); ++t) {
    const auto& tr = bm.mesh.triangles[t];
    double avg =
        (u.values[tr[0]] + u.values[tr[1]] + u.values[tr[2]]) / 3.0;
    s += bm.mesh.tri_area(t) * avg;
  }
  return s;
}

// Per-triangle derivative blocks of the unfolded field on the reference cell,
// together with the relabeled physical derivatives they must reproduce:
// d/dy commutes with unfolding, d/dxi equals length_n times the unfolded
// horizontal derivative.
struct UnfoldedDerivatives {
  // [tooth][ref triangle]
  std::vector<std::vector<double>> dxi, dy;          // of the unfolded blocks
  std::vector<std::vector<double>> relabeled_dx, relabeled_dy;  // of u itself
};

inline UnfoldedDerivatives unfold_derivatives(const BrushMesh& bm,
                                              const DiscreteField& u) {
  if (u.mesh != &bm.mesh)
    throw StructureError("field does not live on this brush mesh");
  UnfoldedField uf = unfold(bm, u);
  const TriMesh& ref = bm.ref.mesh;
  UnfoldedDerivatives d;
  int teeth = bm.tooth_count();
  d.dxi.assign(teeth, std::vector<double>(ref.triangle_count(), 0.0));
  d.dy = d.dxi;
  d.relabeled_dx = d.dxi;
  d.relabeled_dy = d.dxi;
  for (int n = 0; n < teeth; ++n) {
    for (int t = 0; t < ref.triangle_count(); ++t) {
      auto gr = femdetail::tri_geom(ref, t);
      const auto& tr = ref.triangles[t];
      double gx = 0.0, gy = 0.0;
      for (int i = 0; i < 3; ++i) {
        gx += uf.blocks[n][tr[i]] * gr.gx[i];
        gy += uf.blocks[n][tr[i]] * gr.gy[i];
      }
      d.dxi[n][t] = gx;
      d.dy[n][t] = gy;
      int tp = bm.tooth_tri_begin[n] + t;
      auto gp = femdetail::tri_geom(bm.mesh, tp);
      const auto& trp = bm.mesh.triangles[tp];
      double px = 0.0, py = 0.0;
      for (int i = 0; i < 3; ++i) {
        px += u.values[trp[i]] * gp.gx[i];
        py += u.values[trp[i]] * gp.gy[i];
      }
      d.relabeled_dx[n][t] = px;
      d.relabeled_dy[n][t] = py;
    }
  }
  return d;
}

// L2(W) norm squared of the unfolded horizontal gradient of u; equals the
// physical L2 norm of du/dx over the teeth when the base has unit measure.
inline double l2_sq_unfolded_grad_x(const BrushMesh& bm,
                                    const UnfoldedDerivatives& d) {
  const TriMesh& ref = bm.ref.mesh;
  double s = 0.0;
  for (int n = 0; n < bm.tooth_count(); ++n) {
    double measure = bm.spec.placements[n].length *
                     (bm.spec.tooth.base_hi - bm.spec.tooth.base_lo);
    double cell = 0.0;
    for (int t = 0; t < ref.triangle_count(); ++t)
      cell += ref.tri_area(t) * d.relabeled_dx[n][t] * d.relabeled_dx[n][t];
    s += measure * cell;
  }
  return s;
}

// Maximum discrepancy between the tooth-side and base-side values at the
// glued base nodes. Zero whenever the mesh shares those nodes.
inline double trace_compat(const BrushMesh& bm, const DiscreteField& u) {
  if (u.mesh != &bm.mesh)
    throw StructureError("field does not live on this brush mesh");
  double worst = 0.0;
  for (int n = 0; n < bm.tooth_count(); ++n)
    for (int r : bm.ref.base_nodes) {
      double tooth_side = u.values[bm.tooth_nodes[n][r]];
      double base_side = u.values[bm.tooth_base_nodes[n][r]];
      worst = std::max(worst, std::abs(tooth_side - base_side));
    }
  return worst;
}

// Quadrature of int over W of |unfolded(f) - f(x,y) chi(x)|^2: per tooth an
// x-Gauss rule on the scaled base interval against an order-4 cell rule.
inline double f_unfold_gap(const BrushMesh& bm, const Expr& f) {
  const TriMesh& ref = bm.ref.mesh;
  double total = 0.0;
  for (int n = 0; n < bm.tooth_count(); ++n) {
    const Placement& pl = bm.spec.placements[n];
    double lo = bm.spec.tooth_base_lo(n);
    double hi = bm.spec.tooth_base_hi(n);
    for (const GaussPoint& gp : gauss01(3)) {
      double x = lo + gp.t * (hi - lo);
      double contrib = integrate_order4(ref, [&](double xi, double y) {
        double dv = f(pl.center + pl.length * xi, y) - f(x, y);
        return dv * dv;
      });
      total += (hi - lo) * gp.w * contrib;
    }
  }
  return total;
}

}  // namespace brush
