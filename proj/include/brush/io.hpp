// Line-oriented text exports with stable ordering; formats are documented in
// docs/file_formats.md.
#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "brush/density.hpp"
#include "brush/graph.hpp"
#include "brush/limit.hpp"
#include "brush/mesh.hpp"
#include "brush/unfold.hpp"

namespace brush {

namespace iodetail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace iodetail

inline void write_mesh(std::ostream& out, const TriMesh& mesh) {
  using iodetail::num;
  out << "# brushhom mesh v1\n";
  out << "vertices " << mesh.vertex_count() << "\n";
  for (const Point& p : mesh.vertices)
    out << num(p.x) << " " << num(p.y) << "\n";
  out << "triangles " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const TriTag& tag = mesh.tags[t];
    out << tr[0] << " " << tr[1] << " " << tr[2] << " " << tag.tooth << " "
        << tag.slab << " " << tag.comp << "\n";
  }
  out << "tagged_edges " << mesh.tagged_edges.size() << "\n";
  for (const TaggedEdge& e : mesh.tagged_edges) {
    const char* kind = e.tag == EdgeTag::Outer ? "outer"
                       : e.tag == EdgeTag::ToothBase ? "tooth-base"
                                                     : "slab-interface";
    out << e.v0 << " " << e.v1 << " " << kind << " " << e.index << "\n";
  }
}

inline void write_solution(std::ostream& out, const TriMesh& mesh,
                           const std::vector<double>& values) {
  write_mesh(out, mesh);
  out << "values " << values.size() << "\n";
  for (double v : values) out << iodetail::num(v) << "\n";
}

inline void write_unfolded(std::ostream& out, const UnfoldedField& uf) {
  using iodetail::num;
  out << "# brushhom unfolded v1\n";
  out << "blocks " << uf.blocks.size() << "\n";
  for (size_t n = 0; n < uf.blocks.size(); ++n) {
    const Placement& p = uf.bm->spec.placements[n];
    out << "block " << n + 1 << " " << num(p.center) << " " << num(p.length)
        << " " << uf.blocks[n].size() << "\n";
    for (double v : uf.blocks[n]) out << num(v) << "\n";
  }
}

inline void write_theta_csv(std::ostream& out, const DensityField& d) {
  out << "x,theta\n";
  for (size_t k = 0; k < d.xs.size(); ++k)
    out << iodetail::num(d.xs[k]) << "," << iodetail::num(d.samples[k])
        << "\n";
}

inline void write_graph(std::ostream& out, const GraphDecomposition& d) {
  using iodetail::num;
  out << "# brushhom graph v1\n";
  out << "levels";
  for (double a : d.levels) out << " " << num(a);
  out << "\n";
  out << "edges " << d.edges.size() << "\n";
  for (const GraphEdge& e : d.edges) {
    out << "edge " << e.slab << " " << e.comp;
    for (size_t k = 0; k < e.width.ys.size(); ++k)
      out << " " << num(e.width.ys[k]) << " " << num(e.width.vals[k]);
    out << "\n";
  }
  out << "joints " << d.joints.size() << "\n";
  for (const Joint& j : d.joints) {
    out << "joint " << j.stage << " " << j.k << " below";
    for (int e : j.below)
      out << " (" << d.edges[e].slab << "," << d.edges[e].comp << ")";
    out << " above";
    for (int e : j.above)
      out << " (" << d.edges[e].slab << "," << d.edges[e].comp << ")";
    out << "\n";
  }
}

// Edge-weight table: one row per edge with the endpoint weights.
inline void write_weight_table(std::ostream& out,
                               const GraphDecomposition& d) {
  using iodetail::num;
  out << "slab,comp,y_lo,w_lo,y_hi,w_hi\n";
  for (const GraphEdge& e : d.edges)
    out << e.slab << "," << e.comp << "," << num(e.y_lo) << ","
        << num(e.width.vals.front()) << "," << num(e.y_hi) << ","
        << num(e.width.vals.back()) << "\n";
}

inline void write_limit(std::ostream& out, const LimitSolution& sol) {
  using iodetail::num;
  out << "# brushhom limit v1\n";
  write_graph(out, *sol.decomp);
  out << "base_values " << sol.base_values.size() << "\n";
  for (double v : sol.base_values) out << num(v) << "\n";
  out << "trace_nodes " << sol.trace_xs.size() << "\n";
  for (size_t k = 0; k < sol.trace_xs.size(); ++k) {
    out << "node " << k << " " << num(sol.trace_xs[k]) << " "
        << (sol.active[k] ? "active" : "dropped") << "\n";
    if (!sol.active[k]) continue;
    for (size_t e = 0; e < sol.values[k].size(); ++e) {
      out << "  edge " << sol.decomp->edges[e].slab << " "
          << sol.decomp->edges[e].comp;
      for (double v : sol.values[k][e]) out << " " << num(v);
      out << "\n";
    }
  }
}

}  // namespace brush
